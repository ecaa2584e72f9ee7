import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.optics.beams import BeamSuperposition, TransverseGrid
from src.optics.scheme import SchemeConfig, coefficients
from src.utils.io import (
    beams_from_list,
    beams_to_list,
    complex_from_json,
    complex_to_json,
    grid_from_dict,
    grid_to_dict,
    scheme_from_dict,
    scheme_to_dict,
)
from src.utils.settings import load_settings

logger = logging.getLogger(__name__)

KINDS = ("lambda-transfer", "tripod-transfer", "multilevel-transfer", "composite", "zscan", "convergence")
GRID_KINDS = ("lambda-transfer", "tripod-transfer", "multilevel-transfer", "composite")
REQUIRED_N = {"lambda-transfer": 2, "tripod-transfer": 3}
DEFAULT_ENTRANCE = 0.01


@dataclass(frozen=True)
class DiffractionSetup:
    L: float
    wavelength: float
    w: float


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    A fully resolved run description.

    Attributes:
        kind: One of KINDS
        config: Medium parameters
        beams: Per-field transverse input (None = not incident); empty for point kinds
        grid: Sampling grid
        z_samples: Absolute propagation distances, ascending
        entrance: Single-point field vector for the z-scan and convergence table
        zscan_z_max_over_labs: Extent of the z-scan in absorption lengths
        zscan_points: Number of z-scan samples
        threshold: First-order guard threshold
        diffraction: Physical lengths for the diffraction criterion, if given
        convergence_z: Distance of the convergence study
        convergence_step_counts: RK4 step ladder
        name: Label used in logs
    """
    kind: str
    config: SchemeConfig
    beams: Tuple[Optional[BeamSuperposition], ...]
    grid: TransverseGrid
    z_samples: Tuple[float, ...]
    entrance: np.ndarray
    zscan_z_max_over_labs: float
    zscan_points: int
    threshold: float
    diffraction: Optional[DiffractionSetup] = None
    convergence_z: float = 0.5
    convergence_step_counts: Tuple[int, ...] = field(default_factory=tuple)
    name: str = "scenario"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        n = self.config.n
        required = REQUIRED_N.get(self.kind)
        if required is not None and n != required:
            raise ValueError(f"a {self.kind} scenario needs n={required} fields, got n={n}")
        if self.kind in GRID_KINDS:
            if len(self.beams) != n:
                raise ValueError(f"beams has {len(self.beams)} entries, expected n={n}")
            if all(b is None for b in self.beams):
                raise ValueError("no incident beam in a transfer scenario")
        z = np.asarray(self.z_samples, dtype=float)
        if z.size == 0 or np.any(z < 0) or np.any(np.diff(z) < 0):
            raise ValueError("z_samples must be a non-empty, non-negative ascending list")
        entrance = np.array(self.entrance, dtype=complex).reshape(-1)
        if entrance.size != n:
            raise ValueError(f"entrance has {entrance.size} components, expected n={n}")
        object.__setattr__(self, "entrance", entrance)
        if self.zscan_points < 2 or not self.zscan_z_max_over_labs > 0:
            raise ValueError("zscan needs at least 2 points and a positive extent")
        if self.convergence_z < 0:
            raise ValueError(f"convergence.z must be non-negative, got {self.convergence_z}")

    @property
    def uses_grid(self) -> bool:
        return self.kind in GRID_KINDS


def _z_samples(data: Dict[str, Any], config: SchemeConfig) -> List[float]:
    if "z_samples" in data and "z_samples_over_labs" in data:
        raise ValueError("give either z_samples or z_samples_over_labs, not both")
    if "z_samples_over_labs" in data:
        unit = coefficients(config).length_unit
        return [float(z) * unit for z in data["z_samples_over_labs"]]
    return [float(z) for z in data.get("z_samples", [config.L])]


def scenario_from_dict(data: Dict[str, Any], name: str = "scenario") -> Scenario:
    """
    Resolve a parsed scenario mapping, filling every default.

    Raises:
        KeyError: if 'kind' or 'config' is missing
        ValueError: for invalid values
    """
    settings = load_settings()
    config = scheme_from_dict(data["config"])
    n = config.n

    beams = tuple(beams_from_list(data.get("beams", [])))
    if "entrance" in data:
        entrance = np.array([complex_from_json(v) for v in data["entrance"]])
    else:
        entrance = np.zeros(n, dtype=complex)
        entrance[0] = DEFAULT_ENTRANCE

    zscan = data.get("zscan") or {}
    convergence = data.get("convergence") or {}
    diffraction = data.get("diffraction")
    if diffraction is not None:
        diffraction = DiffractionSetup(
            L=float(diffraction["L"]), wavelength=float(diffraction["wavelength"]), w=float(diffraction["w"])
        )

    return Scenario(
        kind=data["kind"],
        config=config,
        beams=beams,
        grid=grid_from_dict(data.get("grid")),
        z_samples=tuple(_z_samples(data, config)),
        entrance=entrance,
        zscan_z_max_over_labs=float(zscan.get("z_max_over_labs", settings.zscan_z_max_over_labs)),
        zscan_points=int(zscan.get("points", settings.zscan_points)),
        threshold=float(data.get("threshold", settings.first_order_threshold)),
        diffraction=diffraction,
        convergence_z=float(convergence.get("z", 0.5 * config.L)),
        convergence_step_counts=tuple(int(s) for s in convergence.get("step_counts", settings.convergence_step_counts)),
        name=str(data.get("name", name)),
    )


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """The resolved scenario with all defaults written out."""
    data = {
        "name": scenario.name,
        "kind": scenario.kind,
        "config": scheme_to_dict(scenario.config),
        "beams": beams_to_list(scenario.beams),
        "grid": grid_to_dict(scenario.grid),
        "z_samples": list(scenario.z_samples),
        "entrance": [complex_to_json(v) for v in scenario.entrance],
        "zscan": {"z_max_over_labs": scenario.zscan_z_max_over_labs, "points": scenario.zscan_points},
        "threshold": scenario.threshold,
        "convergence": {"z": scenario.convergence_z, "step_counts": list(scenario.convergence_step_counts)},
    }
    if scenario.diffraction is not None:
        d = scenario.diffraction
        data["diffraction"] = {"L": d.L, "wavelength": d.wavelength, "w": d.w}
    return data


def load_scenario(file_path: Union[str, Path]) -> Scenario:
    path = Path(file_path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path} does not hold a JSON object")
    scenario = scenario_from_dict(data, name=path.stem)
    logger.info("loaded %s scenario '%s' with n=%d", scenario.kind, scenario.name, scenario.config.n)
    return scenario

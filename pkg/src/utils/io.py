import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.optics.beams import BeamSuperposition, FieldGrid, LGBeam, TransverseGrid
from src.optics.scheme import SchemeConfig

PathLike = Union[str, Path]


def complex_to_json(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def complex_from_json(value) -> complex:
    """[re, im] pair, or a plain real number."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex numbers are encoded as [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def _per_field(raw, n: int, name: str, default: float) -> np.ndarray:
    if raw is None:
        return np.full(n, default)
    if np.isscalar(raw):
        return np.full(n, float(raw))
    values = np.asarray(raw, dtype=float)
    if values.shape != (n,):
        raise ValueError(f"config.{name} needs {n} entries, got {len(raw)}")
    return values


def scheme_from_dict(data: Dict[str, Any]) -> SchemeConfig:
    """
    Decode a scheme. c is a list of [re, im] pairs; alpha may be a scalar;
    gamma defaults to 1, delta to 0 and L to 1.
    """
    if not isinstance(data, dict):
        raise ValueError(f"config must be an object, got {data!r}")
    if "c" not in data or "alpha" not in data:
        raise KeyError("config needs at least 'c' and 'alpha'")
    if not isinstance(data["c"], (list, tuple)):
        raise ValueError(f"config.c must be a list of [re, im] pairs, got {data['c']!r}")
    c = np.array([complex_from_json(v) for v in data["c"]])
    n = c.size
    if data.get("n", n) != n:
        raise ValueError(f"config.n = {data['n']!r} but config.c has {n} amplitudes")
    return SchemeConfig(
        c=c,
        alpha=_per_field(data["alpha"], n, "alpha", 0.0),
        gamma=_per_field(data.get("gamma"), n, "gamma", 1.0),
        delta=_per_field(data.get("delta"), n, "delta", 0.0),
        L=float(data.get("L", 1.0)),
    )


def scheme_to_dict(config: SchemeConfig) -> Dict[str, Any]:
    return {
        "n": config.n,
        "c": [complex_to_json(v) for v in config.c],
        "alpha": config.alpha.tolist(),
        "gamma": config.gamma.tolist(),
        "delta": config.delta.tolist(),
        "L": config.L,
    }


def grid_from_dict(data: Optional[Dict[str, Any]]) -> TransverseGrid:
    default = TransverseGrid.default()
    data = data or {}
    return TransverseGrid(
        extent=data.get("extent", default.extent),
        resolution=data.get("resolution", default.resolution),
        w=data.get("w", default.w),
    )


def grid_to_dict(grid: TransverseGrid) -> Dict[str, Any]:
    return {"extent": grid.extent, "resolution": grid.resolution, "w": grid.w}


def beams_from_list(data: Sequence[Sequence[Dict[str, Any]]]) -> List[Optional[BeamSuperposition]]:
    """One list of terms per field; an empty list means the field is not incident."""
    if not isinstance(data, (list, tuple)):
        raise ValueError(f"beams must be a list with one list of terms per field, got {data!r}")
    inputs = []
    for m, terms in enumerate(data):
        if not isinstance(terms, (list, tuple)) or not all(isinstance(term, dict) for term in terms):
            raise ValueError(f"beams[{m}] must be a list of beam objects, got {terms!r}")
        if not terms:
            inputs.append(None)
            continue
        inputs.append(BeamSuperposition(tuple(
            (
                complex_from_json(term.get("weight", 1.0)),
                LGBeam(epsilon=term["epsilon"], w=term.get("w", 1.0), l=term.get("l", 0)),
            )
            for term in terms
        )))
    return inputs


def beams_to_list(inputs: Sequence[Optional[BeamSuperposition]]) -> List[List[Dict[str, Any]]]:
    data = []
    for superposition in inputs:
        if superposition is None:
            data.append([])
            continue
        data.append([
            {"weight": complex_to_json(weight), "epsilon": beam.epsilon, "w": beam.w, "l": beam.l}
            for weight, beam in superposition.terms
        ])
    return data


def fields_table(field_grid: FieldGrid) -> pd.DataFrame:
    """Long table x, y, field_index, re, im; coordinates in units of w, field_index 1-based."""
    grid = field_grid.grid
    X, Y = grid.mesh()
    n = field_grid.n
    values = field_grid.values.reshape(-1, n)
    return pd.DataFrame({
        "x": np.repeat(X.reshape(-1) / grid.w, n),
        "y": np.repeat(Y.reshape(-1) / grid.w, n),
        "field_index": np.tile(np.arange(1, n + 1), X.size),
        "re": values.real.reshape(-1),
        "im": values.imag.reshape(-1),
    })


def maps_table(field_grid: FieldGrid, index: int) -> pd.DataFrame:
    """Intensity and phase panels of one field (0-based index)."""
    grid = field_grid.grid
    X, Y = grid.mesh()
    field = field_grid.field(index)
    return pd.DataFrame({
        "x": X.reshape(-1) / grid.w,
        "y": Y.reshape(-1) / grid.w,
        "intensity": (np.abs(field) ** 2).reshape(-1),
        "phase": np.angle(field).reshape(-1),
    })


def field_grid_from_table(table: pd.DataFrame, grid: TransverseGrid) -> FieldGrid:
    n = int(table["field_index"].max())
    res = grid.resolution
    if len(table) != res * res * n:
        raise ValueError(f"table has {len(table)} rows, expected {res * res * n}")
    values = (table["re"].to_numpy() + 1j * table["im"].to_numpy()).reshape(res, res, n)
    return FieldGrid(grid=grid, values=values)


def save_table(table: pd.DataFrame, file_path: PathLike) -> None:
    # shortest round-trip repr keeps every float exact
    table.to_csv(file_path, index=False)


def write_json(data: Dict[str, Any], file_path: PathLike) -> None:
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")


def read_json(file_path: PathLike) -> Dict[str, Any]:
    with open(file_path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_field_grid(field_grid: FieldGrid, file_path: PathLike, metadata: Optional[Dict[str, Any]] = None,
                    format: str = "csv") -> None:
    """
    Write a sampled field. 'csv' writes the long table next to a JSON sidecar
    with the grid and metadata; 'npz' keeps the raw complex array.
    """
    file_path = Path(file_path)
    sidecar = {"grid": grid_to_dict(field_grid.grid), "n": field_grid.n, **(metadata or {})}
    if format == "csv":
        save_table(fields_table(field_grid), file_path.with_suffix(".csv"))
        write_json(sidecar, file_path.with_suffix(".json"))
    elif format == "npz":
        np.savez(file_path.with_suffix(".npz"), values=field_grid.values, **grid_to_dict(field_grid.grid))
    else:
        raise ValueError("Unsupported format.")


def load_field_grid(file_path: PathLike, format: str = "csv") -> FieldGrid:
    file_path = Path(file_path)
    if format == "csv":
        sidecar = read_json(file_path.with_suffix(".json"))
        grid = grid_from_dict(sidecar["grid"])
        return field_grid_from_table(pd.read_csv(file_path.with_suffix(".csv"), float_precision="round_trip"), grid)
    elif format == "npz":
        with np.load(file_path.with_suffix(".npz")) as data:
            grid = TransverseGrid(extent=float(data["extent"]), resolution=int(data["resolution"]),
                                  w=float(data["w"]))
            return FieldGrid(grid=grid, values=data["values"])
    else:
        raise ValueError("Unsupported format.")

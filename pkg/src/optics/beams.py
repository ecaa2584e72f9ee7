"""
Transverse profiles of the incident beams: doughnut Laguerre-Gaussian
vortices eps (r/w)^|l| exp(-r^2/w^2) exp(i l phi) and weighted sums of them,
sampled on square Cartesian grids centred on the beam axis.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.optics.scheme import SchemeConfig
from src.utils.parallel import map_row_chunks
from src.utils.settings import load_settings

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 16


@dataclass(frozen=True)
class LGBeam:
    epsilon: float
    w: float = 1.0
    l: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "w", float(self.w))
        if int(self.l) != self.l:
            raise ValueError(f"winding number must be an integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))
        if not self.w > 0:
            raise ValueError(f"beam waist must be positive, got {self.w}")
        if self.epsilon < 0:
            raise ValueError(f"beam strength must be non-negative, got {self.epsilon}")


@dataclass(frozen=True)
class BeamSuperposition:
    terms: Tuple[Tuple[complex, LGBeam], ...]

    def __post_init__(self):
        terms = tuple((complex(weight), beam) for weight, beam in self.terms)
        if not terms:
            raise ValueError("a beam superposition needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, beam: LGBeam, weight: complex = 1.0) -> "BeamSuperposition":
        return cls(((weight, beam),))

    def scaled(self, factor: complex) -> "BeamSuperposition":
        return BeamSuperposition(tuple((factor * weight, beam) for weight, beam in self.terms))

    def __add__(self, other: "BeamSuperposition") -> "BeamSuperposition":
        return BeamSuperposition(self.terms + other.terms)


@dataclass(frozen=True)
class TransverseGrid:
    """
    Square grid of resolution x resolution points spanning [-extent, extent]
    (in units of the reference waist w) on both axes.
    """
    extent: float = 3.0
    resolution: int = 256
    w: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "extent", float(self.extent))
        object.__setattr__(self, "w", float(self.w))
        if int(self.resolution) != self.resolution:
            raise ValueError(f"grid resolution must be an integer, got {self.resolution}")
        object.__setattr__(self, "resolution", int(self.resolution))
        if self.resolution < MIN_RESOLUTION:
            raise ValueError(f"grid resolution must be at least {MIN_RESOLUTION}, got {self.resolution}")
        if not self.extent > 0:
            raise ValueError(f"grid extent must be positive, got {self.extent}")
        if not self.w > 0:
            raise ValueError(f"reference waist must be positive, got {self.w}")

    @classmethod
    def default(cls, w: float = 1.0) -> "TransverseGrid":
        settings = load_settings()
        return cls(extent=settings.grid_extent, resolution=settings.grid_resolution, w=w)

    @property
    def axis(self) -> np.ndarray:
        """Sample positions along x (and y) in length units."""
        return np.linspace(-self.extent, self.extent, self.resolution) * self.w

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent * self.w / (self.resolution - 1)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """X, Y arrays indexed [iy, ix]."""
        return np.meshgrid(self.axis, self.axis, indexing="xy")

    def polar(self) -> Tuple[np.ndarray, np.ndarray]:
        X, Y = self.mesh()
        return np.hypot(X, Y), np.arctan2(Y, X)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """n complex Rabi frequencies at every grid point, values indexed [iy, ix, m]."""
    grid: TransverseGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        res = self.grid.resolution
        if values.ndim != 3 or values.shape[:2] != (res, res):
            raise ValueError(f"field values have shape {values.shape}, expected ({res}, {res}, n)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[2]

    def field(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n:
            raise ValueError(f"field index {index} out of range for n={self.n}")
        return self.values[:, :, index]

    def intensity(self, index: int) -> np.ndarray:
        return np.abs(self.field(index)) ** 2


def lg_amplitude(beam, r, phi):
    """
    eps (r/w)^|l| exp(-r^2/w^2) exp(i l phi), vectorized over r and phi.

    The radial power is evaluated as exp(|l| ln(r/w)); on the axis the value is
    eps for l = 0 and exactly 0 otherwise.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")

    order = abs(beam.l)
    rho = r / beam.w
    on_axis = rho == 0
    safe_rho = np.where(on_axis, 1.0, rho)
    radial = np.exp(order * np.log(safe_rho) - rho ** 2)
    radial = np.where(on_axis, 1.0 if order == 0 else 0.0, radial)
    phase = np.exp(1j * beam.l * phi) if beam.l else np.ones_like(phi, dtype=complex)
    value = beam.epsilon * radial * phase
    value = np.where(radial == 0, 0.0 + 0.0j, value)
    return complex(value) if value.ndim == 0 else value


def lg_peak(l):
    """Largest value of (r/w)^|l| exp(-r^2/w^2), reached at r = w sqrt(|l|/2)."""
    half = abs(int(l)) / 2.0
    return float(half ** half * np.exp(-half))


def superpose(superposition, r, phi):
    total = 0.0 + 0.0j
    for weight, beam in superposition.terms:
        total = total + weight * lg_amplitude(beam, r, phi)
    return total


def sample_grid(
    config: SchemeConfig,
    inputs: Sequence[Optional[BeamSuperposition]],
    grid: TransverseGrid,
    threads: Optional[int] = None,
) -> FieldGrid:
    """
    Entrance amplitudes Omega_m(0) of every field at every grid point.

    Args:
        config: Scheme providing n
        inputs: One superposition per field; None means no incident field
        grid: Sampling grid
        threads: Worker threads; VORTEX_THREADS when None

    Returns:
        FieldGrid of the entrance fields
    """
    if len(inputs) != config.n:
        raise ValueError(f"got {len(inputs)} beam inputs for a scheme with n={config.n}")
    r, phi = grid.polar()

    def sample_rows(rows: slice) -> np.ndarray:
        block = np.zeros(r[rows].shape + (config.n,), dtype=complex)
        for m, superposition in enumerate(inputs):
            if superposition is not None:
                block[:, :, m] = superpose(superposition, r[rows], phi[rows])
        return block

    values = np.concatenate(map_row_chunks(sample_rows, grid.resolution, threads), axis=0)
    return FieldGrid(grid=grid, values=values)


def grid_power(field_grid, index):
    """Riemann-sum estimate of the transverse power integral of |Omega_m|^2."""
    return float(np.sum(field_grid.intensity(index)) * field_grid.grid.spacing ** 2)


DiffractionCheck = namedtuple("DiffractionCheck", ["value", "negligible"])


def diffraction_criterion(L, wavelength, w):
    """
    L lambda / w^2, the phase picked up from transverse diffraction over the
    medium (up to a factor 1/4 pi); negligible iff strictly below pi.
    """
    for name, value in (("L", L), ("wavelength", wavelength), ("w", w)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    value = L * wavelength / w ** 2
    negligible = value < np.pi
    if not negligible:
        logger.warning("diffraction is not negligible: L*lambda/w^2 = %.4g >= pi", value)
    return DiffractionCheck(value=float(value), negligible=bool(negligible))

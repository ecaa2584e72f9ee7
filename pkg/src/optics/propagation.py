"""
Closed-form propagation of the n-component field through the phaseonium.

Inserting the first-order coherences into the Maxwell equations gives the
linear system

    dOmega_m/dz = -i beta_m c_m S,    S = sum_j c_j^* Omega_j,

whose solution is a rank-one update of the entrance vector:

    Omega_m(z) = Omega_m(0) + beta_m c_m S(0) (exp(-iXz) - 1) / X.

The bright component S decays as exp(-iXz); everything orthogonal to it
(in the c-weighted sense) is carried through unchanged.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import pandas as pd
from scipy.linalg import null_space

from src.optics.beams import FieldGrid
from src.optics.scheme import NORMALIZATION_TOL, SchemeConfig, coefficients
from src.utils.parallel import map_row_chunks

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-5
DARK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FieldVector:
    """Rabi frequencies Omega_1..Omega_n at one transverse point."""
    omega: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=complex).reshape(-1)
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.omega.size

    def __getitem__(self, index: int) -> complex:
        return complex(self.omega[index])


@dataclass(frozen=True, eq=False)
class CoherenceVector:
    """Optical coherences rho_{g_m e}."""
    rho: np.ndarray


@dataclass(frozen=True, eq=False)
class DarkStateBasis:
    """Rows are ground-state amplitude vectors d with sum_m Omega_m^* d_m = 0."""
    vectors: np.ndarray

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


# d_omega2_d_abs_c1 is None when |c1| is 0 or 1, where it is singular.
Sensitivity = namedtuple(
    "Sensitivity", ["d_omega1_d_abs_c1", "d_omega2_d_abs_c1", "d_omega2_d_phase", "singular"]
)


FieldsLike = Union[FieldVector, Sequence[complex], np.ndarray]


def _field_array(config: SchemeConfig, fields: FieldsLike) -> np.ndarray:
    values = fields.omega if isinstance(fields, FieldVector) else np.asarray(fields, dtype=complex)
    if values.shape[-1:] != (config.n,):
        raise ValueError(f"field vector has shape {values.shape}, expected last axis n={config.n}")
    return values


def transfer_factor(X, z):
    """
    (exp(-iXz) - 1) / X, vectorized over z.

    Written as -iz (e^u - 1)/u with u = -iXz and a Taylor series for
    |u| < SERIES_THRESHOLD, so X -> 0 is continuous (limit -iz).
    """
    z = np.asarray(z, dtype=float)
    u = -1j * X * z
    small = np.abs(u) < SERIES_THRESHOLD
    safe_u = np.where(small, 1.0, u)
    phi1 = np.where(small, 1.0 + u / 2.0 + u ** 2 / 6.0, np.expm1(safe_u) / safe_u)
    return -1j * z * phi1


def bright_component(config, fields):
    """S = sum_j c_j^* Omega_j (array over any leading axes)."""
    S = _field_array(config, fields) @ config.c.conj()
    return complex(S) if np.ndim(S) == 0 else S


def coherence_array(config, values):
    S = _field_array(config, values) @ config.c.conj()
    return -np.multiply.outer(S, config.c) / (config.delta + 1j * config.gamma)


def steady_coherences(config, fields):
    """rho_m = -c_m S / (delta_m + i gamma_m), the weak-field steady state."""
    return CoherenceVector(rho=coherence_array(config, _field_array(config, fields)))


def propagate_array(config, values, z, coeffs=None):
    """Closed-form solution applied along the last axis of values."""
    if z < 0:
        raise ValueError(f"propagation distance must be non-negative, got {z}")
    values = _field_array(config, values)
    coeffs = coefficients(config) if coeffs is None else coeffs
    S0 = values @ config.c.conj()
    K = complex(transfer_factor(coeffs.X, z))
    return values + np.multiply.outer(S0 * K, coeffs.beta * config.c)


def propagate(config, entrance, z):
    """Field vector after a distance z of medium."""
    values = _field_array(config, entrance)
    if values.ndim != 1:
        raise ValueError("propagate takes a single field vector; use propagate_grid for grids")
    return FieldVector(propagate_array(config, values, z))


def propagate_grid(config, entrance, z, threads=None):
    """
    Pointwise propagation of a sampled entrance field.

    Transverse diffraction is neglected, so every grid point evolves on its own.
    """
    if entrance.n != config.n:
        raise ValueError(f"grid carries {entrance.n} fields, scheme has n={config.n}")
    coeffs = coefficients(config)

    def rows(chunk: slice) -> np.ndarray:
        return propagate_array(config, entrance.values[chunk], z, coeffs)

    values = np.concatenate(map_row_chunks(rows, entrance.grid.resolution, threads), axis=0)
    return FieldGrid(grid=entrance.grid, values=values)


def asymptotic_array(config, values):
    coeffs = coefficients(config)
    if not coeffs.X.imag < 0:
        raise ValueError(f"collective eigenvalue X={coeffs.X} does not decay; no asymptotic field")
    values = _field_array(config, values)
    S0 = values @ config.c.conj()
    return values - np.multiply.outer(S0, coeffs.beta * config.c / coeffs.X)


def asymptotic_fields(config, entrance):
    """
    Lossless output once the bright component has been absorbed:
    Omega_m(inf) = Omega_m(0) - beta_m c_m S(0) / X.
    """
    return FieldVector(asymptotic_array(config, _field_array(config, entrance)))


def is_transparent(config, entrance, rtol=DARK_TOL):
    """True when the entrance couples only to dark states (S(0) ~ 0)."""
    values = _field_array(config, entrance)
    scale = float(np.linalg.norm(values))
    if scale == 0:
        return True
    return abs(bright_component(config, values)) <= rtol * scale


def dark_basis(fields):
    """
    Orthonormal ground-state superpositions that do not couple to |e>.

    Darkness means sum_m Omega_m^* d_m = 0, i.e. d is orthogonal to Omega in
    the Hermitian inner product. For n = 2 the single state is
    (Omega_2^*, -Omega_1^*)/|Omega|.
    """
    omega = np.asarray(fields.omega if isinstance(fields, FieldVector) else fields, dtype=complex)
    omega = omega.reshape(-1)
    norm = np.linalg.norm(omega)
    if norm == 0:
        raise ValueError("dark states are undefined for a zero field vector")
    if omega.size == 2:
        vectors = np.array([[omega[1].conjugate(), -omega[0].conjugate()]]) / norm
    else:
        vectors = null_space(omega.conj()[np.newaxis, :]).T
    return DarkStateBasis(vectors=vectors)


def closed_form_dark_states(fields):
    """
    Explicit dark states for n = 2 and n = 3 built from products of the Rabi
    frequencies (no conjugates). They are dark and normalized when all fields
    share a common phase; dark_basis is the general construction.
    """
    omega = np.asarray(fields.omega if isinstance(fields, FieldVector) else fields, dtype=complex)
    omega = omega.reshape(-1)
    if omega.size == 2:
        o1, o2 = omega
        total = abs(o1) ** 2 + abs(o2) ** 2
        if total == 0:
            raise ValueError("dark states are undefined for a zero field vector")
        vectors = [np.array([o2, -o1]) / np.sqrt(total)]
    elif omega.size == 3:
        o1, o2, o3 = omega
        outer = abs(o1) ** 2 + abs(o3) ** 2
        if outer == 0:
            raise ValueError("closed-form tripod dark states need Omega_1 or Omega_3 nonzero")
        total = outer + abs(o2) ** 2
        vectors = [
            np.array([o3, 0.0, -o1]) / np.sqrt(outer),
            np.array([o1 * o2, -(o1 ** 2 + o3 ** 2), o2 * o3]) / np.sqrt(outer * total),
        ]
    else:
        raise ValueError(f"closed-form dark states exist for n = 2 or 3, got n={omega.size}")
    return DarkStateBasis(vectors=np.array(vectors, dtype=complex))


def sensitivity(config, entrance, z):
    """
    Derivatives of the Lambda-scheme outputs with respect to |c1| and the
    relative phase phi_c = arg c2 - arg c1, for a single incident field on a
    symmetric resonant medium:

        dOmega1/d|c1|  = 2 Omega |c1| (E - 1)
        dOmega2/d|c1|  = Omega e^{i phi_c} (E - 1) (1 - 2|c1|^2) / sqrt(1 - |c1|^2)
        dOmega2/dphi_c = i Omega2(z)

    with E = exp(-z / 2L_abs).
    """
    if config.n != 2:
        raise ValueError(f"sensitivity is defined for the Lambda scheme (n=2), got n={config.n}")
    if not config.is_symmetric_resonant:
        raise ValueError("sensitivity needs equal optical depths and decay rates on resonance")
    values = _field_array(config, entrance)
    if values[1] != 0:
        raise ValueError("sensitivity assumes no incident second field (Omega_2(0) = 0)")

    coeffs = coefficients(config)
    omega = values[0]
    E_minus_1 = complex(np.expm1(-1j * coeffs.X * z))
    a = abs(config.c[0])
    phase = np.exp(1j * (np.angle(config.c[1]) - np.angle(config.c[0])))
    omega2 = propagate(config, values, z)[1]

    singular = bool(a ** 2 <= NORMALIZATION_TOL or a ** 2 >= 1.0 - NORMALIZATION_TOL)
    d2 = None
    if singular:
        logger.warning("dOmega2/d|c1| is singular at |c1| = %g", a)
    else:
        d2 = complex(omega * phase * E_minus_1 * (1.0 - 2.0 * a ** 2) / np.sqrt(1.0 - a ** 2))
    return Sensitivity(
        d_omega1_d_abs_c1=complex(2.0 * omega * a * E_minus_1),
        d_omega2_d_abs_c1=d2,
        d_omega2_d_phase=complex(1j * omega2),
        singular=singular,
    )


def zscan(config, entrance, z_over_labs):
    """
    Normalized intensities |Omega_m(z)|^2 / |Omega_1(0)|^2 along the medium.

    Distances are given in units of the absorption length (or of the bright
    intensity e-folding length when L_abs is undefined). Field indices in the
    table are 1-based.
    """
    values = _field_array(config, entrance)
    coeffs = coefficients(config)
    z_units = np.asarray(z_over_labs, dtype=float)
    if np.any(z_units < 0) or np.any(np.diff(z_units) < 0):
        raise ValueError("z-scan positions must be non-negative and ascending")

    reference = abs(values[0]) ** 2
    if reference == 0:
        reference = float(np.sum(np.abs(values) ** 2))
        logger.warning("Omega_1(0) = 0; normalizing the z-scan to the total entrance intensity")
    if reference == 0:
        raise ValueError("cannot normalize a z-scan of a zero entrance field")

    K = transfer_factor(coeffs.X, z_units * coeffs.length_unit)
    S0 = complex(values @ config.c.conj())
    fields = values[np.newaxis, :] + np.multiply.outer(S0 * K, coeffs.beta * config.c)
    intensity = np.abs(fields) ** 2 / reference

    return pd.DataFrame({
        "z_over_Labs": np.repeat(z_units, config.n),
        "field_index": np.tile(np.arange(1, config.n + 1), z_units.size),
        "intensity_normalized": intensity.reshape(-1),
    })

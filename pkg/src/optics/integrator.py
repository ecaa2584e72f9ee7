"""
Brute-force reference solution of the propagation equations.

Integrates dOmega_m/dz = -i beta_m c_m sum_j c_j^* Omega_j with classical
fixed-step fourth-order Runge-Kutta. It shares nothing with the closed form
except the coefficients, so agreement between the two certifies both.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.optics.propagation import FieldVector, FieldsLike, _field_array, propagate_array
from src.optics.scheme import SchemeConfig, compute_beta
from src.utils.settings import load_settings

logger = logging.getLogger(__name__)

MIN_STEPS = 100


@dataclass(frozen=True)
class IntegratorSettings:
    step_count: int = 10_000
    method: str = "rk4"

    def __post_init__(self):
        if int(self.step_count) != self.step_count or self.step_count < MIN_STEPS:
            raise ValueError(f"step_count must be an integer >= {MIN_STEPS}, got {self.step_count}")
        object.__setattr__(self, "step_count", int(self.step_count))
        if self.method != "rk4":
            raise ValueError(f"only fixed-step 'rk4' integration is available, got {self.method!r}")

    @classmethod
    def default(cls) -> "IntegratorSettings":
        return cls(step_count=load_settings().step_count)


def generator_matrix(config: SchemeConfig) -> np.ndarray:
    """M with dOmega/dz = M Omega, i.e. M = -i diag(beta c) c^H."""
    return -1j * np.outer(compute_beta(config) * config.c, config.c.conj())


def integrate_array(
    config: SchemeConfig,
    values: np.ndarray,
    z: float,
    settings: Optional[IntegratorSettings] = None,
) -> np.ndarray:
    """RK4 integration along the last axis of values (any leading shape)."""
    if z < 0:
        raise ValueError(f"propagation distance must be non-negative, got {z}")
    settings = IntegratorSettings.default() if settings is None else settings
    y = np.array(_field_array(config, values), dtype=complex)
    if z == 0:
        return y

    MT = generator_matrix(config).T
    h = z / settings.step_count
    for step in range(settings.step_count):
        k1 = y @ MT
        k2 = (y + 0.5 * h * k1) @ MT
        k3 = (y + 0.5 * h * k2) @ MT
        k4 = (y + h * k3) @ MT
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite field after step {step + 1} of {settings.step_count}")
    return y


def integrate(
    config: SchemeConfig,
    entrance: FieldsLike,
    z: float,
    settings: Optional[IntegratorSettings] = None,
) -> FieldVector:
    values = _field_array(config, entrance)
    if values.ndim != 1:
        raise ValueError("integrate takes a single field vector")
    return FieldVector(integrate_array(config, values, z, settings))


def max_relative_error(approx: np.ndarray, reference: np.ndarray) -> float:
    """Largest component deviation relative to the largest reference component."""
    deviation = float(np.max(np.abs(np.asarray(approx) - np.asarray(reference))))
    scale = float(np.max(np.abs(reference)))
    return deviation / scale if scale > 0 else deviation


def convergence_report(
    config: SchemeConfig,
    entrance: FieldsLike,
    z: float,
    step_counts: Optional[Sequence[int]] = None,
) -> pd.DataFrame:
    """
    RK4 error against the closed form for a ladder of step counts.

    Returns:
        DataFrame with columns steps, max_rel_error and observed_order, the
        latter being the slope log(e_prev/e)/log(N/N_prev) (NaN for the first
        row or when an error vanishes).
    """
    step_counts = list(load_settings().convergence_step_counts if step_counts is None else step_counts)
    if not step_counts or any(b <= a for a, b in zip(step_counts, step_counts[1:])):
        raise ValueError("step counts must be a non-empty ascending sequence")

    values = _field_array(config, entrance)
    exact = propagate_array(config, values, z)

    rows = []
    previous = None
    for steps in step_counts:
        numeric = integrate_array(config, values, z, IntegratorSettings(step_count=steps))
        error = max_relative_error(numeric, exact)
        order = np.nan
        if previous is not None and previous[1] > 0 and error > 0:
            order = np.log(previous[1] / error) / np.log(steps / previous[0])
        rows.append({"steps": steps, "max_rel_error": error, "observed_order": order})
        logger.debug("rk4 with %d steps: max relative error %.3e", steps, error)
        previous = (steps, error)
    return pd.DataFrame(rows, columns=["steps", "max_rel_error", "observed_order"])

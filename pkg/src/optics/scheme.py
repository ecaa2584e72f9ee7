"""
The (n+1)-level phaseonium medium: one excited state coupled to n ground
states that start out in the coherent superposition sum_m c_m |g_m>.

Rates are in units of a reference decay rate and lengths in units of the
medium length unless a config says otherwise.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.utils.settings import load_settings

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    """
    Medium parameters for a scheme with n ground states.

    Attributes:
        c: Superposition amplitudes c_m of the initial atomic state
        alpha: Optical depths alpha_m
        gamma: Decay rates gamma_{eg_m}
        delta: Detunings delta_m
        L: Medium length
    """
    c: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    L: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(self.c, complex))
        object.__setattr__(self, "alpha", _frozen(self.alpha, float))
        object.__setattr__(self, "gamma", _frozen(self.gamma, float))
        object.__setattr__(self, "delta", _frozen(self.delta, float))
        object.__setattr__(self, "L", float(self.L))

        n = self.c.size
        if n < 2:
            raise ValueError(f"a scheme needs at least 2 ground states, got n={n}")
        for name in ("alpha", "gamma", "delta"):
            if getattr(self, name).size != n:
                raise ValueError(f"{name} has {getattr(self, name).size} entries, expected n={n}")
        norm = float(np.sum(np.abs(self.c) ** 2))
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"superposition amplitudes are not normalized: sum |c|^2 = {norm!r}")
        if np.any(self.gamma <= 0):
            raise ValueError("all decay rates gamma must be positive")
        if np.any(self.alpha < 0):
            raise ValueError("optical depths alpha must be non-negative")
        if not np.all(np.isfinite(self.delta)):
            raise ValueError("detunings must be finite")
        if not self.L > 0:
            raise ValueError(f"medium length L must be positive, got {self.L}")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def populations(self) -> np.ndarray:
        """|c_m|^2, the first-order ground-state populations."""
        return np.abs(self.c) ** 2

    @property
    def is_symmetric_resonant(self) -> bool:
        """Common alpha and gamma with every field on resonance."""
        return (
            bool(np.all(self.delta == 0))
            and bool(np.all(self.alpha == self.alpha[0]))
            and bool(np.all(self.gamma == self.gamma[0]))
        )


@dataclass(frozen=True, eq=False)
class PropagationCoefficients:
    """
    Attributes:
        beta: Per-field coupling constants beta_m
        X: Collective eigenvalue sum_m beta_m |c_m|^2
        L_abs: Absorption length L/alpha, only for the symmetric resonant case
        decay_constant: Intensity decay rate -2 Im(X) of the bright component
    """
    beta: np.ndarray
    X: complex
    L_abs: Optional[float]
    decay_constant: float

    @property
    def length_unit(self) -> float:
        """L_abs when defined, otherwise the e-folding length of the bright intensity."""
        if self.L_abs is not None:
            return self.L_abs
        if self.decay_constant <= 0:
            raise ValueError("the bright component does not decay; no absorption length exists")
        return 1.0 / self.decay_constant


FirstOrderDiagnostic = namedtuple("FirstOrderDiagnostic", ["max_coherence", "threshold", "valid"])


def compute_beta(config: SchemeConfig) -> np.ndarray:
    """
    beta_m = alpha_m gamma_m / (2 L (delta_m + i gamma_m)).

    On resonance this is evaluated as -i alpha_m / (2L) so that the symmetric
    case gives exactly 1/(2i L_abs).
    """
    beta = config.alpha * config.gamma / (2.0 * config.L * (config.delta + 1j * config.gamma))
    resonant = config.delta == 0
    beta[resonant] = -1j * config.alpha[resonant] / (2.0 * config.L)
    return beta


def compute_X(config: SchemeConfig, beta: Optional[Sequence[complex]] = None) -> complex:
    beta = compute_beta(config) if beta is None else np.asarray(beta, dtype=complex)
    if beta.shape != (config.n,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({config.n},)")
    return complex(np.sum(beta * config.populations))


def coefficients(config: SchemeConfig) -> PropagationCoefficients:
    beta = compute_beta(config)
    beta.setflags(write=False)
    X = compute_X(config, beta)
    L_abs = None
    if config.is_symmetric_resonant and config.alpha[0] > 0:
        L_abs = config.L / float(config.alpha[0])
    return PropagationCoefficients(beta=beta, X=X, L_abs=L_abs, decay_constant=-2.0 * X.imag)


def validate_first_order(config, coherences, threshold=None):
    """
    Check the weak-field assumption |rho_{g_m e}| << 1.

    Args:
        config: Scheme the coherences belong to
        coherences: Array whose last axis holds the n coherences (any leading shape)
        threshold: Upper bound for "much smaller than one"; config.yaml default if None

    Returns:
        FirstOrderDiagnostic with the largest coherence modulus and the verdict
    """
    threshold = load_settings().first_order_threshold if threshold is None else float(threshold)
    rho = np.asarray(coherences, dtype=complex)
    if rho.shape[-1] != config.n:
        raise ValueError(f"coherences have {rho.shape[-1]} components, expected n={config.n}")
    max_coherence = float(np.max(np.abs(rho))) if rho.size else 0.0
    valid = max_coherence < threshold
    if not valid:
        logger.warning(
            "first-order approximation violated: max |rho| = %.4g >= %.4g", max_coherence, threshold
        )
    return FirstOrderDiagnostic(max_coherence=max_coherence, threshold=threshold, valid=valid)


def balanced_scheme(
    n: int,
    alpha: float,
    weights: Optional[Sequence[float]] = None,
    phases: Optional[Sequence[float]] = None,
    L: float = 1.0,
) -> SchemeConfig:
    """
    Resonant scheme with common optical depth and unit decay rates.

    Args:
        n: Number of ground states
        alpha: Common optical depth
        weights: Relative populations |c_m|^2 (normalized here); equal if None
        phases: Phases of c_m in radians; zero if None
        L: Medium length
    """
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    phases = np.zeros(n) if phases is None else np.asarray(phases, dtype=float)
    if weights.size != n or phases.size != n:
        raise ValueError(f"weights and phases need {n} entries")
    if np.any(weights < 0) or not np.sum(weights) > 0:
        raise ValueError("weights must be non-negative and not all zero")
    c = np.sqrt(weights / np.sum(weights)) * np.exp(1j * phases)
    return SchemeConfig(c=c, alpha=np.full(n, alpha), gamma=np.ones(n), delta=np.zeros(n), L=L)

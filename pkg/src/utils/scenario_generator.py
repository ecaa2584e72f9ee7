"""
Built-in scenarios for the published figures.

Each builder returns an ordered mapping from a case label to a Scenario;
the CLI writes every case to its own sub-directory.
"""
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from src.optics.beams import BeamSuperposition, LGBeam, TransverseGrid, lg_peak
from src.optics.scheme import balanced_scheme
from src.utils.scenario_loader import Scenario
from src.utils.settings import load_settings

OPTICAL_DEPTH = 20.0
PEAK_AMPLITUDE = 0.05
COMPOSITE_Z = 0.5
ZSCAN_ENTRANCE = 0.01

FIG6_WINDINGS = (1, 5, 8)
FIG7_WINDINGS = ((1, -3), (-1, 4), (3, -5))
FIG8_WINDINGS = (1, 2, 3, 4)


def _labels(count: int) -> Sequence[str]:
    return [chr(ord("a") + i) for i in range(count)]


def _zscan_scenario(name: str, weights: Sequence[float]) -> Scenario:
    settings = load_settings()
    config = balanced_scheme(len(weights), OPTICAL_DEPTH, weights=weights)
    entrance = np.zeros(config.n, dtype=complex)
    entrance[0] = ZSCAN_ENTRANCE
    return Scenario(
        kind="zscan",
        config=config,
        beams=(),
        grid=TransverseGrid.default(),
        z_samples=(config.L,),
        entrance=entrance,
        zscan_z_max_over_labs=settings.zscan_z_max_over_labs,
        zscan_points=settings.zscan_points,
        threshold=settings.first_order_threshold,
        convergence_z=0.5 * config.L,
        convergence_step_counts=settings.convergence_step_counts,
        name=name,
    )


def composite_scenario(l1: int, l2: int, name: str = "composite") -> Scenario:
    """
    Two LG beams of equal strength with windings l1 and l2 entering a balanced
    Lambda medium. The common strength puts the brighter ring at PEAK_AMPLITUDE,
    which keeps every coherence at or below PEAK_AMPLITUDE.
    """
    settings = load_settings()
    config = balanced_scheme(2, OPTICAL_DEPTH)
    epsilon = PEAK_AMPLITUDE / max(lg_peak(l1), lg_peak(l2))
    beams = (
        BeamSuperposition.single(LGBeam(epsilon=epsilon, l=l1)),
        BeamSuperposition.single(LGBeam(epsilon=epsilon, l=l2)),
    )
    return Scenario(
        kind="composite",
        config=config,
        beams=beams,
        grid=TransverseGrid.default(),
        z_samples=(COMPOSITE_Z * config.L,),
        entrance=np.array([ZSCAN_ENTRANCE, 0.0], dtype=complex),
        zscan_z_max_over_labs=settings.zscan_z_max_over_labs,
        zscan_points=settings.zscan_points,
        threshold=settings.first_order_threshold,
        convergence_z=0.5 * config.L,
        convergence_step_counts=settings.convergence_step_counts,
        name=name,
    )


def fig2() -> Dict[str, Scenario]:
    return {"a": _zscan_scenario("fig2", (1.0, 1.0))}


def fig4() -> Dict[str, Scenario]:
    return {"a": _zscan_scenario("fig4", (1 / 2, 1 / 3, 1 / 6))}


def _composite_cases(name: str, windings: Sequence[Tuple[int, int]]) -> Dict[str, Scenario]:
    return {
        label: composite_scenario(l1, l2, name=f"{name}{label}")
        for label, (l1, l2) in zip(_labels(len(windings)), windings)
    }


def fig6() -> Dict[str, Scenario]:
    return _composite_cases("fig6", [(l, l) for l in FIG6_WINDINGS])


def fig7() -> Dict[str, Scenario]:
    return _composite_cases("fig7", FIG7_WINDINGS)


def fig8() -> Dict[str, Scenario]:
    return _composite_cases("fig8", [(l, -l) for l in FIG8_WINDINGS])


FIGURES: Dict[str, Callable[[], Dict[str, Scenario]]] = {
    "fig2": fig2,
    "fig4": fig4,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
}


def figure_scenarios(figure_id: str) -> Dict[str, Scenario]:
    try:
        builder = FIGURES[figure_id]
    except KeyError:
        raise ValueError(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}") from None
    return builder()

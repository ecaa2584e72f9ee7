import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

# Add the repository root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.optics.beams import diffraction_criterion, sample_grid
from src.optics.integrator import convergence_report
from src.optics.propagation import coherence_array, propagate_grid, zscan
from src.optics.scheme import coefficients, validate_first_order
from src.optics.vortices import report_to_dict, vortex_report
from src.utils.benchmark import StageBenchmark
from src.utils.io import maps_table, save_field_grid, save_table, write_json
from src.utils.parallel import resolve_threads
from src.utils.scenario_generator import FIGURES, figure_scenarios
from src.utils.scenario_loader import Scenario, load_scenario, scenario_to_dict
from src.utils.settings import configure_logging, load_settings

logger = logging.getLogger("vortex")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_VALIDITY = 3


class ValidityError(Exception):
    """A validity guard failed while --strict was set."""


def _zscan_table(scenario: Scenario):
    z_over_labs = np.linspace(0.0, scenario.zscan_z_max_over_labs, scenario.zscan_points)
    return zscan(scenario.config, scenario.entrance, z_over_labs)


def _propagate_all(scenario: Scenario, entrance_grid) -> List:
    """Propagate the sampled entrance to every z sample, one z per worker thread."""
    threads = resolve_threads()

    def at(z: float):
        return propagate_grid(scenario.config, entrance_grid, z, threads=1)

    progress = dict(total=len(scenario.z_samples), desc=f"{scenario.name}: z samples", unit="z", leave=False)
    if threads == 1:
        return [at(z) for z in tqdm(scenario.z_samples, **progress)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(tqdm(executor.map(at, scenario.z_samples), **progress))


def _write_grid_artifacts(scenario: Scenario, out_dir: Path, k: int, z: float, field_grid) -> None:
    save_field_grid(field_grid, out_dir / f"fields_z{k}", metadata={"z": z, "scenario": scenario.name})
    for m in range(field_grid.n):
        save_table(maps_table(field_grid, m), out_dir / f"maps_z{k}_f{m + 1}.csv")
        report = vortex_report(field_grid, m)
        write_json(report_to_dict(report), out_dir / f"vortices_z{k}_f{m + 1}.json")
        logger.info(
            "z=%g field %d: %d vortices, boundary winding %d, petals %s",
            z, m + 1, len(report.vortices), report.total_winding, report.petal_count,
        )


def run_scenario(scenario: Scenario, out_dir: Path, strict: bool = False) -> Dict[str, Any]:
    """
    Run one scenario and write its artifacts into out_dir.

    Returns:
        The validity summary also written to validity.json

    Raises:
        ValidityError: if strict and a validity guard failed (after all artifacts are written)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bench = StageBenchmark()
    config = scenario.config
    write_json(scenario_to_dict(scenario), out_dir / "scenario.resolved.json")

    coherence_maxima = [np.abs(coherence_array(config, scenario.entrance))]

    if coefficients(config).decay_constant > 0:
        save_table(bench.run("zscan", _zscan_table, scenario), out_dir / "zscan.csv")
    elif scenario.kind == "zscan":
        raise ValueError("the bright component does not decay; a z-scan needs a positive absorption rate")
    else:
        logger.warning("no absorption length for this medium; skipping zscan.csv")

    if scenario.kind == "convergence":
        table = bench.run(
            "convergence", convergence_report, config, scenario.entrance,
            scenario.convergence_z, scenario.convergence_step_counts,
        )
        save_table(table[["steps", "max_rel_error"]], out_dir / "convergence.csv")

    if scenario.uses_grid:
        entrance_grid = bench.run("sample", sample_grid, config, list(scenario.beams), scenario.grid)
        outputs = bench.run("propagate", _propagate_all, scenario, entrance_grid)
        for field_grid in [entrance_grid] + outputs:
            coherence_maxima.append(np.max(np.abs(coherence_array(config, field_grid.values)), axis=(0, 1)))
        for k, (z, field_grid) in enumerate(zip(scenario.z_samples, outputs)):
            bench.run(f"artifacts z{k}", _write_grid_artifacts, scenario, out_dir, k, z, field_grid)

    first_order = validate_first_order(config, np.vstack(coherence_maxima), scenario.threshold)
    validity: Dict[str, Any] = {
        "first_order": {
            "max_coherence": first_order.max_coherence,
            "threshold": first_order.threshold,
            "valid": first_order.valid,
        },
        "diffraction": None,
    }
    valid = first_order.valid
    if scenario.diffraction is not None:
        d = scenario.diffraction
        check = diffraction_criterion(d.L, d.wavelength, d.w)
        validity["diffraction"] = {"value": check.value, "negligible": check.negligible}
        valid = valid and check.negligible
    validity["valid"] = valid
    write_json(validity, out_dir / "validity.json")
    bench.log_summary()

    if strict and not valid:
        raise ValidityError(f"scenario '{scenario.name}' failed its validity checks; see {out_dir / 'validity.json'}")
    return validity


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    run_scenario(scenario, Path(args.out), strict=args.strict)
    logger.info("artifacts written to %s", args.out)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    cases = figure_scenarios(args.figure)
    root = Path(args.out) / args.figure
    for label, scenario in cases.items():
        logger.info("reproducing %s case %s", args.figure, label)
        run_scenario(scenario, root / label, strict=args.strict)
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    table = convergence_report(
        scenario.config, scenario.entrance, scenario.convergence_z, scenario.convergence_step_counts
    )
    print(table.to_string(index=False))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_table(table[["steps", "max_rel_error"]], out_dir / "convergence.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.app",
        description="Optical vortex transfer and generation in phaseonium media.",
    )
    parser.add_argument("--log-level", default=None, help="override the configured log level")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--strict", action="store_true", help="exit with code 3 when a validity check fails")
    run.set_defaults(func=cmd_run)

    reproduce = sub.add_parser("reproduce", help="run the built-in scenarios of a figure")
    reproduce.add_argument("figure", choices=sorted(FIGURES))
    reproduce.add_argument("--out", required=True, help="output directory")
    reproduce.add_argument("--strict", action="store_true", help="exit with code 3 when a validity check fails")
    reproduce.set_defaults(func=cmd_reproduce)

    convergence = sub.add_parser("convergence", help="RK4 convergence table of a scenario")
    convergence.add_argument("scenario", help="scenario JSON file")
    convergence.add_argument("--out", default=None, help="also write convergence.csv here")
    convergence.set_defaults(func=cmd_convergence)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level or load_settings().log_level)
        return args.func(args)
    except ValidityError as e:
        logger.error("%s", e)
        return EXIT_VALIDITY
    except (ValueError, KeyError, TypeError, FloatingPointError) as e:
        logger.error("invalid input: %s", e)
        return EXIT_INVALID
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

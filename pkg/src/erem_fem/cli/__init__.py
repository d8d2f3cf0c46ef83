"""Command-line entry point: ``erem-fem --config run.json``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from dotenv import load_dotenv

from ..convergence import estimate_order, synthetic_errors
from ..exceptions import EremError
from ..problems import get_problem, problem_names
from ..types import StudyKind
from ..utils import env_int
from .config import RunConfig, config_from_mapping, parse_config
from .runner import RunOutcome, run

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
SELF_TEST_LEVELS = 6
SELF_TEST_NOISE = 0.05
SELF_TEST_TOLERANCE = 0.1

__all__ = [
    "RunConfig",
    "RunOutcome",
    "build_parser",
    "config_from_mapping",
    "main",
    "parse_config",
    "run",
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erem-fem",
        description="Finite element / exponential Rosenbrock-Euler convergence studies.",
    )
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, help="output directory (overrides output_path)")
    parser.add_argument(
        "--study", choices=[kind.value for kind in StudyKind], help="override the study kind"
    )
    parser.add_argument("--levels", type=int, help="override the number of refinement levels")
    parser.add_argument("--jobs", type=int, help="worker threads (default: EREM_JOBS or cores)")
    parser.add_argument("--list-problems", action="store_true", help="print the problem registry")
    parser.add_argument(
        "--self-test", action="store_true", help="check the order fitter on synthetic data"
    )
    parser.add_argument("--log-level", help="logging level (default: EREM_LOG_LEVEL or INFO)")
    return parser


def _list_problems() -> int:
    for name in problem_names():
        spec = get_problem(name)
        print(
            f"{name:<26} dim={spec.dim} T={spec.final_time:g} beta={spec.beta:g}  "
            f"{spec.description}"
        )
    return 0


def _self_test() -> int:
    seed = env_int("EREM_SEED", 0)
    exact = estimate_order(synthetic_errors(2.0, SELF_TEST_LEVELS), "dt")
    noisy = estimate_order(
        synthetic_errors(2.0, SELF_TEST_LEVELS, noise=SELF_TEST_NOISE, seed=seed), "dt"
    )
    print(f"exact slope-2 data: fitted {exact:.6f}")
    print(f"noisy slope-2 data (seed={seed}): fitted {noisy:.6f}")
    ok = abs(exact - 2.0) < 1e-10 and abs(noisy - 2.0) <= SELF_TEST_TOLERANCE
    print("self-test " + ("passed" if ok else "FAILED"))
    return 0 if ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    level = (args.log_level or os.environ.get("EREM_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)

    if args.list_problems:
        return _list_problems()
    if args.self_test:
        return _self_test()
    if args.config is None:
        parser.error("--config is required unless --list-problems or --self-test is given")

    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        cfg = cfg.with_overrides(
            output_path=str(args.out) if args.out else None,
            study=StudyKind(args.study) if args.study else None,
            levels=args.levels,
            jobs=args.jobs or env_int("EREM_JOBS"),
        )
        outcome = run(cfg)
    except EremError as exc:
        logger.error("%s %s", exc.message, exc.details or "")
        return 1
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return 1

    for path in outcome.artifacts:
        print(path)
    if outcome.table is not None:
        table = outcome.table
        order = "n/a" if table.fitted_order is None else f"{table.fitted_order:.3f}"
        print(f"fitted order {order} ({table.regime.label}), verdict: {table.verdict}")
    return outcome.exit_status


if __name__ == "__main__":
    sys.exit(main())

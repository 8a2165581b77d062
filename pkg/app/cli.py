"""Command line interface: `covcraft <subcommand> [flags]`.

Exit codes: 0 on success, 1 on invalid input, 2 on a numerical failure.
Results are computed in full before anything is written, and every file is
replaced atomically.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
import pandas as pd
from pydantic import ValidationError as PydanticValidationError

from app.core.config import settings
from app.core.exceptions import CovcraftError, InvalidParams
from app.core.io import (
    atomic_write_bytes,
    atomic_write_many,
    atomic_write_text,
    dump_json,
    frame_to_csv,
)
from app.core.logging import configure_logging
from app.models.backtest import ShrinkageMethod
from app.models.covariance import ESTIMATOR_KINDS, EstimatorKind
from app.models.panel import ReturnsPanel
from app.models.synthetic import Distribution
from app.schemas.synthetic import PopulationModel, SyntheticRequest
from app.services import market_data, synthetic
from app.services.analysis import AnalysisService

logger = logging.getLogger(__name__)

ESTIMATOR_NAMES = [k.value for k in ESTIMATOR_KINDS]


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors are input errors: raise instead of exiting with status 2."""

    def error(self, message: str) -> NoReturn:
        raise InvalidParams(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        )


def _estimator_list(text: str) -> list[EstimatorKind]:
    names = [item.strip() for item in text.split(",") if item.strip()]
    unknown = [n for n in names if n not in ESTIMATOR_NAMES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown estimators {unknown}; choose from {','.join(ESTIMATOR_NAMES)}"
        )
    return [EstimatorKind(n) for n in names]


def _distribution(text: str) -> tuple[Distribution, float | None]:
    """`gaussian` or `t<nu>`, e.g. `t3`."""
    if text == "gaussian":
        return Distribution.GAUSSIAN, None
    if text.startswith("t"):
        try:
            return Distribution.STUDENT_T, float(text[1:])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected gaussian or t<nu>, got {text!r}")


def _emit(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)
        logger.info("Wrote %s", path)


def _emit_json(path: Path | None, obj: Any) -> None:
    data = dump_json(obj)
    if path is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        atomic_write_bytes(path, data)
        logger.info("Wrote %s", path)


def _emit_all(outputs: list[tuple[Path | None, bytes]]) -> None:
    """Write every file output or none of them, then echo the rest to stdout."""
    files = [(path, data) for path, data in outputs if path is not None]
    atomic_write_many(files)
    for path, _ in files:
        logger.info("Wrote %s", path)
    for path, data in outputs:
        if path is None:
            sys.stdout.write(data.decode("utf-8"))


def _matrix_csv(
assets: list[str], matrix: np.ndarray) -> str:
    frame = pd.DataFrame(matrix, index=assets, columns=assets)
    frame.index.name = "asset"
    return frame_to_csv(frame, index=True)


# Subcommands


def cmd_estimate(args: argparse.Namespace, service: AnalysisService) -> None:
    panel = market_data.load_panel(args.input)
    est = service.estimate(
        panel,
        args.estimator,
        theta=args.theta,
        phi=args.phi,
        rho=args.rho,
        shrinkage_method=args.shrinkage_method,
        grid_step=args.grid_step,
        validation_fraction=args.validation,
        annual_return=args.annual_return,
    )
    if est.meta:
        logger.info("Estimator parameters: %s", est.meta)
    _emit(args.out, _matrix_csv(panel.assets, est.matrix))


def cmd_portfolio(args: argparse.Namespace, service: AnalysisService) -> None:
    panel = market_data.load_panel(args.input)
    est = service.estimate(
        panel,
        args.estimator,
        theta=args.theta,
        phi=args.phi,
        rho=args.rho,
        shrinkage_method=args.shrinkage_method,
        grid_step=args.grid_step,
        validation_fraction=args.validation,
        annual_return=args.annual_return,
    )
    held, fc = service.min_variance(panel, est, args.annual_return, not args.strict)
    response = service.portfolio_response(panel, est, held, fc)
    frame = pd.DataFrame({"asset": panel.assets, "weight": held.weights})
    weights = frame_to_csv(frame)
    risk = response.model_dump(mode="json", exclude={"assets", "weights"})
    risk["config"] = service.provenance()
    _emit_all([(args.out, weights.encode("utf-8")), (args.risk_out, dump_json(risk))])


def cmd_tune(args: argparse.Namespace, service: AnalysisService) -> None:
    panel = market_data.load_panel(args.input)
    weights, points = service.tune(
        panel, args.grid_step, args.validation, args.annual_return
    )
    surface = pd.DataFrame(
        {
            "theta": [p.theta for p in points],
            "phi": [p.phi for p in points],
            "variance": [p.variance for p in points],
        }
    )
    summary = service.tuning_response(weights, points).model_dump(
        mode="json", exclude={"surface"}
    )
    surface_csv = frame_to_csv(surface).encode("utf-8")
    _emit_all([(args.out, surface_csv), (args.summary, dump_json(summary))])


def cmd_backtest(args: argparse.Namespace, service: AnalysisService) -> None:
    panel: ReturnsPanel
    if args.synthetic:
        seed = settings.DEFAULT_SEED if args.seed is None else args.seed
        panel = synthetic.synthetic_fixture(m=args.synthetic_m, seed=seed)
    else:
        panel = market_data.load_panel(args.input)
    reports = service.backtest(
        panel,
        train_len=args.train,
        rebalance_every=args.rebalance,
        annual_return=args.annual_return,
        kinds=args.estimators,
        grid_step=args.grid_step,
        validation_fraction=args.validation,
        shrinkage_method=args.shrinkage_method,
        rho_step=args.rho_step,
    )
    response = service.backtest_response(reports)
    for row in response.ranking:
        logger.info(
            "%-9s every %3d days: %.4f%% (mean %.3e, %d warnings)",
            row.name,
            row.rebalance_every,
            row.annualized_risk_pct,
            row.mean_daily_return,
            row.warnings,
        )
    document = response.model_dump(mode="json", exclude={"ranking"})
    if args.synthetic:
        document["config"]["synthetic_seed"] = seed
    _emit_json(args.out, document)


def cmd_mp_density(args: argparse.Namespace, service: AnalysisService) -> None:
    panel = market_data.load_panel(args.input) if args.input else None
    if panel is None and args.c is None:
        raise InvalidParams("mp-density needs --c or --input")
    if panel is not None and args.c is not None:
        logger.warning("--c ignored: the dimensionality comes from --input")
    curve = service.mp_density(
        args.c if args.c is not None else 0.5,
        args.sigma2,
        args.points,
        panel=panel,
        train_len=args.train,
    )
    columns: dict[str, list[float]] = {
        "x": [p.x for p in curve.points],
        "density": [p.density for p in curve.points],
    }
    if panel is not None:
        columns["empirical_density"] = [p.empirical_density or 0.0 for p in curve.points]
    _emit(args.out, frame_to_csv(pd.DataFrame(columns)))


def cmd_synth_eval(args: argparse.Namespace, service: AnalysisService) -> None:
    distribution, nu = args.dist
    request = SyntheticRequest(
        model=args.model,
        m=args.m,
        n=args.n,
        spikes=args.spikes,
        distribution=distribution,
        nu=nu,
        ar1=args.ar1,
        seeds=args.seeds,
        first_seed=args.seed,
        direction_seed=args.direction_seed,
    )
    rows = service.synth_eval(request)
    frame = pd.DataFrame(
        [
            {"seed": r.seed, **{k: r.errors[k] for k in ESTIMATOR_NAMES}}
            | {"theta": r.theta, "phi": r.phi, "rho": r.rho}
            for r in rows
        ]
    )
    _emit(args.out, frame_to_csv(frame))


# Parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    group.add_argument("-q", "--quiet", action="store_true", help="Log warnings only")


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", type=Path, required=True, help="Returns CSV")
    parser.add_argument(
        "--estimator", choices=ESTIMATOR_NAMES, default=EstimatorKind.COMBINED.value
    )
    parser.add_argument("--theta", type=float, help="F share of phi (with --phi)")
    parser.add_argument("--phi", type=float, help="Weight moved off the SCM (with --theta)")
    parser.add_argument("--rho", type=float, help="Fixed shrinkage intensity for shrink")
    parser.add_argument(
        "--shrinkage-method",
        choices=[m.value for m in ShrinkageMethod],
        default=ShrinkageMethod.VALIDATION.value,
    )
    parser.add_argument("--grid-step", type=float, help="Tuning grid step")
    parser.add_argument("--validation", type=float, help="Held-out share of the window")
    parser.add_argument("--annual-return", type=float, help="Annual return target")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="covcraft",
        description="Covariance estimation and minimum-variance portfolio analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="Emit a covariance estimate as CSV")
    _add_common(p)
    _add_estimator_flags(p)
    p.add_argument("--out", type=Path, help="Matrix CSV (default: stdout)")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("portfolio", help="Minimum-variance weights and risk")
    _add_common(p)
    _add_estimator_flags(p)
    p.add_argument(
        "--strict",
        action="store_true",
        help="Fail when the return target is unreachable instead of dropping it",
    )
    p.add_argument("--out", type=Path, help="Weights CSV (default: stdout)")
    p.add_argument("--risk-out", type=Path, help="Risk JSON (default: stdout)")
    p.set_defaults(handler=cmd_portfolio)

    p = sub.add_parser("tune", help="Grid search of (theta, phi)")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True, help="Returns CSV")
    p.add_argument("--grid-step", type=float, help="Grid step for theta and phi")
    p.add_argument("--validation", type=float, help="Held-out share of the window")
    p.add_argument("--annual-return", type=float, help="Annual return target")
    p.add_argument(
        "--out", type=Path, help="Surface CSV theta,phi,variance (default: stdout)"
    )
    p.add_argument("--summary", type=Path, help="Selected weights JSON (default: stdout)")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("backtest", help="Rolling-window out-of-sample risk")
    _add_common(p)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="Returns CSV")
    source.add_argument(
        "--synthetic", action="store_true", help="Use the 750-day synthetic SPIKE panel"
    )
    p.add_argument(
        "--synthetic-m", type=int, default=20, help="Assets in the synthetic panel"
    )
    p.add_argument("--seed", type=int, help="Seed of the synthetic panel")
    p.add_argument("--train", type=int, help="Training window in days")
    p.add_argument("--rebalance", type=_int_list, help="Holding periods, e.g. 30,60,90")
    p.add_argument("--annual-return", type=float, help="Annual return target")
    p.add_argument(
        "--estimators",
        type=_estimator_list,
        help=f"Comma-separated subset of {','.join(ESTIMATOR_NAMES)}",
    )
    p.add_argument("--grid-step", type=float, help="Tuning grid step")
    p.add_argument("--validation", type=float, help="Held-out share of each window")
    p.add_argument(
        "--shrinkage-method",
        choices=[m.value for m in ShrinkageMethod],
        default=ShrinkageMethod.VALIDATION.value,
    )
    p.add_argument("--rho-step", type=float, help="Grid step for the shrinkage intensity")
    p.add_argument("--out", type=Path, help="Report JSON (default: stdout)")
    p.set_defaults(handler=cmd_backtest)

    p = sub.add_parser("mp-density", help="Marchenko-Pastur density over its support")
    _add_common(p)
    p.add_argument("--c", type=float, help="Dimensionality M/N in (0, 1)")
    p.add_argument("--sigma2", type=float, default=1.0, help="Entry variance")
    p.add_argument("--points", type=int, default=200, help="Grid points")
    p.add_argument(
        "--input", type=Path, help="Overlay the correlation spectrum of a panel"
    )
    p.add_argument("--train", type=int, help="Days of --input to use")
    p.add_argument("--out", type=Path, help="Density CSV (default: stdout)")
    p.set_defaults(handler=cmd_mp_density)

    p = sub.add_parser("synth-eval", help="Frobenius errors on synthetic populations")
    _add_common(p)
    p.add_argument(
        "--model",
        choices=[m.value for m in PopulationModel],
        default=PopulationModel.SPIKE.value,
    )
    p.add_argument("--m", type=int, default=100, help="Number of assets")
    p.add_argument("--n", type=int, default=200, help="Number of days")
    p.add_argument("--spikes", type=_float_list, default=[10.0], help="Spike eigenvalues")
    p.add_argument(
        "--dist",
        type=_distribution,
        default="gaussian",
        help="gaussian or t<nu>, e.g. t3",
    )
    p.add_argument("--ar1", type=float, default=0.0, help="AR(1) coefficient")
    p.add_argument("--seeds", type=int, default=20, help="Number of seeds")
    p.add_argument("--seed", type=int, help="First seed")
    p.add_argument(
        "--direction-seed", type=int, help="Random spike directions from this seed"
    )
    p.add_argument("--out", type=Path, help="Per-seed CSV (default: stdout)")
    p.set_defaults(handler=cmd_synth_eval)

    return parser


def _log_level(args: argparse.Namespace) -> str:
    if args.verbose:
        return "DEBUG"
    if args.quiet:
        return "WARNING"
    return settings.LOG_LEVEL


def run(argv: Sequence[str] | None = None) -> int:
    """Parse argv, run the subcommand and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CovcraftError as e:
        sys.stderr.write(f"error: {e.message}\n")
        return e.exit_code
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(_log_level(args))
    handler: Callable[[argparse.Namespace, AnalysisService], None] = args.handler
    try:
        handler(args, AnalysisService())
    except CovcraftError as e:
        logger.error("%s", e.message)
        return e.exit_code
    except PydanticValidationError as e:
        logger.error("invalid input: %s", e)
        return 1
    except OSError as e:
        logger.error("%s", e)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        logger.error("numerical failure: %s", e)
        return 2
    except Exception as e:
        logger.exception("unexpected failure: %s", e)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

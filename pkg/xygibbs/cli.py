"""A simple command line application for xygibbs."""
import argparse
import json
import logging
import math
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from xygibbs import __version__
from xygibbs.equilibrium import (
    PLAIN,
    TILDE,
    MarginalSpec,
    cylinder_mass,
    entropy,
    marginal_relation_residual,
    mean_f,
    sample_marginal,
    spectral_data,
    variational_residual,
)
from xygibbs.exceptions import ConfigError, NumericalError, XYGibbsError
from xygibbs.families import family_from_config
from xygibbs.helpers import setup_logger, target_directory
from xygibbs.info import info
from xygibbs.ldp import ldp_residual, rate_on_cylinder
from xygibbs.optimization import beta_sweep, calibration_residual, find_maxima, maximum_value, selection_weights
from xygibbs.parser import load_config, parse_betas, parse_cylinder, parse_numbers, parse_point
from xygibbs.potential import EventuallyConstantPoint, check_prop22, eval_u
from xygibbs.quadrature import laplace_log_partition, log_partition
from xygibbs.query import Table
from xygibbs.settings import Settings
from xygibbs.transfer import eigen_residual, eval_h, normalization_residual, normalized_density

logger = logging.getLogger(__name__)

SCHEMA = 1
DENSITY_POINTS = 11
RUN_FIELDS = ("command", "beta", "cylinder", "seed", "tol", "count", "points", "at", "index")


class RunConfig:
    """A fully resolved run: family, command, inputs and settings."""

    def __init__(self, family_config: Dict[str, Any], command: str, settings: Settings, **fields):
        self.family_config = family_config
        self.family = family_from_config(family_config, tol=settings.family_tol)
        self.command = command
        self.settings = settings
        self.betas: Optional[List[float]] = fields.get("betas")
        self.cylinder = fields.get("cylinder")
        self.seed: Optional[int] = fields.get("seed")
        self.count: int = fields.get("count") or 1000
        self.points: Optional[List[float]] = fields.get("points")
        self.at: Optional[EventuallyConstantPoint] = fields.get("at")
        self.index: Optional[int] = fields.get("index")
        self.out: Optional[str] = fields.get("out")
        self.csv: Optional[str] = fields.get("csv")

    def require_betas(self) -> List[float]:
        if not self.betas:
            raise ConfigError(f'command {self.command!r} needs --beta')
        return self.betas

    def require_cylinder(self):
        if self.cylinder is None:
            raise ConfigError(f'command {self.command!r} needs --cylinder')
        return self.cylinder

    def point(self) -> EventuallyConstantPoint:
        if self.at is not None:
            return self.at
        lo, hi = self.family.domain
        return EventuallyConstantPoint.constant(0.5 * (lo + hi))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.describe(),
            "command": self.command,
            "beta": self.betas,
            "cylinder": self.cylinder.as_list() if self.cylinder is not None else None,
            "seed": self.seed,
            "count": self.count,
            "points": self.points,
            "at": self.at.as_dict() if self.at is not None else None,
            "index": self.index,
            "out": self.out,
            "csv": self.csv,
            "settings": self.settings.as_dict(),
        }


# Each command returns (outputs, error estimates, optional table)
Result = Tuple[Dict[str, Any], Dict[str, Any], Optional[Table]]


def _single(table: Table, outputs: Dict[str, Any]) -> Dict[str, Any]:
    outputs["rows"] = table.as_dicts()
    if len(table) == 1:
        outputs.update(zip(table.columns, table.first()))
    return outputs


def run_pressure(run: RunConfig) -> Result:
    rows, errors = [], []
    for beta in run.require_betas():
        data = spectral_data(run.family, beta, run.settings)
        raw = log_partition(run.family, beta, run.settings).raw
        rows.append((beta, data.log_lambda, data.lambda_, data.pressure_over_beta))
        errors.append(raw.abs_error_estimate / raw.value)
    table = Table(["beta", "log_lambda", "lambda", "pressure_over_beta"], rows)
    outputs = _single(table, {})
    outputs["value"] = rows[0][1]
    return outputs, {"log_lambda": errors}, table


def run_entropy(run: RunConfig) -> Result:
    rows = []
    for beta in run.require_betas():
        rows.append((
            beta,
            entropy(run.family, beta, run.settings),
            mean_f(run.family, beta, run.settings),
            log_partition(run.family, beta, run.settings).log_value,
            variational_residual(run.family, beta, run.settings),
        ))
    table = Table(["beta", "entropy", "mean_f", "log_lambda", "variational_residual"], rows)
    outputs = _single(table, {})
    if not run.family.is_lipschitz:
        outputs["assumptions"] = [f'{run.family.name} is not Lipschitz for the product metric']
    return outputs, {"variational_residual": table.column("variational_residual")}, table


def run_density(run: RunConfig) -> Result:
    points = run.points or run.family.domain.grid(DENSITY_POINTS).tolist()
    rows = []
    relation = {}
    for beta in run.require_betas():
        for a in points:
            rows.append((beta, a, normalized_density(run.family, beta, a, run.settings)))
        if run.index is not None:
            relation[str(beta)] = marginal_relation_residual(run.family, beta, run.index, points, run.settings)
    table = Table(["beta", "a", "density"], rows)
    outputs = {"rows": table.as_dicts()}
    errors = {"marginal_relation_residual": relation} if relation else {}
    return outputs, errors, table


def run_cylinder(run: RunConfig) -> Result:
    cylinder = run.require_cylinder()
    rows = []
    for beta in run.require_betas():
        log_mass = cylinder_mass(MarginalSpec(run.family, beta, settings=run.settings), cylinder)
        rows.append((beta, log_mass, math.exp(log_mass)))
    table = Table(["beta", "log_mass", "mass"], rows)
    return _single(table, {}), {}, table


def run_eigencheck(run: RunConfig) -> Result:
    x = run.point()
    rows = []
    for beta in run.require_betas():
        rows.append((
            beta,
            eigen_residual(run.family, beta, x, run.settings),
            normalization_residual(run.family, beta, x, run.settings),
        ))
    table = Table(["beta", "eigen_residual", "normalization_residual"], rows)
    outputs = _single(table, {"hypothesis": check_prop22(run.family, x).as_dict()})
    return outputs, {"eigen_residual": table.column("eigen_residual")}, table


def run_subaction(run: RunConfig) -> Result:
    x = run.point()
    u = eval_u(run.family, x)
    outputs = {
        "u": u.value,
        "calibration_residual": calibration_residual(run.family, x, run.settings),
        "hypothesis": check_prop22(run.family, x).as_dict(),
    }
    if run.betas:
        outputs["log_h"] = [eval_h(run.family, beta, x) for beta in run.betas]
    return outputs, {"u": u.error}, None


def run_maximize(run: RunConfig) -> Result:
    report = find_maxima(run.family, settings=run.settings)
    outputs = report.as_dict()
    outputs["locations"] = report.locations
    errors = {"second_derivative": [p.second_derivative_error for p in report.peaks]}
    return outputs, errors, None


def run_select(run: RunConfig) -> Result:
    selection = selection_weights(find_maxima(run.family, settings=run.settings))
    outputs = selection.as_dict()
    outputs["locations"] = selection.report.locations
    return outputs, {}, None


def run_sweep(run: RunConfig) -> Result:
    table = beta_sweep(run.family, run.require_cylinder(), run.require_betas(), run.settings)
    m_f, _ = maximum_value(run.family, run.settings)
    return {"m_f": m_f, "rows": table.as_dicts()}, {}, table


def run_ldp(run: RunConfig) -> Result:
    cylinder = run.require_cylinder()
    rate = rate_on_cylinder(run.family, cylinder, run.settings)
    table = ldp_residual(run.family, cylinder, run.require_betas(), run.settings)
    outputs = {"rate": rate.as_dict(), "rows": table.as_dicts()}
    # residual at the last requested beta
    outputs["final_residual"] = table.last()[table.columns.index("residual")]
    return outputs, {"residual": table.column("residual")}, table


def run_laplace(run: RunConfig) -> Result:
    rows = []
    for beta in run.require_betas():
        log_laplace = laplace_log_partition(run.family, beta, run.settings)
        log_lambda = log_partition(run.family, beta, run.settings).log_value
        rows.append((beta, log_laplace, log_lambda, math.expm1(log_lambda - log_laplace)))
    table = Table(["beta", "log_laplace", "log_lambda", "relative_error"], rows)
    return _single(table, {}), {"relative_error": table.column("relative_error")}, table


def run_sample(run: RunConfig) -> Result:
    beta = run.require_betas()[0]
    kind = PLAIN if run.index is not None else TILDE
    spec = MarginalSpec(run.family, beta, kind=kind, n=run.index, settings=run.settings)
    draws = sample_marginal(spec, run.seed, run.count)
    table = Table(["draw"], [(float(d),) for d in draws])
    outputs = {"draws": draws.tolist(), "mean": float(np.mean(draws)), "kind": kind}
    return outputs, {}, table


COMMANDS: Dict[str, Callable[[RunConfig], Result]] = {
    "pressure": run_pressure,
    "entropy": run_entropy,
    "density": run_density,
    "cylinder": run_cylinder,
    "eigencheck": run_eigencheck,
    "subaction": run_subaction,
    "maximize": run_maximize,
    "select": run_select,
    "sweep": run_sweep,
    "ldp": run_ldp,
    "laplace": run_laplace,
    "sample": run_sample,
}


def _int_field(value: Any, what: str) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f'{what} must be an integer, got {value!r}')
    return value


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge the config file and the command-line flags; flags win."""
    if not args.config:
        raise ConfigError('a family config file is required (--config)')
    config = load_config(args.config)
    family_config = {k: v for k, v in config.items() if k not in RUN_FIELDS}
    merged = {k: config[k] for k in RUN_FIELDS if k in config}
    for name in RUN_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value

    command = merged.get("command")
    if command not in COMMANDS:
        raise ConfigError(f'unknown command {command!r}, expected one of {sorted(COMMANDS)}')

    tol = merged.get("tol")
    settings = Settings().with_overrides(quad_tol=parse_numbers(tol, "tol")[0] if tol is not None else None)
    if not settings.quad_tol > 0:
        raise ConfigError(f'tol must be positive, got {settings.quad_tol!r}')

    count = _int_field(merged.get("count"), "count")
    if count is not None and count < 1:
        raise ConfigError(f'count must be at least 1, got {count!r}')
    seed = _int_field(merged.get("seed"), "seed")
    if seed is not None and seed < 0:
        raise ConfigError(f'seed must be nonnegative, got {seed!r}')
    index = _int_field(merged.get("index"), "index")

    return RunConfig(
        family_config,
        command,
        settings,
        betas=parse_betas(merged["beta"]) if merged.get("beta") is not None else None,
        cylinder=parse_cylinder(merged["cylinder"]) if merged.get("cylinder") is not None else None,
        seed=seed,
        count=count,
        points=parse_numbers(merged["points"], "point") if merged.get("points") is not None else None,
        at=parse_point(merged["at"]) if merged.get("at") is not None else None,
        index=index,
        out=args.out,
        csv=args.csv,
    )


def _finite(value: Any) -> Any:
    """Replace non-finite floats with ``None`` so the report is strict JSON."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def build_report(
    run: Optional[RunConfig],
    outputs: Dict[str, Any],
    errors: Dict[str, Any],
    wall_time: float,
    error: Optional[XYGibbsError] = None,
) -> Dict[str, Any]:
    report = {
        "schema": SCHEMA,
        "command": run.command if run is not None else None,
        "config": run.as_dict() if run is not None else None,
        "outputs": outputs,
        "error_estimates": errors,
        "wall_time_s": wall_time,
        "environment": info(),
    }
    if error is not None:
        report["error"] = {"code": error.code, "message": error.error_string}
    return _finite(report)


def _write(path: str, text: str) -> None:
    directory = target_directory(os.path.dirname(path) or None)
    with open(os.path.join(directory, os.path.basename(path)), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def execute(args: argparse.Namespace) -> int:
    """Run one command and write its report; returns the exit status."""
    started = time.perf_counter()
    run = None
    try:
        run = resolve(args)
        logger.debug(f'running {run.command} on {run.family!r}')
        outputs, errors, table = COMMANDS[run.command](run)
    except XYGibbsError as e:
        error = e
    except (ArithmeticError, ValueError, TypeError) as e:
        logger.debug('unexpected failure', exc_info=True)
        error = NumericalError(e)
    else:
        error = None

    if error is not None:
        logger.error(error.error_string)
        report = build_report(run, {}, {}, time.perf_counter() - started, error=error)
        status, table = error.exit_code, None
    else:
        report = build_report(run, outputs, errors, time.perf_counter() - started)
        status = 0

    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.csv and table is not None:
        _write(args.csv, table.to_csv())
    return status


def main(args: Optional[List[str]] = None) -> int:
    """Command line interface for xygibbs: thermodynamic formalism of product-type potentials."""
    parser = argparse.ArgumentParser(prog="xygibbs", description=main.__doc__)
    args = _parse_args(parser, args)

    log_filename = args.logfile if args.verbose else None
    setup_logger(logging.DEBUG if args.verbose else logging.INFO, log_filename=log_filename)

    if args.verbose:
        logger.debug(f'xygibbs version: {__version__}')

    return execute(args)


def _parse_args(parser: argparse.ArgumentParser, args: Optional[List[str]] = None) -> argparse.Namespace:
    parser.add_argument("-V", "--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with the family object and optional run fields")
    parser.add_argument("--command", choices=sorted(COMMANDS), help="The computation to run")
    parser.add_argument("--beta", help="Inverse temperature, or a comma separated list of them")
    parser.add_argument("--cylinder", help="JSON list of [lo, hi] boxes, e.g. '[[0.2, 0.3]]'")
    parser.add_argument("--at", help="Point as JSON: {\"prefix\": [...], \"tail\": c}, [[...], c] or c")
    parser.add_argument("--points", help="Comma separated evaluation points for the density command")
    parser.add_argument("--index", type=int, help="Index n of the plain marginal mu_n")
    parser.add_argument("--seed", type=int, help="Seed for the sample command")
    parser.add_argument("--count", type=int, help="Number of draws for the sample command")
    parser.add_argument("--tol", type=float, help="Relative quadrature tolerance")
    parser.add_argument("--out", help="Write the JSON report to this file instead of stdout")
    parser.add_argument("--csv", help="Also write the result table as CSV to this file")
    parser.add_argument("-v", "--verbose", action="store_true", dest="verbose", help="Set logger output to verbose output.")
    parser.add_argument("--logfile", action="store", help="logging debug and error messages into a log file")

    return parser.parse_args(args)


if __name__ == "__main__":
    sys.exit(main())

"""
Command-line entry point.

    relhartree groundstate --kind energy --c inf --output w.profile
    relhartree expand --kind energy --order 2 --output series/
    relhartree sweep --config run.cfg --plot
    relhartree verify --suite fast

Settings come from a ``key = value`` config file (``--config``) with
command-line flags taking precedence; the whole configuration is
validated before any computation starts.

Exit codes: 0 success, 1 verification failure, 2 usage, 3 invalid
config, 4 I/O, 5 computation failure.
"""

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from .cache import GroundStateCache
from .config import RuntimeSettings
from .errors import (
    ConfigError,
    GridMismatchError,
    ProfileFormatError,
    ProfileIntegrityError,
    RelHartreeError,
)
from .expansion import build_expansion, correction_residuals
from .ground_state import GroundStateResult, result_residual, solve
from .harness import default_expectations, sweep, verify_rates
from .logger import logger, set_level
from .models import (
    GridSpec,
    PhysicalParams,
    ProblemKind,
    RunConfig,
    SolverOptions,
    SweepConfig,
    Verdict,
)
from .persistence import ProfileRecord, save_profile, save_report, save_series
from .verification import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_COMPUTATION = 5

IO_ERRORS = (ProfileFormatError, ProfileIntegrityError, GridMismatchError)

# Flat config keys -> RunConfig section
_SECTIONS: dict[str, type[BaseModel]] = {
    "params": PhysicalParams,
    "grid": GridSpec,
    "solver": SolverOptions,
    "sweep": SweepConfig,
}
_TOP_LEVEL = {"kind", "output", "plot", "use_cache"}
_LIST_KEYS = {"c_list", "sobolev", "zero_corrections"}
_ALIASES = {"lambda": "lam", "workers": "max_workers"}


# =============================================================================
# Configuration
# =============================================================================


def read_config_file(path: str | Path) -> dict[str, str]:
    """
    Parse a line-oriented ``key = value`` file.

    ``#`` starts a comment; blank lines are skipped.

    Raises:
        ConfigError: a line without ``=`` or a repeated key
        ProfileFormatError: the file does not exist
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ProfileFormatError(path, "no such file") from exc
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        key = key.strip()
        if key in values:
            raise ConfigError(f"{path}:{number}: duplicate key {key!r}", key)
        values[key] = value.strip()
    return values


def _section_of(key: str) -> str | None:
    for section, model in _SECTIONS.items():
        if key in model.model_fields:
            return section
    return None


def build_run_config(flat: dict[str, Any]) -> RunConfig:
    """
    Validate flat ``key -> value`` settings into a RunConfig.

    Keys are RunConfig fields (``kind``, ``output``, ``plot``, ``use_cache``)
    or fields of its sections, either bare (``tol``) or dotted (``solver.tol``).

    Raises:
        ConfigError: unknown key or failed validation, naming the field
    """
    nested: dict[str, Any] = {section: {} for section in _SECTIONS}
    for raw_key, value in flat.items():
        section, _, field = raw_key.rpartition(".")
        field = _ALIASES.get(field, field)
        if isinstance(value, str) and field in _LIST_KEYS:
            value = tuple(item.strip() for item in value.split(",") if item.strip())
        if not section:
            if field in _TOP_LEVEL:
                nested[field] = value
                continue
            section = _section_of(field) or ""
        if section not in _SECTIONS or field not in _SECTIONS[section].model_fields:
            raise ConfigError(f"Unknown configuration key {raw_key!r}", raw_key)
        nested[section][field] = value

    if "kind" in nested:
        nested["sweep"].setdefault("kind", nested["kind"])
    try:
        return RunConfig.model_validate(nested)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"Invalid value for {field}: {error['msg']}", field) from exc


# =============================================================================
# Argument parsing
# =============================================================================


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--kind", choices=[k.value for k in ProblemKind])
    parser.add_argument("--m", type=float, help="particle mass")
    parser.add_argument("--lambda", dest="lam", type=float, help="action frequency")
    parser.add_argument("--n", type=int, help="interior grid nodes")
    parser.add_argument("--radius", type=float, help="domain radius")
    parser.add_argument("--tol", type=float, help="solver step tolerance")
    parser.add_argument("--residual-tol", dest="residual_tol", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--output", type=Path, help="output file or directory")
    parser.add_argument(
        "--no-cache",
        dest="use_cache",
        action="store_const",
        const=False,
        help="always recompute the limit ground state",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relhartree",
        description="Pseudo-relativistic Hartree ground states and their c^-2 expansions.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    groundstate = commands.add_parser("groundstate", help="solve one ground state")
    _add_common(groundstate)
    groundstate.add_argument("--c", type=float, help="speed of light (inf for the limit)")

    expand = commands.add_parser("expand", help="build the c^-2 series around the limit")
    _add_common(expand)
    expand.add_argument("--order", type=int, help="number of corrections")

    rate = commands.add_parser("sweep", help="rate study over c")
    _add_common(rate)
    rate.add_argument("--order", type=int)
    rate.add_argument("--c-start", dest="c_start", type=float)
    rate.add_argument("--c-stop", dest="c_stop", type=float)
    rate.add_argument("--c-ratio", dest="c_ratio", type=float)
    rate.add_argument("--c-list", dest="c_list", help="comma-separated c values")
    rate.add_argument("--sobolev", help="comma-separated Sobolev indices")
    rate.add_argument("--zero-corrections", dest="zero_corrections", help="e.g. 1")
    rate.add_argument("--workers", dest="max_workers", type=int)
    rate.add_argument(
        "--no-warm-start", dest="warm_start", action="store_const", const=False
    )
    rate.add_argument("--plot", action="store_const", const=True)

    verify = commands.add_parser("verify", help="run an acceptance suite")
    verify.add_argument("--suite", choices=SUITES, default="fast")
    verify.add_argument("--n", type=int)
    verify.add_argument("--radius", type=float)
    verify.add_argument("--workers", dest="max_workers", type=int)
    verify.add_argument("--output", type=Path, help="write verdicts as JSON")
    return parser


_NOT_CONFIG = {"command", "config", "suite"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File values overridden by the flags that were given."""
    flat: dict[str, Any] = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in _NOT_CONFIG or value is None:
            continue
        flat[key] = value
    return build_run_config(flat)


# =============================================================================
# Commands
# =============================================================================


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, default=str))


def _limit_state(config: RunConfig, settings: RuntimeSettings) -> GroundStateResult:
    params = config.params.limit()
    grid = config.grid.to_grid()
    if config.use_cache:
        cache = GroundStateCache(settings.cache_dir, settings.code_version)
        return cache.get_or_solve(config.kind, params, grid, config.solver)
    return solve(config.kind, params, grid, config.solver)


def cmd_groundstate(config: RunConfig, settings: RuntimeSettings) -> int:
    grid = config.grid.to_grid()
    if config.params.is_relativistic:
        result = solve(config.kind, config.params, grid, config.solver)
    else:
        result = _limit_state(config, settings)
    path = config.output if config.output.suffix else config.output / "groundstate.profile"
    record = replace(ProfileRecord.from_result(result), code_version=settings.code_version)
    digest = save_profile(record, path)
    _emit(
        {
            "profile": str(path),
            "sha256": digest,
            "kind": result.kind.value,
            "level": result.level,
            "multiplier": result.multiplier,
            "residual_l2": result_residual(result),
            "iterations": result.iterations,
        }
    )
    return EXIT_OK


def cmd_expand(config: RunConfig, settings: RuntimeSettings) -> int:
    series = build_expansion(_limit_state(config, settings), config.sweep.order)
    manifest = save_series(series, config.output)
    _emit(
        {
            "manifest": str(manifest),
            "order": series.order,
            "a": list(series.a),
            "b": list(series.b),
            "correction_residuals": correction_residuals(series),
        }
    )
    return EXIT_OK


def cmd_sweep(config: RunConfig, settings: RuntimeSettings) -> int:
    sweep_config = config.sweep
    if "max_workers" not in sweep_config.model_fields_set:
        sweep_config = sweep_config.model_copy(update={"max_workers": settings.max_workers})
    base = _limit_state(config, settings)
    series = build_expansion(base, sweep_config.order)
    report = sweep(sweep_config, config.params, config.grid.to_grid(), config.solver, series)
    written = save_report(report, config.output, plot=config.plot)
    verdicts = verify_rates(report, default_expectations(report))
    summary = _summary(verdicts)
    _emit(
        {
            "written": [str(path) for path in written],
            "fits": {fit.quantity: fit.slope for fit in report.fits},
            "expectations": summary,
        }
    )
    return EXIT_OK if summary["failed"] == 0 else EXIT_VERIFY_FAILED


def _summary(verdicts: Sequence[Verdict]) -> dict[str, int]:
    passed = sum(v.passed for v in verdicts)
    return {"passed": passed, "failed": len(verdicts) - passed}


def cmd_verify(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    flat = {key: getattr(args, key) for key in ("n", "radius") if getattr(args, key) is not None}
    config = build_run_config(flat)
    workers = args.max_workers or settings.max_workers
    verdicts = run_suite(args.suite, config.grid.to_grid(), config.solver, workers)
    for verdict in verdicts:
        _emit(verdict.model_dump(mode="json"))
    if args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(
            json.dumps([v.model_dump(mode="json") for v in verdicts], indent=2) + "\n",
            encoding="utf-8",
        )
    summary = _summary(verdicts)
    _emit({"suite": args.suite, **summary})
    return EXIT_OK if summary["failed"] == 0 else EXIT_VERIFY_FAILED


_COMMANDS = {"groundstate": cmd_groundstate, "expand": cmd_expand, "sweep": cmd_sweep}


def exit_code_for(error: RelHartreeError) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, IO_ERRORS):
        return EXIT_IO
    return EXIT_COMPUTATION


def run(argv: Sequence[str] | None = None, settings: RuntimeSettings | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    settings = settings or RuntimeSettings.from_env()
    set_level(settings.log_level)
    try:
        if args.command == "verify":
            return cmd_verify(args, settings)
        config = resolve_config(args)
        return _COMMANDS[args.command](config, settings)
    except RelHartreeError as exc:
        logger.error(
            "Command failed",
            extra={"context": {"command": args.command, "error_code": exc.error_code}},
        )
        print(f"relhartree: {exc.message}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"relhartree: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    load_dotenv()
    sys.exit(run())

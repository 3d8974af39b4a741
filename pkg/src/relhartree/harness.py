"""
Rate studies over the speed of light.

For each c of a geometric grid the harness solves the relativistic
problem, measures how far the solution is from the truncated series,

    residual_k{k}_s{s} = || u_c - sum_{j<=k} f_j c^(-2j) ||_{H^s},   expected ~ c^(-2(k+1)),

plus scalar gaps of the energy level and multiplier, the Nehari scale
and Pohozaev residuals, then fits log-log slopes and checks expectations.
"""

import itertools
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

from .config import CODE_VERSION
from .errors import FitError, RelHartreeError, SweepError
from .expansion import ExpansionSeries, build_expansion, eval_scalar_series, eval_series
from .fitting import log_log_fit
from .ground_state import (
    GroundStateResult,
    energy_bracket,
    multiplier_identity_residual,
    nehari_scale,
    pohozaev_residual,
    solve,
)
from .logger import logger
from .models import (
    Expectation,
    ExpectationKind,
    GridSpec,
    PhysicalParams,
    ProblemKind,
    SlopeFit,
    SolverOptions,
    SweepConfig,
    SweepRecord,
    SweepReport,
    Verdict,
)
from .radial_core import RadialGrid, h_s_norm, spectral_pairing

SCALED_ENERGY_GAP = "scaled_energy_gap"
SCALED_MULTIPLIER_GAP = "scaled_multiplier_gap"
NEHARI_SCALE_GAP = "nehari_scale_gap"

# Relative rise tolerated between neighbouring c values of a decaying residual
MONOTONE_TOL = 0.05


def residual_key(k: int, s: float) -> str:
    return f"residual_k{k}_s{s:g}"


def energy_gap_key(k: int) -> str:
    return f"energy_gap_k{k}"


def multiplier_gap_key(k: int) -> str:
    return f"multiplier_gap_k{k}"


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """(slope, intercept, r_squared) of log y against log x; needs >= 3 positive points."""
    return log_log_fit(xs, ys, min_points=3)


# =============================================================================
# Per-c measurements
# =============================================================================


def _measure(
    c: float,
    config: SweepConfig,
    series: ExpansionSeries,
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions,
) -> SweepRecord:
    kind = config.kind
    target = params.with_c(c)
    initial = eval_series(series, c, series.order) if config.warm_start else None
    try:
        result = solve(kind, target, grid, options, initial)
    except RelHartreeError as exc:
        raise SweepError(c, exc) from exc

    profile = result.profile
    quantities: dict[str, float] = {}
    for k in range(series.order + 1):
        difference = profile - eval_series(series, c, k)
        for s in config.sobolev:
            quantities[residual_key(k, s)] = h_s_norm(difference, s)

    base = series.base
    if kind is ProblemKind.ENERGY:
        for k in range(series.order + 1):
            quantities[energy_gap_key(k)] = abs(
                result.level - eval_scalar_series(base.level, series.a, c, k)
            )
            quantities[multiplier_gap_key(k)] = abs(
                result.multiplier - eval_scalar_series(base.multiplier, series.b, c, k)
            )
        quantities[SCALED_ENERGY_GAP] = c * c * (base.level - result.level)
        quantities[SCALED_MULTIPLIER_GAP] = c * c * (base.multiplier - result.multiplier)
        quantities["pohozaev"] = pohozaev_residual(result)
        quantities["multiplier_identity"] = multiplier_identity_residual(result, base)
        lower, upper = energy_bracket(result, base)
        quantities["energy_lower"] = lower
        quantities["energy_upper"] = upper
    else:
        t_c = nehari_scale(base.profile, target)
        quantities["nehari_scale"] = t_c
        quantities[NEHARI_SCALE_GAP] = 1.0 - t_c

    logger.info(
        "Sweep point done",
        extra={"context": {"c": c, "iterations": result.iterations, "level": result.level}},
    )
    return SweepRecord(
        c=c,
        level=result.level,
        multiplier=result.multiplier,
        iterations=result.iterations,
        quantities=quantities,
    )


def _fitted_quantities(kind: ProblemKind, order: int, sobolev: Sequence[float]) -> list[str]:
    keys = [residual_key(k, s) for k in range(order + 1) for s in sobolev]
    if kind is ProblemKind.ENERGY:
        keys += [energy_gap_key(k) for k in range(order + 1)]
        keys += [multiplier_gap_key(k) for k in range(order + 1)]
    else:
        keys.append(NEHARI_SCALE_GAP)
    return keys


def _floor_for(quantity: str, report_floor: float, scalar_floor: float) -> float:
    return report_floor if quantity.startswith("residual_") else scalar_floor


def fit_quantity(
    report: SweepReport, quantity: str, c_max: float | None = None
) -> SlopeFit:
    """Fit one quantity, skipping points under its noise floor (and beyond c_max)."""
    floor = _floor_for(quantity, report.field_noise_floor, report.scalar_noise_floor)
    xs, ys = report.series(quantity)
    kept = [
        (x, y)
        for x, y in zip(xs, ys, strict=True)
        if y > floor and (c_max is None or x <= c_max)
    ]
    excluded = len(xs) - len(kept)
    try:
        slope, intercept, r2 = fit_slope([x for x, _ in kept], [y for _, y in kept])
    except FitError:
        return SlopeFit(
            quantity=quantity, slope=None, intercept=None, r_squared=None,
            points=len(kept), excluded=excluded,
        )
    return SlopeFit(
        quantity=quantity, slope=slope, intercept=intercept, r_squared=r2,
        points=len(kept), excluded=excluded,
    )


# =============================================================================
# Sweep
# =============================================================================


def prepare_series(
    config: SweepConfig,
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions,
    base: GroundStateResult | None = None,
) -> ExpansionSeries:
    """Solve (unless given) the limit ground state and build the series."""
    limit = params.limit()
    if base is None:
        base = solve(config.kind, limit, grid, options)
    return build_expansion(base, config.order)


def sweep(
    config: SweepConfig,
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions | None = None,
    series: ExpansionSeries | None = None,
) -> SweepReport:
    """
    Run the rate study described by ``config``.

    Per-c solves may run concurrently (``config.max_workers``); records are
    aggregated in c order, so the report does not depend on completion order.

    Raises:
        SweepError: a solve failed; the error names its c
    """
    options = options or SolverOptions()
    if series is None:
        series = prepare_series(config, params, grid, options)
    elif series.order < config.order:
        series = build_expansion(series.base, config.order)
    if config.zero_corrections:
        series = series.with_zeroed(config.zero_corrections)

    c_values = config.c_values
    logger.info(
        "Starting sweep",
        extra={"context": {"kind": config.kind.value, "c_values": c_values, "order": config.order}},
    )

    def run(c: float) -> SweepRecord:
        return _measure(c, config, series, params, grid, options)

    if config.max_workers > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            records = list(pool.map(run, c_values))
    else:
        records = [run(c) for c in c_values]

    base = series.base
    report = SweepReport(
        kind=config.kind,
        params=params.limit(),
        grid=GridSpec.of(grid),
        order=series.order,
        sobolev=config.sobolev,
        zero_corrections=config.zero_corrections,
        base_level=base.level,
        base_multiplier=base.multiplier,
        laplacian_norm_sq=spectral_pairing(series.terms[0], series.terms[0], 2.0),
        field_noise_floor=config.noise_factor * options.tol,
        scalar_noise_floor=config.scalar_noise_floor,
        records=tuple(records),
        code_version=CODE_VERSION,
    )
    fits = tuple(
        fit_quantity(report, quantity)
        for quantity in _fitted_quantities(config.kind, series.order, config.sobolev)
    )
    return report.model_copy(update={"fits": fits})


# =============================================================================
# Verification
# =============================================================================


def default_expectations(report: SweepReport, s: float = 1.0) -> list[Expectation]:
    """Slopes -2(k+1) and monotone decay for every truncation, plus the known scalar limits."""
    expectations = [
        Expectation(
            name=f"R_{k} slope in H^{s:g}",
            quantity=residual_key(k, s),
            expected=-2.0 * (k + 1),
            tolerance=0.1 * (k + 1),
        )
        for k in range(report.order + 1)
    ]
    expectations += [
        Expectation(
            name=f"R_{k} non-increasing in c in H^{s:g}",
            quantity=residual_key(k, s),
            kind=ExpectationKind.MONOTONE,
            expected=0.0,
            tolerance=MONOTONE_TOL,
        )
        for k in range(report.order + 1)
    ]
    m = report.params.m
    lap = report.laplacian_norm_sq
    if report.kind is ProblemKind.ENERGY:
        for k in range(report.order + 1):
            expectations.append(
                Expectation(
                    name=f"energy gap slope at truncation {k}",
                    quantity=energy_gap_key(k),
                    expected=-2.0 * (k + 1),
                    tolerance=0.1 * (k + 1),
                )
            )
            expectations.append(
                Expectation(
                    name=f"multiplier gap slope at truncation {k}",
                    quantity=multiplier_gap_key(k),
                    expected=-2.0 * (k + 1),
                    tolerance=0.1 * (k + 1),
                )
            )
        c_values = report.c_values
        at_c = 80.0 if c_values and c_values[0] <= 80.0 <= c_values[-1] else None
        expectations.append(
            Expectation(
                name="c^2 (e_inf - e_c) limit",
                quantity=SCALED_ENERGY_GAP,
                kind=ExpectationKind.LIMIT,
                expected=lap / (8.0 * m**3),
                tolerance=0.05,
                at_c=at_c,
            )
        )
        expectations.append(
            Expectation(
                name="c^2 (omega_inf - omega_c) limit",
                quantity=SCALED_MULTIPLIER_GAP,
                kind=ExpectationKind.LIMIT,
                expected=-5.0 * lap / (8.0 * m**3),
                tolerance=0.05,
                at_c=at_c,
            )
        )
    else:
        expectations.append(
            Expectation(
                name="Nehari scale slope", quantity=NEHARI_SCALE_GAP, expected=-2.0, tolerance=0.1
            )
        )
    return expectations


def _closest_record_value(report: SweepReport, quantity: str, at_c: float | None) -> float | None:
    xs, ys = report.series(quantity)
    if not xs:
        return None
    if at_c is None:
        return ys[-1]
    index = min(range(len(xs)), key=lambda i: abs(math.log(xs[i] / at_c)))
    return ys[index]


def _monotone_verdict(report: SweepReport, expectation: Expectation) -> Verdict:
    """Count rises y[i+1] > y[i] (1 + tolerance) among points above the noise floor."""
    floor = _floor_for(expectation.quantity, report.field_noise_floor, report.scalar_noise_floor)
    xs, ys = report.series(expectation.quantity)
    kept = [y for y in ys if y > floor]
    note = f"{len(kept)} points checked, {len(xs) - len(kept)} under the noise floor"
    if len(kept) < 2:
        return Verdict(
            name=expectation.name,
            passed=False,
            expected=expectation.expected,
            tolerance=expectation.tolerance,
            note=f"fewer than 2 points above the noise floor; {note}",
        )
    rises = sum(
        later > earlier * (1.0 + expectation.tolerance)
        for earlier, later in itertools.pairwise(kept)
    )
    return Verdict(
        name=expectation.name,
        passed=rises == 0,
        observed=float(rises),
        expected=expectation.expected,
        tolerance=expectation.tolerance,
        note=note,
    )


def verify_rates(report: SweepReport, expectations: Sequence[Expectation]) -> list[Verdict]:
    """Mark each expectation pass/fail; fits exclude points under the noise floor."""
    verdicts: list[Verdict] = []
    for expectation in expectations:
        if expectation.kind is ExpectationKind.SLOPE:
            fit = report.fit(expectation.quantity) or fit_quantity(report, expectation.quantity)
            note = f"{fit.points} points fitted, {fit.excluded} under the noise floor"
            if fit.slope is None:
                verdicts.append(
                    Verdict(
                        name=expectation.name,
                        passed=False,
                        expected=expectation.expected,
                        tolerance=expectation.tolerance,
                        note=f"fewer than 3 points above the noise floor; {note}",
                    )
                )
                continue
            passed = abs(fit.slope - expectation.expected) <= expectation.tolerance
            verdicts.append(
                Verdict(
                    name=expectation.name,
                    passed=passed,
                    observed=fit.slope,
                    expected=expectation.expected,
                    tolerance=expectation.tolerance,
                    note=note,
                )
            )
        elif expectation.kind is ExpectationKind.MONOTONE:
            verdicts.append(_monotone_verdict(report, expectation))
        else:
            value = _closest_record_value(report, expectation.quantity, expectation.at_c)
            if value is None:
                verdicts.append(
                    Verdict(name=expectation.name, passed=False, note="quantity not recorded")
                )
                continue
            scale = abs(expectation.expected) or 1.0
            passed = abs(value - expectation.expected) <= expectation.tolerance * scale
            verdicts.append(
                Verdict(
                    name=expectation.name,
                    passed=passed,
                    observed=value,
                    expected=expectation.expected,
                    tolerance=expectation.tolerance,
                )
            )
    return verdicts

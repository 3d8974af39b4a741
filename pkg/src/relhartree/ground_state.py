"""
Ground-state solvers.

Action problem: (P + lambda) u = N(u) on the Nehari manifold, solved by a
damped Picard iteration with Nehari rescaling. Energy problem: minimize
E on the unit L^2 sphere, solved by a semi-implicit normalized gradient
flow whose fixed points satisfy P w + omega w = N(w).

P is P_c for finite c and P_inf = -Laplace/(2m) at c = INFINITY.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateIterateError,
    DivergenceError,
    InvalidParameterError,
    SubcriticalCollapseError,
)
from .hartree import action, energy, hartree_energy, kinetic_energy, nonlinearity
from .logger import logger
from .models import PhysicalParams, ProblemKind, SolverOptions
from .multipliers import MultiplierSpec, apply_multiplier, quadratic_form, symbol_table
from .radial_core import (
    FloatArray,
    RadialField,
    RadialGrid,
    field_from_coefficients,
    gaussian,
    h_s_norm,
    inner_product,
    l2_norm,
    resample,
    restrict,
    sine_transform,
    spectral_pairing,
)

# Doublings of the flow shift tried before a step is accepted anyway
_MAX_BACKTRACK = 30


@dataclass(frozen=True)
class GroundStateResult:
    """Converged profile plus its level, multiplier and diagnostics."""

    profile: RadialField
    kind: ProblemKind
    params: PhysicalParams
    level: float  # J for the action problem, E for the energy problem
    multiplier: float  # lambda (action) or the extracted omega (energy)
    residual_l2: float
    iterations: int
    converged: bool
    max_energy_increase: float = 0.0

    @property
    def grid(self) -> RadialGrid:
        return self.profile.grid


# =============================================================================
# Shared helpers
# =============================================================================


def _shifted_inverse(table: FloatArray, shift: float, f: RadialField) -> RadialField:
    """(P + shift)^-1 f with P given by its symbol table."""
    return field_from_coefficients(f.grid, sine_transform(f).coeffs / (table + shift))


def _positive(u: RadialField) -> RadialField:
    return -u if float(np.sum(u.values)) < 0 else u


def _initial_profile(
    grid: RadialGrid, params: PhysicalParams, options: SolverOptions
) -> RadialField:
    width = options.initial_width or 2.0 / params.m
    return gaussian(grid, width)


def equation_residual(u: RadialField, params: PhysicalParams, frequency: float) -> float:
    """||(P + frequency) u - N(u)||_L2."""
    kinetic = apply_multiplier(MultiplierSpec.kinetic(params), u)
    return l2_norm(kinetic + frequency * u - nonlinearity(u))


def result_residual(result: GroundStateResult) -> float:
    """Equation residual of a stored result, recomputed from its profile."""
    return equation_residual(result.profile, result.params, result.multiplier)


def _shifted_form(u: RadialField, params: PhysicalParams, shift: float) -> float:
    return kinetic_energy(u, params) + shift * inner_product(u, u)


# =============================================================================
# Action problem
# =============================================================================


def solve_action(
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions | None = None,
    initial: RadialField | None = None,
) -> GroundStateResult:
    """
    Solve (P + lambda) u = N(u) for the positive radial action ground state.

    Args:
        params: Mass, frequency lambda and c (finite or INFINITY)
        grid: Radial grid
        options: Solver options (defaults when omitted)
        initial: Warm start; a Gaussian of width 2/m when omitted

    Returns:
        GroundStateResult of kind ACTION with level J(u)

    Raises:
        InvalidParameterError: lambda missing
        DegenerateIterateError: an iterate has vanishing Hartree energy
        DivergenceError: the H^1/2 norm outgrew the divergence bound
        ConvergenceError: the iteration budget ran out
    """
    options = options or SolverOptions()
    if params.lam is None:
        raise InvalidParameterError("The action problem needs lambda", "lambda")
    lam = params.lam
    table = symbol_table(MultiplierSpec.kinetic(params), grid)
    theta = options.damping

    u = initial if initial is not None else _initial_profile(grid, params, options)
    h0 = hartree_energy(u)
    if not h0 > 0:
        raise DegenerateIterateError(0)
    u = math.sqrt(_shifted_form(u, params, lam) / h0) * u
    reference = h_s_norm(u, 0.5)

    context = {"kind": "action", "c": params.c, "m": params.m, "lambda": lam, "n": grid.n}
    logger.info("Starting action solve", extra={"context": context})

    residual = math.inf
    for iteration in range(1, options.max_iterations + 1):
        v = _shifted_inverse(table, lam, nonlinearity(u))
        hv = hartree_energy(v)
        if not (hv > 0 and math.isfinite(hv)):
            raise DegenerateIterateError(iteration)
        scale = math.sqrt(_shifted_form(v, params, lam) / hv)
        updated = (1.0 - theta) * u + (theta * scale) * v
        step = l2_norm(updated - u)
        u = updated

        growth = h_s_norm(u, 0.5) / reference
        if growth > options.divergence_factor:
            logger.warning(
                "Action solve diverged", extra={"context": {**context, "iteration": iteration}}
            )
            raise DivergenceError(iteration, growth)

        if iteration % options.log_every == 0:
            logger.debug(
                "Action iteration",
                extra={"context": {**context, "iteration": iteration, "step": step}},
            )

        if step < options.tol:
            residual = equation_residual(u, params, lam)
            if residual < options.residual_tol:
                u = _positive(u)
                logger.info(
                    "Action solve converged",
                    extra={"context": {**context, "iterations": iteration, "residual": residual}},
                )
                return GroundStateResult(
                    profile=u,
                    kind=ProblemKind.ACTION,
                    params=params,
                    level=action(u, params),
                    multiplier=lam,
                    residual_l2=residual,
                    iterations=iteration,
                    converged=True,
                )

    residual = equation_residual(u, params, lam)
    logger.warning(
        "Action solve did not converge",
        extra={"context": {**context, "iterations": options.max_iterations, "residual": residual}},
    )
    raise ConvergenceError("action", options.max_iterations, residual)


# =============================================================================
# Energy problem
# =============================================================================


def _multiplier(w: RadialField, nw: RadialField, params: PhysicalParams) -> float:
    """omega = <N(w), w> - <P w, w> for ||w|| = 1."""
    return inner_product(nw, w) - kinetic_energy(w, params)


def solve_energy(
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions | None = None,
    initial: RadialField | None = None,
) -> GroundStateResult:
    """
    Minimize E on the unit L^2 sphere by the semi-implicit normalized flow

        w* = (P + sigma)^-1 [(sigma - mu_k) w_k + N(w_k)],  w_{k+1} = w* / ||w*||,

    with mu_k the current multiplier estimate and sigma = max(2 mu_k, floor).
    A step that raises the energy by more than ``energy_drift_tol`` is retried
    with sigma doubled, so the recorded energies descend.

    Raises:
        SubcriticalCollapseError: c below c_min, or the H^1/2 norm blows up
        DivergenceError: blow-up at c = INFINITY
        DegenerateIterateError: the flow produced a zero profile
        ConvergenceError: the iteration budget ran out
    """
    options = options or SolverOptions()
    c = params.c
    if params.is_relativistic and c < options.c_min:
        raise SubcriticalCollapseError(c, f"below the configured c_min = {options.c_min:g}")
    table = symbol_table(MultiplierSpec.kinetic(params), grid)

    w = initial if initial is not None else _initial_profile(grid, params, options)
    norm = l2_norm(w)
    if norm == 0:
        raise DegenerateIterateError(0)
    w = w / norm
    reference = h_s_norm(w, 0.5)

    context = {"kind": "energy", "c": c, "m": params.m, "n": grid.n}
    logger.info("Starting energy solve", extra={"context": context})

    nw = nonlinearity(w)
    current = kinetic_energy(w, params) - 0.5 * inner_product(nw, w)
    max_increase = 0.0
    residual = math.inf

    for iteration in range(1, options.max_iterations + 1):
        mu = _multiplier(w, nw, params)
        sigma = max(options.stabilization_factor * mu, options.stabilization_floor)

        for _ in range(_MAX_BACKTRACK):
            trial = _shifted_inverse(table, sigma, (sigma - mu) * w + nw)
            trial_norm = l2_norm(trial)
            if not (trial_norm > 0 and math.isfinite(trial_norm)):
                raise DegenerateIterateError(iteration)
            trial = trial / trial_norm
            trial_nw = nonlinearity(trial)
            trial_energy = kinetic_energy(trial, params) - 0.5 * inner_product(trial_nw, trial)
            if trial_energy <= current + options.energy_drift_tol:
                break
            sigma *= 2.0

        max_increase = max(max_increase, trial_energy - current)
        step = l2_norm(trial - w)
        w, nw, current = trial, trial_nw, trial_energy

        growth = h_s_norm(w, 0.5) / reference
        if growth > options.divergence_factor:
            logger.warning(
                "Energy flow blew up", extra={"context": {**context, "iteration": iteration}}
            )
            if params.is_relativistic:
                raise SubcriticalCollapseError(c, f"H^1/2 norm grew by {growth:.3e}")
            raise DivergenceError(iteration, growth)

        if iteration % options.log_every == 0:
            logger.debug(
                "Energy iteration",
                extra={
                    "context": {**context, "iteration": iteration, "step": step, "energy": current}
                },
            )

        if step < options.tol:
            omega = _multiplier(w, nw, params)
            residual = equation_residual(w, params, omega)
            if residual < options.residual_tol:
                w = _positive(w)
                logger.info(
                    "Energy solve converged",
                    extra={
                        "context": {
                            **context,
                            "iterations": iteration,
                            "residual": residual,
                            "omega": omega,
                            "energy": current,
                        }
                    },
                )
                return GroundStateResult(
                    profile=w,
                    kind=ProblemKind.ENERGY,
                    params=params,
                    level=current,
                    multiplier=omega,
                    residual_l2=residual,
                    iterations=iteration,
                    converged=True,
                    max_energy_increase=max(max_increase, 0.0),
                )

    omega = _multiplier(w, nw, params)
    residual = equation_residual(w, params, omega)
    logger.warning(
        "Energy solve did not converge",
        extra={"context": {**context, "iterations": options.max_iterations, "residual": residual}},
    )
    raise ConvergenceError("energy", options.max_iterations, residual)


def solve(
    kind: ProblemKind,
    params: PhysicalParams,
    grid: RadialGrid,
    options: SolverOptions | None = None,
    initial: RadialField | None = None,
) -> GroundStateResult:
    if kind is ProblemKind.ACTION:
        return solve_action(params, grid, options, initial)
    return solve_energy(params, grid, options, initial)


def grid_shift(
    result: GroundStateResult,
    grid: RadialGrid,
    options: SolverOptions | None = None,
    warm_start: bool = True,
) -> float:
    """
    L^2 distance, on the result's own grid, between ``result`` and the same
    problem re-solved on ``grid``.

    ``grid`` must contain the result's nodes: a finer spacing
    (``refined(2)``), a larger radius at the same spacing (``refined(1, 2)``)
    or both. A warm start samples the result's sine series on ``grid`` and
    is zero beyond the old radius.
    """
    initial = resample(result.profile, grid) if warm_start else None
    other = solve(result.kind, result.params, grid, options, initial)
    shift = l2_norm(restrict(other.profile, result.grid) - result.profile)
    logger.info(
        "Grid comparison",
        extra={
            "context": {
                "kind": result.kind.value,
                "from": [result.grid.n, result.grid.radius],
                "to": [grid.n, grid.radius],
                "shift": shift,
            }
        },
    )
    return shift


# =============================================================================
# Diagnostics
# =============================================================================


def pohozaev_residual(result: GroundStateResult) -> float:
    """<T_c w, w> + e_c for finite c, <P_inf w, w> + e_inf at the limit."""
    if result.kind is not ProblemKind.ENERGY:
        raise InvalidParameterError("Pohozaev residual is defined for energy ground states", "kind")
    params = result.params
    operator = MultiplierSpec.tc(params) if params.is_relativistic else MultiplierSpec.pinf(params)
    return quadratic_form(operator, result.profile) + energy(result.profile, params)


def nehari_scale(u_inf: RadialField, params: PhysicalParams) -> float:
    """t_c with t_c^2 = <(P_c + lambda) u_inf, u_inf> / H(u_inf)."""
    if params.lam is None:
        raise InvalidParameterError("The Nehari scale needs lambda", "lambda")
    h = hartree_energy(u_inf)
    if not h > 0:
        raise DegenerateIterateError(0)
    return math.sqrt(_shifted_form(u_inf, params, params.lam) / h)


def nehari_scale_bound(u_inf: RadialField, params: PhysicalParams) -> tuple[float, float]:
    """
    (|t_c^2 - 1| <(P_inf + lambda) u, u>, ||Laplace u||^2 / (8 m^3 c^2)); the first
    never exceeds the second when u_inf lies on the limit Nehari manifold.
    """
    if not params.is_relativistic or params.lam is None:
        raise InvalidParameterError("The Nehari bound needs finite c and lambda", "c")
    t2 = nehari_scale(u_inf, params) ** 2
    limit_form = _shifted_form(u_inf, params.limit(), params.lam)
    bound = spectral_pairing(u_inf, u_inf, 2.0) / (8.0 * params.m**3 * params.c**2)
    return abs(t2 - 1.0) * limit_form, bound


def _laplacian_sq(u: RadialField) -> float:
    return spectral_pairing(u, u, 2.0)


def energy_bracket(w_c: GroundStateResult, w_inf: GroundStateResult) -> tuple[float, float]:
    """
    Two-sided bound on e_c from the limit problem:

        e_inf - ||Lap w_c||^2/(8m^3c^2) <= e_c
            <= e_inf - ||Lap w_inf||^2/(8m^3c^2) + ||(-Lap)^(3/2) w_inf||^2/(16m^5c^4)
    """
    params = w_c.params
    if not params.is_relativistic or w_inf.params.is_relativistic:
        raise InvalidParameterError("Bracket needs a finite-c state and a limit state", "c")
    m, c = params.m, params.c
    e_inf = w_inf.level
    lower = e_inf - _laplacian_sq(w_c.profile) / (8.0 * m**3 * c**2)
    upper = (
        e_inf
        - _laplacian_sq(w_inf.profile) / (8.0 * m**3 * c**2)
        + spectral_pairing(w_inf.profile, w_inf.profile, 3.0) / (16.0 * m**5 * c**4)
    )
    return lower, upper


@dataclass(frozen=True)
class ActionLevelBounds:
    """
    Terms of J_c(u_c) <= J_c(t_c u_inf) <= J_inf(t_c u_inf) and
    J_inf(u_c) <= J_c(u_c) + ||Lap u_c||^2 / (8 m^3 c^2).
    """

    j_c: float
    j_c_scaled_limit: float
    j_inf_scaled_limit: float
    j_inf_at_c: float
    laplacian_term: float
    nehari_scale: float

    @property
    def holds(self) -> bool:
        slack = 1e-12 * max(1.0, abs(self.j_c))
        return (
            self.j_c <= self.j_c_scaled_limit + slack
            and self.j_c_scaled_limit <= self.j_inf_scaled_limit + slack
            and self.j_inf_at_c <= self.j_c + self.laplacian_term + slack
        )


def action_level_bounds(u_c: GroundStateResult, u_inf: GroundStateResult) -> ActionLevelBounds:
    params = u_c.params
    if u_c.kind is not ProblemKind.ACTION or u_inf.kind is not ProblemKind.ACTION:
        raise InvalidParameterError("Action level bounds need action ground states", "kind")
    if not params.is_relativistic:
        raise InvalidParameterError("Action level bounds need finite c", "c")
    limit = params.limit()
    t_c = nehari_scale(u_inf.profile, params)
    scaled = t_c * u_inf.profile
    return ActionLevelBounds(
        j_c=u_c.level,
        j_c_scaled_limit=action(scaled, params),
        j_inf_scaled_limit=action(scaled, limit),
        j_inf_at_c=action(u_c.profile, limit),
        laplacian_term=_laplacian_sq(u_c.profile) / (8.0 * params.m**3 * params.c**2),
        nehari_scale=t_c,
    )


def multiplier_identity_residual(w_c: GroundStateResult, w_inf: GroundStateResult) -> float:
    """
    omega_c - [omega_inf - 3 (e_c - e_inf) + <(P_c - P_inf) w_c, w_c> - <(T_c - P_inf) w_c, w_c>],
    which vanishes when both Pohozaev identities hold.
    """
    params = w_c.params
    if not params.is_relativistic:
        raise InvalidParameterError("Multiplier identity needs finite c", "c")
    w = w_c.profile
    pinf = quadratic_form(MultiplierSpec.pinf(params.limit()), w)
    pc = quadratic_form(MultiplierSpec.pc(params), w)
    tc = quadratic_form(MultiplierSpec.tc(params), w)
    predicted = w_inf.multiplier - 3.0 * (w_c.level - w_inf.level) + (pc - pinf) - (tc - pinf)
    return w_c.multiplier - predicted


def rescale_limit_state(
    result: GroundStateResult, to_kind: ProblemKind, lam: float | None = None
) -> GroundStateResult:
    """
    Map between limit action and limit energy ground states via
    v(x) = mu^2 u(mu x), which sends lambda to lambda mu^2 and ||u||^2 to mu ||u||^2.

    action -> energy uses mu = 1 / ||u||^2; energy -> action uses mu = sqrt(lam / omega).
    """
    params = result.params
    if params.is_relativistic:
        raise InvalidParameterError("Rescaling holds at c = INFINITY only", "c")
    u = result.profile
    if result.kind is ProblemKind.ACTION and to_kind is ProblemKind.ENERGY:
        mu = 1.0 / inner_product(u, u)
        target = PhysicalParams(m=params.m, c=params.c)
    elif result.kind is ProblemKind.ENERGY and to_kind is ProblemKind.ACTION:
        if lam is None or not lam > 0:
            raise InvalidParameterError("Target lambda must be positive", "lambda")
        mu = math.sqrt(lam / result.multiplier)
        target = PhysicalParams(m=params.m, lam=lam, c=params.c)
    else:
        raise InvalidParameterError(
            f"Cannot rescale {result.kind.value} to {to_kind.value}", "kind"
        )

    v = (mu * mu) * resample(u, u.grid, mu)
    frequency = result.multiplier * mu * mu
    level = action(v, target) if to_kind is ProblemKind.ACTION else energy(v, target)
    return GroundStateResult(
        profile=v,
        kind=to_kind,
        params=target,
        level=level,
        multiplier=frequency,
        residual_l2=equation_residual(v, target, frequency),
        iterations=0,
        converged=True,
    )

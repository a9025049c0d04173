"""
One-dimensional cost sweeps over the MTD model.

A cost is addressed as a fraction of `scale_base` (the reward total the
cost percentage refers to); the absolute cost is fraction * scale_base.
"""
import logging
import math
from typing import Iterable, List, Mapping, Optional, Sequence

import numpy as np

from app.errors import ModelMismatchError, NoCrossingError, NonConvergenceError, PreconditionError
from app.models import (
    COST_PARAMETERS,
    LinearSegment,
    MtdAction,
    MtdParams,
    PiecewiseLinearFit,
    SolveReport,
    SweepPoint,
    SweepResult,
    TurningPoint,
)
from app.services.mdp_solver import value_iteration
from app.services.mtd_builder import STATE_ORDER, build_mtd_model, with_overrides

logger = logging.getLogger(__name__)

MAX_FRACTION = 1.5
MIN_FIT_POINTS = 8
FLAT_TOLERANCE = 1e-6


def default_scale_base(params: MtdParams) -> float:
    return params.reward_base + params.reward_defend


def cost_grid(lo: float, hi: float, step: float) -> List[float]:
    """Inclusive grid lo, lo+step, ..., hi (the last point only if it lands on the grid)."""
    if not step > 0:
        raise PreconditionError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise PreconditionError(f"grid end {hi} is below its start {lo}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(count)]


def _check_parameter(parameter: str) -> None:
    if parameter not in COST_PARAMETERS:
        raise PreconditionError(f"{parameter!r} is not a cost parameter (expected one of {', '.join(COST_PARAMETERS)})")


def _check_fraction(fraction: float) -> None:
    if not 0.0 <= fraction <= MAX_FRACTION:
        raise PreconditionError(f"cost fraction {fraction} outside [0, {MAX_FRACTION}]")


def solve_at(
    base: MtdParams,
    parameter: str,
    fraction: float,
    scale_base: float,
    unavailable: Optional[Mapping[str, Iterable[str]]] = None,
) -> SolveReport:
    params = with_overrides(base, **{parameter: fraction * scale_base})
    try:
        return value_iteration(build_mtd_model(params, unavailable), params.gamma, params.epsilon)
    except NonConvergenceError as exc:
        raise NonConvergenceError(exc.report, f"{exc} at {parameter} fraction {fraction:g}") from exc


def sweep_cost(
    base: MtdParams,
    parameter: str,
    fractions: Sequence[float],
    scale_base: Optional[float] = None,
    unavailable: Optional[Mapping[str, Iterable[str]]] = None,
) -> SweepResult:
    """
    Solve the MTD model once per cost fraction of `parameter`.

    Args:
        base: Parameters held fixed across the sweep.
        parameter: Cost field to vary, one of COST_PARAMETERS.
        fractions: Grid of fractions of `scale_base`; sorted and deduplicated.
        scale_base: Absolute cost at fraction 1.0, R + R_D when omitted.
        unavailable: Actions withheld per state.

    Returns:
        SweepResult with actions, values and Q-values at every grid point.
    """
    _check_parameter(parameter)
    if scale_base is None:
        scale_base = default_scale_base(base)
    if not scale_base > 0:
        raise PreconditionError(f"scale_base must be positive, got {scale_base}")
    grid = sorted(set(fractions))
    if not grid:
        raise PreconditionError("sweep needs at least one cost fraction")
    for f in grid:
        _check_fraction(f)

    points = []
    for f in grid:
        report = solve_at(base, parameter, f, scale_base, unavailable)
        logger.debug("%s=%.4f: %s", parameter, f * scale_base, report.policy.assignment)
        points.append(
            SweepPoint(
                fraction=f,
                absolute_cost=f * scale_base,
                actions=dict(report.policy.assignment),
                values=dict(report.value.values),
                q_values=report.q_table,
            )
        )

    return SweepResult(
        swept_parameter=parameter,
        scale_base=scale_base,
        base_params=with_overrides(base),
        grid=points,
    )


def find_turning_point(
    base: MtdParams,
    parameter: str,
    state: str,
    lo: float,
    hi: float,
    tol: float,
    scale_base: Optional[float] = None,
    unavailable: Optional[Mapping[str, Iterable[str]]] = None,
) -> TurningPoint:
    """
    Bisect the cost-fraction axis until the bracket is at most `tol` wide.

    Only one crossing is tracked: if several exist inside [lo, hi] the one
    found depends on where the midpoints fall.
    """
    _check_parameter(parameter)
    if state not in STATE_ORDER:
        raise ModelMismatchError(f"unknown MTD state {state!r}")
    if not tol > 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if not lo < hi:
        raise PreconditionError(f"lo ({lo}) must be below hi ({hi})")
    _check_fraction(lo)
    _check_fraction(hi)
    if scale_base is None:
        scale_base = default_scale_base(base)

    def action_at(fraction: float) -> str:
        return solve_at(base, parameter, fraction, scale_base, unavailable).policy[state]

    from_action, to_action = action_at(lo), action_at(hi)
    if from_action == to_action:
        raise NoCrossingError(
            f"optimal action at {state} is {from_action} at both {parameter} fractions {lo:g} and {hi:g}"
        )

    while hi - lo > tol:
        mid = (lo + hi) / 2
        action = action_at(mid)
        if action == from_action:
            lo = mid
        else:
            hi, to_action = mid, action

    logger.info("turning point at %s: %s -> %s within [%.4f, %.4f]", state, from_action, to_action, lo, hi)
    return TurningPoint(state=state, from_action=from_action, to_action=to_action, bracket_low=lo, bracket_high=hi)


def _series(sweep: SweepResult, state: str, action: str) -> np.ndarray:
    try:
        return np.array([p.q_values[state][action] for p in sweep.grid])
    except KeyError:
        raise ModelMismatchError(f"no {action} value at state {state!r} in this sweep") from None


def _segment(xs: np.ndarray, ys: np.ndarray):
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.max(np.abs(ys - (slope * xs + intercept))))
    return LinearSegment(start=float(xs[0]), end=float(xs[-1]), slope=float(slope), intercept=float(intercept)), residual


def fit_piecewise(sweep: SweepResult, state: str, action: str) -> PiecewiseLinearFit:
    """
    Fit one or two straight lines to the action value against the cost fraction.

    When the curve ends in a flat tail the breakpoint is the start of that tail,
    so the second segment has zero slope. Otherwise the breakpoint is the first
    sample of the second segment, picked to minimise the larger of the two
    segment residuals.

    Args:
        sweep: A cost sweep with at least MIN_FIT_POINTS grid points.
        state: State whose Q-values are fitted.
        action: Action whose Q-values are fitted.

    Returns:
        PiecewiseLinearFit with slopes per cost fraction.
    """
    ys = _series(sweep, state, action)
    xs = np.array(sweep.fractions)
    if len(xs) < MIN_FIT_POINTS:
        raise PreconditionError(f"piecewise fit needs at least {MIN_FIT_POINTS} grid points, got {len(xs)}")

    single, single_residual = _segment(xs, ys)
    best = PiecewiseLinearFit(state=state, action=action, segments=[single], max_residual=single_residual)
    if single_residual <= FLAT_TOLERANCE:
        return best

    tail = find_flat_tail(sweep, state, action)
    if tail is not None:
        k = sweep.fractions.index(tail)
        if k >= 2:
            left, left_residual = _segment(xs[:k], ys[:k])
            right, right_residual = _segment(xs[k:], ys[k:])
            return PiecewiseLinearFit(
                state=state,
                action=action,
                segments=[left, right],
                breakpoint=tail,
                max_residual=max(left_residual, right_residual),
            )

    for k in range(2, len(xs) - 1):
        left, left_residual = _segment(xs[:k], ys[:k])
        right, right_residual = _segment(xs[k:], ys[k:])
        residual = max(left_residual, right_residual)
        if residual < best.max_residual:
            best = PiecewiseLinearFit(
                state=state,
                action=action,
                segments=[left, right],
                breakpoint=float(xs[k]),
                max_residual=residual,
            )
    return best


def find_flat_tail(
    sweep: SweepResult,
    state: str,
    action: str,
    atol: float = FLAT_TOLERANCE,
    min_points: int = 3,
) -> Optional[float]:
    """Earliest fraction from which the action value stays within atol of its final value."""
    ys = _series(sweep, state, action)
    start = len(ys) - 1
    while start > 0 and abs(ys[start - 1] - ys[-1]) <= atol:
        start -= 1
    if len(ys) - start < min_points:
        return None
    return sweep.grid[start].fraction


def policy_switches(sweep: SweepResult, state: str) -> List[TurningPoint]:
    if state not in sweep.grid[0].actions:
        raise ModelMismatchError(f"unknown state {state!r}")
    switches = []
    for prev, point in zip(sweep.grid, sweep.grid[1:]):
        if prev.actions[state] != point.actions[state]:
            switches.append(
                TurningPoint(
                    state=state,
                    from_action=prev.actions[state],
                    to_action=point.actions[state],
                    bracket_low=prev.fraction,
                    bracket_high=point.fraction,
                )
            )
    return switches


def calibrate_scale_base(
    params: MtdParams,
    candidates: Optional[Sequence[float]] = None,
    target_low: float = 0.275,
    target_high: float = 0.30,
    tol: float = 0.005,
) -> float:
    """
    Pick the first reward total under which the defense-cost turning point at E
    (Defend -> Reset) falls inside [target_low, target_high].
    """
    if candidates is None:
        candidates = (params.reward_base, params.reward_base + params.reward_defend)

    for scale_base in candidates:
        try:
            turning = find_turning_point(params, "cost_defend", "E", 0.05, 1.0, tol, scale_base=scale_base)
        except NoCrossingError:
            logger.debug("scale base %g: no crossing at E", scale_base)
            continue
        logger.debug(
            "scale base %g: %s -> %s in [%.4f, %.4f]",
            scale_base,
            turning.from_action,
            turning.to_action,
            turning.bracket_low,
            turning.bracket_high,
        )
        if (
            turning.from_action == MtdAction.DEFEND.value
            and turning.to_action == MtdAction.RESET.value
            and target_low <= turning.bracket_low
            and turning.bracket_high <= target_high
        ):
            logger.info("calibrated cost scale base: %g", scale_base)
            return scale_base

    raise PreconditionError(
        f"no candidate scale base puts the defense turning point inside [{target_low}, {target_high}]"
    )

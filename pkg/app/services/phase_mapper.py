import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence

from app.errors import ModelMismatchError, NonConvergenceError, PreconditionError
from app.models import COST_PARAMETERS, CaseStudyPreset, MtdParams, MtdState, PhaseDiagram
from app.services.cost_sweeper import MAX_FRACTION, cost_grid, default_scale_base
from app.services.mdp_solver import value_iteration
from app.services.mtd_builder import STATE_ORDER, build_mtd_model, with_overrides

logger = logging.getLogger(__name__)

# Illustrative settings: only the cost orderings matter, not the exact numbers.
CASE_STUDY_PRESETS: Dict[str, CaseStudyPreset] = {
    "decoy": CaseStudyPreset(
        name="decoy",
        description="Decoy-based MTD: expensive defense, cheap exploitation and breach of decoys",
        x_parameter="cost_defend",
        y_parameter="cost_reset",
        overrides={"cost_exploit": 0.5, "cost_breach": 0.5},
        fractions=cost_grid(0.05, 1.0, 0.05),
        state=MtdState.E,
    ),
    "scit": CaseStudyPreset(
        name="scit",
        description="Self-cleansing rotation of virtual machines: reset cost against exploitation damage",
        x_parameter="cost_reset",
        y_parameter="cost_exploit",
        overrides={"cost_defend": 9.0},
        fractions=cost_grid(0.05, 1.0, 0.05),
        state=MtdState.E,
    ),
}


def phase_diagram(
    base: MtdParams,
    x_parameter: str,
    y_parameter: str,
    x_fractions: Sequence[float],
    y_fractions: Sequence[float],
    state: str,
    scale_base: Optional[float] = None,
    unavailable: Optional[Mapping[str, Iterable[str]]] = None,
) -> PhaseDiagram:
    """Optimal action at `state` for every (x, y) pair of cost fractions."""
    for name in (x_parameter, y_parameter):
        if name not in COST_PARAMETERS:
            raise PreconditionError(f"{name!r} is not a cost parameter")
    if x_parameter == y_parameter:
        raise PreconditionError("phase diagram axes must be two different cost parameters")
    if not x_fractions or not y_fractions:
        raise PreconditionError("phase diagram grids must not be empty")
    for f in (*x_fractions, *y_fractions):
        if not 0.0 <= f <= MAX_FRACTION:
            raise PreconditionError(f"cost fraction {f} outside [0, {MAX_FRACTION}]")
    if state not in STATE_ORDER:
        raise ModelMismatchError(f"unknown MTD state {state!r}")
    if scale_base is None:
        scale_base = default_scale_base(base)

    actions = []
    for fx in x_fractions:
        column = []
        for fy in y_fractions:
            params = with_overrides(base, **{x_parameter: fx * scale_base, y_parameter: fy * scale_base})
            try:
                report = value_iteration(build_mtd_model(params, unavailable), params.gamma, params.epsilon)
            except NonConvergenceError as exc:
                raise NonConvergenceError(
                    exc.report, f"{exc} at cell {x_parameter}={fx:g}, {y_parameter}={fy:g}"
                ) from exc
            column.append(report.policy[state])
        actions.append(column)

    logger.debug("phase diagram %s x %s at %s: %dx%d cells", x_parameter, y_parameter, state, len(x_fractions), len(y_fractions))
    return PhaseDiagram(
        x_parameter=x_parameter,
        y_parameter=y_parameter,
        state=state,
        params=with_overrides(base),
        scale_base=scale_base,
        x_fractions=list(x_fractions),
        y_fractions=list(y_fractions),
        actions=actions,
    )


def case_study(
    preset: str,
    overrides: Optional[Mapping[str, float]] = None,
    base: Optional[MtdParams] = None,
) -> PhaseDiagram:
    """
    Run a named case-study diagram.

    Args:
        preset: Key into CASE_STUDY_PRESETS.
        overrides: Parameter values applied on top of the preset.
        base: Starting parameters, baseline when omitted.

    Returns:
        The preset's phase diagram.
    """
    if preset not in CASE_STUDY_PRESETS:
        raise PreconditionError(f"unknown case-study preset {preset!r} (expected one of {', '.join(CASE_STUDY_PRESETS)})")
    study = CASE_STUDY_PRESETS[preset]
    params = with_overrides(base or MtdParams(), **{**study.overrides, **(overrides or {})})
    logger.info("case study %s: %s", study.name, study.description)
    return phase_diagram(
        params,
        study.x_parameter,
        study.y_parameter,
        study.fractions,
        study.fractions,
        study.state.value,
    )

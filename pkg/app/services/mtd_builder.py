import logging
from typing import Dict, Iterable, Mapping, Optional

from app.errors import ModelMismatchError, PreconditionError
from app.models import MdpModel, MtdAction, MtdParams, MtdState, ValueFunction
from app.services.mdp_solver import restrict_actions

logger = logging.getLogger(__name__)

STATE_ORDER = [s.value for s in MtdState]
ACTION_ORDER = [a.value for a in MtdAction]


def state_cost(params: MtdParams, state: str) -> float:
    """Adversary cost charged on every transition leaving `state`."""
    costs = {
        MtdState.N.value: 0.0,
        MtdState.T.value: params.cost_targeted,
        MtdState.E.value: params.cost_exploit,
        MtdState.B.value: params.cost_breach,
    }
    if state not in costs:
        raise ModelMismatchError(f"unknown MTD state {state!r}")
    return costs[state]


def with_overrides(params: MtdParams, **updates) -> MtdParams:
    unknown = sorted(set(updates) - set(MtdParams.model_fields))
    if unknown:
        raise PreconditionError(f"unknown parameter(s): {', '.join(unknown)}")
    base = params.model_dump(include=set(MtdParams.model_fields))
    return MtdParams.model_validate({**base, **updates})


def _wait_row(params: MtdParams, state: str) -> Dict[str, float]:
    if state == MtdState.N.value:
        return {"N": 1.0 - params.p_target, "T": params.p_target}
    if state == MtdState.T.value:
        return {"T": 1.0 - params.p_exploit, "E": params.p_exploit}
    if state == MtdState.E.value:
        return {"E": 1.0 - params.p_breach, "B": params.p_breach}
    return {"B": 1.0}


def _defend_row(params: MtdParams, state: str) -> Dict[str, float]:
    # success restores N, failure follows the Wait dynamics
    row = {nxt: (1.0 - params.p_defend) * p for nxt, p in _wait_row(params, state).items()}
    row["N"] = row.get("N", 0.0) + params.p_defend
    return row


def _positive(row: Dict[str, float]) -> Dict[str, float]:
    return {nxt: p for nxt, p in row.items() if p > 0}


def build_mtd_model(
    params: MtdParams,
    unavailable: Optional[Mapping[str, Iterable[str]]] = None,
) -> MdpModel:
    """
    Four-state, three-action MTD process.

    Costs are charged by source state: Wait earns R - C(s), Defend earns
    R + R_D - C(s) - C_D, Reset earns R - C_R and always returns to N.
    Defend at B exists only when params.breach_defendable is set.
    """
    transitions: Dict[str, Dict[str, Dict[str, float]]] = {}
    rewards: Dict[str, Dict[str, Dict[str, float]]] = {}

    for state in STATE_ORDER:
        cost = state_cost(params, state)
        rows = {
            MtdAction.WAIT.value: (_wait_row(params, state), params.reward_base - cost),
            MtdAction.DEFEND.value: (
                _defend_row(params, state),
                params.reward_base + params.reward_defend - cost - params.cost_defend,
            ),
            MtdAction.RESET.value: ({"N": 1.0}, params.reward_base - params.cost_reset),
        }
        if state == MtdState.B.value and not params.breach_defendable:
            del rows[MtdAction.DEFEND.value]

        transitions[state] = {}
        rewards[state] = {}
        for action, (row, reward) in rows.items():
            row = _positive(row)
            transitions[state][action] = row
            rewards[state][action] = {nxt: reward for nxt in row}

    model = MdpModel(states=STATE_ORDER, actions=ACTION_ORDER, transitions=transitions, rewards=rewards)
    if unavailable:
        logger.debug("withholding actions: %s", dict(unavailable))
        model = restrict_actions(model, unavailable)
    return model


def bellman_at_E(params: MtdParams, v: ValueFunction) -> Dict[str, float]:
    """The three branches of the optimality equation at E, written out term by term."""
    R, R_D = params.reward_base, params.reward_defend
    C_A, C_D, C_R = params.cost_exploit, params.cost_defend, params.cost_reset
    P_B, P_D, gamma = params.p_breach, params.p_defend, params.gamma

    wait = (1 - P_B) * ((R - C_A) + gamma * v["E"]) + P_B * ((R - C_A) + gamma * v["B"])
    defend = (
        P_D * ((R + R_D - C_A - C_D) + gamma * v["N"])
        + (1 - P_D) * (1 - P_B) * ((R + R_D - C_A - C_D) + gamma * v["E"])
        + (1 - P_D) * P_B * ((R + R_D - C_A - C_D) + gamma * v["B"])
    )
    reset = (R - C_R) + gamma * v["N"]
    return {MtdAction.WAIT.value: wait, MtdAction.DEFEND.value: defend, MtdAction.RESET.value: reset}

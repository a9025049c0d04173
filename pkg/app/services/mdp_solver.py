"""
Generic finite-MDP solving: validation, Bellman backups, value iteration,
policy evaluation and greedy policy extraction.

Every solver compiles the MdpModel into dense numpy arrays first:
P[s, a, s'] and R[s, a, s'] plus a boolean availability mask[s, a].
"""
import logging
from typing import Dict, Iterable, List, Literal, Mapping, NamedTuple

import numpy as np

from app.errors import InvalidModelError, ModelMismatchError, NonConvergenceError, PreconditionError
from app.models import MdpModel, Policy, SolveReport, ValueFunction, Violation

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9
CONTRACTION_SLACK = 1e-12


class CompiledModel(NamedTuple):
    states: List[str]
    actions: List[str]
    P: np.ndarray
    R: np.ndarray
    mask: np.ndarray


def validate(model: MdpModel) -> List[Violation]:
    violations: List[Violation] = []
    known_states = set(model.states)
    known_actions = set(model.actions)

    for state, row in model.transitions.items():
        if state not in known_states:
            violations.append(Violation(state=state, rule="unknown-state", message=f"unknown state {state!r}"))
            continue
        for action, successors in row.items():
            if action not in known_actions:
                violations.append(
                    Violation(state=state, action=action, rule="unknown-action", message=f"unknown action {action!r}")
                )
                continue
            rewards = model.rewards.get(state, {}).get(action, {})
            total = 0.0
            for nxt, p in successors.items():
                if nxt not in known_states:
                    violations.append(
                        Violation(
                            state=state,
                            action=action,
                            rule="unknown-state",
                            message=f"({state}, {action}) moves to unknown state {nxt!r}",
                        )
                    )
                    continue
                if not 0.0 <= p <= 1.0:
                    violations.append(
                        Violation(
                            state=state,
                            action=action,
                            rule="probability-range",
                            message=f"({state}, {action}) -> {nxt} has probability {p:.10g} outside [0, 1]",
                        )
                    )
                if p > 0 and nxt not in rewards:
                    violations.append(
                        Violation(
                            state=state,
                            action=action,
                            rule="missing-reward",
                            message=f"({state}, {action}) -> {nxt} has no reward",
                        )
                    )
                total += p
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                violations.append(
                    Violation(
                        state=state,
                        action=action,
                        rule="stochastic",
                        message=f"probabilities sum to {total:.10g} ≠ 1",
                    )
                )

    for state, row in model.rewards.items():
        for action, entries in row.items():
            successors = model.transitions.get(state, {}).get(action, {})
            for nxt in entries:
                if successors.get(nxt, 0.0) <= 0.0:
                    violations.append(
                        Violation(
                            state=state,
                            action=action,
                            rule="orphan-reward",
                            message=f"reward on ({state}, {action}) -> {nxt} without a positive-probability transition",
                        )
                    )

    for state in model.states:
        if not model.available_actions(state):
            violations.append(Violation(state=state, rule="no-action", message=f"state {state!r} has no available action"))

    return violations


def compile_model(model: MdpModel) -> CompiledModel:
    violations = validate(model)
    if violations:
        raise InvalidModelError(violations)

    s_index = {s: i for i, s in enumerate(model.states)}
    n_s, n_a = len(model.states), len(model.actions)
    P = np.zeros((n_s, n_a, n_s))
    R = np.zeros((n_s, n_a, n_s))
    mask = np.zeros((n_s, n_a), dtype=bool)

    for i, state in enumerate(model.states):
        row = model.transitions.get(state, {})
        for j, action in enumerate(model.actions):
            if action not in row:
                continue
            mask[i, j] = True
            rewards = model.rewards.get(state, {}).get(action, {})
            for nxt, p in row[action].items():
                if p > 0:
                    P[i, j, s_index[nxt]] = p
                    R[i, j, s_index[nxt]] = rewards[nxt]

    return CompiledModel(list(model.states), list(model.actions), P, R, mask)


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise PreconditionError(f"gamma must lie in (0, 1), got {gamma}")


def _as_vector(compiled: CompiledModel, v: ValueFunction) -> np.ndarray:
    if set(v.values) != set(compiled.states):
        raise ModelMismatchError("value function is not defined on exactly the model's states")
    return np.array([v.values[s] for s in compiled.states], dtype=float)


def _q_matrix(compiled: CompiledModel, v: np.ndarray, gamma: float) -> np.ndarray:
    # Σ_s' P(s,a,s')·[R(s,a,s') + γ·v(s')], unavailable actions pinned to -inf
    q = (compiled.P * (compiled.R + gamma * v[None, None, :])).sum(axis=2)
    return np.where(compiled.mask, q, -np.inf)


def _greedy(compiled: CompiledModel, q: np.ndarray) -> Policy:
    # np.argmax returns the first maximiser, i.e. the earliest action in model order
    best = np.argmax(q, axis=1)
    return Policy(assignment={s: compiled.actions[best[i]] for i, s in enumerate(compiled.states)})


def _q_table(compiled: CompiledModel, q: np.ndarray) -> Dict[str, Dict[str, float]]:
    return {
        s: {a: float(q[i, j]) for j, a in enumerate(compiled.actions) if compiled.mask[i, j]}
        for i, s in enumerate(compiled.states)
    }


def bellman_backup(model: MdpModel, v: ValueFunction, gamma: float, state: str) -> Dict[str, float]:
    _check_gamma(gamma)
    if state not in model.states:
        raise ModelMismatchError(f"unknown state {state!r}")
    compiled = compile_model(model)
    q = _q_matrix(compiled, _as_vector(compiled, v), gamma)
    i = compiled.states.index(state)
    return {a: float(q[i, j]) for j, a in enumerate(compiled.actions) if compiled.mask[i, j]}


def contraction_violations(deltas: List[float], gamma: float) -> List[int]:
    """Indices i >= 1 where Δ_i > γ·Δ_{i-1} + 1e-12."""
    return [i for i in range(1, len(deltas)) if deltas[i] > gamma * deltas[i - 1] + CONTRACTION_SLACK]


def value_iteration(
    model: MdpModel,
    gamma: float,
    epsilon: float,
    max_iterations: int = 10_000,
) -> SolveReport:
    """
    Iterate V_{i+1}(s) = max_a Σ P·[R + γV_i] from V_0 = 0 until the max-norm
    change drops below epsilon.

    Raises NonConvergenceError carrying the partial report when max_iterations
    sweeps are not enough.
    """
    _check_gamma(gamma)
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    if max_iterations < 1:
        raise PreconditionError(f"max_iterations must be at least 1, got {max_iterations}")

    compiled = compile_model(model)
    v = np.zeros(len(compiled.states))
    deltas: List[float] = []
    converged = False

    for _ in range(max_iterations):
        q = _q_matrix(compiled, v, gamma)
        v_next = q.max(axis=1)
        delta = float(np.max(np.abs(v_next - v)))
        deltas.append(delta)
        v = v_next
        logger.debug("sweep %d: delta=%.3e", len(deltas), delta)
        if delta < epsilon:
            converged = True
            break

    for i in contraction_violations(deltas, gamma):
        logger.warning(
            "contraction check failed at sweep %d: delta %.3e > gamma * %.3e", i + 1, deltas[i], deltas[i - 1]
        )

    report = SolveReport(
        value=ValueFunction(values={s: float(v[i]) for i, s in enumerate(compiled.states)}),
        policy=_greedy(compiled, q),
        iterations=len(deltas),
        final_delta=deltas[-1],
        q_table=_q_table(compiled, q),
        deltas=deltas,
        converged=converged,
    )
    if not converged:
        logger.warning("value iteration stopped at %d sweeps, delta %.3e", len(deltas), deltas[-1])
        raise NonConvergenceError(report)
    return report


def policy_action_indices(compiled: CompiledModel, policy: Policy) -> np.ndarray:
    if set(policy.assignment) != set(compiled.states):
        raise ModelMismatchError("policy must assign an action to exactly the model's states")
    chosen = []
    for i, state in enumerate(compiled.states):
        action = policy.assignment[state]
        if action not in compiled.actions or not compiled.mask[i, compiled.actions.index(action)]:
            raise ModelMismatchError(f"action {action!r} is not available in state {state!r}")
        chosen.append(compiled.actions.index(action))
    return np.array(chosen)


def policy_evaluation(
    model: MdpModel,
    policy: Policy,
    gamma: float,
    epsilon: float = 1e-10,
    method: Literal["linear", "iterative"] = "linear",
    max_iterations: int = 100_000,
) -> ValueFunction:
    _check_gamma(gamma)
    compiled = compile_model(model)
    chosen = policy_action_indices(compiled, policy)
    rows = np.arange(len(compiled.states))
    P_pi = compiled.P[rows, chosen]
    r_pi = (P_pi * compiled.R[rows, chosen]).sum(axis=1)

    if method == "linear":
        v = np.linalg.solve(np.eye(len(rows)) - gamma * P_pi, r_pi)
    elif method == "iterative":
        if not epsilon > 0:
            raise PreconditionError(f"epsilon must be positive, got {epsilon}")
        v = np.zeros(len(rows))
        for _ in range(max_iterations):
            v_next = r_pi + gamma * P_pi @ v
            change = float(np.max(np.abs(v_next - v)))
            v = v_next
            if change < epsilon:
                break
        else:
            raise NonConvergenceError(None, f"policy evaluation did not converge after {max_iterations} sweeps")
    else:
        raise PreconditionError(f"unknown evaluation method {method!r}")

    return ValueFunction(values={s: float(v[i]) for i, s in enumerate(compiled.states)})


def extract_policy(model: MdpModel, v: ValueFunction, gamma: float) -> Policy:
    _check_gamma(gamma)
    compiled = compile_model(model)
    return _greedy(compiled, _q_matrix(compiled, _as_vector(compiled, v), gamma))


def restrict_actions(model: MdpModel, unavailable: Mapping[str, Iterable[str]]) -> MdpModel:
    """Copy of `model` with each action in `unavailable` removed from the listed states."""
    transitions = {s: dict(row) for s, row in model.transitions.items()}
    rewards = {s: dict(row) for s, row in model.rewards.items()}

    for action, states in unavailable.items():
        if action not in model.actions:
            raise ModelMismatchError(f"unknown action {action!r}")
        for state in states:
            if state not in model.states:
                raise ModelMismatchError(f"unknown state {state!r}")
            transitions.get(state, {}).pop(action, None)
            rewards.get(state, {}).pop(action, None)

    for state in model.states:
        if not transitions.get(state):
            raise PreconditionError(f"removing actions would leave state {state!r} with no available action")

    return MdpModel(states=model.states, actions=model.actions, transitions=transitions, rewards=rewards)

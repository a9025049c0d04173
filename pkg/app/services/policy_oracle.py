"""
Independent checks on value iteration: brute-force enumeration of every
deterministic policy, and seeded Monte Carlo estimates of discounted returns.
"""
import itertools
import logging
import math
from typing import Optional

import numpy as np

from app.errors import ModelMismatchError, PreconditionError
from app.models import EnumerationResult, McEstimate, MdpModel, Policy, PolicyValue, ValueFunction
from app.services.mdp_solver import compile_model, policy_action_indices, policy_evaluation

logger = logging.getLogger(__name__)

ENUMERATION_GUARD = 10_000
TIE_TOLERANCE = 1e-9
TRUNCATION_TOLERANCE = 0.01


def enumerate_policies(model: MdpModel, gamma: float, guard: int = ENUMERATION_GUARD) -> EnumerationResult:
    choices = [model.available_actions(s) for s in model.states]
    count = math.prod(len(c) for c in choices)
    if count > guard:
        raise PreconditionError(f"{count} deterministic policies exceed the enumeration guard of {guard}")

    table = []
    for combo in itertools.product(*choices):
        policy = Policy(assignment=dict(zip(model.states, combo)))
        table.append(PolicyValue(policy=policy, value=policy_evaluation(model, policy, gamma)))

    values = np.array([[row.value[s] for s in model.states] for row in table])
    envelope = values.max(axis=0)
    attaining = [row.policy for row, v in zip(table, values) if np.all(v >= envelope - TIE_TOLERANCE)]
    logger.debug("enumerated %d policies, %d attain the envelope", len(table), len(attaining))

    return EnumerationResult(
        best_policy=attaining[0] if attaining else None,
        envelope=ValueFunction(values={s: float(envelope[i]) for i, s in enumerate(model.states)}),
        uniform_optimum=bool(attaining),
        ties=attaining if len(attaining) > 1 else [],
        table=table,
    )


def required_horizon(gamma: float, reward_bound: float, tolerance: float = TRUNCATION_TOLERANCE) -> int:
    """Smallest H >= 1 with gamma**H * reward_bound / (1 - gamma) < tolerance."""
    if not 0.0 < gamma < 1.0:
        raise PreconditionError(f"gamma must lie in (0, 1), got {gamma}")
    if not tolerance > 0:
        raise PreconditionError(f"tolerance must be positive, got {tolerance}")
    horizon = 1
    while gamma**horizon * abs(reward_bound) / (1.0 - gamma) >= tolerance:
        horizon += 1
    return horizon


def monte_carlo_eval(
    model: MdpModel,
    policy: Policy,
    gamma: float,
    state: str,
    episodes: int,
    horizon: Optional[int] = None,
    seed: int = 0,
) -> McEstimate:
    """
    Mean truncated discounted return of `episodes` trajectories started in `state`.

    All episodes advance in lockstep on one numpy Generator, so the same seed
    always yields the same estimate.

    Args:
        model: Validated MDP.
        policy: Action per state.
        gamma: Discount factor.
        state: Start state of every episode.
        episodes: Number of trajectories, at least 1.
        horizon: Steps per episode; defaults to the shortest horizon whose
            truncation error stays below 0.01.
        seed: Seed for `numpy.random.default_rng`.

    Returns:
        McEstimate with the mean return and its standard error.
    """
    if state not in model.states:
        raise ModelMismatchError(f"unknown state {state!r}")
    if episodes < 1:
        raise PreconditionError(f"episodes must be at least 1, got {episodes}")

    compiled = compile_model(model)
    chosen = policy_action_indices(compiled, policy)
    rows = np.arange(len(compiled.states))
    P_pi = compiled.P[rows, chosen]
    R_pi = compiled.R[rows, chosen]

    reward_bound = float(np.max(np.abs(compiled.R[compiled.P > 0])))
    needed = required_horizon(gamma, reward_bound)
    if horizon is None:
        horizon = needed
    elif horizon < needed:
        raise PreconditionError(
            f"horizon {horizon} leaves truncation error above {TRUNCATION_TOLERANCE}; need at least {needed}"
        )

    cumulative = np.cumsum(P_pi, axis=1)
    for i in rows:
        last = np.flatnonzero(P_pi[i] > 0)[-1]
        cumulative[i, last:] = 1.0

    rng = np.random.default_rng(seed)
    current = np.full(episodes, compiled.states.index(state))
    returns = np.zeros(episodes)
    discount = 1.0
    for _ in range(horizon):
        draws = rng.random(episodes)
        nxt = (draws[:, None] >= cumulative[current]).sum(axis=1)
        returns += discount * R_pi[current, nxt]
        discount *= gamma
        current = nxt

    standard_error = float(returns.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return McEstimate(
        state=state,
        policy=policy,
        episodes=episodes,
        horizon=horizon,
        seed=seed,
        mean_return=float(returns.mean()),
        standard_error=standard_error,
    )

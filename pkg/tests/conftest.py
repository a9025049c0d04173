import logging

import pytest

from app.models import MdpModel, MtdParams
from app.services.cost_sweeper import cost_grid, sweep_cost
from app.services.mdp_solver import value_iteration
from app.services.mtd_builder import build_mtd_model
from app.services.phase_mapper import phase_diagram


def self_loop_model(reward: float = 5.0, probability: float = 1.0) -> MdpModel:
    """One state, one action, looping back on itself."""
    return MdpModel(
        states=["s"],
        actions=["a"],
        transitions={"s": {"a": {"s": probability}}},
        rewards={"s": {"a": {"s": reward}}},
    )


def two_action_model(first: float = 1.0, second: float = 2.0) -> MdpModel:
    return MdpModel(
        states=["s"],
        actions=["a1", "a2"],
        transitions={"s": {"a1": {"s": 1.0}, "a2": {"s": 1.0}}},
        rewards={"s": {"a1": {"s": first}, "a2": {"s": second}}},
    )


def chain_model(n_states: int, n_actions: int = 3) -> MdpModel:
    """Every action moves one step right (the last state loops); action k pays k."""
    states = [f"s{i}" for i in range(n_states)]
    actions = [f"a{k}" for k in range(n_actions)]
    transitions, rewards = {}, {}
    for i, s in enumerate(states):
        nxt = states[min(i + 1, n_states - 1)]
        transitions[s] = {a: {nxt: 1.0} for a in actions}
        rewards[s] = {a: {nxt: float(k)} for k, a in enumerate(actions)}
    return MdpModel(states=states, actions=actions, transitions=transitions, rewards=rewards)


@pytest.fixture(autouse=True)
def restore_log_level():
    """`--verbose` lowers the package log level; put it back after each test."""
    logger = logging.getLogger("app")
    level = logger.level
    yield
    logger.setLevel(level)


@pytest.fixture
def baseline_params():
    """Published baseline parameters."""
    return MtdParams()


@pytest.fixture
def baseline_model(baseline_params):
    return build_mtd_model(baseline_params)


@pytest.fixture
def precise_report(baseline_model):
    """Baseline solved to a tolerance far below the oracle comparisons."""
    return value_iteration(baseline_model, 0.9, 1e-8)


@pytest.fixture(scope="session")
def sweep_grid():
    return cost_grid(0.05, 1.0, 0.025)


@pytest.fixture(scope="session")
def defense_sweep(sweep_grid):
    """Defense-cost sweep at the calibrated scale base of 15 reward points."""
    return sweep_cost(MtdParams(), "cost_defend", sweep_grid, 15.0)


@pytest.fixture(scope="session")
def reset_sweep(sweep_grid):
    """Reset-cost sweep with the defense cost held at 4."""
    return sweep_cost(MtdParams(), "cost_reset", sweep_grid, 15.0)


@pytest.fixture(scope="session")
def defense_exploit_diagram():
    grid = cost_grid(0.0, 1.0, 0.025)
    return phase_diagram(MtdParams(), "cost_defend", "cost_exploit", grid, grid, "E")


@pytest.fixture(scope="session")
def exploit_sweep(sweep_grid):
    """Exploitation-cost sweep with everything else at baseline."""
    return sweep_cost(MtdParams(), "cost_exploit", sweep_grid, 15.0)

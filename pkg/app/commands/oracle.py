import logging

import click

from app.commands.common import config_option, output_option, parse_assignments, resolve_config, set_option
from app.errors import ModelMismatchError
from app.models import Policy
from app.services.csv_writer import enumeration_frame, estimate_frame, write_csv
from app.services.mdp_solver import value_iteration
from app.services.mtd_builder import STATE_ORDER, build_mtd_model
from app.services.policy_oracle import enumerate_policies, monte_carlo_eval

logger = logging.getLogger(__name__)


@click.command("enumerate")
@config_option
@set_option
@output_option
def enumerate_command(config_path, assignments, output):
    """Evaluate every deterministic policy and flag those attaining the upper envelope."""
    config = resolve_config(config_path, assignments, output=output)
    params = config.to_params()
    result = enumerate_policies(build_mtd_model(params), params.gamma)
    if result.ties:
        logger.info("%d policies share the optimal value vector", len(result.ties))
    write_csv(enumeration_frame(result), config.output)


@click.command("mc-eval")
@config_option
@click.option("--state", type=click.Choice(STATE_ORDER), default=None)
@click.option("--episodes", type=int, default=None)
@click.option("--horizon", type=int, default=None, help="Steps per episode (default: smallest safe horizon).")
@click.option("--seed", type=int, default=None)
@click.option(
    "--action",
    "pinned",
    multiple=True,
    metavar="STATE=ACTION",
    help="Replace the solver's action at one state (repeatable).",
)
@set_option
@output_option
def mc_eval(config_path, state, episodes, horizon, seed, pinned, assignments, output):
    """Monte Carlo estimate of a policy's return, next to the solver's value."""
    config = resolve_config(
        config_path, assignments, state=state, episodes=episodes, horizon=horizon, seed=seed, output=output
    )
    params = config.to_params()
    model = build_mtd_model(params)
    report = value_iteration(model, params.gamma, params.epsilon)

    assignment = dict(report.policy.assignment)
    for s, action in parse_assignments(pinned, option="--action").items():
        if s not in assignment:
            raise ModelMismatchError(f"unknown state {s!r}")
        assignment[s] = action
    policy = Policy(assignment=assignment)

    estimate = monte_carlo_eval(
        model, policy, params.gamma, config.state.value, config.episodes, config.horizon, config.seed
    )
    solver_value = report.value[config.state.value] if policy == report.policy else float("nan")
    write_csv(estimate_frame(estimate, solver_value), config.output)

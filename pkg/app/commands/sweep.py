import logging

import click

from app.commands.common import config_option, output_option, resolve_config, set_option, withheld_everywhere
from app.models import COST_PARAMETERS
from app.services.cost_sweeper import cost_grid, find_turning_point, sweep_cost
from app.services.csv_writer import sweep_frame, turning_point_frame, write_csv
from app.services.mtd_builder import ACTION_ORDER, STATE_ORDER

logger = logging.getLogger(__name__)

param_option = click.option("--param", "parameter", type=click.Choice(COST_PARAMETERS), default=None)
state_option = click.option("--state", type=click.Choice(STATE_ORDER), default=None)
scale_base_option = click.option(
    "--scale-base", type=float, default=None, help="Reward total the cost fractions refer to (default R + R_D)."
)
without_option = click.option(
    "--without",
    "withheld",
    multiple=True,
    type=click.Choice(ACTION_ORDER),
    help="Withhold an action at every state (repeatable).",
)


@click.command("sweep")
@config_option
@param_option
@click.option("--from", "start", type=float, default=None)
@click.option("--to", "stop", type=float, default=None)
@click.option("--step", type=float, default=None)
@scale_base_option
@state_option
@without_option
@set_option
@output_option
def sweep(config_path, parameter, start, stop, step, scale_base, state, withheld, assignments, output):
    """Sweep one cost over a grid of fractions and emit the policy table."""
    config = resolve_config(
        config_path,
        assignments,
        sweep_parameter=parameter,
        sweep_from=start,
        sweep_to=stop,
        sweep_step=step,
        scale_base=scale_base,
        state=state,
        output=output,
    )
    result = sweep_cost(
        config.to_params(),
        config.sweep_parameter,
        cost_grid(config.sweep_from, config.sweep_to, config.sweep_step),
        config.scale_base,
        withheld_everywhere(withheld),
    )
    logger.info("swept %s over %d points (scale base %g)", result.swept_parameter, len(result.grid), result.scale_base)
    write_csv(sweep_frame(result, config.state.value), config.output)


@click.command("turning-point")
@config_option
@param_option
@state_option
@click.option("--lo", type=float, default=None, help="Lower cost fraction (default: sweep_from).")
@click.option("--hi", type=float, default=None, help="Upper cost fraction (default: sweep_to).")
@click.option("--tol", type=float, default=None, help="Bracket width to stop at (default 0.005).")
@scale_base_option
@without_option
@set_option
@output_option
def turning_point(config_path, parameter, state, lo, hi, tol, scale_base, withheld, assignments, output):
    """Bisect for the cost fraction where the optimal action at a state changes."""
    config = resolve_config(
        config_path,
        assignments,
        sweep_parameter=parameter,
        state=state,
        sweep_from=lo,
        sweep_to=hi,
        tolerance=tol,
        scale_base=scale_base,
        output=output,
    )
    turning = find_turning_point(
        config.to_params(),
        config.sweep_parameter,
        config.state.value,
        config.sweep_from,
        config.sweep_to,
        config.tolerance,
        scale_base=config.scale_base,
        unavailable=withheld_everywhere(withheld),
    )
    write_csv(turning_point_frame(turning), config.output)

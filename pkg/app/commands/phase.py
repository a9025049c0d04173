import click

from app.commands.common import (
    config_option,
    output_option,
    parse_assignments,
    resolve_config,
    set_option,
    withheld_everywhere,
)
from app.models import COST_PARAMETERS
from app.services.cost_sweeper import cost_grid
from app.services.csv_writer import phase_frame, write_csv
from app.services.mtd_builder import ACTION_ORDER, STATE_ORDER
from app.services.phase_mapper import CASE_STUDY_PRESETS, case_study, phase_diagram


@click.command("phase")
@config_option
@click.option("--x", "x_parameter", type=click.Choice(COST_PARAMETERS), default=None)
@click.option("--y", "y_parameter", type=click.Choice(COST_PARAMETERS), default=None)
@click.option("--step", type=float, default=None, help="Grid step over [0, 1] on both axes (default 0.025).")
@click.option("--state", type=click.Choice(STATE_ORDER), default=None)
@click.option("--scale-base", type=float, default=None)
@click.option("--without", "withheld", multiple=True, type=click.Choice(ACTION_ORDER))
@set_option
@output_option
def phase(config_path, x_parameter, y_parameter, step, state, scale_base, withheld, assignments, output):
    """Optimal action at one state over a grid of two costs."""
    config = resolve_config(
        config_path,
        assignments,
        x_parameter=x_parameter,
        y_parameter=y_parameter,
        grid_step=step,
        state=state,
        scale_base=scale_base,
        output=output,
    )
    grid = cost_grid(0.0, 1.0, config.grid_step)
    diagram = phase_diagram(
        config.to_params(),
        config.x_parameter,
        config.y_parameter,
        grid,
        grid,
        config.state.value,
        scale_base=config.scale_base,
        unavailable=withheld_everywhere(withheld),
    )
    write_csv(phase_frame(diagram), config.output)


@click.command("case-study")
@click.argument("preset", type=click.Choice(sorted(CASE_STUDY_PRESETS)), required=False)
@config_option
@set_option
@output_option
def case_study_command(preset, config_path, assignments, output):
    """Phase diagram for the decoy or SCIT preset; --set adjusts the fixed parameters."""
    config = resolve_config(config_path, output=output)
    diagram = case_study(preset or config.preset, parse_assignments(assignments), base=config.to_params())
    write_csv(phase_frame(diagram), config.output)

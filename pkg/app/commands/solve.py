import logging

import click

from app.commands.common import config_option, output_option, resolve_config, set_option
from app.services.csv_writer import report_frame, write_csv
from app.services.mdp_solver import value_iteration
from app.services.mtd_builder import build_mtd_model

logger = logging.getLogger(__name__)


@click.command("solve")
@config_option
@set_option
@output_option
def solve(config_path, assignments, output):
    """Solve the MTD model and print each state's value, action and Q-values."""
    config = resolve_config(config_path, assignments, output=output)
    params = config.to_params()
    report = value_iteration(build_mtd_model(params), params.gamma, params.epsilon)
    logger.info("converged after %d sweeps (delta %.3e)", report.iterations, report.final_delta)
    write_csv(report_frame(report), config.output)

import click

from app.commands.oracle import enumerate_command, mc_eval
from app.commands.phase import case_study_command, phase
from app.commands.solve import solve
from app.commands.sweep import sweep, turning_point
from app.services.config_loader import load_config

EXPERIMENTS = {
    "solve": solve,
    "sweep": sweep,
    "turning-point": turning_point,
    "phase": phase,
    "mc-eval": mc_eval,
    "enumerate": enumerate_command,
    "case-study": case_study_command,
}


@click.command("run")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def run(ctx, config_path):
    """Run whichever experiment the configuration's `experiment` key names."""
    config = load_config(config_path)
    ctx.invoke(EXPERIMENTS[config.experiment], config_path=config_path)

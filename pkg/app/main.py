import logging
import sys
from typing import List, Optional

import click
from pydantic import ValidationError

from app.commands.oracle import enumerate_command, mc_eval
from app.commands.phase import case_study_command, phase
from app.commands.run import run
from app.commands.solve import solve
from app.commands.sweep import sweep, turning_point
from app.errors import (
    ConfigError,
    InvalidModelError,
    ModelMismatchError,
    NoCrossingError,
    NonConvergenceError,
    PreconditionError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@click.group()
@click.option("--verbose", is_flag=True, help="Log solver progress at DEBUG level.")
def cli(verbose):
    """Value-iteration analysis of moving-target-defense policies."""
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("app").setLevel(logging.DEBUG if verbose else logging.WARNING)


cli.add_command(solve)
cli.add_command(sweep)
cli.add_command(turning_point)
cli.add_command(phase)
cli.add_command(case_study_command)
cli.add_command(enumerate_command)
cli.add_command(mc_eval)
cli.add_command(run)


def _fail(message: str, code: int) -> int:
    click.echo(f"error: {message}", err=True)
    return code


def run_command(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on `argv` and return the exit code instead of exiting."""
    try:
        result = cli.main(args=argv, prog_name="mtd-mdp", standalone_mode=False)
    except click.UsageError as exc:
        code = _fail(exc.format_message(), EXIT_USAGE)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return code
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        return _fail(f"{where}: {first['msg']}" if where else first["msg"], EXIT_CONFIG)
    except (NonConvergenceError, NoCrossingError, InvalidModelError) as exc:
        return _fail(str(exc), EXIT_NUMERICAL)
    except (PreconditionError, ModelMismatchError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except click.ClickException as exc:
        return _fail(exc.format_message(), EXIT_USAGE)
    except click.Abort:
        return _fail("aborted", EXIT_USAGE)
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(run_command())

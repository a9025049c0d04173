from typing import Dict, Iterable, Optional

import click

from app.models import RunConfig
from app.services.config_loader import load_config
from app.services.mtd_builder import STATE_ORDER

config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Flat key = value run configuration; missing keys take the baseline defaults.",
)
set_option = click.option(
    "--set",
    "assignments",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override one configuration key (repeatable).",
)
output_option = click.option(
    "--output",
    type=click.Path(dir_okay=False),
    default=None,
    help="CSV destination (default: stdout).",
)


def parse_assignments(assignments: Iterable[str], option: str = "--set") -> Dict[str, str]:
    pairs = {}
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", param_hint=option)
        pairs[key.strip()] = value.strip()
    return pairs


def resolve_config(config_path: Optional[str], assignments: Iterable[str] = (), **flags) -> RunConfig:
    """Config file, then --set pairs, then explicit command flags (None means not given)."""
    config = load_config(config_path) if config_path else RunConfig()
    updates = {**parse_assignments(assignments), **{k: v for k, v in flags.items() if v is not None}}
    if not updates:
        return config
    return RunConfig.model_validate({**config.model_dump(), **updates})


def withheld_everywhere(actions: Iterable[str]) -> Optional[Dict[str, list]]:
    return {action: list(STATE_ORDER) for action in actions} or None

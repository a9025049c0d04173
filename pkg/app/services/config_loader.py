"""
Flat `key = value` run configuration.

Lines are tokenised by python-dotenv's stream parser (comments, inline
comments and quoting come from there); values are coerced and bounds-checked
by the RunConfig pydantic model.
"""
import io
import logging
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv.parser import Binding, parse_stream
from pydantic import ValidationError

from app.errors import ConfigError
from app.models import RunConfig

logger = logging.getLogger(__name__)

_NEEDS_QUOTES = set(" \t#'\"\\=")
_BOUND_ERRORS = {"greater_than", "greater_than_equal", "less_than", "less_than_equal"}


def _line_of(binding: Binding) -> int:
    # the parser marks a binding where its leading blank lines begin
    text = binding.original.string
    leading = text[: len(text) - len(text.lstrip())]
    return binding.original.line + leading.count("\n")


def _bounds(key: str) -> Optional[str]:
    field = RunConfig.model_fields.get(key)
    if field is None:
        return None
    low = high = None
    for item in field.metadata:
        if getattr(item, "ge", None) is not None:
            low = f"[{item.ge:g}"
        if getattr(item, "gt", None) is not None:
            low = f"({item.gt:g}"
        if getattr(item, "le", None) is not None:
            high = f"{item.le:g}]"
        if getattr(item, "lt", None) is not None:
            high = f"{item.lt:g})"
    if low and high:
        return f"must lie in {low}, {high}"
    if low:
        return f"must be {'>=' if low.startswith('[') else '>'} {low[1:]}"
    if high:
        return f"must be {'<=' if high.endswith(']') else '<'} {high[:-1]}"
    return None


def _config_error(exc: ValidationError, lines: Dict[str, int], raw: Dict[str, str]) -> ConfigError:
    first = exc.errors()[0]
    key = str(first["loc"][0]) if first["loc"] else None
    if key is None:
        return ConfigError(first["msg"])
    bound = _bounds(key) if first["type"] in _BOUND_ERRORS else None
    got = f", got {raw[key]}" if key in raw else ""
    message = f"{key} {bound}{got}" if bound else f"{key}: {first['msg']}"
    return ConfigError(message, line=lines.get(key), key=key)


def parse_config(text: str) -> RunConfig:
    raw: Dict[str, str] = {}
    lines: Dict[str, int] = {}

    for binding in parse_stream(io.StringIO(text)):
        if binding.key is None and not binding.error:
            continue
        line = _line_of(binding)
        if binding.error or binding.key is None:
            raise ConfigError(f"expected 'key = value', got {binding.original.string.strip()!r}", line=line)
        key = binding.key
        if binding.value is None or binding.value == "":
            raise ConfigError(f"missing value for {key!r}", line=line, key=key)
        if key not in RunConfig.model_fields:
            raise ConfigError(f"unknown key {key!r}", line=line, key=key)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", line=line, key=key)
        raw[key] = binding.value
        lines[key] = line

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise _config_error(exc, lines, raw) from None
    logger.debug("parsed config: %s", config.model_dump(exclude_defaults=True))
    return config


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if _NEEDS_QUOTES & set(text):
        escaped = text.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return text


def emit_config(config: RunConfig) -> str:
    """Canonical text form; parse_config(emit_config(c)) == c."""
    dumped = config.model_dump(mode="json", exclude_none=True)
    return "".join(f"{key} = {_format(value)}\n" for key, value in dumped.items())


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text)

# cli_module/config.py

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from .models import CONFIG_SECTIONS, ConfigError, ToolConfig

logger = logging.getLogger(__name__)

GLOBAL_KEYS = ("seed", "jobs", "output_dir")


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Flat `section.key = value` lines into nested dicts; '#' starts a comment.
    Values stay strings and are coerced when the models validate them.
    """
    nested: Dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in GLOBAL_KEYS:
            nested[key] = value
            continue
        section, _, name = key.partition(".")
        if section not in CONFIG_SECTIONS or name not in CONFIG_SECTIONS[section].model_fields:
            raise ConfigError(f"config line {line_number}: unknown key '{key}'")
        nested.setdefault(section, {})[name] = value
    return nested


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_config_text(text)


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One `--section.key` flag per config field, plus the global flags."""
    parser.add_argument("--config", default=None, help="Flat key = value config file")
    parser.add_argument("--seed", dest="seed", default=argparse.SUPPRESS, help="Root random seed")
    parser.add_argument("--jobs", dest="jobs", default=argparse.SUPPRESS, help="Worker processes (env PROSODY_JOBS)")
    parser.add_argument("--output-dir", dest="output_dir", default=argparse.SUPPRESS, help="Where outputs go")
    parser.add_argument("--log-level", default=None, help="Overrides PROSODY_LOG_LEVEL")
    for section, model in CONFIG_SECTIONS.items():
        group = parser.add_argument_group(f"{section} settings")
        for name, info in model.model_fields.items():
            group.add_argument(
                f"--{section}.{name}",
                dest=f"{section}.{name}",
                metavar="VALUE",
                default=argparse.SUPPRESS,
                help=info.description,
            )


def build_config(args: argparse.Namespace, extra: Optional[Dict[str, Any]] = None) -> ToolConfig:
    """Config file first, then command-line flags, then `extra` overrides."""
    nested: Dict[str, Any] = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in GLOBAL_KEYS:
            nested[key] = value
        elif "." in key:
            section, name = key.split(".", 1)
            if section in CONFIG_SECTIONS:
                nested.setdefault(section, {})[name] = value
    for key, value in (extra or {}).items():
        section, name = key.split(".", 1)
        nested.setdefault(section, {})[name] = value
    try:
        return ToolConfig.model_validate(nested)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        logger.error(f"Invalid configuration: {location}: {first['msg']}")
        raise ConfigError(f"{location}: {first['msg']}") from e

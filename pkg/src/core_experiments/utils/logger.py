"""Logging setup for the `qpaths` console script.

`config_logging.yml` is the base `dictConfig` mapping. Harness settings pick
the root level (`LOG_LEVEL`) and whether the `file` handler is attached
(`LOG_TO_FILE`); `--quiet` forces WARNING. Repeated calls only move the
root level, so a test or a second `main()` never stacks handlers.
"""

import logging
import logging.config
from typing import Any

import yaml

from core_experiments.config.settings import HarnessSettings, get_settings

QUIET_LEVEL = "WARNING"
FALLBACK_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"

logger = logging.getLogger(__name__)

_configured_level: str | None = None


def resolve_log_level(settings: HarnessSettings, default_level: str = "INFO", quiet: bool = False) -> str:
    """Root level for a run; an unknown `LOG_LEVEL` falls back to `default_level`."""
    if quiet:
        return QUIET_LEVEL
    level = (settings.log_level or default_level).upper()
    if level not in logging.getLevelNamesMapping():
        logger.warning("Unknown LOG_LEVEL %r, using %s", settings.log_level, default_level.upper())
        return default_level.upper()
    return level


def harness_logging_config(settings: HarnessSettings, level: str) -> dict[str, Any]:
    """The `dictConfig` mapping for one harness process."""
    if settings.config_logging_file_path is None:
        raise ValueError("harness settings name no logging config file")
    with settings.config_logging_file_path.open("r", encoding="utf-8") as config_file:
        config = yaml.safe_load(config_file) or {}

    handlers = config.setdefault("handlers", {})
    file_handler = handlers.pop("file", None) or {"class": "logging.FileHandler", "formatter": "standard"}
    root = config.setdefault("root", {})
    root["level"] = level
    root["handlers"] = ["console"]

    if settings.log_to_file:
        log_file = settings.default_log_file_path
        if log_file is None:
            raise ValueError("LOG_TO_FILE is set but harness settings name no log file")
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers["file"] = {**file_handler, "filename": str(log_file)}
        root["handlers"].append("file")
    return config


def configure_logging(default_level: str = "INFO", quiet: bool = False) -> logging.Logger:
    global _configured_level

    settings = get_settings()
    level = resolve_log_level(settings, default_level, quiet)
    if _configured_level is not None:
        logging.getLogger().setLevel(level)
        _configured_level = level
        return logger

    try:
        logging.config.dictConfig(harness_logging_config(settings, level))
    except (OSError, ValueError, yaml.YAMLError) as exc:
        logging.basicConfig(level=level, format=FALLBACK_FORMAT, force=True)
        logger.warning("Logging config %s unusable (%s); logging to stderr only", settings.config_logging_file_path, exc)

    _configured_level = level
    if settings.log_to_file:
        logger.debug("Also logging to %s", settings.default_log_file_path)
    return logger

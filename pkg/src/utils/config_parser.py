"""configuration parser module: INI file overlaid on utils.params defaults"""

import os
import copy
import configparser

import psutil

from utils.params import params
from utils.errors import ConfigError
from utils.constants import ENV_WORKERS
from utils.logger import log_info

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(section, key, raw, default):
    """Convert an INI string to the type of its default value"""
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float) or default is None:
            value = float(raw)
            return int(value) if default is None and value.is_integer() else value
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} cannot be parsed") from None
    return raw


def load_config(config_file=None):
    """Read an INI file and overlay it on the defaults
    :params:
        + config_file - path to the INI file; None returns a copy of the defaults
    Returns
        nested dict with the same layout as utils.params.params
    """
    merged = copy.deepcopy(params)
    if config_file is None:
        return merged
    if not os.path.exists(config_file):
        raise ConfigError(f"No such config file: {config_file}")

    config_parser = configparser.ConfigParser()
    try:
        config_parser.read(config_file)
    except configparser.Error as err:
        raise ConfigError(f"Cannot parse {config_file}: {err}") from None

    for section in config_parser.sections():
        if section not in merged:
            raise ConfigError(f"Unknown section [{section}] in {config_file}")
        for key, raw in config_parser.items(section):
            if key not in merged[section]:
                raise ConfigError(f"Unknown key {key} in section [{section}]")
            merged[section][key] = _coerce(section, key, raw, merged[section][key])
    log_info("config loaded from ", config_file)
    return merged


def default_parallelism():
    """Worker count from BOOSTDAG_WORKERS, else the number of physical cores"""
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"{ENV_WORKERS}={env!r} is not an integer") from None
        if workers < 1:
            raise ConfigError(f"{ENV_WORKERS} must be at least 1, got {workers}")
        return workers
    return psutil.cpu_count(logical=False) or 1

"""Parameter Validation module"""
import math

from utils.errors import ConfigError


def validate_integer(value, begin, end, name="value"):
    """Parse an integer and check begin <= value <= end (end=None means unbounded)"""
    try:
        int_value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} format error: {value!r}") from None
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if int_value < begin or (end is not None and int_value > end):
        upper = "inf" if end is None else end
        raise ConfigError(f"Illegal {name}: {int_value} not in [{begin}, {upper}]")
    return int_value


def check_positive(value, name="value"):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} format error: {value!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise ConfigError(f"{name} must be a positive finite number, got {value}")
    return value


def check_in_range(value, low, high, name="value", low_open=True, high_open=False):
    """Check a real lies in the interval (low, high], bounds openness configurable"""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} format error: {value!r}") from None
    too_low = value <= low if low_open else value < low
    too_high = value >= high if high_open else value > high
    if math.isnan(value) or too_low or too_high:
        left = "(" if low_open else "["
        right = ")" if high_open else "]"
        raise ConfigError(f"Illegal {name}: {value} not in {left}{low}, {high}{right}")
    return value


def check_probability(value, name="alpha"):
    return check_in_range(value, 0.0, 1.0, name=name, low_open=True, high_open=True)


def check_choice(value, choices, name="value"):
    if value not in choices:
        raise ConfigError(f"Illegal {name}: {value!r}, expected one of {sorted(choices)}")
    return value

"""Time-unit helpers.

All internal computation uses hours.  Config files and CLI output may use
human-friendly duration strings such as "4 years" or "500 h"; these helpers
convert both ways.  A year is 8760 hours throughout.
"""

import re

from .errors import ValidationError

HOURS_PER_YEAR = 8760.0
HOURS_PER_DAY = 24.0

_UNIT_HOURS = {
    "h": 1.0,
    "hr": 1.0,
    "hrs": 1.0,
    "hour": 1.0,
    "hours": 1.0,
    "d": HOURS_PER_DAY,
    "day": HOURS_PER_DAY,
    "days": HOURS_PER_DAY,
    "y": HOURS_PER_YEAR,
    "yr": HOURS_PER_YEAR,
    "yrs": HOURS_PER_YEAR,
    "year": HOURS_PER_YEAR,
    "years": HOURS_PER_YEAR,
}

_DURATION_RE = re.compile(r"^\s*([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*([a-zA-Z]*)\s*$")


def parse_duration_hours(value):
    """Convert a duration spec to hours.

    Accepts a bare number (taken as hours) or a string with a unit suffix:
    "4 years", "1yr", "500 hours", "36 d".  Negative durations are rejected.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a duration: {value!r}")
    if isinstance(value, (int, float)):
        hours = float(value)
    elif isinstance(value, str):
        m = _DURATION_RE.match(value)
        if not m:
            raise ValidationError(f"cannot parse duration {value!r}")
        number, unit = m.groups()
        if unit == "":
            factor = 1.0
        else:
            try:
                factor = _UNIT_HOURS[unit.lower()]
            except KeyError:
                raise ValidationError(f"unknown time unit {unit!r} in {value!r}") from None
        hours = float(number) * factor
    else:
        raise ValidationError(f"not a duration: {value!r}")
    if not hours >= 0.0:
        raise ValidationError(f"duration must be nonnegative, got {value!r}")
    return hours


def hours_to_years(hours):
    return hours / HOURS_PER_YEAR


def years_to_hours(years):
    return years * HOURS_PER_YEAR

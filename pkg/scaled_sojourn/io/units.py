import re
from enum import Enum
from functools import lru_cache

import astropy.units as astropy_units

from scaled_sojourn.exceptions import ConfigError


class Kind(Enum):
    Time = "time"
    Rate = "rate"
    Size = "size"


_CANONICAL = {
    Kind.Time: astropy_units.ns,
    Kind.Rate: astropy_units.bit / astropy_units.s,
    Kind.Size: astropy_units.byte,
}

SUFFIX = {Kind.Time: "ns", Kind.Rate: "b/s", Kind.Size: "B"}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")
_DATA = re.compile(r"^([kKMG]?)(bit|byte|b|B)(/s|ps)?$")


def _unit(text: str, kind: Kind):
    if kind is Kind.Time:
        return astropy_units.Unit(text)

    m = _DATA.match(text)
    if m is None:
        raise ValueError(f"not a data unit: {text}")
    prefix, base, per_second = m.groups()
    # K is kelvin to astropy
    base = "bit" if base in ("b", "bit") else "byte"
    unit = astropy_units.Unit(f"{prefix.lower() if prefix == 'K' else prefix}{base}")
    if per_second:
        unit = unit / astropy_units.s
    return unit


@lru_cache(maxsize=None)
def parse_quantity(text: str, kind: Kind) -> int:
    """
    Convert e.g. '10Mb/s', '1.5 ms' or '1500B' into an integer count of the
    canonical unit of its kind (ns, bit/s or bytes).

    Every non-zero value needs a unit suffix; a bare 0 is read as zero of
    any kind.
    """
    m = _QUANTITY.match(text)
    if m is None:
        raise ConfigError(f"cannot read a {kind.value} from '{text}'")
    number, unit_text = m.groups()
    if not unit_text:
        value = float(number)
        if value != 0:
            raise ConfigError(f"'{text}' needs a unit, e.g. {number}{SUFFIX[kind]}")
    else:
        try:
            value = (float(number) * _unit(unit_text, kind)).to_value(_CANONICAL[kind])
        except (ValueError, astropy_units.UnitsError) as e:
            raise ConfigError(f"'{unit_text}' is not a {kind.value} unit ({e})")

    result = round(value)
    if abs(value - result) > 1e-6 * max(1.0, abs(value)):
        raise ConfigError(f"'{text}' is not a whole number of {SUFFIX[kind]}")
    return int(result)


def render_quantity(value: int, kind: Kind) -> str:
    return f"{value}{SUFFIX[kind]}"

"""
Scenario files: flat `key = value` lines, `#` comments, blank lines ignored.

Every value that is a time, a rate or a size may carry a unit suffix; see
units.parse_quantity.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

from scaled_sojourn.aqm.codel import CodelState
from scaled_sojourn.aqm.marker import ApplicationPoint, MarkerMode, Signal
from scaled_sojourn.aqm.pi import PiState
from scaled_sojourn.aqm.ramp import RampState
from scaled_sojourn.estimators.sojourn import Estimator
from scaled_sojourn.exceptions import ConfigError
from scaled_sojourn.sim.scenario import (AqmConfig, Algorithm, Burst, ConstantRate,
                                         FitsAndStarts, OnOff, PoissonLike, RandomWalk,
                                         Scenario, StepChange)
from scaled_sojourn.utils.data_files import get_scenario_path

from .units import Kind, parse_quantity, render_quantity

log = logging.getLogger(__name__)

# key -> (raw value, 1-based line number or None for overrides)
Settings = Dict[str, Tuple[str, Optional[int]]]


def _time(s):
    return parse_quantity(s.strip(), Kind.Time)


def _rate(s):
    return parse_quantity(s.strip(), Kind.Rate)


def _size(s):
    return parse_quantity(s.strip(), Kind.Size)


def _bool(s):
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"'{s.strip()}' is not a boolean")


def _optional(conv):
    def f(s):
        return None if s.strip().lower() == "none" else conv(s)
    return f


def _choice(options):
    def f(s):
        v = s.strip()
        if v not in options:
            raise ValueError(f"'{v}' is not one of {', '.join(options)}")
        return options[v]
    return f


def _enum_options(enum_cls):
    return {e.value: e for e in enum_cls}


_ARRIVALS = {"constant": ConstantRate, "burst": Burst, "onoff": OnOff, "poisson": PoissonLike}
_DRAINS = {"constant": ConstantRate, "step": StepChange, "fits": FitsAndStarts,
           "randomwalk": RandomWalk}

KEYS: Dict[str, Callable[[str], object]] = {
    "arrival.process": _choice(_ARRIVALS),
    "arrival.rate": _rate,
    "arrival.rate_high": _rate,
    "arrival.rate_low": _rate,
    "arrival.period": _time,
    "arrival.duty": float,
    "arrival.on": _time,
    "arrival.off": _time,
    "arrival.flows": int,
    "arrival.stop": _optional(_time),
    "drain.process": _choice(_DRAINS),
    "drain.rate": _rate,
    "drain.step.rate": _rate,
    "drain.step.t": _time,
    "drain.fits.stall_period": _time,
    "drain.fits.stall_len": _time,
    "drain.walk.step_pct": float,
    "packet_size": _size,
    "duration": _time,
    "queue.capacity": _optional(_size),
    "queue.prefill": int,
    "seed": int,
    "estimator": _choice(_enum_options(Estimator)),
    "estimator.min_window_packets": int,
    "aqm.algorithm": _choice(_enum_options(Algorithm)),
    "aqm.apply_at": _choice(_enum_options(ApplicationPoint)),
    "aqm.signal": _choice(_enum_options(Signal)),
    "aqm.marker": _choice(_enum_options(MarkerMode)),
    "aqm.pi.target": _time,
    "aqm.pi.t_update": _time,
    "aqm.pi.alpha": float,
    "aqm.pi.beta": float,
    "aqm.pi.burst_heuristic": _bool,
    "aqm.codel.target": _time,
    "aqm.codel.interval": _time,
    "aqm.codel.maxpacket": _size,
    "aqm.ramp.min_th": _time,
    "aqm.ramp.max_th": _time,
    "aqm.ramp.max_p": float,
    "lag.threshold": _time,
    "lag.onset": _time,
}


def parse_settings(text: str) -> Settings:
    settings: Settings = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, lineno=lineno)
        if key in settings:
            raise ConfigError(f"already set on line {settings[key][1]}", key=key, lineno=lineno)
        settings[key] = (value, lineno)
    return settings


def apply_overrides(settings: Settings, overrides: Iterable[str]) -> Settings:
    """
    Apply `key=value` strings on top of parsed settings; later ones win.
    """
    out = dict(settings)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key=key)
        out[key] = (value, None)
    return out


class _Reader:
    def __init__(self, settings: Settings):
        self._settings = settings
        self._used = set()

    def get(self, key, default=None, required=False):
        if key not in self._settings:
            if required:
                raise ConfigError("required", key=key)
            return default
        self._used.add(key)
        value, lineno = self._settings[key]
        try:
            return KEYS[key](value)
        except ConfigError as e:
            raise ConfigError(str(e), key=key, lineno=lineno) from e
        except ValueError as e:
            raise ConfigError(str(e), key=key, lineno=lineno) from e

    def unused(self):
        return [k for k in self._settings if k not in self._used]

    def lineno(self, key):
        return self._settings.get(key, (None, None))[1]


def _arrival(r: _Reader):
    cls = r.get("arrival.process", ConstantRate)
    if cls is ConstantRate:
        return ConstantRate(rate=r.get("arrival.rate", required=True))
    if cls is Burst:
        return Burst(rate_high=r.get("arrival.rate_high", required=True),
                     rate_low=r.get("arrival.rate_low", required=True),
                     period=r.get("arrival.period", required=True),
                     duty=r.get("arrival.duty", 0.5))
    if cls is OnOff:
        return OnOff(rate=r.get("arrival.rate", required=True),
                     on=r.get("arrival.on", required=True),
                     off=r.get("arrival.off", required=True))
    return PoissonLike(mean_rate=r.get("arrival.rate", required=True))


def _drain(r: _Reader):
    cls = r.get("drain.process", ConstantRate)
    rate = r.get("drain.rate", required=True)
    if cls is ConstantRate:
        return ConstantRate(rate=rate)
    if cls is StepChange:
        return StepChange(rate_before=rate, rate_after=r.get("drain.step.rate", required=True),
                          t_step=r.get("drain.step.t", required=True))
    if cls is FitsAndStarts:
        return FitsAndStarts(rate=rate,
                             stall_period=r.get("drain.fits.stall_period", required=True),
                             stall_len=r.get("drain.fits.stall_len", required=True))
    return RandomWalk(mean_rate=rate, step_pct=r.get("drain.walk.step_pct", 0.1))


def _aqm(r: _Reader):
    pi, codel, ramp = PiState(), CodelState(), AqmConfig().ramp
    try:
        return AqmConfig(
            algorithm=r.get("aqm.algorithm", Algorithm.NoAqm),
            apply_at=r.get("aqm.apply_at", ApplicationPoint.Dequeue),
            signal=r.get("aqm.signal", Signal.EcnMark),
            marker=r.get("aqm.marker", MarkerMode.RandomBernoulli),
            pi=PiState(target=r.get("aqm.pi.target", pi.target),
                       t_update=r.get("aqm.pi.t_update", pi.t_update),
                       alpha=r.get("aqm.pi.alpha", pi.alpha),
                       beta=r.get("aqm.pi.beta", pi.beta),
                       burst_heuristic_enabled=r.get("aqm.pi.burst_heuristic", False)),
            codel=CodelState(target=r.get("aqm.codel.target", codel.target),
                             interval=r.get("aqm.codel.interval", codel.interval),
                             maxpacket=r.get("aqm.codel.maxpacket", codel.maxpacket)),
            ramp=RampState(min_th=r.get("aqm.ramp.min_th", ramp.min_th),
                           max_th=r.get("aqm.ramp.max_th", ramp.max_th),
                           max_p=r.get("aqm.ramp.max_p", ramp.max_p)),
        )
    except AssertionError as e:
        raise ConfigError(str(e), key="aqm") from e


def build_scenario(settings: Settings) -> Scenario:
    r = _Reader(settings)
    sc = Scenario(
        arrival=_arrival(r),
        drain=_drain(r),
        packet_size=r.get("packet_size", 1500),
        duration=r.get("duration", required=True),
        queue_capacity=r.get("queue.capacity"),
        prefill=r.get("queue.prefill", 0),
        arrival_stop=r.get("arrival.stop"),
        flows=r.get("arrival.flows", 1),
        estimator=r.get("estimator", Estimator.RawSojourn),
        min_window_packets=r.get("estimator.min_window_packets", 16),
        aqm=_aqm(r),
        seed=r.get("seed", 1),
        lag_threshold=r.get("lag.threshold", 20_000_000),
        lag_onset=r.get("lag.onset", 0),
    )
    for key in r.unused():
        log.warning(f"key '{key}' does not apply to this scenario and is ignored")

    try:
        return sc.validate()
    except ConfigError as e:
        if e.lineno is None and r.lineno(e.key) is not None:
            raise ConfigError(str(e).split(": ", 1)[-1], key=e.key, lineno=r.lineno(e.key)) from e
        raise


def parse_scenario(text: str, overrides: Iterable[str] = ()) -> Scenario:
    """
    :raises ConfigError: on unknown keys, malformed or missing values, or a
        scenario that fails validation
    """
    return build_scenario(apply_overrides(parse_settings(text), overrides))


def load_scenario(ref: Union[str, Path], overrides: Iterable[str] = ()) -> Scenario:
    """
    Read a scenario from a file, or a bundled scenario by name.
    """
    path = Path(ref)
    if not path.exists():
        path = Path(get_scenario_path(str(ref)))
    return parse_scenario(path.read_text(encoding="utf-8"), overrides)


def render_scenario(sc: Scenario) -> str:
    """
    Canonical text for a scenario; parse_scenario() reads it back to an
    equal Scenario.
    """
    t, rate, size = (lambda v: render_quantity(v, Kind.Time),
                     lambda v: render_quantity(v, Kind.Rate),
                     lambda v: render_quantity(v, Kind.Size))
    lines = []

    def put(key, value):
        lines.append(f"{key} = {value}")

    a = sc.arrival
    put("arrival.process", next(k for k, v in _ARRIVALS.items() if isinstance(a, v)))
    if isinstance(a, ConstantRate):
        put("arrival.rate", rate(a.rate))
    elif isinstance(a, Burst):
        put("arrival.rate_high", rate(a.rate_high))
        put("arrival.rate_low", rate(a.rate_low))
        put("arrival.period", t(a.period))
        put("arrival.duty", repr(a.duty))
    elif isinstance(a, OnOff):
        put("arrival.rate", rate(a.rate))
        put("arrival.on", t(a.on))
        put("arrival.off", t(a.off))
    else:
        put("arrival.rate", rate(a.mean_rate))
    put("arrival.flows", sc.flows)
    if sc.arrival_stop is not None:
        put("arrival.stop", t(sc.arrival_stop))

    d = sc.drain
    put("drain.process", next(k for k, v in _DRAINS.items() if isinstance(d, v)))
    if isinstance(d, ConstantRate):
        put("drain.rate", rate(d.rate))
    elif isinstance(d, StepChange):
        put("drain.rate", rate(d.rate_before))
        put("drain.step.rate", rate(d.rate_after))
        put("drain.step.t", t(d.t_step))
    elif isinstance(d, FitsAndStarts):
        put("drain.rate", rate(d.rate))
        put("drain.fits.stall_period", t(d.stall_period))
        put("drain.fits.stall_len", t(d.stall_len))
    else:
        put("drain.rate", rate(d.mean_rate))
        put("drain.walk.step_pct", repr(d.step_pct))

    put("packet_size", size(sc.packet_size))
    put("duration", t(sc.duration))
    if sc.queue_capacity is not None:
        put("queue.capacity", size(sc.queue_capacity))
    put("queue.prefill", sc.prefill)
    put("seed", sc.seed)
    put("estimator", sc.estimator.value)
    put("estimator.min_window_packets", sc.min_window_packets)

    q = sc.aqm
    put("aqm.algorithm", q.algorithm.value)
    put("aqm.apply_at", q.apply_at.value)
    put("aqm.signal", q.signal.value)
    put("aqm.marker", q.marker.value)
    put("aqm.pi.target", t(q.pi.target))
    put("aqm.pi.t_update", t(q.pi.t_update))
    put("aqm.pi.alpha", repr(q.pi.alpha))
    put("aqm.pi.beta", repr(q.pi.beta))
    put("aqm.pi.burst_heuristic", "true" if q.pi.burst_heuristic_enabled else "false")
    put("aqm.codel.target", t(q.codel.target))
    put("aqm.codel.interval", t(q.codel.interval))
    put("aqm.codel.maxpacket", size(q.codel.maxpacket))
    put("aqm.ramp.min_th", t(q.ramp.min_th))
    put("aqm.ramp.max_th", t(q.ramp.max_th))
    put("aqm.ramp.max_p", repr(q.ramp.max_p))
    put("lag.threshold", t(sc.lag_threshold))
    put("lag.onset", t(sc.lag_onset))
    return "\n".join(lines) + "\n"

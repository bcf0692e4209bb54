from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from scaled_sojourn.aqm.codel import CodelState
from scaled_sojourn.aqm.marker import ApplicationPoint, MarkerMode, Signal
from scaled_sojourn.aqm.pi import PiState
from scaled_sojourn.aqm.ramp import RampState
from scaled_sojourn.estimators.sojourn import Estimator
from scaled_sojourn.exceptions import ConfigError

# rates are integer bit/s, times integer ns, sizes integer bytes


@dataclass(frozen=True)
class ConstantRate:
    rate: int


@dataclass(frozen=True)
class Burst:
    rate_high: int
    rate_low: int
    period: int
    duty: float


@dataclass(frozen=True)
class OnOff:
    rate: int
    on: int
    off: int


@dataclass(frozen=True)
class PoissonLike:
    mean_rate: int


@dataclass(frozen=True)
class StepChange:
    rate_before: int
    rate_after: int
    t_step: int


@dataclass(frozen=True)
class FitsAndStarts:
    rate: int
    stall_period: int
    stall_len: int


@dataclass(frozen=True)
class RandomWalk:
    mean_rate: int
    step_pct: float


ArrivalProcess = Union[ConstantRate, Burst, OnOff, PoissonLike]
DrainProcess = Union[ConstantRate, StepChange, FitsAndStarts, RandomWalk]


class Algorithm(Enum):
    NoAqm = "none"
    Pi = "pi"
    Codel = "codel"
    Ramp = "ramp"


@dataclass(frozen=True)
class AqmConfig:
    algorithm: Algorithm = Algorithm.NoAqm
    apply_at: ApplicationPoint = ApplicationPoint.Dequeue
    signal: Signal = Signal.EcnMark
    marker: MarkerMode = MarkerMode.RandomBernoulli
    pi: PiState = field(default_factory=PiState)
    codel: CodelState = field(default_factory=CodelState)
    ramp: RampState = field(default_factory=lambda: RampState(min_th=5_000_000,
                                                              max_th=20_000_000,
                                                              max_p=1.0))


@dataclass(frozen=True)
class Scenario:
    arrival: ArrivalProcess
    drain: DrainProcess
    packet_size: int
    duration: int
    queue_capacity: Optional[int] = None
    prefill: int = 0
    arrival_stop: Optional[int] = None
    flows: int = 1
    estimator: Estimator = Estimator.RawSojourn
    min_window_packets: int = 16
    aqm: AqmConfig = field(default_factory=AqmConfig)
    seed: int = 1
    lag_threshold: int = 20_000_000
    lag_onset: int = 0

    def validate(self) -> "Scenario":
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}", key="duration")
        if self.packet_size < 1:
            raise ConfigError(f"packet_size must be at least 1 B, got {self.packet_size}",
                              key="packet_size")
        for key, rate in _rates(self):
            if rate <= 0:
                raise ConfigError(f"rates must be positive, got {rate}", key=key)
        for key, t in _times(self):
            if t < 0:
                raise ConfigError(f"times must not be negative, got {t}", key=key)
        if self.queue_capacity is not None and self.queue_capacity < self.packet_size:
            raise ConfigError("capacity smaller than one packet", key="queue.capacity")
        if self.prefill < 0:
            raise ConfigError("prefill must not be negative", key="queue.prefill")
        if self.flows < 1:
            raise ConfigError("need at least one flow", key="arrival.flows")
        if self.min_window_packets < 1:
            raise ConfigError("window must hold at least one packet",
                              key="estimator.min_window_packets")
        if isinstance(self.arrival, Burst) and not 0.0 <= self.arrival.duty <= 1.0:
            raise ConfigError("duty must lie in [0, 1]", key="arrival.duty")
        if isinstance(self.arrival, Burst) and self.arrival.period <= 0:
            raise ConfigError("period must be positive", key="arrival.period")
        if isinstance(self.arrival, OnOff) and self.arrival.on <= 0:
            raise ConfigError("on time must be positive", key="arrival.on")
        if isinstance(self.drain, FitsAndStarts) and not \
                0 <= self.drain.stall_len < self.drain.stall_period:
            raise ConfigError("need 0 <= stall_len < stall_period", key="drain.fits.stall_len")
        if isinstance(self.drain, RandomWalk) and not 0.0 <= self.drain.step_pct < 1.0:
            raise ConfigError("step_pct must lie in [0, 1)", key="drain.walk.step_pct")
        if self.aqm.algorithm is Algorithm.Codel and \
                self.aqm.apply_at is ApplicationPoint.Enqueue:
            raise ConfigError("CoDel is driven per dequeue and cannot be applied at enqueue",
                              key="aqm.apply_at")
        return self


def _rates(sc):
    arrival, drain = sc.arrival, sc.drain
    if isinstance(arrival, ConstantRate):
        yield "arrival.rate", arrival.rate
    elif isinstance(arrival, Burst):
        yield "arrival.rate_high", arrival.rate_high
        yield "arrival.rate_low", arrival.rate_low
    elif isinstance(arrival, OnOff):
        yield "arrival.rate", arrival.rate
    elif isinstance(arrival, PoissonLike):
        yield "arrival.rate", arrival.mean_rate

    if isinstance(drain, ConstantRate):
        yield "drain.rate", drain.rate
    elif isinstance(drain, StepChange):
        yield "drain.rate", drain.rate_before
        yield "drain.step.rate", drain.rate_after
    elif isinstance(drain, FitsAndStarts):
        yield "drain.rate", drain.rate
    elif isinstance(drain, RandomWalk):
        yield "drain.rate", drain.mean_rate


def _times(sc):
    if isinstance(sc.arrival, OnOff):
        yield "arrival.off", sc.arrival.off
    if isinstance(sc.drain, StepChange):
        yield "drain.step.t", sc.drain.t_step
    if sc.arrival_stop is not None:
        yield "arrival.stop", sc.arrival_stop
    yield "lag.threshold", sc.lag_threshold
    yield "lag.onset", sc.lag_onset
    yield "aqm.pi.target", sc.aqm.pi.target

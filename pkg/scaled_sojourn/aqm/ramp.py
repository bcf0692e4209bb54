from dataclasses import dataclass
from typing import Tuple

from scaled_sojourn.estimators.sojourn import DelaySample

from .marker import ApplicationPoint, MarkDecision, Marker, decide


@dataclass(frozen=True)
class RampState:
    """RED-like ramp on instantaneous queue delay; min_th == max_th is a step."""

    min_th: int
    max_th: int
    max_p: float = 1.0

    def __post_init__(self):
        assert 0 <= self.min_th <= self.max_th, \
            f"need 0 <= min_th <= max_th, got {self.min_th}, {self.max_th}"
        assert 0.0 <= self.max_p <= 1.0, f"max_p out of range: {self.max_p}"


def ramp_prob(s: RampState, qdelay: DelaySample) -> float:
    q = qdelay.value
    if q < s.min_th:
        return 0.0
    if q >= s.max_th:
        return s.max_p
    return s.max_p * (q - s.min_th) / (s.max_th - s.min_th)


def ramp_decide(s: RampState, m: Marker, qdelay: DelaySample, rng_draw: float = 0.0,
                applied_at: ApplicationPoint = ApplicationPoint.Dequeue) -> Tuple[Marker, MarkDecision]:
    return decide(m, ramp_prob(s, qdelay), rng_draw, applied_at)

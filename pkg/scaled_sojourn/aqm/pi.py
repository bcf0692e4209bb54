from dataclasses import dataclass, replace
from typing import Optional, Tuple

from scaled_sojourn.estimators.sojourn import DelaySample

from .marker import Action, ApplicationPoint, MarkDecision, Marker, decide

NS_PER_S = 10 ** 9


@dataclass(frozen=True)
class PiState:
    """
    Proportional-integral controller state.

    alpha and beta are gains per second of delay error; p is updated every
    t_update from the latest queue-delay sample.
    """

    target: int = 15_000_000
    t_update: int = 16_000_000
    alpha: float = 0.125
    beta: float = 1.25
    p: float = 0.0
    last_qdelay: int = 0
    burst_heuristic_enabled: bool = False
    last_update: Optional[int] = None

    def __post_init__(self):
        assert 0.0 <= self.p <= 1.0, f"p out of range: {self.p}"
        assert self.t_update > 0, f"t_update must be positive, got {self.t_update}"


def pi_update(s: PiState, qdelay: DelaySample, now: int) -> PiState:
    assert s.last_update is None or now >= s.last_update + s.t_update, \
        f"PI update at {now} is less than t_update after {s.last_update}"

    q = qdelay.value
    p = (s.p
         + s.alpha * (q - s.target) / NS_PER_S
         + s.beta * (q - s.last_qdelay) / NS_PER_S)
    p = min(max(p, 0.0), 1.0)
    return replace(s, p=p, last_qdelay=q, last_update=now)


def pi_decide(s: PiState, m: Marker, burst_qdelay: int, rng_draw: float = 0.0,
              applied_at: ApplicationPoint = ApplicationPoint.Dequeue) -> Tuple[Marker, MarkDecision]:
    """
    Apply the PI probability through the marker.

    With the burst heuristic enabled, no signal is issued while the last
    queue-delay sample is below half the target.
    """
    if s.burst_heuristic_enabled and 2 * burst_qdelay < s.target:
        return m, MarkDecision(action=Action.Pass, p_at_decision=s.p, applied_at=applied_at)
    return decide(m, s.p, rng_draw, applied_at)

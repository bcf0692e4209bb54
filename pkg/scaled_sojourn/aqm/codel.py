import math
from dataclasses import dataclass
from typing import Optional, Tuple

from scaled_sojourn.estimators.sojourn import DelaySample

from .marker import Action, ApplicationPoint, MarkDecision, Signal, congestion_action


@dataclass(frozen=True)
class CodelState:
    """
    CoDel state machine driven by whatever delay estimate it is fed.

    first_above_time is None while the delay is below target or no more
    than maxpacket bytes stay queued; drop_next only matters while dropping.
    """

    target: int = 5_000_000
    interval: int = 100_000_000
    maxpacket: int = 1500
    first_above_time: Optional[int] = None
    dropping: bool = False
    count: int = 0
    last_count: int = 0
    drop_next: int = 0

    def __post_init__(self):
        assert self.count >= 0, f"negative count {self.count}"
        assert self.target > 0 and self.interval > 0, \
            f"target and interval must be positive, got {self.target}, {self.interval}"


def control_law(t: int, interval: int, count: int) -> int:
    return t + int(interval / math.sqrt(count))


def codel_on_dequeue(s: CodelState, qdelay: DelaySample, now: int, backlog: int,
                     signal: Signal = Signal.EcnMark) -> Tuple[CodelState, MarkDecision]:
    """
    backlog is the number of bytes still queued once the packet has left.
    """
    ok_to_signal = False
    first_above = s.first_above_time
    if qdelay.value < s.target or backlog <= s.maxpacket:
        first_above = None
    elif first_above is None:
        first_above = now + s.interval
    elif now >= first_above:
        ok_to_signal = True

    dropping, count, last_count, drop_next = s.dropping, s.count, s.last_count, s.drop_next
    fire = False
    if dropping:
        if not ok_to_signal:
            dropping = False
        elif now >= drop_next:
            fire = True
            count += 1
            drop_next = control_law(drop_next, s.interval, count)
    elif ok_to_signal:
        dropping = True
        fire = True
        # resume near the previous rate if the last episode ended recently
        delta = count - last_count
        count = delta if delta > 1 and now - drop_next < 16 * s.interval else 1
        drop_next = control_law(now, s.interval, count)
        last_count = count

    state = CodelState(target=s.target, interval=s.interval, maxpacket=s.maxpacket,
                       first_above_time=first_above,
                       dropping=dropping, count=count, last_count=last_count,
                       drop_next=drop_next)
    decision = MarkDecision(action=congestion_action(signal) if fire else Action.Pass,
                            p_at_decision=1.0 if dropping else 0.0,
                            applied_at=ApplicationPoint.Dequeue)
    return state, decision

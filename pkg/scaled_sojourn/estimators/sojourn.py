from dataclasses import dataclass
from enum import Enum

from scaled_sojourn.queue.core import Packet
from scaled_sojourn.utils.numba_functions import clz32, floor_log2

UINT32_MAX = 2 ** 32 - 1


class Estimator(Enum):
    RawSojourn = "raw"
    ScaledExact = "scaled_exact"
    ScaledLgShift = "scaled_lg"
    ScaledClzShift = "scaled_clz"
    BacklogOverDrainRate = "drain_rate"
    BacklogOverInstantRate = "instant_rate"


@dataclass(frozen=True)
class DelaySample:
    """One estimator output at a dequeue instant."""

    estimator: Estimator
    value: int
    at: int
    packet_id: int

    def __post_init__(self):
        assert self.value >= 0, f"negative delay sample {self.value}"


def _div_round(num, den):
    # round half up, exact for arbitrarily large ints
    return (2 * num + den) // (2 * den)


def _shift(value, k):
    return value << k if k >= 0 else value >> -k


def raw_sojourn(pkt: Packet, now: int) -> int:
    assert now >= pkt.ts_enq, f"dequeue at {now} precedes enqueue at {pkt.ts_enq}"
    return now - pkt.ts_enq


def scaled_sojourn_exact(pkt: Packet, backlog_deq: int, now: int) -> int:
    """
    Sojourn time scaled by backlog_deq / backlog_enq, rounded to the
    nearest nanosecond.

    This is the time the backlog at dequeue would take to drain if it left
    at the mean departure rate seen over the packet's own sojourn.
    """
    assert pkt.backlog_enq >= 1 and backlog_deq >= 1, \
        f"backlogs must be positive, got enq={pkt.backlog_enq} deq={backlog_deq}"
    return _div_round(raw_sojourn(pkt, now) * backlog_deq, pkt.backlog_enq)


def lg_shift_exponent(backlog_enq: int, backlog_deq: int) -> int:
    """
    floor(lg(backlog_deq) - lg(backlog_enq) + 1/2) without floating point.

    The integer parts of the two logs come from the highest set bits; the
    remaining mantissa ratio lies in (1/2, 2) and is rounded to the nearest
    power of two by comparing its square against 2.
    """
    assert backlog_enq >= 1 and backlog_deq >= 1
    k = floor_log2(backlog_deq) - floor_log2(backlog_enq)
    if k >= 0:
        num, den = backlog_deq, backlog_enq << k
    else:
        num, den = backlog_deq << -k, backlog_enq

    if num * num >= 2 * den * den:
        k += 1
    elif 2 * num * num < den * den:
        k -= 1
    return k


def clz_shift_exponent(backlog_enq: int, backlog_deq: int) -> int:
    assert 1 <= backlog_enq <= UINT32_MAX and 1 <= backlog_deq <= UINT32_MAX, \
        f"clz shift needs 32-bit backlogs, got enq={backlog_enq} deq={backlog_deq}"
    return clz32(backlog_enq) - clz32(backlog_deq)


def scaled_sojourn_lg_shift(pkt: Packet, backlog_deq: int, now: int) -> int:
    return _shift(raw_sojourn(pkt, now), lg_shift_exponent(pkt.backlog_enq, backlog_deq))


def scaled_sojourn_clz_shift(pkt: Packet, backlog_deq: int, now: int) -> int:
    return _shift(raw_sojourn(pkt, now), clz_shift_exponent(pkt.backlog_enq, backlog_deq))

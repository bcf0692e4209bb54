from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Tuple

MAX_DENOMINATOR = 10 ** 6


class MarkerMode(Enum):
    RandomBernoulli = "random"
    DeterministicInterval = "deterministic"


class Signal(Enum):
    EcnMark = "ecn"
    Drop = "drop"


class Action(Enum):
    Pass = "pass"
    Mark = "mark"
    Drop = "drop"


class ApplicationPoint(Enum):
    Enqueue = "enqueue"
    Dequeue = "dequeue"


def congestion_action(signal: Signal) -> Action:
    return Action.Mark if signal is Signal.EcnMark else Action.Drop


@dataclass(frozen=True)
class MarkDecision:
    action: Action
    p_at_decision: float
    applied_at: ApplicationPoint

    def __post_init__(self):
        assert self.p_at_decision > 0 or self.action is Action.Pass, \
            f"{self.action} issued with zero probability"

    @property
    def signalled(self) -> bool:
        return self.action is not Action.Pass


@dataclass(frozen=True)
class Marker:
    """
    Turns a signalling probability into per-packet marks.

    In deterministic mode the accumulator collects p packet by packet and a
    mark is issued each time it reaches one, which for a constant p gives
    exactly one mark every 1/p packets. The accumulator is an exact
    Fraction so that spacing does not drift, and p is first snapped to the
    nearest fraction with a denominator of at most MAX_DENOMINATOR so that
    e.g. p = 1/3 marks every third packet despite its binary rounding.
    """

    mode: MarkerMode = MarkerMode.DeterministicInterval
    signal: Signal = Signal.EcnMark
    accumulator: Fraction = Fraction(0)


def as_fraction(p: float) -> Fraction:
    return Fraction(p).limit_denominator(MAX_DENOMINATOR)


def marker_decide(m: Marker, p: float, rng_draw: float) -> Tuple[Marker, Action]:
    assert 0.0 <= p <= 1.0, f"probability out of range: {p}"

    if m.mode is MarkerMode.RandomBernoulli:
        hit = rng_draw < p
        return m, congestion_action(m.signal) if hit else Action.Pass

    acc = m.accumulator + as_fraction(p)
    if acc >= 1:
        return replace(m, accumulator=acc - 1), congestion_action(m.signal)
    return replace(m, accumulator=acc), Action.Pass


def decide(m: Marker, p: float, rng_draw: float,
           applied_at: ApplicationPoint) -> Tuple[Marker, MarkDecision]:
    m, action = marker_decide(m, p, rng_draw)
    return m, MarkDecision(action=action, p_at_decision=p, applied_at=applied_at)

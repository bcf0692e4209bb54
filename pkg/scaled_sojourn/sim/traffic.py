"""
Arrival generators and link models for the simulator.

Times are integer nanoseconds and rates integer bit/s; the serialization
time of a packet is floor(size * 8e9 / rate).
"""
from typing import Iterator, Optional

import numpy as np

from .scenario import (ArrivalProcess, Burst, ConstantRate, DrainProcess, FitsAndStarts,
                       OnOff, PoissonLike, RandomWalk, StepChange)

NS_PER_S = 10 ** 9


def serialization_ns(size: int, rate_bps: int) -> int:
    return size * 8 * NS_PER_S // rate_bps


def _paced(start: int, end: int, size: int, rate: int) -> Iterator[int]:
    # cumulative so that rounding never drifts
    n = 0
    while True:
        t = start + n * size * 8 * NS_PER_S // rate
        if t >= end:
            return
        yield t
        n += 1


def arrival_times(process: ArrivalProcess, size: int, end: int,
                  rng: np.random.Generator) -> Iterator[int]:
    """
    Yield arrival instants in [0, end) for packets of the given size.
    """
    if isinstance(process, ConstantRate):
        yield from _paced(0, end, size, process.rate)

    elif isinstance(process, OnOff):
        cycle = process.on + process.off
        start = 0
        while start < end:
            yield from _paced(start, min(start + process.on, end), size, process.rate)
            start += cycle

    elif isinstance(process, Burst):
        high_len = int(process.period * process.duty)
        t = 0
        while t < end:
            yield t
            phase = t % process.period
            rate = process.rate_high if phase < high_len else process.rate_low
            t += max(serialization_ns(size, rate), 1)

    elif isinstance(process, PoissonLike):
        mean_gap = size * 8 * NS_PER_S / process.mean_rate
        t = 0.0
        while True:
            t += rng.exponential(mean_gap)
            if t >= end:
                return
            yield int(t)

    else:
        raise TypeError(f"unknown arrival process {process!r}")


class Link:
    """
    Serializes packets at a rate that may only change between packets.
    """

    def __init__(self, process: DrainProcess, rng: np.random.Generator):
        self._process = process
        self._rng = rng
        self._walk_rate: Optional[float] = None
        if isinstance(process, RandomWalk):
            self._walk_rate = float(process.mean_rate)

    def rate_at(self, t: int) -> int:
        """Nominal rate for a packet that starts serializing at t."""
        p = self._process
        if isinstance(p, ConstantRate):
            return p.rate
        if isinstance(p, StepChange):
            return p.rate_before if t < p.t_step else p.rate_after
        if isinstance(p, FitsAndStarts):
            return p.rate
        if isinstance(p, RandomWalk):
            return int(self._walk_rate)
        raise TypeError(f"unknown drain process {p!r}")

    def departure(self, start: int, size: int) -> int:
        """Completion time of a packet that is at the head from start onwards."""
        p = self._process
        if isinstance(p, FitsAndStarts):
            phase = start % p.stall_period
            if phase < p.stall_len:
                start += p.stall_len - phase

        rate = self.rate_at(start)
        if isinstance(p, RandomWalk):
            self._step_walk(p)
        return start + max(serialization_ns(size, rate), 1)

    def _step_walk(self, p: RandomWalk):
        step = 1.0 + p.step_pct * self._rng.uniform(-1.0, 1.0)
        self._walk_rate = min(max(self._walk_rate * step, 0.5 * p.mean_rate), 2.0 * p.mean_rate)

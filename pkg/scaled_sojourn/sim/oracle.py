from dataclasses import dataclass
from typing import Tuple

import numpy as np

NS_PER_S = 10 ** 9


@dataclass(frozen=True, eq=False)
class DepartureLog:
    """
    Every departure of a run in time order, with the rate the link was
    running at when the run ended.

    times and sizes are int64 arrays; dequeue drops are included because
    they too take the link's time.
    """

    times: np.ndarray
    sizes: np.ndarray
    final_rate: int

    def __post_init__(self):
        assert self.times.shape == self.sizes.shape, "times and sizes must align"
        assert self.final_rate > 0, f"final rate must be positive, got {self.final_rate}"
        object.__setattr__(self, "_cumulative", np.cumsum(self.sizes, dtype=np.int64))

    def __len__(self):
        return self.times.shape[0]

    def drain_time(self, at: int, backlog: int) -> Tuple[int, bool]:
        """
        Time from `at` until `backlog` more bytes have departed.

        :return: (delta, extrapolated) where extrapolated is True if the log
            ran out and the remainder was drained at the final rate
        """
        delta, extrapolated = self.drain_times(np.array([at], dtype=np.int64),
                                               np.array([backlog], dtype=np.int64))
        return int(delta[0]), bool(extrapolated[0])

    def drain_times(self, ats: np.ndarray, backlogs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ats = np.asarray(ats, dtype=np.int64)
        backlogs = np.asarray(backlogs, dtype=np.int64)
        assert np.all(backlogs >= 0), "backlog must not be negative"

        cum = self._cumulative
        n = len(self)
        before = np.searchsorted(self.times, ats, side="right")
        base = np.where(before > 0, cum[np.maximum(before - 1, 0)], 0) if n else np.zeros_like(ats)
        target = base + backlogs
        j = np.searchsorted(cum, target, side="left") if n else np.zeros_like(ats)

        inside = j < n
        out = np.zeros_like(ats)
        if n:
            out[inside] = self.times[j[inside]] - ats[inside]

        extrapolated = ~inside & (backlogs > 0)
        for i in np.flatnonzero(extrapolated):
            last = int(self.times[-1]) if n else int(ats[i])
            last = max(last, int(ats[i]))
            remaining = int(target[i]) - (int(cum[-1]) if n else 0)
            tail = -(-remaining * 8 * NS_PER_S // self.final_rate)
            out[i] = last - int(ats[i]) + tail

        out[backlogs == 0] = 0
        return out, extrapolated


def oracle_drain(log: DepartureLog, at: int, backlog: int) -> int:
    """Time the queue actually took to drain `backlog` bytes from `at`."""
    return log.drain_time(at, backlog)[0]

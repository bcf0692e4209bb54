from dataclasses import dataclass, replace
from typing import Optional

from scaled_sojourn.exceptions import NoEstimate
from scaled_sojourn.queue.core import Packet

NS_PER_S = 10 ** 9


@dataclass(frozen=True)
class DrainRateEstimator:
    """
    Link-rate estimate measured over windows of departing packets.

    The estimate is held as the byte count and duration of the last
    completed window so that delays derived from it stay integer exact.
    It only changes when a window of min_window_packets completes, so it
    goes stale while packets are scarce.
    """

    min_window_packets: int = 16
    window_bytes: int = 0
    window_packets: int = 0
    window_start: Optional[int] = None
    last_bytes: int = 0
    last_duration: int = 0

    def __post_init__(self):
        assert self.min_window_packets >= 1, \
            f"min_window_packets must be positive, got {self.min_window_packets}"

    @property
    def rate(self) -> float:
        """Bytes per second of the last completed window, 0 if none."""
        if self.last_duration <= 0:
            return 0.0
        return self.last_bytes * NS_PER_S / self.last_duration

    @property
    def has_estimate(self) -> bool:
        return self.last_duration > 0 and self.last_bytes > 0


def drain_rate_update(est: DrainRateEstimator, departed: Packet, now: int) -> DrainRateEstimator:
    if est.window_start is None:
        # the first departure only opens the window
        return replace(est, window_start=now, window_bytes=0, window_packets=0)

    window_bytes = est.window_bytes + departed.size
    window_packets = est.window_packets + 1
    duration = now - est.window_start

    if window_packets >= est.min_window_packets and duration > 0:
        return replace(est, window_start=now, window_bytes=0, window_packets=0,
                       last_bytes=window_bytes, last_duration=duration)

    return replace(est, window_bytes=window_bytes, window_packets=window_packets)


def qdelay_from_backlog(backlog: int, est: DrainRateEstimator) -> int:
    """
    :raises NoEstimate: no measurement window has completed yet
    """
    if not est.has_estimate:
        raise NoEstimate("no completed drain-rate window")
    return (2 * backlog * est.last_duration + est.last_bytes) // (2 * est.last_bytes)


@dataclass(frozen=True)
class InstantRateEstimator:
    """
    Drain rate implied by the serialization time of the previous head packet.
    """

    last_departure: Optional[int] = None
    prev_size: int = 0
    prev_service: int = 0


def instant_rate_update(est: InstantRateEstimator, departed: Packet, now: int) -> InstantRateEstimator:
    started = departed.ts_enq if est.last_departure is None else max(est.last_departure, departed.ts_enq)
    return InstantRateEstimator(last_departure=now, prev_size=departed.size,
                                prev_service=now - started)


def qdelay_from_instant_rate(backlog: int, est: InstantRateEstimator) -> int:
    """
    :raises NoEstimate: no packet has departed yet
    """
    if est.prev_size <= 0:
        raise NoEstimate("no previous head packet")
    return (2 * backlog * est.prev_service + est.prev_size) // (2 * est.prev_size)

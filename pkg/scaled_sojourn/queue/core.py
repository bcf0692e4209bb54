from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Optional, Tuple, Union


@dataclass(frozen=True)
class Packet:
    """
    Unit of queued work.

    backlog_enq is the backlog measured right after this packet was
    appended, so it always includes the packet itself.
    """

    id: int
    size: int
    ts_enq: int
    backlog_enq: int
    flow: int = 0


@dataclass(frozen=True)
class Rejected:
    """Tail drop: the packet would have pushed the backlog over capacity."""

    size: int
    at: int
    flow: int = 0


@dataclass
class QueueCore:
    """
    Byte-counted FIFO with two monotonic counters.

    count_enq is written only by enqueue() and count_deq only by dequeue(),
    so the backlog can be read from either side as their difference.
    """

    capacity: Optional[int] = None
    fifo: Deque[Packet] = field(default_factory=deque)
    count_enq: int = 0
    count_deq: int = 0
    _next_id: int = 0
    # each side only writes its own clock, like the byte counters
    _last_enq: int = 0
    _last_deq: int = 0

    def __post_init__(self):
        assert self.capacity is None or self.capacity >= 1, \
            f"capacity must be positive, got {self.capacity}"

    def __len__(self):
        return len(self.fifo)

    def backlog(self) -> int:
        return self.count_enq - self.count_deq

    def head(self) -> Optional[Packet]:
        return self.fifo[0] if self.fifo else None

    def enqueue(self, size: int, now: int, flow: int = 0) -> Union[Packet, Rejected]:
        assert size >= 1, f"packet size must be at least one byte, got {size}"
        assert now >= self._last_enq, f"enqueue time went backwards: {now} < {self._last_enq}"
        self._last_enq = now

        backlog_after = self.backlog() + size
        if self.capacity is not None and backlog_after > self.capacity:
            return Rejected(size=size, at=now, flow=flow)

        pkt = Packet(id=self._next_id, size=size, ts_enq=now,
                     backlog_enq=backlog_after, flow=flow)
        self._next_id += 1
        # count before publishing so a concurrent dequeue never sees count_deq > count_enq
        self.count_enq += size
        self.fifo.append(pkt)
        return pkt

    def dequeue(self, now: int) -> Optional[Tuple[Packet, int]]:
        """
        Remove the head packet.

        :return: (packet, backlog_deq) where backlog_deq is the backlog just
            before removal (it includes the departing packet), or None if
            the queue is empty
        """
        assert now >= self._last_deq, f"dequeue time went backwards: {now} < {self._last_deq}"
        self._last_deq = now
        if not self.fifo:
            return None

        backlog_deq = self.backlog()
        pkt = self.fifo.popleft()
        self.count_deq += pkt.size
        return pkt, backlog_deq


def enqueue(q: QueueCore, size: int, now: int, flow: int = 0) -> Union[Packet, Rejected]:
    return q.enqueue(size, now, flow)


def dequeue(q: QueueCore, now: int) -> Optional[Tuple[Packet, int]]:
    return q.dequeue(now)


def backlog(q: QueueCore) -> int:
    return q.backlog()

from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from typing import List, Optional

from scaled_sojourn.aqm.marker import Action
from scaled_sojourn.estimators.sojourn import Estimator

from .oracle import DepartureLog
from .scenario import Scenario


@dataclass(frozen=True)
class TraceRecord:
    """One departed packet, with every estimator evaluated at its dequeue."""

    packet_id: int
    t_enq: int
    t_deq: int
    size: int
    backlog_enq: int
    backlog_deq: int
    raw_sojourn: int
    scaled_exact: int
    scaled_lg: int
    scaled_clz: int
    backlog_over_rate: Optional[int]
    oracle_drain: int
    mark_action: Action
    p_at_decision: float
    flow: int = 0
    backlog_over_instant_rate: Optional[int] = None
    oracle_extrapolated: bool = False
    t_decision: Optional[int] = None

    def value(self, estimator: Estimator) -> Optional[int]:
        return getattr(self, ESTIMATOR_COLUMNS[estimator])


ESTIMATOR_COLUMNS = {
    Estimator.RawSojourn: "raw_sojourn",
    Estimator.ScaledExact: "scaled_exact",
    Estimator.ScaledLgShift: "scaled_lg",
    Estimator.ScaledClzShift: "scaled_clz",
    Estimator.BacklogOverDrainRate: "backlog_over_rate",
    Estimator.BacklogOverInstantRate: "backlog_over_instant_rate",
}

TRACE_COLUMNS = tuple(f.name for f in fields(TraceRecord))


@dataclass(frozen=True)
class PiUpdate:
    """The sample a PI update read and the probability it left behind."""

    t: int
    qdelay: int
    p: float


@dataclass
class Trace(Sequence):
    """
    Records of a run in dequeue order plus the byte accounting of the run.

    offered == delivered + final_backlog + tail_dropped + aqm_dropped
    always holds; records still queued when the run ends only show up in
    final_backlog. load_end is the last arrival before the offered load first
    stopped, None if it ran to the end. pi_updates holds every PI update in
    time order.
    """

    records: List[TraceRecord]
    departures: DepartureLog
    scenario: Scenario
    offered_bytes: int = 0
    delivered_bytes: int = 0
    final_backlog: int = 0
    tail_dropped_bytes: int = 0
    aqm_dropped_bytes: int = 0
    last_arrival: Optional[int] = None
    load_end: Optional[int] = None
    pi_updates: List[PiUpdate] = field(default_factory=list)

    def __getitem__(self, i):
        return self.records[i]

    def __len__(self):
        return len(self.records)

    @property
    def conserved(self) -> bool:
        return self.offered_bytes == (self.delivered_bytes + self.final_backlog
                                      + self.tail_dropped_bytes + self.aqm_dropped_bytes)

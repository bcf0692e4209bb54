"""
Analyses over trace records: signal lag, tail marking, estimator error and
mark spacing.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from scaled_sojourn.aqm.marker import Action, ApplicationPoint
from scaled_sojourn.estimators.sojourn import Estimator, lg_shift_exponent
from scaled_sojourn.exceptions import NotCrossed
from scaled_sojourn.utils.numba_functions import clz_shift_batch, rms_masked

from .trace import Trace, TraceRecord

log = logging.getLogger(__name__)

LAG_ESTIMATORS = (Estimator.BacklogOverDrainRate, Estimator.RawSojourn, Estimator.ScaledExact)


@dataclass(frozen=True)
class LagMeasurement:
    """
    How late a threshold crossing turned into a signal on a packet.

    measurement is the time between the true crossing (from the oracle)
    and the first estimate at or above the threshold; application is the
    extra time until a packet carrying the decision leaves the queue.
    rate_window is how long the min_window_packets departures after the
    decision took, i.e. one drain-rate window at the rate in force once the
    change has happened; it falls back to the window before the decision
    when the run ends first.
    """

    estimator: Estimator
    applied_at: ApplicationPoint
    t_true: int
    t_decision: int
    measurement: int
    application: int
    s_detect: int
    s_carrier: int
    rate_window: int

    @property
    def total(self) -> int:
        return self.measurement + self.application

    @property
    def normalized(self) -> float:
        """
        Lag in units of the sojourn in force when it was incurred; the
        measurement part of the drain-rate column is in units of its window.
        """
        if self.estimator is Estimator.BacklogOverDrainRate:
            unit = self.rate_window
        else:
            unit = self.s_detect
        lag = self.measurement / unit if unit > 0 else 0.0
        if self.application:
            lag += self.application / self.s_carrier
        return lag


def _first_crossing(records: Sequence[TraceRecord], values, threshold: int,
                    t_onset: int) -> Optional[int]:
    for i, (r, v) in enumerate(zip(records, values)):
        if r.t_deq >= t_onset and v is not None and v >= threshold:
            return i
    return None


def detect_step_lag(records: Sequence[TraceRecord], threshold: int, t_onset: int,
                    estimator: Estimator, application_point: ApplicationPoint,
                    min_window_packets: int = 16) -> LagMeasurement:
    """
    :raises NotCrossed: the oracle or the estimate never reached the
        threshold, or no packet was enqueued after the decision
    """
    i_true = _first_crossing(records, [r.oracle_drain for r in records], threshold, t_onset)
    if i_true is None:
        raise NotCrossed(f"oracle never reached {threshold} ns after {t_onset} ns")
    i_det = _first_crossing(records, [r.value(estimator) for r in records], threshold, t_onset)
    if i_det is None:
        raise NotCrossed(f"{estimator.value} never reached {threshold} ns after {t_onset} ns")

    t_true = records[i_true].t_deq
    detector = records[i_det]
    t_decision = detector.t_deq
    carrier = detector
    if application_point is ApplicationPoint.Enqueue:
        # FIFO: the first packet enqueued at or after the decision carries it
        carrier = next((r for r in records[i_det:] if r.t_enq >= t_decision), None)
        if carrier is None:
            raise NotCrossed("no packet was enqueued after the decision")

    if i_det + min_window_packets < len(records):
        rate_window = records[i_det + min_window_packets].t_deq - t_decision
    else:
        rate_window = t_decision - records[max(i_det - min_window_packets, 0)].t_deq
    return LagMeasurement(estimator=estimator, applied_at=application_point,
                          t_true=t_true, t_decision=t_decision,
                          measurement=max(0, t_decision - t_true),
                          application=carrier.t_deq - t_decision,
                          s_detect=detector.raw_sojourn, s_carrier=carrier.raw_sojourn,
                          rate_window=rate_window)


@dataclass(frozen=True)
class ErrorStats:
    estimator: Estimator
    rms: float
    mean: float
    n: int


def error_stats(records: Sequence[TraceRecord], include_extrapolated: bool = False,
                t_from: int = 0) -> Dict[Estimator, ErrorStats]:
    """
    RMS and mean error of every estimator against the drain-time oracle.

    Records whose oracle had to be extrapolated past the end of the run are
    left out unless include_extrapolated is set.
    """
    oracle = np.array([r.oracle_drain for r in records], dtype=np.float64)
    usable = np.array([(include_extrapolated or not r.oracle_extrapolated) and r.t_deq >= t_from
                       for r in records], dtype=np.bool_)
    out = {}
    for est in Estimator:
        values = np.array([np.nan if r.value(est) is None else r.value(est) for r in records],
                          dtype=np.float64)
        diff = values - oracle
        mask = usable & ~np.isnan(values)
        n = int(mask.sum())
        out[est] = ErrorStats(estimator=est, rms=float(rms_masked(diff, mask)),
                              mean=float(diff[mask].mean()) if n else float("nan"), n=n)
    return out


def shift_factors(records: Sequence[TraceRecord]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ratio of each power-of-two scale factor to the exact backlog ratio,
    for the lg and clz variants in that order.
    """
    enq = np.array([r.backlog_enq for r in records], dtype=np.int64)
    deq = np.array([r.backlog_deq for r in records], dtype=np.int64)
    exact = deq / enq
    lg = np.array([lg_shift_exponent(int(e), int(d)) for e, d in zip(enq, deq)], dtype=np.int64)
    clz = clz_shift_batch(enq, deq)
    return np.exp2(lg) / exact, np.exp2(clz) / exact


@dataclass(frozen=True)
class SignalLagReport:
    threshold: int
    lags: Mapping[Tuple[ApplicationPoint, Estimator], Optional[LagMeasurement]]
    errors: Mapping[Estimator, ErrorStats]


def lag_matrix(records: Sequence[TraceRecord], threshold: int, t_onset: int = 0,
               estimators=LAG_ESTIMATORS, min_window_packets: int = 16) -> SignalLagReport:
    """
    Signal lag for every application point and estimator; cells whose
    estimate never crossed are None.
    """
    lags = {}
    for point in (ApplicationPoint.Enqueue, ApplicationPoint.Dequeue):
        for est in estimators:
            try:
                lags[point, est] = detect_step_lag(records, threshold, t_onset, est, point,
                                                   min_window_packets)
            except NotCrossed as e:
                log.warning(f"no lag for {est.value} at {point.value}: {e}")
                lags[point, est] = None
    return SignalLagReport(threshold=threshold, lags=lags, errors=error_stats(records))


@dataclass(frozen=True)
class TailMarks:
    label: str
    tail_packets: int
    marks: int
    below_target_from: Optional[int]
    marks_after_below_target: Optional[int]
    restart_packets: int
    restart_marks: int


def idle_tail_report(traces: Mapping[str, Trace]) -> Dict[str, TailMarks]:
    """
    Signals issued on packets that were queued when the offered load of
    each run stopped and left after it.

    below_target_from is the first PI update after the load stopped whose
    delay sample was under the PI target, and marks_after_below_target
    counts the tail signals decided strictly after it; both are None when
    no such update happened. Packets enqueued once the queue had emptied
    make up the restart counts. Runs whose load never stopped are left out.
    """
    out = {}
    for label, trace in traces.items():
        load_end = trace.load_end
        if load_end is None:
            continue
        tail = [r for r in trace if r.t_enq <= load_end < r.t_deq]
        target = trace.scenario.aqm.pi.target
        below = next((u.t for u in trace.pi_updates if u.t > load_end and u.qdelay < target),
                     None)
        marks_after = None
        if below is not None:
            marks_after = sum(r.mark_action is not Action.Pass for r in tail
                              if r.t_decision is not None and r.t_decision > below)

        t_empty = next((r.t_deq for r in trace if r.t_deq > load_end and r.backlog_deq == r.size),
                       None)
        restart = [] if t_empty is None else [r for r in trace if r.t_enq > t_empty]
        out[label] = TailMarks(label=label, tail_packets=len(tail),
                               marks=sum(r.mark_action is not Action.Pass for r in tail),
                               below_target_from=below, marks_after_below_target=marks_after,
                               restart_packets=len(restart),
                               restart_marks=sum(r.mark_action is not Action.Pass
                                                 for r in restart))
    return out


@dataclass(frozen=True)
class FlowSpacing:
    flow: int
    packets: int
    marks: int
    mean_gap: float
    gap_variance: float


def mark_spacing(records: Sequence[TraceRecord]) -> Dict[int, FlowSpacing]:
    """
    Distance in packets between consecutive marks, per flow and over all
    flows together (key -1).
    """
    flows = np.array([r.flow for r in records], dtype=np.int64)
    marked = np.array([r.mark_action is not Action.Pass for r in records], dtype=np.bool_)
    out = {}
    for flow in [-1] + sorted(set(flows.tolist())):
        sel = marked if flow < 0 else marked[flows == flow]
        gaps = np.diff(np.flatnonzero(sel))
        out[flow] = FlowSpacing(flow=flow, packets=int(sel.shape[0]), marks=int(sel.sum()),
                                mean_gap=float(gaps.mean()) if gaps.size else float("nan"),
                                gap_variance=float(gaps.var()) if gaps.size else float("nan"))
    return out

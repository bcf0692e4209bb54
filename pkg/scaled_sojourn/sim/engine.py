import logging
from enum import IntEnum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import simpy

from scaled_sojourn.aqm.codel import codel_on_dequeue
from scaled_sojourn.aqm.marker import (Action, ApplicationPoint, MarkDecision, Marker,
                                       MarkerMode)
from scaled_sojourn.aqm.pi import pi_decide, pi_update
from scaled_sojourn.aqm.ramp import ramp_decide
from scaled_sojourn.estimators.drain_rate import (DrainRateEstimator, InstantRateEstimator,
                                                  drain_rate_update, instant_rate_update,
                                                  qdelay_from_backlog, qdelay_from_instant_rate)
from scaled_sojourn.estimators.sojourn import (DelaySample, Estimator, raw_sojourn,
                                               scaled_sojourn_clz_shift, scaled_sojourn_exact,
                                               scaled_sojourn_lg_shift)
from scaled_sojourn.exceptions import NoEstimate
from scaled_sojourn.queue.core import QueueCore, Rejected

from .oracle import DepartureLog
from .scenario import Algorithm, OnOff, Scenario
from .trace import PiUpdate, Trace, TraceRecord
from .traffic import Link, arrival_times

log = logging.getLogger(__name__)


class _Phase(IntEnum):
    # same-instant order: a departure frees the link before a PI tick reads
    # the delay, and both happen before a simultaneous arrival. simpy uses 0
    # and 1 for its own urgent and normal events.
    Departure = 2
    PiTick = 3
    Arrival = 4


class _Wake(simpy.Event):
    """A timeout that fires in _Phase order among events due at the same instant."""

    def __init__(self, env: simpy.Environment, delay: int, phase: _Phase):
        super().__init__(env)
        self._ok = True
        self._value = None
        env.schedule(self, int(phase), delay)


def _or_none(f, *args) -> Optional[int]:
    try:
        return f(*args)
    except NoEstimate:
        return None


class Simulation:
    """
    Single-link discrete-event simulation.

    A packet stays in the queue while it serializes and is dequeued when
    its last bit has left, so its sojourn includes its own transmission.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario.validate()
        arrival_seed, drain_seed, marker_seed, flow_seed = \
            np.random.SeedSequence(scenario.seed).spawn(4)
        self._arrival_rng = np.random.default_rng(arrival_seed)
        self._marker_rng = np.random.default_rng(marker_seed)
        self._flow_rng = np.random.default_rng(flow_seed)

        self.queue = QueueCore(capacity=scenario.queue_capacity)
        self.link = Link(scenario.drain, np.random.default_rng(drain_seed))

        self.env = simpy.Environment()
        self._link_idle: Optional[simpy.Event] = None

        aqm = scenario.aqm
        self._marker = Marker(mode=aqm.marker, signal=aqm.signal)
        self._pi = aqm.pi
        self._codel = aqm.codel
        self._drain_rate = DrainRateEstimator(min_window_packets=scenario.min_window_packets)
        self._instant = InstantRateEstimator()
        self._latest: Optional[DelaySample] = None
        self._enq_decisions: Dict[int, Tuple[MarkDecision, int]] = {}

        self._rows: List[dict] = []
        self._dep_times: List[int] = []
        self._dep_sizes: List[int] = []
        self._pi_updates: List[PiUpdate] = []

        self.offered_bytes = 0
        self.delivered_bytes = 0
        self.tail_dropped_bytes = 0
        self.aqm_dropped_bytes = 0
        self.last_arrival: Optional[int] = None
        self._first_burst_end: Optional[int] = None

    def run(self) -> Trace:
        sc = self.scenario
        log.debug(f"running {sc.arrival} into {sc.drain} for {sc.duration} ns, seed {sc.seed}")

        for _ in range(sc.prefill):
            self._offer(0)

        end = sc.duration if sc.arrival_stop is None else min(sc.duration, sc.arrival_stop)
        env = self.env
        env.process(self._link_process(env))
        env.process(self._arrival_process(
            env, arrival_times(sc.arrival, sc.packet_size, end, self._arrival_rng)))
        if sc.aqm.algorithm is Algorithm.Pi:
            env.process(self._pi_process(env))

        # simpy stops before events due at `until`, so this covers the last ns
        env.run(until=sc.duration + 1)
        return self._finish()

    def _arrival_process(self, env: simpy.Environment, arrivals: Iterator[int]):
        for t in arrivals:
            yield _Wake(env, t - env.now, _Phase.Arrival)
            self._on_arrival(env.now)

    def _link_process(self, env: simpy.Environment):
        while True:
            while not len(self.queue):
                self._link_idle = env.event()
                yield self._link_idle
            head = self.queue.head()
            done = self.link.departure(env.now, head.size)
            yield _Wake(env, done - env.now, _Phase.Departure)
            self._on_departure(env.now)

    def _pi_process(self, env: simpy.Environment):
        while True:
            yield _Wake(env, self._pi.t_update, _Phase.PiTick)
            self._on_pi_tick(env.now)

    def _latest_sample(self, now: int) -> DelaySample:
        if self._latest is None:
            return DelaySample(self.scenario.estimator, 0, now, -1)
        return self._latest

    def _decide(self, now: int, at: ApplicationPoint,
                sample: DelaySample) -> Tuple[Marker, MarkDecision]:
        aqm = self.scenario.aqm
        draw = self._marker_rng.random() if aqm.marker is MarkerMode.RandomBernoulli else 0.0
        if aqm.algorithm is Algorithm.Pi:
            return pi_decide(self._pi, self._marker, sample.value, draw, at)
        return ramp_decide(aqm.ramp, self._marker, sample, draw, at)

    def _offer(self, now: int):
        sc = self.scenario
        flow = int(self._flow_rng.integers(sc.flows)) if sc.flows > 1 else 0
        self.offered_bytes += sc.packet_size

        decision = None
        if sc.aqm.algorithm is not Algorithm.NoAqm and \
                sc.aqm.apply_at is ApplicationPoint.Enqueue:
            self._marker, decision = self._decide(now, ApplicationPoint.Enqueue,
                                                  self._latest_sample(now))
            if decision.action is Action.Drop:
                self.aqm_dropped_bytes += sc.packet_size
                return

        res = self.queue.enqueue(sc.packet_size, now, flow)
        if isinstance(res, Rejected):
            self.tail_dropped_bytes += res.size
            return
        if decision is not None:
            self._enq_decisions[res.id] = (decision, now)

    def _on_arrival(self, now: int):
        sc = self.scenario
        self.last_arrival = now
        if isinstance(sc.arrival, OnOff) and now < sc.arrival.on:
            self._first_burst_end = now
        self._offer(now)
        idle = self._link_idle
        if idle is not None and not idle.triggered and len(self.queue):
            idle.succeed()

    def _on_pi_tick(self, now: int):
        sample = self._latest_sample(now)
        self._pi = pi_update(self._pi, sample, now)
        self._pi_updates.append(PiUpdate(t=now, qdelay=sample.value, p=self._pi.p))

    def _on_departure(self, now: int):
        sc = self.scenario
        pkt, backlog_deq = self.queue.dequeue(now)
        self._dep_times.append(now)
        self._dep_sizes.append(pkt.size)

        self._drain_rate = drain_rate_update(self._drain_rate, pkt, now)
        self._instant = instant_rate_update(self._instant, pkt, now)
        values = {
            Estimator.RawSojourn: raw_sojourn(pkt, now),
            Estimator.ScaledExact: scaled_sojourn_exact(pkt, backlog_deq, now),
            Estimator.ScaledLgShift: scaled_sojourn_lg_shift(pkt, backlog_deq, now),
            Estimator.ScaledClzShift: scaled_sojourn_clz_shift(pkt, backlog_deq, now),
            Estimator.BacklogOverDrainRate: _or_none(qdelay_from_backlog, backlog_deq,
                                                     self._drain_rate),
            Estimator.BacklogOverInstantRate: _or_none(qdelay_from_instant_rate, backlog_deq,
                                                       self._instant),
        }
        if values[sc.estimator] is not None:
            self._latest = DelaySample(sc.estimator, values[sc.estimator], now, pkt.id)

        decision, t_decision = self._enq_decisions.pop(pkt.id, (None, None))
        if sc.aqm.algorithm is not Algorithm.NoAqm and \
                sc.aqm.apply_at is ApplicationPoint.Dequeue:
            sample = self._latest_sample(now)
            if sc.aqm.algorithm is Algorithm.Codel:
                self._codel, decision = codel_on_dequeue(self._codel, sample, now,
                                                         backlog_deq - pkt.size, sc.aqm.signal)
            else:
                self._marker, decision = self._decide(now, ApplicationPoint.Dequeue, sample)
            t_decision = now

        if decision is not None and decision.action is Action.Drop:
            self.aqm_dropped_bytes += pkt.size
        else:
            self.delivered_bytes += pkt.size

        self._rows.append(dict(
            packet_id=pkt.id, t_enq=pkt.ts_enq, t_deq=now, size=pkt.size,
            backlog_enq=pkt.backlog_enq, backlog_deq=backlog_deq,
            raw_sojourn=values[Estimator.RawSojourn],
            scaled_exact=values[Estimator.ScaledExact],
            scaled_lg=values[Estimator.ScaledLgShift],
            scaled_clz=values[Estimator.ScaledClzShift],
            backlog_over_rate=values[Estimator.BacklogOverDrainRate],
            backlog_over_instant_rate=values[Estimator.BacklogOverInstantRate],
            mark_action=Action.Pass if decision is None else decision.action,
            p_at_decision=0.0 if decision is None else decision.p_at_decision,
            flow=pkt.flow, t_decision=t_decision,
        ))

    def _load_end(self) -> Optional[int]:
        sc = self.scenario
        end = sc.duration if sc.arrival_stop is None else min(sc.duration, sc.arrival_stop)
        if isinstance(sc.arrival, OnOff) and sc.arrival.on < end:
            return 0 if self._first_burst_end is None else self._first_burst_end
        if end < sc.duration:
            return 0 if self.last_arrival is None else self.last_arrival
        return None

    def _finish(self) -> Trace:
        sc = self.scenario
        departures = DepartureLog(times=np.array(self._dep_times, dtype=np.int64),
                                  sizes=np.array(self._dep_sizes, dtype=np.int64),
                                  final_rate=self.link.rate_at(sc.duration))
        ats = np.array([r["t_deq"] for r in self._rows], dtype=np.int64)
        backlogs = np.array([r["backlog_deq"] for r in self._rows], dtype=np.int64)
        oracle, extrapolated = departures.drain_times(ats, backlogs)

        records = [TraceRecord(oracle_drain=int(o), oracle_extrapolated=bool(x), **row)
                   for row, o, x in zip(self._rows, oracle, extrapolated)]

        trace = Trace(records=records, departures=departures, scenario=sc,
                      offered_bytes=self.offered_bytes, delivered_bytes=self.delivered_bytes,
                      final_backlog=self.queue.backlog(),
                      tail_dropped_bytes=self.tail_dropped_bytes,
                      aqm_dropped_bytes=self.aqm_dropped_bytes,
                      last_arrival=self.last_arrival, load_end=self._load_end(),
                      pi_updates=self._pi_updates)
        assert trace.conserved, "byte accounting does not balance"

        log.info(f"{len(records)} departures, {self.offered_bytes} B offered, "
                 f"{trace.final_backlog} B left queued")
        log.debug(f"{self.tail_dropped_bytes} B tail dropped, {self.aqm_dropped_bytes} B dropped by AQM")
        return trace


def run(scenario: Scenario) -> Trace:
    return Simulation(scenario).run()

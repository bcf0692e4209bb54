import numpy as np
import pytest

from scaled_sojourn.aqm import (Action, ApplicationPoint, CodelState, MarkerMode, Signal,
                                codel_on_dequeue)
from scaled_sojourn.estimators import DelaySample, Estimator
from scaled_sojourn.io import load_scenario
from scaled_sojourn.exceptions import ConfigError, NotCrossed
from scaled_sojourn.sim import (AqmConfig, Algorithm, ConstantRate, DepartureLog,
                                FitsAndStarts, OnOff, PoissonLike, RandomWalk, Scenario,
                                StepChange, arrival_times, detect_step_lag, idle_tail_report,
                                mark_spacing, oracle_drain, run, serialization_ns)

MS = 1_000_000
S = 1_000_000_000


def _scenario(**kwargs):
    base = dict(arrival=ConstantRate(8_000_000), drain=ConstantRate(10_000_000),
                packet_size=1500, duration=1 * S)
    base.update(kwargs)
    return Scenario(**base)


def test_serialization_time():
    assert serialization_ns(1500, 10_000_000) == 1_200_000
    assert serialization_ns(1500, 5_000_000) == 2_400_000


def test_constant_arrivals_do_not_drift():
    times = list(arrival_times(ConstantRate(3_000_000), 1000, 1 * S, None))
    # 375 packets per second at 2.666.. ms spacing
    assert len(times) == 375
    assert times[3] == 8_000_000
    assert times[-1] < 1 * S


def test_onoff_arrivals_respect_phases():
    times = list(arrival_times(OnOff(12_000_000, on=10 * MS, off=20 * MS), 1500, 60 * MS, None))
    assert all(t % (30 * MS) < 10 * MS for t in times)
    assert len(times) == 2 * 10


def test_poisson_arrivals_are_seeded():
    def draw(seed):
        return list(arrival_times(PoissonLike(10_000_000), 1500, 100 * MS,
                                  np.random.default_rng(seed)))

    assert draw(1) == draw(1)
    assert draw(1) != draw(2)


def test_final_backlog_of_overload():
    trace = run(_scenario(arrival=ConstantRate(2_000_000), drain=ConstantRate(1_000_000)))

    assert trace.conserved
    assert abs(trace.final_backlog - 125000) <= 1500
    assert trace.load_end is None


def test_records_are_in_dequeue_order():
    trace = run(_scenario(arrival=PoissonLike(9_000_000), duration=500 * MS))

    t_deq = [r.t_deq for r in trace]
    assert t_deq == sorted(t_deq)
    assert all(r.t_deq >= r.t_enq for r in trace)
    assert all(r.oracle_drain >= 0 for r in trace)
    assert [r.packet_id for r in trace] == list(range(len(trace)))


def test_equal_rates_make_scaled_equal_raw():
    trace = run(_scenario(arrival=ConstantRate(10_000_000)))

    assert len(trace) > 800
    for r in trace:
        assert r.backlog_enq == r.backlog_deq
        assert r.scaled_exact == r.raw_sojourn
        assert r.scaled_lg == r.raw_sojourn
        assert r.scaled_clz == r.raw_sojourn


def test_same_seed_same_trace():
    sc = _scenario(arrival=PoissonLike(9_500_000), drain=RandomWalk(10_000_000, 0.2),
                   aqm=AqmConfig(algorithm=Algorithm.Pi), estimator=Estimator.ScaledExact)
    a, b = run(sc), run(sc)
    assert a.records == b.records


def test_tail_drop_is_counted_apart_from_aqm_drop():
    trace = run(_scenario(arrival=ConstantRate(20_000_000), queue_capacity=15000))

    assert trace.tail_dropped_bytes > 0
    assert trace.aqm_dropped_bytes == 0
    assert trace.conserved
    assert max(r.backlog_enq for r in trace) <= 15000


def test_enqueue_drops_never_enter_the_queue():
    aqm = AqmConfig(algorithm=Algorithm.Ramp, apply_at=ApplicationPoint.Enqueue,
                    signal=Signal.Drop, marker=MarkerMode.DeterministicInterval)
    trace = run(_scenario(arrival=ConstantRate(15_000_000), aqm=aqm, duration=2 * S))

    assert trace.aqm_dropped_bytes > 0
    assert trace.conserved
    assert all(r.mark_action is not Action.Drop for r in trace)
    assert all(r.t_decision == r.t_enq for r in trace)


def test_dequeue_drops_use_their_slot():
    aqm = AqmConfig(algorithm=Algorithm.Ramp, signal=Signal.Drop,
                    marker=MarkerMode.DeterministicInterval)
    trace = run(_scenario(arrival=ConstantRate(15_000_000), aqm=aqm, duration=2 * S))

    dropped = [r for r in trace if r.mark_action is Action.Drop]
    assert dropped
    assert trace.aqm_dropped_bytes == sum(r.size for r in dropped)
    assert len(trace.departures) == len(trace)
    assert trace.conserved


def test_codel_cannot_run_at_enqueue():
    aqm = AqmConfig(algorithm=Algorithm.Codel, apply_at=ApplicationPoint.Enqueue)
    with pytest.raises(ConfigError):
        run(_scenario(aqm=aqm))


def test_step_change_applies_at_packet_boundaries():
    drain = StepChange(10_000_000, 5_000_000, t_step=6 * MS)
    trace = run(_scenario(arrival=ConstantRate(10_000_000), drain=drain, prefill=10,
                          duration=100 * MS))

    gaps = np.diff([r.t_deq for r in trace])
    # five packets start before the step, the rest after it
    assert set(gaps[:4]) == {1_200_000}
    assert set(gaps[4:]) == {2_400_000}


def test_fits_and_starts_defers_service_past_stalls():
    drain = FitsAndStarts(10_000_000, stall_period=10 * MS, stall_len=4 * MS)
    trace = run(_scenario(prefill=20, arrival=ConstantRate(1_000), drain=drain,
                          duration=100 * MS))

    starts = [r.t_deq - 1_200_000 for r in trace]
    assert all(s % (10 * MS) >= 4 * MS for s in starts)


def test_oracle_on_constant_drain():
    sizes = np.full(100, 1500, dtype=np.int64)
    times = np.arange(1, 101, dtype=np.int64) * 1_200_000
    log = DepartureLog(times=times, sizes=sizes, final_rate=10_000_000)

    assert oracle_drain(log, 0, 15000) == 12 * MS
    assert oracle_drain(log, 1_200_000, 1500) == 1_200_000
    assert oracle_drain(log, 1_300_000, 3000) == 2_300_000
    assert oracle_drain(log, 0, 0) == 0


def test_oracle_extrapolates_past_the_log():
    sizes = np.full(10, 1500, dtype=np.int64)
    times = np.arange(1, 11, dtype=np.int64) * 1_200_000
    log = DepartureLog(times=times, sizes=sizes, final_rate=5_000_000)

    delta, extrapolated = log.drain_time(9 * 1_200_000, 3000)
    assert extrapolated
    # one logged departure, then 1500 B at 5 Mb/s
    assert delta == 1_200_000 + 2_400_000

    delta, extrapolated = log.drain_time(9 * 1_200_000, 1500)
    assert not extrapolated


def test_oracle_of_drain_halving_is_double():
    trace = run(load_scenario("drain_halving"))
    at_step = next(r for r in trace if r.t_deq == 60 * MS)

    assert at_step.backlog_deq == 41 * 1500
    assert not at_step.oracle_extrapolated
    assert at_step.oracle_drain == 2 * at_step.backlog_deq * 8 * S // 10_000_000


def test_enqueue_decisions_reach_the_packet_one_sojourn_later():
    enq = run(load_scenario("ramp_overload", ["aqm.algorithm=ramp", "aqm.apply_at=enqueue",
                                              "aqm.marker=deterministic"]))
    deq = run(load_scenario("ramp_overload", ["aqm.algorithm=ramp",
                                              "aqm.marker=deterministic"]))

    first_enq = next(r for r in enq if r.mark_action is Action.Mark)
    first_deq = next(r for r in deq if r.mark_action is Action.Mark)
    assert first_enq.t_deq - first_enq.t_decision == first_enq.raw_sojourn
    assert first_deq.t_deq == first_deq.t_decision
    assert first_enq.t_deq > first_deq.t_deq


def test_multi_flow_spacing_is_reported_per_flow():
    aqm = AqmConfig(algorithm=Algorithm.Pi, marker=MarkerMode.DeterministicInterval)
    trace = run(_scenario(arrival=ConstantRate(12_000_000), flows=3, aqm=aqm, duration=2 * S))
    spacing = mark_spacing(trace)

    assert set(spacing) == {-1, 0, 1, 2}
    assert sum(spacing[f].packets for f in (0, 1, 2)) == spacing[-1].packets
    assert sum(spacing[f].marks for f in (0, 1, 2)) == spacing[-1].marks
    assert spacing[-1].marks > 0


def test_pi_updates_see_a_departure_at_the_same_instant():
    trace = run(load_scenario("idle_tail"))

    assert [u.t for u in trace.pi_updates] == [16 * MS * k for k in range(1, 94)]
    # 100 packets arrive every 6 ms from 0 and leave every 12 ms
    last = trace[-1]
    assert last.t_deq == 1200 * MS
    update = next(u for u in trace.pi_updates if u.t == 1200 * MS)
    assert update.qdelay == last.raw_sojourn == 606 * MS


def test_no_tail_when_load_runs_to_the_end():
    assert idle_tail_report({"steady": run(load_scenario("steady_state"))}) == {}


def test_codel_leaves_dropping_earlier_on_scaled_sojourn():
    sc = load_scenario("idle_restart", ["aqm.algorithm=none", "arrival.off=300ms",
                                        "duration=1700ms"])
    trace = run(sc)
    load_stop = 1200 * MS

    def exit_time(estimator):
        s = CodelState()
        was_dropping = False
        for r in trace:
            value = r.value(estimator)
            s, _ = codel_on_dequeue(s, DelaySample(estimator, value, r.t_deq, r.packet_id),
                                    r.t_deq, r.backlog_deq - r.size)
            if r.t_deq > load_stop and was_dropping and not s.dropping:
                return r.t_deq
            was_dropping = s.dropping
        return None

    raw, scaled = exit_time(Estimator.RawSojourn), exit_time(Estimator.ScaledExact)
    assert scaled is not None and raw is not None
    # raw sojourn only gives up once a single packet is left
    assert scaled < raw


def test_step_lag_on_the_ramp():
    trace = run(load_scenario("ramp_overload"))

    deq = detect_step_lag(trace, 20 * MS, 0, Estimator.RawSojourn, ApplicationPoint.Dequeue)
    # 15 Mb/s into 10 Mb/s: the queue needs 20 ms to drain after the 31st departure,
    # the 48th packet is the first to have waited that long
    assert deq.t_true == 37_200_000
    assert deq.t_decision == 57_600_000
    assert deq.s_detect == 20 * MS
    assert deq.application == 0

    enq = detect_step_lag(trace, 20 * MS, 0, Estimator.RawSojourn, ApplicationPoint.Enqueue)
    assert enq.measurement == deq.measurement
    assert enq.application == enq.s_carrier == 30 * MS

    scaled = detect_step_lag(trace, 20 * MS, 0, Estimator.ScaledExact, ApplicationPoint.Dequeue)
    assert scaled.measurement == 0

    rate = detect_step_lag(trace, 20 * MS, 0, Estimator.BacklogOverDrainRate,
                           ApplicationPoint.Dequeue)
    assert rate.rate_window == 16 * 1_200_000


def test_rate_window_runs_at_the_rate_after_a_step():
    trace = run(load_scenario("drain_halving"))
    lag = detect_step_lag(trace, 70 * MS, 60 * MS, Estimator.BacklogOverDrainRate,
                          ApplicationPoint.Dequeue)

    # 1500 B at 5 Mb/s leave every 2.4 ms once the link has slowed
    assert lag.t_decision > 60 * MS
    assert lag.rate_window == 16 * 2_400_000


def test_step_lag_never_crossed():
    trace = run(load_scenario("ramp_overload"))
    with pytest.raises(NotCrossed):
        detect_step_lag(trace, 1 * S, 0, Estimator.RawSojourn, ApplicationPoint.Dequeue)

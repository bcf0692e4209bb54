import math

import numpy as np
import pytest

from scaled_sojourn.aqm import (Action, ApplicationPoint, CodelState, MarkDecision, Marker,
                                MarkerMode, PiState, RampState, Signal, as_fraction,
                                codel_on_dequeue, control_law, decide, marker_decide,
                                pi_decide, pi_update, ramp_decide, ramp_prob)
from scaled_sojourn.estimators import DelaySample, Estimator

MS = 1_000_000
QUEUED = 20 * 1500


def _sample(value, at=0):
    return DelaySample(Estimator.RawSojourn, value, at, 0)


def test_pi_unchanged_at_target():
    s = PiState(p=0.3, last_qdelay=15 * MS)
    assert pi_update(s, _sample(15 * MS), 16 * MS).p == 0.3


def test_pi_integral_step():
    s = PiState(last_qdelay=23 * MS)
    s = pi_update(s, _sample(23 * MS), 16 * MS)
    assert s.p == pytest.approx(0.001)
    assert s.last_qdelay == 23 * MS
    assert s.last_update == 16 * MS


def test_pi_proportional_step():
    s = PiState(last_qdelay=15 * MS)
    s = pi_update(s, _sample(23 * MS), 16 * MS)
    # 0.125 * 0.008 + 1.25 * 0.008
    assert s.p == pytest.approx(0.011)


@pytest.mark.parametrize("p, qdelay, expected", [
    (0.0, 0, 0.0),
    (0.999, 2000 * MS, 1.0),
])
def test_pi_is_clamped(p, qdelay, expected):
    s = PiState(p=p, last_qdelay=15 * MS)
    assert pi_update(s, _sample(qdelay), 16 * MS).p == expected


def test_pi_updates_at_most_every_t_update():
    s = pi_update(PiState(), _sample(0), 16 * MS)
    with pytest.raises(AssertionError):
        pi_update(s, _sample(0), 20 * MS)


def test_pi_burst_heuristic_suppresses_below_half_target():
    s = PiState(p=0.5, burst_heuristic_enabled=True)
    m = Marker(mode=MarkerMode.RandomBernoulli)
    _, decision = pi_decide(s, m, 7 * MS, rng_draw=0.0)
    assert decision.action is Action.Pass

    _, decision = pi_decide(s, m, 8 * MS, rng_draw=0.0)
    assert decision.action is Action.Mark


def test_pi_without_probability_passes():
    _, decision = pi_decide(PiState(p=0.0), Marker(), 100 * MS)
    assert decision.action is Action.Pass


def test_pi_with_certain_probability_marks_every_packet():
    m = Marker(mode=MarkerMode.DeterministicInterval)
    s = PiState(p=1.0)
    for _ in range(10):
        m, decision = pi_decide(s, m, 100 * MS)
        assert decision.action is Action.Mark
        assert decision.p_at_decision == 1.0


def test_pi_decision_carries_application_point():
    _, decision = pi_decide(PiState(p=1.0), Marker(), 0, applied_at=ApplicationPoint.Enqueue)
    assert decision.applied_at is ApplicationPoint.Enqueue


def test_mark_decision_needs_probability():
    with pytest.raises(AssertionError):
        MarkDecision(Action.Mark, 0.0, ApplicationPoint.Dequeue)


def test_deterministic_marker_spacing():
    m = Marker(mode=MarkerMode.DeterministicInterval)
    marks = []
    for i in range(10000):
        m, action = marker_decide(m, 0.01, 0.0)
        if action is not Action.Pass:
            marks.append(i)

    assert len(marks) == 100
    assert set(np.diff(marks)) == {100}
    assert 0 <= m.accumulator < 1


@pytest.mark.parametrize("p, period", [(1 / 3, 3), (1 / 7, 7), (0.3, None)])
def test_deterministic_marker_snaps_float_probabilities(p, period):
    m = Marker(mode=MarkerMode.DeterministicInterval)
    marks = []
    for i in range(1, 31):
        m, action = marker_decide(m, p, 0.0)
        if action is Action.Mark:
            marks.append(i)

    if period is None:
        assert marks == [4, 7, 10, 14, 17, 20, 24, 27, 30]
    else:
        assert marks == list(range(period, 31, period))


def test_deterministic_marker_never_marks_at_zero():
    m = Marker(mode=MarkerMode.DeterministicInterval)
    for _ in range(1000):
        m, action = marker_decide(m, 0.0, 0.0)
        assert action is Action.Pass


def test_deterministic_marker_conserves_probability():
    rng = np.random.default_rng(3)
    probabilities = rng.random(5000) * 0.2
    m = Marker(mode=MarkerMode.DeterministicInterval)
    marks = 0
    for p in probabilities:
        m, action = marker_decide(m, float(p), 0.0)
        marks += action is not Action.Pass

    total = sum(as_fraction(float(p)) for p in probabilities)
    assert marks == math.floor(total)


def test_marker_signal_selects_drop():
    m = Marker(mode=MarkerMode.DeterministicInterval, signal=Signal.Drop)
    _, action = marker_decide(m, 1.0, 0.0)
    assert action is Action.Drop


def test_random_marker_count():
    rng = np.random.default_rng(42)
    m = Marker(mode=MarkerMode.RandomBernoulli)
    n, p = 100000, 0.01
    marks = sum(marker_decide(m, p, draw)[1] is Action.Mark for draw in rng.random(n))
    assert abs(marks - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_random_marker_is_reproducible():
    def count(seed):
        rng = np.random.default_rng(seed)
        m = Marker(mode=MarkerMode.RandomBernoulli)
        return [decide(m, 0.3, float(d), ApplicationPoint.Dequeue)[1].action
                for d in rng.random(500)]

    assert count(9) == count(9)


def test_codel_below_target_never_signals():
    s = CodelState()
    for i in range(100):
        s, decision = codel_on_dequeue(s, _sample(4 * MS), i * 10 * MS, QUEUED)
        assert decision.action is Action.Pass
        assert not s.dropping


def test_codel_signals_after_a_full_interval_above_target():
    s = CodelState()
    signalled = []
    for i in range(21):
        now = i * 10 * MS
        s, decision = codel_on_dequeue(s, _sample(10 * MS), now, QUEUED)
        if decision.signalled:
            signalled.append(now)
            assert decision.p_at_decision == 1.0

    assert signalled == [100 * MS, 200 * MS]
    assert s.count == 2
    assert s.drop_next == control_law(200 * MS, 100 * MS, 2) == 270_710_678


def test_codel_drop_signal_and_exit():
    s = CodelState()
    s, _ = codel_on_dequeue(s, _sample(10 * MS), 0, QUEUED, Signal.Drop)
    s, decision = codel_on_dequeue(s, _sample(10 * MS), 100 * MS, QUEUED, Signal.Drop)
    assert decision.action is Action.Drop
    assert s.dropping

    s, decision = codel_on_dequeue(s, _sample(1 * MS), 110 * MS, QUEUED, Signal.Drop)
    assert decision.action is Action.Pass
    assert decision.p_at_decision == 0.0
    assert not s.dropping
    assert s.first_above_time is None


def test_codel_holds_off_with_one_packet_left():
    s = CodelState()
    s, _ = codel_on_dequeue(s, _sample(10 * MS), 0, QUEUED)
    for now in (100 * MS, 150 * MS):
        s, decision = codel_on_dequeue(s, _sample(10 * MS), now, 1500)
        assert decision.action is Action.Pass
        assert s.first_above_time is None

    # the clock restarts once more than a packet is queued again
    s, decision = codel_on_dequeue(s, _sample(10 * MS), 160 * MS, 1501)
    assert decision.action is Action.Pass
    assert s.first_above_time == 260 * MS


def test_codel_leaves_dropping_when_the_queue_runs_down():
    s = CodelState()
    s, _ = codel_on_dequeue(s, _sample(10 * MS), 0, QUEUED)
    s, _ = codel_on_dequeue(s, _sample(10 * MS), 100 * MS, QUEUED)
    assert s.dropping

    s, decision = codel_on_dequeue(s, _sample(60 * MS), 101 * MS, 0)
    assert decision.action is Action.Pass
    assert not s.dropping


@pytest.mark.parametrize("qdelay, expected", [
    (2 * MS, 0.0),
    (5 * MS, 0.0),
    (10 * MS, 0.05),
    (15 * MS, 0.1),
    (40 * MS, 0.1),
])
def test_ramp(qdelay, expected):
    s = RampState(min_th=5 * MS, max_th=15 * MS, max_p=0.1)
    assert ramp_prob(s, _sample(qdelay)) == pytest.approx(expected)


def test_step_is_a_degenerate_ramp():
    s = RampState(min_th=1 * MS, max_th=1 * MS, max_p=1.0)
    assert ramp_prob(s, _sample(1 * MS)) == 1.0
    assert ramp_prob(s, _sample(1 * MS - 1)) == 0.0

    _, decision = ramp_decide(s, Marker(), _sample(2 * MS))
    assert decision.action is Action.Mark


def test_ramp_thresholds_are_ordered():
    with pytest.raises(AssertionError):
        RampState(min_th=2, max_th=1)
    with pytest.raises(AssertionError):
        RampState(min_th=0, max_th=1, max_p=1.5)

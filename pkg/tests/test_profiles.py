import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gripforce.datamodel import Expertise, HandRole, StepAnnotations
from gripforce.errors import BoundaryBeyondProfile, EmptyInput, InvalidData
from gripforce.profiles import (
    boundary_index,
    build_profile,
    overlay_steps,
    select_trio_sessions,
    session_profile,
    trio_comparison,
    window_values,
)
from gripforce.simulator import ARCHETYPES, SimConfig, generate_session
from gripforce.svg import render_profiles_svg
from gripforce.wire import Hand, SensorReading

from .conftest import make_session


def readings_for(values, sensor=5, period_ms=20):
    return [SensorReading(sensor, Hand.RIGHT, k * period_ms, int(v)) for k, v in enumerate(values)]


def brute_force_means(values, w):
    return [sum(values[i:i + w]) / len(values[i:i + w]) for i in range(0, len(values), w)]


def test_250_samples():
    rng = random.Random(0)
    values = [rng.randint(0, 3300) for _ in range(250)]
    prof = build_profile(readings_for(values))
    assert [p.n_samples for p in prof.points] == [100, 100, 50]
    for p, ref in zip(prof.points, brute_force_means(values, 100)):
        assert p.mean_mv == pytest.approx(ref, abs=1e-12)


def test_constant_stream():
    prof = build_profile(readings_for([5] * 333), window_size=50)
    assert all(p.mean_mv == 5 for p in prof.points)


def test_default_window_is_100():
    assert build_profile(readings_for([1] * 100)).window_size == 100
    assert len(build_profile(readings_for([1] * 101)).points) == 2


def test_profile_errors():
    with pytest.raises(EmptyInput):
        build_profile([])
    with pytest.raises(InvalidData):
        window_values([1, 2], window_size=0)
    with pytest.raises(InvalidData):
        build_profile(readings_for([1, 2]) + readings_for([1], sensor=6))
    with pytest.raises(InvalidData):
        build_profile(list(reversed(readings_for([1, 2, 3]))))


def test_max_statistic():
    values = [1, 9, 3, 4, 2, 8, 0]
    prof = build_profile(readings_for(values), window_size=3, statistic="max")
    assert [p.mean_mv for p in prof.points] == [9, 8, 0]


@given(st.lists(st.integers(0, 3300), min_size=1, max_size=400), st.integers(1, 120))
def test_window_invariants(values, w):
    points = window_values(values, w)
    assert len(points) == math.ceil(len(values) / w)
    assert sum(p.n_samples for p in points) == len(values)
    assert all(p.n_samples == w for p in points[:-1])
    for p in points:
        chunk = values[p.window_index * w:(p.window_index + 1) * w]
        assert min(chunk) <= p.mean_mv <= max(chunk)


@given(st.integers(1, 4), st.lists(st.integers(0, 3300), min_size=1, max_size=200), st.integers(0, 2**16))
def test_concatenation_and_shuffle(blocks, tail, seed):
    w = 25
    rng = random.Random(seed)
    head = [rng.randint(0, 3300) for _ in range(blocks * w)]
    joined = window_values(head + tail, w)
    parts = window_values(head, w) + window_values(tail, w)
    assert [(p.mean_mv, p.n_samples) for p in joined] == pytest.approx(
        [(p.mean_mv, p.n_samples) for p in parts], abs=1e-9)
    shuffled = list(head)
    for i in range(0, len(shuffled), w):
        chunk = shuffled[i:i + w]
        rng.shuffle(chunk)
        shuffled[i:i + w] = chunk
    assert [p.mean_mv for p in window_values(shuffled, w)] == pytest.approx(
        [p.mean_mv for p in window_values(head, w)], abs=1e-9)


def profile_of_seconds(seconds, rate=50):
    return build_profile(readings_for([100] * int(seconds * rate), period_ms=int(1000 / rate)))


def test_boundary_at_4000ms():
    prof = overlay_steps(profile_of_seconds(10), StepAnnotations.from_tuples([(1, 0, 4000)]))
    assert prof.step_boundaries == ((1, 2.0),)


def test_boundary_at_zero_and_monotone():
    assert boundary_index(0, 100) == 0.0
    ann = StepAnnotations.from_tuples([(1, 0, 1000), (2, 1000, 3000), (3, 3000, 7000), (4, 7000, 10000)])
    prof = overlay_steps(profile_of_seconds(10), ann)
    positions = [b for _, b in prof.step_boundaries]
    assert positions == sorted(positions)
    assert positions == [0.5, 1.5, 3.5, 5.0]


def test_boundary_beyond_profile():
    with pytest.raises(BoundaryBeyondProfile):
        overlay_steps(profile_of_seconds(4), StepAnnotations.from_tuples([(1, 0, 4100)]))


def test_timestamp_mode_on_irregular_stream():
    # samples every 40 ms: nominal 50 Hz would double the index
    prof = build_profile(readings_for([1] * 200, period_ms=40), window_size=100)
    ann = StepAnnotations.from_tuples([(1, 0, 4000)])
    assert overlay_steps(prof, ann, mode="timestamp").step_boundaries == ((1, 1.0),)
    assert overlay_steps(prof, ann).step_boundaries == ((1, 2.0),)


def test_session_profile_with_simulated_steps():
    s = generate_session(SimConfig(ARCHETYPES[Expertise.NOVICE], seed=4, duration_s=20))
    prof = overlay_steps(session_profile(s, 5), s.steps)
    assert prof.n_samples == 1000
    assert prof.step_boundaries[-1] == (4, 10.0)


def trio_sessions(values):
    """values[(user, session_index)] -> list of mV for S5..S7."""
    sessions = []
    for (user, idx), v in values.items():
        sessions.append(make_session({5: v, 6: v, 7: v}, expertise=Expertise.NOVICE,
                                     user_id=user, session_index=idx))
    return sessions


def test_trio_df_from_table_sized_cells():
    rng = np.random.default_rng(0)
    cells = {(u, i): rng.normal(500, 80, 781).clip(0, 3300).round().tolist()
             for u in ("expert", "novice") for i in (1, 10)}
    report = trio_comparison(trio_sessions(cells))
    assert sum(c.n for c in report.sensor(5).cells.values()) == 3124
    for res in report.sensors:
        assert (res.interaction.df, res.anova.residual.df) == (1, 3120)
    assert report.session_indices == {"expert": (1, 10), "novice": (1, 10)}


def test_trio_equal_means_give_zero_interaction():
    base = [100, 200, 300, 400]
    cells = {(u, i): base for u in ("a", "b") for i in (1, 2)}
    report = trio_comparison(trio_sessions(cells))
    assert report.sensor(6).interaction.f == pytest.approx(0.0, abs=1e-12)
    assert "S5" in report.format_text()


def test_trio_rejects_bad_inputs():
    cells = {("a", 1): [1, 2], ("a", 2): [3, 4], ("b", 1): [5, 6]}
    with pytest.raises(InvalidData):
        trio_comparison(trio_sessions(cells))
    s = make_session({5: [1, 2], 6: [1, 2], 7: [1, 2]}, hand=HandRole.NON_DOMINANT)
    with pytest.raises(InvalidData):
        trio_comparison([s])


def test_select_trio_sessions_picks_first_and_last():
    sessions = [make_session({5: [k]}, expertise=e, session_index=k)
                for e in (Expertise.EXPERT, Expertise.NOVICE) for k in (3, 1, 7)]
    picked = select_trio_sessions(sessions)
    assert [(s.user.user_id, s.session_index) for s in picked] == [
        ("expert", 1), ("expert", 7), ("novice", 1), ("novice", 7)]


def test_svg_deterministic():
    s = generate_session(SimConfig(ARCHETYPES[Expertise.EXPERT], seed=2, duration_s=12))
    profiles = [overlay_steps(session_profile(s, k), s.steps) for k in (5, 6, 7)]
    a = render_profiles_svg(profiles, title="demo")
    b = render_profiles_svg(profiles, title="demo")
    assert a == b
    assert a.startswith("<svg") or a.startswith("<?xml")
    assert a.count("<polyline") == 3
    assert "stroke-dasharray" in a


def test_csv_output():
    prof = build_profile(readings_for([1, 2, 3]), window_size=2)
    assert prof.to_csv() == "window_index,mean_mv,n_samples\n0,1.500000,2\n1,3.000000,1\n"

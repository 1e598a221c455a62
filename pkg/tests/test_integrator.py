import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import smooth_state
from planar_mhd.core import Parameters
from planar_mhd.grid import Grid, State
from planar_mhd.integrator import (
    Accumulators,
    DtUnderflow,
    PositivityFailure,
    StepControls,
    advance,
    stable_dt,
    step,
)
from planar_mhd.scenarios import get_scenario
from planar_mhd.verification import oracle_step

UNIT = Parameters.paper_normalized(0.0, 1.0)


def mirror(s: State) -> State:
    """Reflect x -> 1 - x; odd fields change sign."""
    return s.replace(v=s.v[::-1], theta=s.theta[::-1], b=s.b[::-1], u=-s.u[::-1], w=-s.w[::-1])


def test_stable_dt_at_rest():
    s = State.rest(10)
    c = StepControls(cfl=0.4, dt_max=1.0)
    # gamma * p * v / v^2 = 2 at the unit rest state
    assert stable_dt(s, c, UNIT) == pytest.approx(0.4 * 0.1 / math.sqrt(2), rel=1e-14)


def test_stable_dt_shrinks_with_field_and_clamps():
    c = StepControls(cfl=0.4, dt_max=1.0)
    s1 = State.rest(10).replace(b=np.tile([1.0, 0.0], (10, 1)))
    s2 = State.rest(10).replace(b=np.tile([2.0, 0.0], (10, 1)))
    assert stable_dt(s2, c, UNIT) < stable_dt(s1, c, UNIT) < stable_dt(State.rest(10), c, UNIT)
    assert stable_dt(State.rest(4), StepControls(dt_max=1e-4), UNIT) == 1e-4


def test_step_controls_validation():
    for kw in (dict(cfl=0), dict(cfl=1.5), dict(dt_min=1.0, dt_max=0.1), dict(max_retries=0)):
        with pytest.raises(ValueError):
            StepControls(**kw)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_rest_is_fixed_point(alpha):
    p = Parameters.paper_normalized(alpha, 1.0)
    s = State.rest(16)
    out = step(s, 1e-2, p)
    assert out.max_deviation(s) <= 1e-14
    assert out.t == pytest.approx(1e-2)


def test_uniform_temperature_rest_is_fixed_point():
    s = State.rest(16, theta=3.0)
    r = advance(s, StepControls.fixed(1e-2, 0.5), UNIT)
    assert r.state.max_deviation(s.replace(t=0.5)) <= 1e-13


def test_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        step(State.rest(8), 0.0, UNIT)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(6, 24))
def test_mass_conserved(seed, n):
    s = get_scenario("random-perturbation").build(n, seed=seed)
    m0 = np.sum(s.v) * s.grid.dx
    r = advance(s, StepControls(t_final=0.05), Parameters.paper_normalized(0.5, 1.0))
    assert abs(np.sum(r.state.v) * r.state.grid.dx - m0) <= 1e-13
    assert r.state.u[0] == r.state.u[-1] == 0
    assert np.all(r.state.w[[0, -1]] == 0)


def test_mirror_symmetry():
    s = smooth_state(20)
    p = Parameters.paper_normalized(1.0, 1.0)
    dt, T = 2e-3, 0.1
    a = advance(s, StepControls.fixed(dt, T), p).state
    b = advance(mirror(s), StepControls.fixed(dt, T), p).state
    assert mirror(a).max_deviation(b) <= 1e-12


def test_positivity_raises_without_clipping():
    u = np.zeros(9)
    u[4] = -50.0
    s = State.rest(8).replace(u=u)
    with pytest.raises(PositivityFailure) as info:
        step(s, 0.5, UNIT)
    assert info.value.field == "v" and info.value.value <= 0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_committed_states_stay_positive(seed):
    s = get_scenario("random-perturbation").build(16, seed=seed, amplitude=0.5)
    seen = []
    advance(s, StepControls(cfl=0.9, t_final=0.2), UNIT, [lambda st_, a, k: seen.append(st_)])
    assert all(np.all(x.v > 0) and np.all(x.theta > 0) for x in seen)


def test_retry_recovers():
    g = Grid(16)
    u = 20 * np.sin(2 * np.pi * g.nodes)
    s = State.rest(16).replace(u=u)
    r = advance(s, StepControls(cfl=1.0, dt_min=1e-8, dt_max=1.0, t_final=0.5), UNIT)
    assert r.retries > 0
    assert r.retry_events[0]["field"] == "v"
    assert r.state.t == 0.5


def test_retry_underflow():
    g = Grid(16)
    s = State.rest(16).replace(u=20 * np.sin(2 * np.pi * g.nodes))
    with pytest.raises(DtUnderflow):
        advance(s, StepControls(cfl=1.0, dt_min=0.5, dt_max=1.0, t_final=0.5), UNIT)


def test_zero_magnetic_data_stays_zero():
    s = get_scenario("ns-limit").build(32)
    r = advance(s, StepControls(t_final=0.2), UNIT)
    assert np.all(r.state.w == 0) and np.all(r.state.b == 0)
    r2 = advance(s, StepControls(t_final=0.2), UNIT, magnetic=False)
    assert r.state.max_deviation(r2.state) <= 1e-12


def test_rest_accumulators():
    s = State.rest(8)
    r = advance(s, StepControls.fixed(1e-2, 1.0), UNIT)
    acc = r.accumulators
    # y_rate is theta/v integrated over mass: 1 at rest
    assert acc.yint == pytest.approx(1.0, rel=1e-12)
    assert abs(acc.vint) <= 1e-28
    assert acc.t == 1.0


def test_fixed_step_count_and_final_snap():
    r = advance(State.rest(8), StepControls.fixed(0.03, 1.0), UNIT)
    assert r.steps == math.ceil(1.0 / 0.03)
    assert r.state.t == 1.0


def test_observers_and_start_time():
    calls = []
    advance(State.rest(8), StepControls.fixed(0.1, 0.5), UNIT, [lambda s, a, k: calls.append((s.t, k))])
    assert [k for _, k in calls] == [1, 2, 3, 4, 5]
    assert calls[-1][0] == 0.5
    with pytest.raises(ValueError):
        advance(State.rest(8).replace(t=1.0), StepControls.fixed(0.1, 0.5), UNIT)


def test_accumulators_without_normalization():
    p = Parameters(mu1=2.0)
    acc = Accumulators.start(State.rest(8), p)
    assert not acc.tracks_representation and acc.terms is None


def test_one_step_gap_to_explicit_is_second_order():
    s = smooth_state(16)
    p = Parameters.paper_normalized(1.0, 1.0)
    dts = [4e-4, 2e-4, 1e-4]
    gaps = [step(s, dt, p).max_deviation(oracle_step(s, dt, p)) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(gaps), 1)[0]
    assert 1.8 <= slope <= 2.2

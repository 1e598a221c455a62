import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planar_mhd.scenarios import SCENARIOS, ScenarioError, get_scenario, validate_initial_fields


@pytest.mark.parametrize("name", sorted(SCENARIOS))
@pytest.mark.parametrize("n", [8, 37, 128])
def test_presets_satisfy_invariants(name, n):
    s = get_scenario(name).build(n, seed=3)
    assert abs(np.sum(s.v) * s.grid.dx - 1.0) <= 1e-12
    assert np.all(s.v > 0) and np.all(s.theta > 0)
    assert s.u[0] == s.u[-1] == 0 and np.all(s.w[[0, -1]] == 0)


def test_large_oscillation_profile():
    s = get_scenario("large-oscillation").build(256)
    x = s.grid.centers
    np.testing.assert_allclose(s.v, 1 + 0.5 * np.sin(2 * np.pi * x), rtol=1e-12)
    np.testing.assert_allclose(s.theta, 1 + 0.5 * np.cos(np.pi * x) ** 2)
    assert s.v.max() / s.v.min() > 2.5


def test_ns_limit_has_no_magnetic_data():
    s = get_scenario("ns-limit").build(16)
    assert np.all(s.w == 0) and np.all(s.b == 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_random_preset_is_seeded(seed):
    sc = get_scenario("random-perturbation")
    a, b = sc.build(16, seed=seed), sc.build(16, seed=seed)
    assert a.max_deviation(b) == 0
    assert abs(np.sum(a.v) * a.grid.dx - 1.0) <= 1e-12


def test_random_preset_differs_across_seeds():
    sc = get_scenario("random-perturbation")
    assert sc.build(16, seed=1).max_deviation(sc.build(16, seed=2)) > 0


def test_invalid_options():
    with pytest.raises(ScenarioError, match="v0 must be positive"):
        get_scenario("large-oscillation").build(16, amp_v=1.5)
    with pytest.raises(ScenarioError, match="no option"):
        get_scenario("rest").build(16, eps=1)
    with pytest.raises(ScenarioError, match="unknown scenario"):
        get_scenario("vortex")


def test_validate_initial_fields():
    ok = dict(v=np.ones(4), theta=np.ones(4), u=np.zeros(5), w=np.zeros((5, 2)), b=np.zeros((4, 2)))
    validate_initial_fields(ok)
    with pytest.raises(ScenarioError, match="theta0"):
        validate_initial_fields({**ok, "theta": -np.ones(4)})
    with pytest.raises(ScenarioError, match="u0 must vanish"):
        validate_initial_fields({**ok, "u": np.r_[1.0, np.zeros(4)]})
    with pytest.raises(ScenarioError, match="non-finite"):
        validate_initial_fields({**ok, "b": np.full((4, 2), np.nan)})

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curveflow.integrator import IntegratorConfig, StiffnessError, fixed_step, merson_stages, rkm_step, run


def decay(t, y):
    return -y


def test_config_validation():
    with pytest.raises(ValueError, match="tol"):
        IntegratorConfig(tol=0.0)
    with pytest.raises(ValueError, match="dt_min"):
        IntegratorConfig(dt_min=1.0, dt_max=0.1)
    with pytest.raises(ValueError, match="dt_init"):
        IntegratorConfig(dt_init=1.0, dt_max=0.1)
    with pytest.raises(ValueError, match="norm"):
        IntegratorConfig(norm="l2")


def test_initial_step_defaults_to_4h2():
    assert IntegratorConfig().initial_step(100) == pytest.approx(4e-4)
    assert IntegratorConfig().initial_step(10) == 1e-2  # clipped to dt_max
    assert IntegratorConfig(dt_init=3e-5).initial_step(100) == 3e-5


def test_merson_update_matches_taylor_on_linear_problem():
    # on y' = -y the update is the degree-5 Taylor polynomial of exp(-dt) minus dt^5/144
    for dt in (0.1, 0.2):
        y, _ = merson_stages(decay, 0.0, np.array([1.0]), dt)
        taylor = sum((-dt) ** n / math.factorial(n) for n in range(5))
        assert y[0] - taylor == pytest.approx(-(dt**5) / 144, rel=1e-9)


def test_fixed_step_is_fourth_order():
    errs = [abs(fixed_step(decay, np.array([1.0]), 0.0, 1.0, n)[0] - math.exp(-1)) for n in (10, 20, 40)]
    assert 12 <= errs[0] / errs[1] <= 20 and 12 <= errs[1] / errs[2] <= 20, errs


def test_adaptive_decay_accuracy():
    out = run(decay, np.array([1.0]), 0.0, 1.0, IntegratorConfig(tol=1e-6, dt_max=0.5))
    assert abs(out.y[0] - math.exp(-1)) < 1e-6
    assert out.max_accepted_error <= 1e-6
    assert out.t == 1.0


def test_constant_solution_grows_to_dt_max():
    out = run(lambda t, y: np.zeros_like(y), np.ones(3), 0.0, 1.0, IntegratorConfig(dt_max=0.05),
              dt_init=1e-6, record_dt=True)
    assert max(out.dt_history) == pytest.approx(0.05)
    assert out.rejections == 0
    np.testing.assert_array_equal(out.y, 1.0)


def test_step_controller_law():
    cfg = IntegratorConfig(tol=1e-3, dt_max=10.0)
    res = rkm_step(decay, 0.0, np.array([1.0]), 0.5, cfg)
    factor = min(max(0.8 * (1e-3 / res.error) ** 0.2, 0.1), 5.0)
    assert res.dt_next == pytest.approx(0.5 * factor, rel=1e-14)
    big = rkm_step(decay, 0.0, np.array([1.0]), 5.0, IntegratorConfig(tol=1e-9, dt_max=10.0))
    assert not big.accepted and big.dt_next == pytest.approx(0.5)  # shrink limit


def test_output_times_are_hit_exactly():
    seen = []
    out = run(decay, np.array([1.0]), 0.0, 1.0, IntegratorConfig(tol=1e-8), output_times=[0.1, 0.3, 0.7],
              observers=[lambda t, y, dt: seen.append(t)])
    assert seen == [0.0, 0.1, 0.3, 0.7, 1.0]
    assert out.snapshot_times == seen
    for t, y in zip(out.snapshot_times, out.snapshots):
        assert y[0] == pytest.approx(math.exp(-t), abs=1e-8)


def test_zero_length_run_emits_initial_state_only():
    out = run(decay, np.array([2.0]), 0.5, 0.5, IntegratorConfig())
    assert out.steps == 0 and out.snapshot_times == [0.5]
    with pytest.raises(ValueError, match="precedes"):
        run(decay, np.array([2.0]), 0.5, 0.4, IntegratorConfig())


def test_stiff_problem_raises_with_location():
    cfg = IntegratorConfig(tol=1e-12, dt_min=1e-3, dt_max=1e-2)
    with pytest.raises(StiffnessError) as info:
        run(lambda t, y: -1e6 * (y - np.cos(t)) + 1e6, np.array([0.0]), 0.0, 1.0, cfg)
    assert info.value.dt <= 1e-3 and info.value.t >= 0.0


def test_non_finite_stage_is_rejected():
    res = rkm_step(lambda t, y: np.array([np.nan]), 0.0, np.array([1.0]), 0.1, IntegratorConfig())
    assert not res.accepted and res.dt_next == pytest.approx(0.05)
    np.testing.assert_array_equal(res.y, [1.0])


def test_runs_are_bitwise_deterministic():
    rhs = lambda t, y: np.array([y[1], -np.sin(y[0])])
    a = run(rhs, np.array([1.0, 0.0]), 0.0, 5.0, IntegratorConfig(tol=1e-7))
    b = run(rhs, np.array([1.0, 0.0]), 0.0, 5.0, IntegratorConfig(tol=1e-7))
    np.testing.assert_array_equal(a.y, b.y)
    assert a.steps == b.steps


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(1e-9, 1e-4))
def test_linear_growth_meets_tolerance(rate, tol):
    out = run(lambda t, y: rate * y, np.array([1.0]), 0.0, 1.0, IntegratorConfig(tol=tol, dt_max=0.1))
    assert out.max_accepted_error <= tol
    # the per-step estimate tracks the local error, so the global error stays modest
    assert abs(out.y[0] / math.exp(rate) - 1) < 200 * tol


def test_step_limit_caps_every_step():
    out = run(lambda t, y: np.zeros_like(y), np.ones(2), 0.0, 1.0, IntegratorConfig(dt_max=0.5),
              record_dt=True, step_limit=lambda t, y: 0.01 + 0.01 * t)
    ts = np.cumsum([0.0] + out.dt_history[:-1])
    assert all(dt <= 0.01 + 0.01 * t + 1e-15 for t, dt in zip(ts, out.dt_history))
    assert out.t == 1.0

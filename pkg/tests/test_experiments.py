import numpy as np
import pytest

from curveflow.dynamics import make_rhs
from curveflow.reduced_ode import P, HopfParams, ReducedState, integrate
from curveflow.runner import EXIT_OK, run_scenario
from curveflow.scenarios import parse_config


@pytest.mark.slow
def test_unknotted_curve_shrinks_monotonically():
    res = run_scenario(parse_config({"scenario": "unknotted", "M": 400, "output": {"snapshot_interval": 0.025}}),
                       self_distance=False)
    assert res.exit_code == EXIT_OK, res.message
    length = np.array([row["length"] for row in res.series])
    assert np.all(np.diff(length) < 0)
    assert length[-1] < 0.35 * length[0]
    assert [s.t for s in res.states if s.t in (0.062, 0.124, 0.19)] == [0.062, 0.124, 0.19]


def hopf_parallel_config(M, amplitude, **extra):
    return parse_config({"scenario": "hopf_parallel", "M": M, "coeffs": {"hopf_lambda": 5.36808},
                         "initial_rho": {"name": "cosine", "amplitude": amplitude}, **extra})


def test_hopf_parallel_tracks_reduced_ode_while_contracting():
    # with P < 0 throughout, the parallel circle stays planar and follows (r, a) at second order
    lam, T = 5.36808, 0.3
    ode = integrate(ReducedState(1.0, 0.4), HopfParams(lam), T).y
    assert P(ode[0], ode[1], lam) < 0
    errs = []
    for M in (50, 100, 200):
        res = run_scenario(hopf_parallel_config(M, 0.4, T_final=T, integrator={"tol": 1e-8}), self_distance=False)
        assert res.exit_code == EXIT_OK, res.message
        final = res.states[-1]
        nodes = final.curve.nodes
        assert np.ptp(nodes[:, 2]) < 1e-12
        radius = np.mean(np.hypot(nodes[:, 0], nodes[:, 1]))
        amplitude = 2 * np.mean(final.rho * np.cos(2 * np.pi * np.arange(M) / M))
        errs.append(max(abs(radius - ode[0]), abs(amplitude - ode[1])))
    assert errs[-1] < 2e-5
    assert 3.8 < errs[0] / errs[1] < 4.2 and 3.8 < errs[1] / errs[2] < 4.2, errs


def jacobian_growth(M, amplitude):
    config = hopf_parallel_config(M, amplitude)
    y = config.initial_state().to_vector()
    rhs = make_rhs(config.problem())
    h = 1e-7
    J = np.column_stack([(rhs(0.0, y + h * e) - rhs(0.0, y - h * e)) / (2 * h) for e in np.eye(y.size)])
    return np.max(np.linalg.eigvals(J).real)


def test_expanding_parallel_circle_is_ill_posed_out_of_plane():
    # out-of-plane bumps obey w_t = -P r w_ss, so P > 0 gives growth rates scaling with M^2
    expanding = [jacobian_growth(M, 0.3) for M in (20, 40, 80)]
    assert expanding[0] > 10
    assert 3.8 < expanding[1] / expanding[0] < 4.2 and 3.8 < expanding[2] / expanding[1] < 4.2
    contracting = [jacobian_growth(M, 0.5) for M in (20, 40, 80)]
    assert max(contracting) < 5 and np.ptp(contracting) < 0.1

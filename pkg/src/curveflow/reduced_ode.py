"""Separated-form circle solutions and their planar (radius, amplitude) ODE.

A circle of radius ``r`` carrying ``rho = a cos(2 pi u)`` solves the coupled
flow with normal speed ``kappa - 2 pi / L - P`` and source
``rho / (sqrt(2) ||rho||_2)`` iff

    dr/dt = P(r, a),    da/dt = -(a / r) P(r, a) - a / r^2 + 1,

with ``P(r, a) = r^2 - lambda a + 1``.  The steady state loses stability
through a Hopf bifurcation where the Jacobian trace vanishes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .geometry import Curve
from .integrator import IntegratorConfig, RunSummary, run

LAMBDA_CRITICAL = 4.473402  # reported trace root, used only as a reference value
LAMBDA_STABLE = 5.36808
LAMBDA_CYCLE = 4.02606


@dataclass(frozen=True)
class HopfParams:
    lam: float

    def __post_init__(self):
        if not self.lam > 1:
            raise ValueError(f"lambda must exceed 1, got {self.lam}")


@dataclass(frozen=True)
class ReducedState:
    r: float
    a: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"radius must be positive, got {self.r}")


def P(r: float, a: float, lam: float) -> float:
    return r * r - lam * a + 1.0


def hopf_rhs(state: ReducedState, params: HopfParams) -> Tuple[float, float]:
    r, a = state.r, state.a
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    p = P(r, a, params.lam)
    return p, -a / r * p - a / (r * r) + 1.0


def steady_state(params: HopfParams) -> ReducedState:
    lam = params.lam
    return ReducedState(1.0 / math.sqrt(lam - 1.0), 1.0 / (lam - 1.0))


def jacobian(params: HopfParams) -> np.ndarray:
    """Linearization at the steady state, assembled from dP/dr = 2r, dP/da = -lambda."""
    ss = steady_state(params)
    r, a, lam = ss.r, ss.a, params.lam
    Pr, Pa = 2.0 * r, -lam
    return np.array(
        [
            [Pr, Pa],
            [-a / r * Pr + 2.0 * a / r**3, -a / r * Pa - 1.0 / r**2],
        ]
    )


class TraceDet(NamedTuple):
    trace: float
    det: float
    matrix: np.ndarray


def jacobian_trace(lam: float) -> float:
    return (lam + 2.0) / math.sqrt(lam - 1.0) - lam + 1.0


def jacobian_trace_det(params: HopfParams) -> TraceDet:
    """Closed-form trace and determinant plus the assembled matrix.

    The determinant is ``2 (lambda - 1)^{3/2}``, which is what the assembled
    matrix gives.
    """
    lam = params.lam
    return TraceDet(jacobian_trace(lam), 2.0 * (lam - 1.0) ** 1.5, jacobian(params))


def critical_lambda(bracket: Tuple[float, float] = (2.0, 10.0), xtol: float = 1e-12) -> float:
    lo, hi = bracket
    if not 1 < lo < hi:
        raise ValueError(f"bracket must satisfy 1 < lo < hi, got {bracket}")
    f_lo, f_hi = jacobian_trace(lo), jacobian_trace(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"trace does not change sign on {bracket}: {f_lo:.3g}, {f_hi:.3g}")
    return float(brentq(jacobian_trace, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def integrate(
    state0: ReducedState,
    params: HopfParams,
    t_final: float,
    config: Optional[IntegratorConfig] = None,
    output_times: Sequence[float] = (),
    with_angle: bool = False,
) -> RunSummary:
    """Integrate (r, a[, omega]) with the adaptive Merson integrator.

    The rotation angle obeys ``r d(omega)/dt = 1`` and starts at zero.
    """
    config = config or IntegratorConfig(tol=1e-8, dt_max=0.05)
    lam = params.lam

    def rhs(t, y):
        r, a = y[0], y[1]
        p = r * r - lam * a + 1.0
        out = [p, -a / r * p - a / (r * r) + 1.0]
        if with_angle:
            out.append(1.0 / r)
        return np.array(out)

    y0 = [state0.r, state0.a] + ([0.0] if with_angle else [])
    return run(rhs, np.array(y0), 0.0, t_final, config, output_times, dt_init=config.dt_init or 1e-3)


def rotation(omega: float) -> np.ndarray:
    c, s = math.cos(omega), math.sin(omega)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _labels(M: int) -> np.ndarray:
    return np.arange(M) / M


def reconstruct_rotating(state: ReducedState, omega: float, M: int):
    """Circle of radius ``r`` in the plane rotated by ``Q(omega)``, with ``rho = a cos 2 pi u``."""
    u = _labels(M)
    flat = np.column_stack([np.cos(2 * np.pi * u), np.sin(2 * np.pi * u), np.zeros(M)])
    nodes = state.r * flat @ rotation(omega).T
    return Curve(nodes), state.a * np.cos(2 * np.pi * u)


def reconstruct_parallel(state: ReducedState, M: int):
    """Circle of radius ``r`` lying in the plane ``z = r``."""
    u = _labels(M)
    r = state.r
    nodes = np.column_stack([r * np.cos(2 * np.pi * u), r * np.sin(2 * np.pi * u), np.full(M, r)])
    return Curve(nodes), state.a * np.cos(2 * np.pi * u)


def successive_maxima(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values of the interior local maxima of a sampled signal (parabolic refinement)."""
    t = np.asarray(t)
    x = np.asarray(x)
    idx = np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])) + 1
    peaks = []
    for i in idx:
        y0, y1, y2 = x[i - 1], x[i], x[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        peaks.append(y1 - 0.25 * (y0 - y2) * shift)
    return np.array(peaks)

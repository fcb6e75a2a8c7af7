"""Semi-discrete right-hand side of the coupled curve / scalar system.

Node velocity (flowing finite volumes)::

    dX_k/dt = a_k (t_{k+1} - t_k) / d_{k+1/2} + extra_k N_k + b_k T_k x (kappa N)_k
              + gamma_k B_k + F_k + alpha_k T_k

and the scalar transported with the nodes::

    drho_k/dt = c_k D_ss rho_k - D_s(v rho)_k + (eta_k - (D_s alpha)_k) rho_k + q_k [+ rho_k^3]

with ``eta = kappa * beta`` the curvature times the total normal speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .forces import ForceSpec, force_field
from .geometry import Curve, FrenetData, cross_rows, frenet, local_lengths, shift_next, shift_prev
from .redistribution import RedistributionSpec, alpha_slope, integrate_alpha

BETA_LAWS = ("kappa", "kappa_minus_mean", "kappa_minus_mean_minus_P")
GAMMA_LAWS = ("zero", "rho", "minus_beta", "constant")

# a, b, c, v: constants or f(X, T, rho, ds_rho) -> (M,) array
Coefficient = Union[float, Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]]
# q(t, u, rho) -> (M,) array, u the node labels k/M
Source = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class CoefficientError(ValueError):
    """A diffusion coefficient lost strict positivity."""


@dataclass
class SimState:
    curve: Curve
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not isinstance(self.curve, Curve):
            self.curve = Curve(self.curve)
        self.rho = np.asarray(self.rho, dtype=float)
        if self.rho.shape != (self.curve.M,):
            raise ValueError(f"rho has shape {self.rho.shape}, expected ({self.curve.M},)")

    @property
    def M(self) -> int:
        return self.curve.M

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.curve.nodes.ravel(), self.rho])

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float = 0.0) -> "SimState":
        M = y.size // 4
        return cls(Curve(y[: 3 * M].reshape(M, 3)), y[3 * M :].copy(), t)


@dataclass
class CoefficientSet:
    a: Coefficient = 1.0
    b: Coefficient = 0.0
    c: Coefficient = 1.0
    v: Coefficient = 0.0
    q: Optional[Source] = None
    beta_law: str = "kappa"
    gamma_law: str = "zero"
    gamma_value: float = 0.0
    hopf_lambda: Optional[float] = None
    cubic: bool = False
    upwind: bool = False

    def __post_init__(self):
        if self.beta_law not in BETA_LAWS:
            raise ValueError(f"unknown beta_law {self.beta_law!r}; expected one of {BETA_LAWS}")
        if self.gamma_law not in GAMMA_LAWS:
            raise ValueError(f"unknown gamma_law {self.gamma_law!r}; expected one of {GAMMA_LAWS}")
        if self.beta_law == "kappa_minus_mean_minus_P" and self.hopf_lambda is None:
            raise ValueError("beta_law kappa_minus_mean_minus_P needs hopf_lambda")


@dataclass
class FlowProblem:
    coeffs: CoefficientSet = field(default_factory=CoefficientSet)
    force: ForceSpec = field(default_factory=ForceSpec)
    redistribution: RedistributionSpec = field(default_factory=lambda: RedistributionSpec("none"))


class GeometryFeedback(NamedTuple):
    eta: np.ndarray          # kappa * beta per node
    alpha: np.ndarray        # tangential speed per node
    alpha_slope: np.ndarray  # d(alpha)/ds per node


class Assembly(NamedTuple):
    velocity: np.ndarray
    drho: np.ndarray
    frenet: FrenetData
    feedback: GeometryFeedback
    beta: np.ndarray


def _evaluate(coef: Coefficient, nodes, tangent, rho, ds_rho) -> np.ndarray:
    if callable(coef):
        val = np.asarray(coef(nodes, tangent, rho, ds_rho), dtype=float)
    else:
        val = np.asarray(coef, dtype=float)
    return np.broadcast_to(val, rho.shape).astype(float, copy=False)


def rho_l2(rho: np.ndarray) -> float:
    """L2 norm in the parameter measure du = 1/M."""
    return math.sqrt(float(np.mean(rho * rho)))


def hopf_P(length: float, rho_norm: float, lam: float) -> float:
    return length**2 / (4.0 * math.pi**2) - lam * math.sqrt(2.0) * rho_norm + 1.0


def central_ds(values: np.ndarray, fr: FrenetData) -> np.ndarray:
    """Centered arc-length derivative at nodes."""
    return (shift_next(values) - shift_prev(values)) / (fr.d + shift_next(fr.d))


def _frame_or_zero(vectors: np.ndarray, defined: np.ndarray) -> np.ndarray:
    return np.where(defined[:, None], vectors, 0.0)


def _velocity(state: SimState, problem: FlowProblem, fr: FrenetData):
    co = problem.coeffs
    nodes, rho = state.curve.nodes, state.rho
    ds_rho = central_ds(rho, fr)
    a = _evaluate(co.a, nodes, fr.tangent, rho, ds_rho)
    b = _evaluate(co.b, nodes, fr.tangent, rho, ds_rho)
    if np.any(~(a > 0)):
        k = int(np.flatnonzero(~(a > 0))[0])
        raise CoefficientError(f"coefficient a must be > 0; a[{k}] = {a[k]}")

    L = fr.length
    if co.beta_law == "kappa":
        extra = 0.0
    elif co.beta_law == "kappa_minus_mean":
        extra = -2.0 * math.pi / L
    else:
        extra = -2.0 * math.pi / L - hopf_P(L, rho_l2(rho), co.hopf_lambda)

    normal = _frame_or_zero(fr.normal, fr.defined)
    binormal = _frame_or_zero(fr.binormal, fr.defined)
    F = force_field(nodes, problem.force, state.t)

    velocity = a[:, None] * fr.kappa_n + b[:, None] * cross_rows(fr.tangent, fr.kappa_n) + F
    if extra:
        velocity += extra * normal
    F_dot_kn = np.einsum("ij,ij->i", F, fr.kappa_n)
    eta = a * fr.kappa**2 + extra * fr.kappa + F_dot_kn
    beta = a * fr.kappa + extra + np.einsum("ij,ij->i", F, normal)

    if co.gamma_law == "rho":
        gamma = rho
    elif co.gamma_law == "minus_beta":
        gamma = -beta
    elif co.gamma_law == "constant":
        gamma = np.full_like(rho, co.gamma_value)
    else:
        gamma = None
    if gamma is not None:
        velocity += gamma[:, None] * binormal

    redist = problem.redistribution
    F_tan = np.einsum("ij,ij->i", F, fr.tangent)
    if redist.active:
        # the redistribution replaces whatever tangential motion F carries
        velocity -= F_tan[:, None] * fr.tangent
        slope = alpha_slope(fr, eta, redist)
        alpha = integrate_alpha(fr, slope)
        velocity += alpha[:, None] * fr.tangent
    else:
        alpha = F_tan
        slope = central_ds(F_tan, fr) if problem.force.kind != "none" else np.zeros_like(rho)
    return velocity, GeometryFeedback(eta, alpha, slope), beta


def curve_rhs(
    state: SimState,
    coeffs: CoefficientSet,
    force: Optional[ForceSpec] = None,
    redist: Optional[RedistributionSpec] = None,
) -> np.ndarray:
    """Per-node velocity vectors, shape ``(M, 3)``."""
    problem = FlowProblem(coeffs, force or ForceSpec(), redist or RedistributionSpec("none"))
    return _velocity(state, problem, frenet(state.curve))[0]


def scalar_rhs(
    state: SimState,
    coeffs: CoefficientSet,
    feedback: GeometryFeedback,
    fr: Optional[FrenetData] = None,
) -> np.ndarray:
    """Time derivative of the nodal scalar values given the geometric feedback."""
    fr = fr if fr is not None else frenet(state.curve)
    nodes, rho = state.curve.nodes, state.rho
    ds_rho = central_ds(rho, fr)
    c = _evaluate(coeffs.c, nodes, fr.tangent, rho, ds_rho)
    if np.any(~(c > 0)):
        k = int(np.flatnonzero(~(c > 0))[0])
        raise CoefficientError(f"coefficient c must be > 0; c[{k}] = {c[k]}")

    d, d_next, d_half = fr.d, shift_next(fr.d), fr.d_half
    rho_next, rho_prev = shift_next(rho), shift_prev(rho)
    out = c * ((rho_next - rho) / d_next - (rho - rho_prev) / d) / d_half

    v = _evaluate(coeffs.v, nodes, fr.tangent, rho, ds_rho)
    if np.any(v != 0):
        if coeffs.upwind:
            v_face = 0.5 * (v + shift_next(v))
            flux = v_face * np.where(v_face > 0, rho, rho_next)
        else:
            vr = v * rho
            flux = 0.5 * (vr + shift_next(vr))  # flux[k] lives at k+1/2
        out -= (flux - shift_prev(flux)) / d_half

    out += (feedback.eta - feedback.alpha_slope) * rho
    if coeffs.q is not None:
        u = np.arange(rho.size) / rho.size
        out += np.asarray(coeffs.q(state.t, u, rho), dtype=float)
    if coeffs.cubic:
        out += rho**3
    return out


def assemble(state: SimState, problem: FlowProblem) -> Assembly:
    fr = frenet(state.curve)
    velocity, feedback, beta = _velocity(state, problem, fr)
    drho = scalar_rhs(state, problem.coeffs, feedback, fr)
    return Assembly(velocity, drho, fr, feedback, beta)


def coupled_rhs(state: SimState, problem: FlowProblem) -> np.ndarray:
    """Flat derivative of the ``4M`` state vector (positions first, then rho)."""
    asm = assemble(state, problem)
    return np.concatenate([asm.velocity.ravel(), asm.drho])


def diffusion_step_limit(problem: FlowProblem, factor: float) -> Callable[[float, np.ndarray], float]:
    """Step cap ``factor * min_k d_k d_{k+1} / s`` for the explicit curve and scalar diffusion.

    Gershgorin bounds the discrete second difference at node ``k`` by
    ``4 / (d_k d_{k+1})``; ``s`` is the largest of ``|a + i b|`` and ``c``.
    The ``minus_beta`` binormal law carries ``-a kappa B``, so ``b`` is shifted
    by ``-a`` there. Merson's stability region covers a half-disc of radius
    about 3.16 in the left half plane, so ``factor`` must stay below about 0.79
    and is best kept well under it.
    """
    co = problem.coeffs
    constant = not any(callable(x) for x in (co.a, co.b, co.c))
    shift = 1.0 if co.gamma_law == "minus_beta" else 0.0

    def limit(t: float, y: np.ndarray) -> float:
        state = SimState.from_vector(y, t)
        if constant:
            lengths = local_lengths(state.curve)
            scale = max(math.hypot(co.a, co.b - shift * co.a), co.c)
        else:
            lengths = fr = frenet(state.curve)
            ds_rho = central_ds(state.rho, fr)
            args = (state.curve.nodes, fr.tangent, state.rho, ds_rho)
            a = _evaluate(co.a, *args)
            scale = float(max(np.max(np.hypot(a, _evaluate(co.b, *args) - shift * a)),
                              np.max(_evaluate(co.c, *args))))
        return factor * float(np.min(lengths.d * shift_next(lengths.d))) / scale

    return limit


def make_rhs(problem: FlowProblem) -> Callable[[float, np.ndarray], np.ndarray]:
    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return coupled_rhs(SimState.from_vector(y, t), problem)

    return rhs

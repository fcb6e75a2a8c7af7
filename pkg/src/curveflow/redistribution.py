"""Tangential redistribution of nodes along an evolving closed curve.

The tangential velocity ``alpha`` solves

    d(alpha)/ds = eta - <eta> + (L / |X_u| - 1) * omega,    eta = kappa * beta,

where ``<.>`` is the arc-length mean.  ``omega = 0`` keeps the relative local
length ``|X_u| / L`` frozen in time; ``omega > 0`` drives it to one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CurveLike, Lengths, local_lengths, shift_next

MODES = ("none", "uniform", "asymptotically_uniform")


@dataclass(frozen=True)
class RedistributionSpec:
    mode: str = "uniform"
    omega: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown redistribution mode {self.mode!r}; expected one of {MODES}")
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")

    @property
    def active(self) -> bool:
        return self.mode != "none"

    @property
    def rate(self) -> float:
        return self.omega if self.mode == "asymptotically_uniform" else 0.0


def alpha_slope(lengths: Lengths, eta: np.ndarray, spec: RedistributionSpec) -> np.ndarray:
    """Nodal values of d(alpha)/ds with zero discrete arc-length mean."""
    d_half = lengths.d_half
    L = float(np.sum(lengths.d))
    M = d_half.size
    r = eta - np.sum(eta * d_half) / L
    if spec.rate:
        r = r + (L / (M * d_half) - 1.0) * spec.rate
    # removes quadrature residue so that alpha closes periodically
    return r - np.sum(r * d_half) / L


def integrate_alpha(lengths: Lengths, slope: np.ndarray) -> np.ndarray:
    """Cumulative arc-length integration anchored at ``alpha_0 = 0``.

    Uses the trapezoid value ``(r_k + r_{k+1}) / 2`` on segment ``k+1``.
    """
    d_next = shift_next(lengths.d)
    increments = 0.5 * (slope + shift_next(slope)) * d_next
    alpha = np.empty_like(slope)
    alpha[0] = 0.0
    np.cumsum(increments[:-1], out=alpha[1:])
    return alpha


def tangential_alpha(curve: CurveLike, eta: np.ndarray, spec: RedistributionSpec) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if not spec.active:
        return np.zeros_like(eta)
    lengths = local_lengths(curve)
    return integrate_alpha(lengths, alpha_slope(lengths, eta, spec))


def relative_local_length(curve: CurveLike) -> np.ndarray:
    """``M * d_{k+1/2} / L``; identically one on a uniformly parameterized polygon."""
    lengths = local_lengths(curve)
    return lengths.d_half.size * lengths.d_half / float(np.sum(lengths.d))

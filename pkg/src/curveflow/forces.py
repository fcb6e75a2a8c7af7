"""Nonlocal forces on a polygonal curve and topological diagnostics.

All curve integrals use the segment-midpoint rule: segment ``j`` contributes
at its midpoint ``m_j`` with unit direction ``t_j`` and weight ``l_j``.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import CurveLike, as_nodes, cross_rows, local_lengths, segment_vectors, shift_prev

DEFAULT_DELTA = 0.1
FORCE_KINDS = ("none", "biot_savart", "custom_integral")

# f(x, t, X(s), T(s)) -> R^3, vectorized over the trailing point axis
Kernel = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class LinkingAccuracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BiotSavartSpec:
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"Biot-Savart regularization delta must be > 0, got {self.delta}")


@dataclass(frozen=True)
class ForceSpec:
    kind: str = "none"
    biot_savart: Optional[BiotSavartSpec] = None
    kernel: Optional[Kernel] = None

    def __post_init__(self):
        if self.kind not in FORCE_KINDS:
            raise ValueError(f"unknown force kind {self.kind!r}; expected one of {FORCE_KINDS}")
        if self.kind == "biot_savart" and self.biot_savart is None:
            object.__setattr__(self, "biot_savart", BiotSavartSpec())
        if self.kind == "custom_integral" and self.kernel is None:
            raise ValueError("custom_integral force needs a kernel")


def midpoint_rule(curve: CurveLike):
    """Midpoints, unit directions and lengths of all segments."""
    nodes = as_nodes(curve)
    e = segment_vectors(nodes)
    ell = local_lengths(nodes).d
    mid = nodes - 0.5 * e
    return mid, e / ell[:, None], ell


def thread_count() -> int:
    """Worker cap from ``CURVEFLOW_THREADS``; 0 or unset means serial."""
    try:
        return max(0, int(os.environ.get("CURVEFLOW_THREADS", "0")))
    except ValueError:
        return 0


def _biot_savart_rows(points, mid, tdir, ell, delta):
    diff = points[:, None, :] - mid[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    w = ell[None, :] / (delta * delta + r2) ** 1.5
    return np.einsum("ij,ijk->ik", w, cross_rows(diff, tdir[None, :, :]))


def biot_savart_many(points: np.ndarray, curve: CurveLike, spec: BiotSavartSpec) -> np.ndarray:
    """Regularized Biot-Savart field at each row of ``points``.

    Each output row is reduced independently, so splitting rows across
    threads gives the same bits as the serial path.
    """
    if not spec.delta > 0:
        raise ValueError(f"Biot-Savart regularization delta must be > 0, got {spec.delta}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mid, tdir, ell = midpoint_rule(curve)
    workers = thread_count()
    if workers <= 1 or points.shape[0] < 64:
        return _biot_savart_rows(points, mid, tdir, ell, spec.delta)
    chunks = np.array_split(np.arange(points.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda idx: _biot_savart_rows(points[idx], mid, tdir, ell, spec.delta), chunks)
        return np.concatenate(list(parts), axis=0)


def biot_savart_at(point, curve: CurveLike, spec: BiotSavartSpec) -> np.ndarray:
    return biot_savart_many(np.asarray(point, dtype=float)[None, :], curve, spec)[0]


def force_field(curve: CurveLike, spec: ForceSpec, time: float = 0.0) -> np.ndarray:
    nodes = as_nodes(curve)
    if spec.kind == "none":
        return np.zeros_like(nodes)
    if spec.kind == "biot_savart":
        return biot_savart_many(nodes, nodes, spec.biot_savart)
    mid, tdir, ell = midpoint_rule(nodes)
    out = np.empty_like(nodes)
    for k, x in enumerate(nodes):
        # tangent at the evaluation node: centered chord
        tx = nodes[(k + 1) % len(nodes)] - nodes[k - 1]
        tx = tx / np.linalg.norm(tx)
        vals = np.asarray(spec.kernel(x, tx, mid, tdir), dtype=float)
        vals = np.broadcast_to(vals, mid.shape)
        out[k] = ell @ vals
    return out


def linking_number(curve_a: CurveLike, curve_b: CurveLike, min_distance: float = 1e-3) -> float:
    """Gauss linking integral of two disjoint closed curves (unregularized kernel).

    Warns with :class:`LinkingAccuracyWarning` when the curves come closer
    than ``min_distance`` relative to the larger segment length scale.
    """
    ma, ta, la = midpoint_rule(curve_a)
    mb, tb, lb = midpoint_rule(curve_b)
    diff = ma[:, None, :] - mb[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    closest = float(dist.min())
    if closest < min_distance * max(la.max(), lb.max(), 1.0) or closest == 0.0:
        warnings.warn(
            f"curves are {closest:.3e} apart; linking integral may be inaccurate",
            LinkingAccuracyWarning,
            stacklevel=2,
        )
    # det(t_a, t_b, m_a - m_b) = (t_a x t_b) . (m_a - m_b)
    cross = cross_rows(ta[:, None, :], tb[None, :, :])
    det = np.einsum("ijk,ijk->ij", cross, diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = det / dist**3
    return float(np.einsum("ij,i,j->", integrand, la, lb) / (4.0 * math.pi))


def segment_distances(p0, p1, q0, q1) -> np.ndarray:
    """Distance between segment pairs ``[p0, p1]`` and ``[q0, q1]`` (broadcast rows)."""
    u = p1 - p0
    v = q1 - q0
    w = p0 - q0
    a = np.einsum("...k,...k->...", u, u)
    b = np.einsum("...k,...k->...", u, v)
    c = np.einsum("...k,...k->...", v, v)
    d = np.einsum("...k,...k->...", u, w)
    e = np.einsum("...k,...k->...", v, w)
    eps = 1e-300
    safe_a = np.where(a > eps, a, 1.0)
    safe_c = np.where(c > eps, c, 1.0)
    denom = a * c - b * b
    parallel = denom <= 1e-14 * a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(parallel, 0.0, (b * e - c * d) / np.where(parallel, 1.0, denom))
    s = np.clip(s, 0.0, 1.0)
    t = (b * s + e) / safe_c
    # t outside [0,1]: clamp and recompute s for the clamped t
    t_clamped = np.clip(t, 0.0, 1.0)
    s = np.where(t != t_clamped, np.clip((b * t_clamped - d) / safe_a, 0.0, 1.0), s)
    t = t_clamped
    # point-like segments
    s = np.where(a > eps, s, 0.0)
    t = np.where(c > eps, t, np.where(a > eps, t, 0.0))
    s = np.where((c <= eps) & (a > eps), np.clip(-d / safe_a, 0.0, 1.0), s)
    t = np.where(c <= eps, 0.0, np.where(a <= eps, np.clip(e / safe_c, 0.0, 1.0), t))
    gap = w + s[..., None] * u - t[..., None] * v
    return np.sqrt(np.einsum("...k,...k->...", gap, gap))


def min_self_distance(curve: CurveLike) -> float:
    """Smallest distance between two segments that share no node."""
    nodes = as_nodes(curve)
    M = nodes.shape[0]
    start = shift_prev(nodes)  # segment k: X_{k-1} -> X_k
    i, j = np.triu_indices(M, k=2)
    keep = (j - i) != M - 1  # segments 0 and M-1 share node M-1
    i, j = i[keep], j[keep]
    if i.size == 0:
        return math.inf
    return float(segment_distances(start[i], nodes[i], start[j], nodes[j]).min())

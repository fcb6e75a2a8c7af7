"""Discrete differential geometry of closed polygonal curves in R^3.

Nodes are stored as an ``(M, 3)`` array and indexed periodically, so node
``M`` is node ``0``.  Segment ``k`` joins node ``k-1`` to node ``k`` and has
length ``d_k``; the dual (finite volume) length around node ``k`` is
``d_{k+1/2} = (d_k + d_{k+1}) / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

DEFAULT_KAPPA_THRESHOLD = 1e-9
DEGENERACY_TOL = 1e-14


class MeshDegeneracyError(ValueError):
    """Two consecutive nodes coincide (within floating tolerance)."""

    def __init__(self, index: int, length: float):
        super().__init__(f"degenerate segment at node index {index}: d_{index} = {length:.3e}")
        self.index = index
        self.length = length


@dataclass(frozen=True)
class Curve:
    """Closed polygon with ``M >= 4`` nodes in R^3."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise ValueError(f"nodes must have shape (M, 3), got {nodes.shape}")
        if nodes.shape[0] < 4:
            raise ValueError(f"a closed curve needs M >= 4 nodes, got {nodes.shape[0]}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def M(self) -> int:
        return self.nodes.shape[0]

    def __len__(self) -> int:
        return self.M


CurveLike = Union[Curve, np.ndarray]


def as_nodes(curve: CurveLike) -> np.ndarray:
    if isinstance(curve, Curve):
        return curve.nodes
    nodes = np.asarray(curve, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] != 3:
        raise ValueError(f"nodes must have shape (M, 3), got {nodes.shape}")
    return nodes


class Lengths(NamedTuple):
    d: np.ndarray       # d[k] = |X_k - X_{k-1}|
    d_half: np.ndarray  # d_half[k] = (d_k + d_{k+1}) / 2


def shift_next(a: np.ndarray) -> np.ndarray:
    """``out[k] = a[k+1]`` (periodic); cheaper than ``np.roll`` on short arrays."""
    return np.concatenate((a[1:], a[:1]))


def shift_prev(a: np.ndarray) -> np.ndarray:
    """``out[k] = a[k-1]`` (periodic)."""
    return np.concatenate((a[-1:], a[:-1]))


def row_norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", v, v))


def cross_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def segment_vectors(nodes: np.ndarray) -> np.ndarray:
    """``e[k] = X_k - X_{k-1}`` with periodic wrap."""
    return nodes - shift_prev(nodes)


def _check_lengths(d: np.ndarray, scale: float) -> None:
    bad = np.flatnonzero(d <= DEGENERACY_TOL * max(scale, 1.0))
    if bad.size:
        raise MeshDegeneracyError(int(bad[0]), float(d[bad[0]]))


def local_lengths(curve: CurveLike) -> Lengths:
    nodes = as_nodes(curve)
    d = row_norms(segment_vectors(nodes))
    _check_lengths(d, float(np.max(np.abs(nodes))))
    return Lengths(d, 0.5 * (d + shift_next(d)))


def total_length(curve: CurveLike) -> float:
    return float(np.sum(local_lengths(curve).d))


@dataclass(frozen=True)
class FrenetData:
    """Per-node discrete geometry.

    ``normal`` and ``binormal`` rows are NaN where ``defined`` is False; use
    ``kappa_n`` (the curvature vector, always defined) in that case.  On a
    nonuniform mesh ``kappa_n`` may carry a small tangential component, which
    ``normal`` omits.
    """

    d: np.ndarray
    d_half: np.ndarray
    tangent: np.ndarray
    kappa: np.ndarray
    kappa_n: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    defined: np.ndarray

    @property
    def length(self) -> float:
        return float(np.sum(self.d))


def frenet(curve: CurveLike, kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD) -> FrenetData:
    """Curvature vector and Frenet frame from the flowing finite-volume stencil.

    ``kappa_threshold`` is relative to the ``1/L`` curvature scale.
    """
    nodes = as_nodes(curve)
    e = segment_vectors(nodes)
    d = row_norms(e)
    _check_lengths(d, float(np.max(np.abs(nodes))))
    d_next = shift_next(d)
    d_half = 0.5 * (d + d_next)

    unit = e / d[:, None]
    kappa_n = (shift_next(unit) - unit) / d_half[:, None]
    kappa = row_norms(kappa_n)

    tangent = e + shift_next(e)  # X_{k+1} - X_{k-1}
    tangent /= row_norms(tangent)[:, None]

    length = float(np.sum(d))
    # N is kappa_n with its (mesh-induced) tangential part removed, so the
    # frame is orthonormal even where the stencil is not symmetric
    normal = kappa_n - np.einsum("ij,ij->i", kappa_n, tangent)[:, None] * tangent
    n_len = row_norms(normal)
    defined = (kappa >= kappa_threshold / length) & (n_len > 0.5 * kappa)
    if defined.all():
        normal /= n_len[:, None]
    else:
        normal[defined] /= n_len[defined, None]
        normal[~defined] = np.nan
    binormal = cross_rows(tangent, normal)
    return FrenetData(d, d_half, tangent, kappa, kappa_n, normal, binormal, defined)


def torsion_diagnostic(curve: CurveLike, kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD) -> np.ndarray:
    """Per-node torsion ``(T x X_ss) . X_sss / kappa^2``; NaN where the frame is undefined.

    ``X_sss`` is the centered arc-length difference of the curvature vector.
    Diagnostic only.
    """
    fr = frenet(curve, kappa_threshold)
    third = (shift_next(fr.kappa_n) - shift_prev(fr.kappa_n)) / (fr.d + shift_next(fr.d))[:, None]
    triple = np.einsum("ij,ij->i", cross_rows(fr.tangent, fr.kappa_n), third)
    tau = np.full(fr.kappa.shape, np.nan)
    tau[fr.defined] = triple[fr.defined] / fr.kappa[fr.defined] ** 2
    return tau


class PlaneFit(NamedTuple):
    centroid: np.ndarray
    normal: np.ndarray
    basis: np.ndarray  # (2, 3) in-plane orthonormal vectors
    deviation: float   # max node distance from the plane


def best_fit_plane(curve: CurveLike) -> PlaneFit:
    nodes = as_nodes(curve)
    centroid = nodes.mean(axis=0)
    _, _, vt = np.linalg.svd(nodes - centroid, full_matrices=False)
    normal = vt[2]
    deviation = float(np.max(np.abs((nodes - centroid) @ normal)))
    return PlaneFit(centroid, normal, vt[:2], deviation)


class AreaEstimate(NamedTuple):
    area: float
    deviation: float
    reliable: bool


def enclosed_area_planar(curve: CurveLike, rel_tol: float = 1e-6) -> AreaEstimate:
    """Shoelace area of the projection onto the least-squares plane.

    ``reliable`` is False when some node lies farther than ``rel_tol * L``
    from that plane.
    """
    nodes = as_nodes(curve)
    fit = best_fit_plane(nodes)
    p = (nodes - fit.centroid) @ fit.basis.T
    x, y = p[:, 0], p[:, 1]
    area = 0.5 * abs(float(np.sum(x * shift_next(y) - shift_next(x) * y)))
    return AreaEstimate(area, fit.deviation, fit.deviation <= rel_tol * total_length(nodes))

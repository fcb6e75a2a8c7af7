"""Snapshot, series, polyline and manifest files.

Floats are written with 17 significant digits so that reading a file back
reproduces the binary values exactly.
"""
from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Union

import numpy as np

from .dynamics import SimState
from .forces import min_self_distance
from .geometry import Curve, enclosed_area_planar, frenet

SNAPSHOT_COLUMNS = ("k", "u", "x", "y", "z", "rho", "kappa", "d")
SERIES_COLUMNS = ("t", "length", "mass", "area_planar", "min_self_distance", "dt")
PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_name(index: int, ext: str = "csv") -> str:
    return f"snap_{index:04d}.{ext}"


def write_snapshot(directory: PathLike, index: int, state: SimState, formats=("csv",)) -> List[Path]:
    directory = Path(directory)
    fr = frenet(state.curve)
    M = state.M
    written = []
    if "csv" in formats:
        path = directory / snapshot_name(index, "csv")
        nodes = state.curve.nodes
        lines = [",".join(SNAPSHOT_COLUMNS)]
        for k in range(M):
            row = (k / M, *nodes[k], state.rho[k], fr.kappa[k], fr.d[k])
            lines.append(str(k) + "," + ",".join(fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    if "obj" in formats:
        written.append(write_obj(directory / snapshot_name(index, "obj"), state.curve))
    return written


def write_obj(path: PathLike, curve: Curve) -> Path:
    """Closed polyline: one ``v`` line per node and one ``l 1 2 ... M 1`` element."""
    path = Path(path)
    lines = [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in curve.nodes]
    lines.append("l " + " ".join(str(i) for i in range(1, curve.M + 1)) + " 1")
    path.write_text("\n".join(lines) + "\n")
    return path


class Snapshot(NamedTuple):
    nodes: np.ndarray
    rho: np.ndarray
    kappa: np.ndarray
    d: np.ndarray


def read_snapshot(path: PathLike) -> Snapshot:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[: len(SNAPSHOT_COLUMNS)]) != SNAPSHOT_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = np.array([[float(v) for v in row[: len(SNAPSHOT_COLUMNS)]] for row in reader])
    return Snapshot(rows[:, 2:5].copy(), rows[:, 5].copy(), rows[:, 6].copy(), rows[:, 7].copy())


def read_obj(path: PathLike) -> np.ndarray:
    nodes = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if parts and parts[0] == "v":
                nodes.append([float(p) for p in parts[1:4]])
    return np.array(nodes)


def read_curve(path: PathLike) -> Curve:
    """Nodes from a snapshot CSV or an OBJ polyline, chosen by extension."""
    path = Path(path)
    if path.suffix.lower() == ".obj":
        return Curve(read_obj(path))
    return Curve(read_snapshot(path).nodes)


def series_row(state: SimState, dt: float, with_self_distance: bool = True) -> Dict[str, float]:
    fr = frenet(state.curve)
    area = enclosed_area_planar(state.curve)
    return {
        "t": state.t,
        "length": fr.length,
        "mass": float(np.sum(state.rho * fr.d_half)),
        "area_planar": area.area if area.reliable else math.nan,
        "min_self_distance": min_self_distance(state.curve) if with_self_distance else math.nan,
        "dt": dt,
    }


class SeriesWriter:
    """Appends one line per output time to ``series.csv``."""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        with open(self.path, "w", newline="") as fh:
            fh.write(",".join(SERIES_COLUMNS) + "\n")

    def append(self, row: Dict[str, float]) -> None:
        with open(self.path, "a", newline="") as fh:
            fh.write(",".join(fmt(row[c]) for c in SERIES_COLUMNS) + "\n")


def read_series(path: PathLike) -> Dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def versions() -> Dict[str, str]:
    import scipy

    from . import __version__

    return {
        "curveflow": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_manifest(path: PathLike, config: Dict[str, Any], provenance: Dict[str, str],
                   stats: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    doc = {
        "kind": "curveflow-manifest",
        "config": config,
        "defaults_provenance": provenance,
        "versions": versions(),
        "step_statistics": stats,
    }
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n")
    return path

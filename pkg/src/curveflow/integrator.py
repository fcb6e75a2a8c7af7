"""Runge-Kutta-Merson integration with automatic step-size control."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]
Observer = Callable[[float, np.ndarray, float], None]


class StiffnessError(RuntimeError):
    """The step size fell below ``dt_min`` without an acceptable step."""

    def __init__(self, t: float, dt: float, error: float):
        super().__init__(f"step rejected at t={t:.6g} with dt={dt:.3e} <= dt_min (error estimate {error:.3e})")
        self.t = t
        self.dt = dt
        self.error = error


@dataclass
class IntegratorConfig:
    tol: float = 1e-3
    dt_init: Optional[float] = None  # None: 4 h^2 with h = 1/M
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    safety: float = 0.8
    shrink_limit: float = 0.1
    grow_limit: float = 5.0
    norm: str = "max"
    stability_factor: Optional[float] = None  # see dynamics.diffusion_step_limit

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError(f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}")
        if self.dt_init is not None and not self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError(f"dt_init={self.dt_init} outside [dt_min, dt_max]")
        if self.norm not in ("max", "rms"):
            raise ValueError(f"norm must be 'max' or 'rms', got {self.norm!r}")
        if self.stability_factor is not None and not self.stability_factor > 0:
            raise ValueError(f"stability_factor must be > 0, got {self.stability_factor}")

    def initial_step(self, M: int) -> float:
        if self.dt_init is not None:
            return self.dt_init
        return min(max(4.0 / M**2, self.dt_min), self.dt_max)


class StepResult(NamedTuple):
    accepted: bool
    y: np.ndarray
    error: float
    dt_next: float


def merson_stages(rhs: Rhs, t: float, y: np.ndarray, dt: float):
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 3, y + dt / 3 * k1)
    k3 = rhs(t + dt / 3, y + dt / 6 * (k1 + k2))
    k4 = rhs(t + dt / 2, y + dt / 8 * (k1 + 3 * k3))
    k5 = rhs(t + dt, y + dt / 2 * (k1 - 3 * k3 + 4 * k4))
    y_new = y + dt / 6 * (k1 + 4 * k4 + k5)
    err_vec = dt / 30 * (2 * k1 - 9 * k3 + 8 * k4 - k5)
    return y_new, err_vec


def _norm(v: np.ndarray, kind: str) -> float:
    if kind == "rms":
        return float(np.sqrt(np.mean(v * v)))
    return float(np.max(np.abs(v)))


def rkm_step(rhs: Rhs, t: float, y: np.ndarray, dt: float, config: IntegratorConfig) -> StepResult:
    """One attempted Merson step; NaN/Inf anywhere counts as a rejection with dt halved."""
    with np.errstate(all="ignore"):
        y_new, err_vec = merson_stages(rhs, t, y, dt)
    error = _norm(err_vec, config.norm)
    if not (math.isfinite(error) and np.all(np.isfinite(y_new))):
        return StepResult(False, y, math.inf, max(0.5 * dt, config.dt_min))
    if error == 0.0:
        factor = config.grow_limit
    else:
        factor = config.safety * (config.tol / error) ** 0.2
        factor = min(max(factor, config.shrink_limit), config.grow_limit)
    dt_next = min(max(dt * factor, config.dt_min), config.dt_max)
    accepted = error <= config.tol
    return StepResult(accepted, y_new if accepted else y, error, dt_next)


def fixed_step(rhs: Rhs, y0: np.ndarray, t0: float, t1: float, n_steps: int) -> np.ndarray:
    """Merson's 4th-order update with a uniform step and no error control."""
    y = np.asarray(y0, dtype=float)
    dt = (t1 - t0) / n_steps
    for i in range(n_steps):
        y, _ = merson_stages(rhs, t0 + i * dt, y, dt)
    return y


@dataclass
class RunSummary:
    t: float
    y: np.ndarray
    steps: int = 0
    rejections: int = 0
    max_accepted_error: float = 0.0
    snapshot_times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    dt_history: List[float] = field(default_factory=list)


def run(
    rhs: Rhs,
    y0: np.ndarray,
    t0: float,
    t_final: float,
    config: IntegratorConfig,
    output_times: Sequence[float] = (),
    observers: Iterable[Observer] = (),
    dt_init: Optional[float] = None,
    keep_snapshots: bool = True,
    record_dt: bool = False,
    step_limit: Optional[Callable[[float, np.ndarray], float]] = None,
) -> RunSummary:
    """Advance from ``t0`` to ``t_final``, landing exactly on each output time.

    Observers are called as ``observer(t, y, dt_last)`` at ``t0`` and at every
    output time.  ``t_final`` is always an output time.  ``step_limit(t, y)``,
    when given, caps every attempted step on top of ``config.dt_max``.
    """
    if t_final < t0:
        raise ValueError(f"t_final={t_final} precedes t0={t0}")
    observers = list(observers)
    targets = sorted({float(s) for s in output_times if t0 < s <= t_final} | {float(t_final)})
    if t_final == t0:
        targets = []

    y = np.array(y0, dtype=float)
    t = float(t0)
    summary = RunSummary(t, y)

    def emit(dt_last: float):
        if keep_snapshots:
            summary.snapshot_times.append(t)
            summary.snapshots.append(y.copy())
        for obs in observers:
            obs(t, y, dt_last)

    emit(0.0)
    if dt_init is None:
        dt_init = config.dt_init if config.dt_init is not None else config.dt_max
    dt = min(max(dt_init, config.dt_min), config.dt_max)
    last_dt = 0.0
    for target in targets:
        while t < target:
            if step_limit is not None:
                dt = max(min(dt, step_limit(t, y)), config.dt_min)
            remaining = target - t
            if dt >= remaining * (1 - 1e-12):
                step = remaining
            elif dt > 0.5 * remaining:
                step = 0.5 * remaining  # avoid leaving a sliver before the target
            else:
                step = dt
            trial = rkm_step(rhs, t, y, step, config)
            if trial.accepted:
                y = trial.y
                t = target if step == remaining else t + step
                summary.steps += 1
                summary.max_accepted_error = max(summary.max_accepted_error, trial.error)
                last_dt = step
                if record_dt:
                    summary.dt_history.append(step)
                # a truncated step only ever shrinks the running step size
                dt = trial.dt_next if step == dt else min(dt, trial.dt_next)
            else:
                summary.rejections += 1
                if step <= config.dt_min:
                    raise StiffnessError(t, step, trial.error)
                dt = trial.dt_next
        emit(last_dt)
    summary.t = t
    summary.y = y
    return summary

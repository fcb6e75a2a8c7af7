"""Experimental order of convergence against the manufactured shrinking-circle solution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dynamics import make_rhs
from .integrator import run
from .runner import NUMERICAL_ERRORS
from .scenarios import EOC_SAMPLE_DT, EOC_T_FINAL, ScenarioConfig, eoc_exact_rho, parse_config_dict

DEFAULT_MESHES = (100, 200, 300, 400, 500)


def eoc(err_coarse: float, err_fine: float, M_coarse: int, M_fine: int) -> float:
    return math.log(err_coarse / err_fine) / math.log(M_fine / M_coarse)


@dataclass
class EOCRow:
    M: int
    err_L1LInf: float
    err_LInfLInf: float
    eoc_L1LInf: Optional[float] = None
    eoc_LInfLInf: Optional[float] = None
    steps: int = 0
    rejections: int = 0


@dataclass
class EOCReport:
    rows: List[EOCRow] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def complete(self) -> bool:
        return self.failure is None

    def eocs(self) -> np.ndarray:
        """``(n-1, 2)`` array of (L1 LInf, LInf LInf) orders."""
        return np.array([[r.eoc_L1LInf, r.eoc_LInfLInf] for r in self.rows[1:]], dtype=float)

    def table(self) -> str:
        lines = ["M,err_L1LInf,eoc_L1LInf,err_LInfLInf,eoc_LInfLInf"]
        for r in self.rows:
            e1 = "" if r.eoc_L1LInf is None else f"{r.eoc_L1LInf:.4f}"
            e2 = "" if r.eoc_LInfLInf is None else f"{r.eoc_LInfLInf:.4f}"
            lines.append(f"{r.M},{r.err_L1LInf:.4e},{e1},{r.err_LInfLInf:.4e},{e2}")
        if self.failure:
            lines.append(f"# incomplete: {self.failure}")
        return "\n".join(lines)


def eoc_config(M: int, T_final: float = EOC_T_FINAL, tol: float = 1e-3, **integrator) -> ScenarioConfig:
    return parse_config_dict(
        {"scenario": "eoc", "M": M, "T_final": T_final, "integrator": {"tol": tol, **integrator}}
    )


def space_time_errors(config: ScenarioConfig, sample_dt: float = EOC_SAMPLE_DT):
    """Sup-in-space errors at every sample time, then the trapezoid and max in time."""
    n = int(round(config.T_final / sample_dt))
    times = np.linspace(0.0, config.T_final, n + 1)
    u = np.arange(config.M) / config.M
    M = config.M
    errs = []

    def observe(t, y, dt_last):
        errs.append(float(np.max(np.abs(y[3 * M :] - eoc_exact_rho(t, u)))))

    integ = config.integrator_config()
    problem = config.problem()
    summary = run(
        make_rhs(problem), config.initial_state().to_vector(), 0.0, config.T_final, integ,
        output_times=times[1:], observers=[observe], dt_init=integ.dt_init, keep_snapshots=False,
        step_limit=config.step_limit(problem),
    )
    errs = np.array(errs)
    l1 = float(np.sum(0.5 * (errs[1:] + errs[:-1]) * np.diff(times)))
    return l1, float(errs.max()), summary


def eoc_harness(
    meshes: Sequence[int] = DEFAULT_MESHES,
    T_final: float = EOC_T_FINAL,
    tol: float = 1e-3,
    integrator: Optional[dict] = None,
) -> EOCReport:
    """Run the manufactured problem on each mesh and compare consecutive errors.

    A solver failure ends the sweep; the rows computed so far are kept and the
    report carries the failure message.
    """
    meshes = list(meshes)
    if len(meshes) < 2 or any(b <= a for a, b in zip(meshes, meshes[1:])):
        raise ValueError(f"need an ascending mesh list with at least two entries, got {meshes}")
    report = EOCReport()
    for M in meshes:
        try:
            l1, linf, summary = space_time_errors(eoc_config(M, T_final, tol, **(integrator or {})))
        except NUMERICAL_ERRORS as exc:
            report.failure = f"M={M}: {exc}"
            break
        row = EOCRow(M, l1, linf, steps=summary.steps, rejections=summary.rejections)
        if report.rows:
            prev = report.rows[-1]
            row.eoc_L1LInf = eoc(prev.err_L1LInf, l1, prev.M, M)
            row.eoc_LInfLInf = eoc(prev.err_LInfLInf, linf, prev.M, M)
        report.rows.append(row)
    return report

"""Execute a scenario config: integrate, write artifacts and a manifest."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .dynamics import CoefficientError, SimState, make_rhs
from .geometry import MeshDegeneracyError
from .integrator import StiffnessError, run
from .io import SeriesWriter, series_row, write_manifest, write_snapshot
from .scenarios import ConfigError, ScenarioConfig

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_IO = 4

NUMERICAL_ERRORS = (StiffnessError, MeshDegeneracyError, CoefficientError, FloatingPointError)


@dataclass
class RunResult:
    exit_code: int
    message: str = ""
    states: List[SimState] = field(default_factory=list)
    series: List[Dict[str, float]] = field(default_factory=list)
    stats: Dict[str, Any] = field(default_factory=dict)
    directory: Optional[Path] = None


def run_scenario(
    config: ScenarioConfig,
    out_dir: Optional[str] = None,
    keep_states: bool = True,
    self_distance: bool = True,
) -> RunResult:
    """Run ``config`` and map failures to exit codes (config 2, numerics 3, I/O 4).

    ``out_dir`` overrides ``config.output.directory``; with neither set
    nothing is written and the states and series rows are only returned.
    """
    directory = out_dir or config.output.directory
    result = RunResult(EXIT_OK, directory=Path(directory) if directory else None)
    for key, origin in sorted(config.provenance.items()):
        log.debug("default %s <- %s", key, origin)

    try:
        problem = config.problem()
        integ = config.integrator_config()
        state0 = config.initial_state()
    except (ConfigError, ValueError, KeyError) as exc:
        return RunResult(EXIT_CONFIG, f"config error: {exc}")

    writer = None
    if result.directory is not None:
        try:
            result.directory.mkdir(parents=True, exist_ok=True)
            writer = SeriesWriter(result.directory / "series.csv")
        except OSError as exc:
            return RunResult(EXIT_IO, f"I/O error: {exc.filename}: {exc.strerror}")

    counter = {"index": 0}

    def observe(t: float, y: np.ndarray, dt_last: float) -> None:
        state = SimState.from_vector(y, t)
        row = series_row(state, dt_last, with_self_distance=self_distance)
        result.series.append(row)
        if keep_states:
            result.states.append(state)
        if writer is not None:
            writer.append(row)
            write_snapshot(result.directory, counter["index"], state, config.output.formats)
        counter["index"] += 1

    started = time.perf_counter()
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            summary = run(
                make_rhs(problem),
                state0.to_vector(),
                0.0,
                config.T_final,
                integ,
                output_times=config.output_times(),
                observers=[observe],
                dt_init=integ.dt_init,
                keep_snapshots=False,
                step_limit=config.step_limit(problem),
            )
    except NUMERICAL_ERRORS as exc:
        result.exit_code = EXIT_NUMERICS
        result.message = f"numerical failure: {exc}"
        summary = None
    except OSError as exc:
        return RunResult(EXIT_IO, f"I/O error: {exc.filename}: {exc.strerror}")

    result.stats = {
        "wall_seconds": round(time.perf_counter() - started, 3),
        "accepted_steps": summary.steps if summary else None,
        "rejected_steps": summary.rejections if summary else None,
        "max_accepted_error": summary.max_accepted_error if summary else None,
        "t_reached": summary.t if summary else (result.states[-1].t if result.states else 0.0),
        "snapshots": counter["index"],
        "status": "ok" if summary else result.message,
    }
    if result.directory is not None:
        try:
            write_manifest(result.directory / "manifest.json", config.to_dict(), config.provenance, result.stats)
        except OSError as exc:
            return RunResult(EXIT_IO, f"I/O error: {exc.filename}: {exc.strerror}")
    return result

"""Scenario registry, built-in initial data and JSON run configuration.

A config file is a JSON object::

    {"scenario": "shrinking_circle", "M": 200, "T_final": 0.45,
     "integrator": {"tol": 1e-3},
     "coeffs": {"a": 1.0, "v": 0.0, "beta_law": "kappa", "source": "none"},
     "force": {"kind": "none"},
     "redistribution": {"mode": "none"},
     "initial_curve": {"name": "circle", "radius": 1.0},
     "initial_rho": "positive_wave",
     "output": {"directory": "out", "snapshot_times": [0.1, 0.3], "formats": ["csv"]}}

Every key not given is filled from the scenario table or the global defaults,
and the origin of each filled value is kept in ``ScenarioConfig.provenance``.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import BETA_LAWS, GAMMA_LAWS, CoefficientSet, FlowProblem, SimState, diffusion_step_limit, rho_l2
from .forces import DEFAULT_DELTA, FORCE_KINDS, BiotSavartSpec, ForceSpec
from .geometry import Curve
from .integrator import IntegratorConfig
from .redistribution import MODES, RedistributionSpec

SCENARIOS = (
    "shrinking_circle",
    "gage",
    "eoc",
    "hopf_parallel",
    "unknotted",
    "knot_biot_savart",
    "knot_free",
    "custom",
)
SOURCES = ("none", "manufactured_eoc", "hopf_normalized")
FORMATS = ("csv", "obj")
EOC_T_FINAL = 0.45  # the unit circle vanishes at t = 0.5
EOC_SAMPLE_DT = 0.005


class ConfigError(ValueError):
    """Invalid run configuration; the message starts with the offending key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# ---------------------------------------------------------------- initial data

def _labels(M: int) -> np.ndarray:
    return np.arange(M) / M


def _circle(u, radius=1.0, height=0.0):
    w = 2 * np.pi * u
    return np.column_stack([radius * np.cos(w), radius * np.sin(w), np.full_like(u, height)])


def _ellipse(u, a=2.0, b=1.0):
    w = 2 * np.pi * u
    return np.column_stack([a * np.cos(w), b * np.sin(w), np.zeros_like(u)])


def _clustered_circle(u, radius=1.0, strength=0.5):
    # node angles bunch up where the warp derivative 1 + strength cos(2 pi u) is small
    w = 2 * np.pi * u + strength * np.sin(2 * np.pi * u)
    return np.column_stack([radius * np.cos(w), radius * np.sin(w), np.zeros_like(u)])


def _parallel_circle(u, radius=1.0):
    return _circle(u, radius, height=radius)


def _wavy_circle(u):
    w = 2 * np.pi * u
    return np.column_stack([np.cos(w), np.sin(w), np.sin(8 * np.pi * u)])


def _listing_knot(u):
    return np.column_stack(
        [
            np.cos(4 * np.pi * u),
            np.sin(6 * np.pi * u + 0.5),
            0.5 * (np.cos(10 * np.pi * u + 0.5) + np.sin(6 * np.pi * u + 0.5)),
        ]
    )


CURVES: Dict[str, Callable[..., np.ndarray]] = {
    "circle": _circle,
    "ellipse": _ellipse,
    "clustered_circle": _clustered_circle,
    "parallel_circle": _parallel_circle,
    "wavy_circle": _wavy_circle,
    "listing_knot": _listing_knot,
}

RHOS: Dict[str, Callable[..., np.ndarray]] = {
    "zero": lambda u: np.zeros_like(u),
    "one": lambda u: np.ones_like(u),
    "positive_wave": lambda u: 1.0 + 0.5 * np.sin(2 * np.pi * u),
    "two_modes": lambda u: np.sin(2 * np.pi * u) + np.sin(4 * np.pi * u),
    "cosine": lambda u, amplitude=1.0: amplitude * np.cos(2 * np.pi * u),
    "step": lambda u: ((u > 0.25) & (u < 0.75)).astype(float),
    "knot_wave": lambda u: 1.0 + np.sin(6 * np.pi * u),
}


def builtin_initial_data(name: str) -> Tuple[Callable[..., np.ndarray], Callable[..., np.ndarray]]:
    """Curve and scalar samplers of a named initial state, both taking ``u = k/M``."""
    pairs = {
        "unit_circle": ("circle", "two_modes"),
        "wavy_circle": ("wavy_circle", "step"),
        "listing_knot": ("listing_knot", "knot_wave"),
    }
    if name not in pairs:
        raise KeyError(f"unknown initial data {name!r}; expected one of {sorted(pairs)}")
    curve, rho = pairs[name]
    return CURVES[curve], RHOS[rho]


# -------------------------------------------------------------------- sources

def manufactured_eoc_source(v: float) -> Callable[[float, np.ndarray, np.ndarray], np.ndarray]:
    """Source making ``cos t (sin 2 pi u + sin 4 pi u)`` exact on the shrinking unit circle.

    Balances ``rho_t - kappa^2 rho - rho_ss + v rho_s - rho^3`` with the
    radius ``r(t) = sqrt(1 - 2t)``.
    """

    def q(t, u, rho):
        r = math.sqrt(1.0 - 2.0 * t)
        s1, s2 = np.sin(2 * np.pi * u), np.sin(4 * np.pi * u)
        c1, c2 = np.cos(2 * np.pi * u), np.cos(4 * np.pi * u)
        S = s1 + s2
        ct = math.cos(t)
        return (
            -math.sin(t) * S
            - ct * S / r**2
            + ct * (s1 + 4 * s2) / r**2
            + v * ct * (c1 + 2 * c2) / r
            - (ct * S) ** 3
        )

    return q


def eoc_exact_rho(t: float, u: np.ndarray) -> np.ndarray:
    return math.cos(t) * (np.sin(2 * np.pi * u) + np.sin(4 * np.pi * u))


def hopf_normalized_source(t, u, rho):
    """``rho / (sqrt(2) ||rho||_2)``; zero where rho vanishes identically."""
    norm = rho_l2(rho)
    if norm == 0.0:
        return np.zeros_like(rho)
    return rho / (math.sqrt(2.0) * norm)


# ----------------------------------------------------------------- the config

@dataclass
class OutputSpec:
    directory: Optional[str] = None
    snapshot_times: List[float] = field(default_factory=list)
    snapshot_interval: Optional[float] = None
    formats: List[str] = field(default_factory=lambda: ["csv"])


@dataclass
class ScenarioConfig:
    scenario: str
    M: int
    T_final: float
    integrator: Dict[str, Any]
    coeffs: Dict[str, Any]
    force: Dict[str, Any]
    redistribution: Dict[str, Any]
    initial_curve: Union[Dict[str, Any], List[List[float]]]
    initial_rho: Union[Dict[str, Any], List[float], float]
    output: OutputSpec
    provenance: Dict[str, str] = field(default_factory=dict)

    # ---- resolved objects
    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(**self.integrator)

    def coefficient_set(self) -> CoefficientSet:
        co = dict(self.coeffs)
        source = co.pop("source")
        if source == "manufactured_eoc":
            q = manufactured_eoc_source(co["v"])
        elif source == "hopf_normalized":
            q = hopf_normalized_source
        else:
            q = None
        return CoefficientSet(q=q, **co)

    def force_spec(self) -> ForceSpec:
        kind = self.force["kind"]
        if kind == "biot_savart":
            return ForceSpec(kind, BiotSavartSpec(self.force["biot_savart"]["delta"]))
        return ForceSpec(kind)

    def redistribution_spec(self) -> RedistributionSpec:
        return RedistributionSpec(**self.redistribution)

    def problem(self) -> FlowProblem:
        return FlowProblem(self.coefficient_set(), self.force_spec(), self.redistribution_spec())

    def step_limit(self, problem: Optional[FlowProblem] = None):
        factor = self.integrator.get("stability_factor")
        if factor is None:
            return None
        return diffusion_step_limit(problem or self.problem(), factor)

    def initial_state(self) -> SimState:
        u = _labels(self.M)
        if isinstance(self.initial_curve, list):
            nodes = np.asarray(self.initial_curve, dtype=float)
        else:
            params = dict(self.initial_curve)
            nodes = CURVES[params.pop("name")](u, **params)
        if isinstance(self.initial_rho, list):
            rho = np.asarray(self.initial_rho, dtype=float)
        elif isinstance(self.initial_rho, (int, float)):
            rho = np.full(self.M, float(self.initial_rho))
        else:
            params = dict(self.initial_rho)
            rho = RHOS[params.pop("name")](u, **params)
        return SimState(Curve(nodes), rho, 0.0)

    def output_times(self) -> List[float]:
        times = set(self.output.snapshot_times)
        if self.output.snapshot_interval:
            n = int(math.floor(self.T_final / self.output.snapshot_interval + 1e-9))
            times.update(i * self.output.snapshot_interval for i in range(1, n + 1))
        times.add(self.T_final)
        return sorted(t for t in times if 0 < t <= self.T_final)

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved config; feeding it back to :func:`parse_config` is a no-op."""
        out = asdict(self)
        del out["provenance"]
        return out


# ------------------------------------------------------------------- defaults

GLOBAL_DEFAULTS: Dict[str, Any] = {
    "integrator": {
        "tol": 1e-3,
        "dt_init": None,  # 4 h^2
        "dt_min": 1e-12,
        "dt_max": 1e-2,
        "safety": 0.8,
        "shrink_limit": 0.1,
        "grow_limit": 5.0,
        "norm": "max",
        "stability_factor": 0.5,
    },
    "coeffs": {
        "a": 1.0,
        "b": 0.0,
        "c": 1.0,
        "v": 0.0,
        "beta_law": "kappa",
        "gamma_law": "zero",
        "gamma_value": 0.0,
        "hopf_lambda": None,
        "cubic": False,
        "upwind": False,
        "source": "none",
    },
    "force": {"kind": "none"},
    "redistribution": {"mode": "none", "omega": 0.0},
    "initial_curve": {"name": "circle"},
    "initial_rho": {"name": "positive_wave"},
    "output": {"directory": None, "snapshot_times": [], "snapshot_interval": None, "formats": ["csv"]},
}

_KNOT = {
    "coeffs": {"beta_law": "kappa_minus_mean", "gamma_law": "rho"},
    "redistribution": {"mode": "uniform"},
    "initial_curve": {"name": "listing_knot"},
    "initial_rho": {"name": "knot_wave"},
}

SCENARIO_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "shrinking_circle": {"T_final": 0.45},
    "gage": {
        "T_final": 1.0,
        "coeffs": {"beta_law": "kappa_minus_mean"},
        "redistribution": {"mode": "uniform"},
        "initial_curve": {"name": "ellipse", "a": 2.0, "b": 1.0},
        "initial_rho": {"name": "one"},
    },
    "eoc": {
        "T_final": EOC_T_FINAL,
        "coeffs": {"v": -10.0, "cubic": True, "source": "manufactured_eoc"},
        "initial_rho": {"name": "two_modes"},
        "output": {"snapshot_interval": EOC_SAMPLE_DT},
    },
    "hopf_parallel": {
        "T_final": 10.0,
        "coeffs": {"beta_law": "kappa_minus_mean_minus_P", "gamma_law": "minus_beta", "source": "hopf_normalized"},
        "initial_curve": {"name": "parallel_circle", "radius": 1.0},
        "initial_rho": {"name": "cosine", "amplitude": 1.0},
    },
    "unknotted": {
        "T_final": 0.25,
        "coeffs": {"v": 20.0},
        "redistribution": {"mode": "uniform"},
        "initial_curve": {"name": "wavy_circle"},
        "initial_rho": {"name": "step"},
        "output": {"snapshot_times": [0.062, 0.124, 0.19, 0.25]},
    },
    "knot_biot_savart": {
        "T_final": 0.237,
        **_KNOT,
        "force": {"kind": "biot_savart"},
        "output": {"snapshot_times": [0.02, 0.063, 0.124, 0.237]},
    },
    "knot_free": {
        "T_final": 0.4,
        **_KNOT,
        "output": {"snapshot_times": [0.1225, 0.25, 0.4]},
    },
    "custom": {},
}

_TOP_KEYS = {"scenario", "M", "T_final", "integrator", "coeffs", "force", "redistribution",
             "initial_curve", "initial_rho", "output"}


def _check_keys(section: Dict[str, Any], allowed, path: str) -> None:
    for key in section:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _merge(raw: Dict[str, Any], defaults: Dict[str, Any], origin: str, path: str, prov: Dict[str, str]):
    out = dict(raw)
    for key, value in defaults.items():
        if key not in out:
            out[key] = copy.deepcopy(value)
            prov[f"{path}.{key}"] = origin
    return out


def _number(value, path: str, positive: bool = False, allow_none: bool = False) -> Optional[float]:
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")
    return float(value)


def _choice(value, choices: Sequence[str], path: str) -> str:
    if value not in choices:
        raise ConfigError(path, f"{value!r} is not one of {list(choices)}")
    return value


def _named(value, registry: Dict[str, Callable], path: str):
    """Normalize ``"name"`` or ``{"name": ..., **params}`` to the dict form."""
    if isinstance(value, str):
        value = {"name": value}
    if not isinstance(value, dict) or "name" not in value:
        raise ConfigError(path, "expected a name, an object with a 'name' key, or explicit values")
    _choice(value["name"], list(registry), f"{path}.name")
    for key, param in value.items():
        if key != "name":
            _number(param, f"{path}.{key}")
    return dict(value)


def parse_config_dict(raw: Dict[str, Any]) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "config must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "")
    if "scenario" not in raw:
        raise ConfigError("scenario", "required")
    scenario = _choice(raw["scenario"], SCENARIOS, "scenario")
    if "M" not in raw:
        raise ConfigError("M", "required")
    M = raw["M"]
    if isinstance(M, bool) or not isinstance(M, int) or M < 4:
        raise ConfigError("M", f"must be an integer >= 4, got {M!r}")

    prov: Dict[str, str] = {}
    sdef = SCENARIO_DEFAULTS[scenario]
    origin_s = f"scenario:{scenario}"

    if "T_final" in raw:
        T_final = _number(raw["T_final"], "T_final")
    elif "T_final" in sdef:
        T_final = sdef["T_final"]
        prov["T_final"] = origin_s
    else:
        raise ConfigError("T_final", f"required for scenario {scenario!r}")
    if not T_final > 0:
        raise ConfigError("T_final", f"must be > 0, got {T_final}")

    sections = {}
    for name in ("integrator", "coeffs", "force", "redistribution", "output"):
        given = raw.get(name, {})
        if not isinstance(given, dict):
            raise ConfigError(name, "expected an object")
        allowed = set(GLOBAL_DEFAULTS[name]) | ({"biot_savart"} if name == "force" else set())
        _check_keys(given, allowed, name)
        merged = _merge(given, sdef.get(name, {}), origin_s, name, prov)
        sections[name] = _merge(merged, GLOBAL_DEFAULTS[name], "default", name, prov)

    it = sections["integrator"]
    if it["dt_init"] is None:
        it["dt_init"] = 4.0 / M**2
        prov["integrator.dt_init"] = "default: 4 h^2"
    for key in ("tol", "dt_init", "dt_min", "dt_max", "safety", "shrink_limit", "grow_limit"):
        it[key] = _number(it[key], f"integrator.{key}", positive=True)
    it["stability_factor"] = _number(it["stability_factor"], "integrator.stability_factor", True, True)
    _choice(it["norm"], ("max", "rms"), "integrator.norm")
    it["dt_init"] = min(it["dt_init"], it["dt_max"])
    try:
        IntegratorConfig(**it)
    except ValueError as exc:
        raise ConfigError("integrator", str(exc)) from None

    # coefficients
    co = sections["coeffs"]
    for key in ("a", "c"):
        co[key] = _number(co[key], f"coeffs.{key}", positive=True)
    for key in ("b", "v", "gamma_value"):
        co[key] = _number(co[key], f"coeffs.{key}")
    _choice(co["beta_law"], BETA_LAWS, "coeffs.beta_law")
    _choice(co["gamma_law"], GAMMA_LAWS, "coeffs.gamma_law")
    _choice(co["source"], SOURCES, "coeffs.source")
    for key in ("cubic", "upwind"):
        if not isinstance(co[key], bool):
            raise ConfigError(f"coeffs.{key}", f"expected true/false, got {co[key]!r}")
    needs_lambda = co["beta_law"] == "kappa_minus_mean_minus_P"
    if needs_lambda and co["hopf_lambda"] is None:
        raise ConfigError("coeffs.hopf_lambda", f"required for beta_law {co['beta_law']!r}")
    if co["hopf_lambda"] is not None:
        co["hopf_lambda"] = _number(co["hopf_lambda"], "coeffs.hopf_lambda")
        if not co["hopf_lambda"] > 1:
            raise ConfigError("coeffs.hopf_lambda", f"must exceed 1, got {co['hopf_lambda']}")

    # force
    fo = sections["force"]
    _choice(fo["kind"], FORCE_KINDS, "force.kind")
    if fo["kind"] == "custom_integral":
        raise ConfigError("force.kind", "custom_integral kernels are registered from Python, not from a config file")
    if fo["kind"] == "biot_savart":
        bs = fo.get("biot_savart", {})
        if not isinstance(bs, dict):
            raise ConfigError("force.biot_savart", "expected an object")
        _check_keys(bs, {"delta"}, "force.biot_savart")
        if "delta" not in bs:
            if scenario == "knot_biot_savart":
                raise ConfigError("force.biot_savart.delta", "required for scenario 'knot_biot_savart'")
            bs = {"delta": DEFAULT_DELTA}
            prov["force.biot_savart.delta"] = "default"
        bs["delta"] = _number(bs["delta"], "force.biot_savart.delta", positive=True)
        fo["biot_savart"] = bs
    elif "biot_savart" in fo:
        raise ConfigError("force.biot_savart", f"only valid with kind 'biot_savart', not {fo['kind']!r}")

    # redistribution
    rd = sections["redistribution"]
    _choice(rd["mode"], MODES, "redistribution.mode")
    rd["omega"] = _number(rd["omega"], "redistribution.omega")
    if rd["omega"] < 0:
        raise ConfigError("redistribution.omega", f"must be >= 0, got {rd['omega']}")

    # initial data
    initial_curve = raw.get("initial_curve", sdef.get("initial_curve", GLOBAL_DEFAULTS["initial_curve"]))
    if "initial_curve" not in raw:
        prov["initial_curve"] = origin_s if "initial_curve" in sdef else "default"
    if isinstance(initial_curve, list):
        try:
            nodes = np.asarray(initial_curve, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("initial_curve", "node list must be numeric") from None
        if nodes.shape != (M, 3):
            raise ConfigError("initial_curve", f"node list has shape {nodes.shape}, expected ({M}, 3)")
    else:
        initial_curve = _named(copy.deepcopy(initial_curve), CURVES, "initial_curve")

    initial_rho = raw.get("initial_rho", sdef.get("initial_rho", GLOBAL_DEFAULTS["initial_rho"]))
    if "initial_rho" not in raw:
        prov["initial_rho"] = origin_s if "initial_rho" in sdef else "default"
    if isinstance(initial_rho, list):
        if len(initial_rho) != M:
            raise ConfigError("initial_rho", f"value list has length {len(initial_rho)}, expected {M}")
        initial_rho = [_number(x, f"initial_rho[{i}]") for i, x in enumerate(initial_rho)]
    elif isinstance(initial_rho, (int, float)) and not isinstance(initial_rho, bool):
        initial_rho = _number(initial_rho, "initial_rho")
    else:
        initial_rho = _named(copy.deepcopy(initial_rho), RHOS, "initial_rho")

    # output
    ou = sections["output"]
    times = ou["snapshot_times"]
    if not isinstance(times, list):
        raise ConfigError("output.snapshot_times", "expected a list of times")
    ou["snapshot_times"] = [_number(t, f"output.snapshot_times[{i}]") for i, t in enumerate(times)]
    for i, t in enumerate(ou["snapshot_times"]):
        if not 0 <= t <= T_final:
            raise ConfigError(f"output.snapshot_times[{i}]", f"{t} outside [0, T_final={T_final}]")
    ou["snapshot_interval"] = _number(ou["snapshot_interval"], "output.snapshot_interval", True, True)
    if not isinstance(ou["formats"], list):
        raise ConfigError("output.formats", "expected a list")
    for i, fmt in enumerate(ou["formats"]):
        _choice(fmt, FORMATS, f"output.formats[{i}]")
    if ou["directory"] is not None and not isinstance(ou["directory"], str):
        raise ConfigError("output.directory", "expected a path string")

    cfg = ScenarioConfig(
        scenario=scenario,
        M=M,
        T_final=T_final,
        integrator=it,
        coeffs=co,
        force=fo,
        redistribution=rd,
        initial_curve=initial_curve,
        initial_rho=initial_rho,
        output=OutputSpec(**ou),
        provenance=prov,
    )
    try:
        cfg.problem()
    except ValueError as exc:
        raise ConfigError("coeffs", str(exc)) from None
    return cfg


def parse_config(source: Union[str, Path, Dict[str, Any]]) -> ScenarioConfig:
    """Parse a config from a JSON file path or an already-loaded mapping.

    A run manifest is accepted as well; its ``config`` block is used.
    """
    if isinstance(source, dict):
        return parse_config_dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON: {exc}") from None
    if isinstance(raw, dict) and raw.get("kind") == "curveflow-manifest":
        raw = raw.get("config")
    return parse_config_dict(raw)

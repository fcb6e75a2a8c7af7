import json
import math

import numpy as np
import pytest

from curveflow.scenarios import (
    CURVES,
    RHOS,
    SCENARIOS,
    ConfigError,
    builtin_initial_data,
    hopf_normalized_source,
    parse_config,
)


def test_minimal_config_is_fully_defaulted():
    cfg = parse_config({"scenario": "shrinking_circle", "M": 100, "T_final": 0.4})
    assert cfg.integrator["tol"] == 1e-3
    assert cfg.integrator["dt_init"] == pytest.approx(4e-4)
    assert cfg.integrator["dt_max"] == 1e-2
    assert cfg.integrator["stability_factor"] == 0.5
    assert cfg.redistribution == {"mode": "none", "omega": 0.0}
    assert cfg.coeffs["beta_law"] == "kappa" and cfg.coeffs["a"] == 1.0
    assert cfg.provenance["integrator.tol"] == "default"
    assert cfg.provenance["integrator.dt_init"] == "default: 4 h^2"
    assert "T_final" not in cfg.provenance
    assert cfg.initial_state().curve.M == 100
    assert cfg.output_times() == [0.4]


def test_initial_step_never_exceeds_dt_max():
    coarse = parse_config({"scenario": "shrinking_circle", "M": 10})
    assert coarse.integrator["dt_init"] == 1e-2


def test_stability_factor_controls_the_step_limit():
    cfg = parse_config({"scenario": "shrinking_circle", "M": 100})
    y = cfg.initial_state().to_vector()
    d = 2 * math.sin(math.pi / 100)
    assert cfg.step_limit()(0.0, y) == pytest.approx(0.5 * d * d, rel=1e-12)
    off = parse_config({"scenario": "shrinking_circle", "M": 100, "integrator": {"stability_factor": None}})
    assert off.step_limit() is None
    with pytest.raises(ConfigError) as info:
        parse_config({"scenario": "shrinking_circle", "M": 100, "integrator": {"stability_factor": 0}})
    assert info.value.path == "integrator.stability_factor"


def test_eoc_defaults():
    cfg = parse_config({"scenario": "eoc", "M": 50})
    assert cfg.coeffs["v"] == -10.0 and cfg.coeffs["cubic"] is True
    assert cfg.coeffs["source"] == "manufactured_eoc"
    assert cfg.T_final == 0.45
    assert cfg.provenance["coeffs.v"] == "scenario:eoc"
    times = cfg.output_times()
    assert len(times) == 90 and times[-1] == 0.45


def test_knot_biot_savart_requires_delta():
    with pytest.raises(ConfigError) as info:
        parse_config({"scenario": "knot_biot_savart", "M": 150})
    assert info.value.path == "force.biot_savart.delta"
    assert "force.biot_savart.delta" in str(info.value)
    cfg = parse_config({"scenario": "knot_biot_savart", "M": 150, "force": {"biot_savart": {"delta": 0.1}}})
    assert cfg.force == {"kind": "biot_savart", "biot_savart": {"delta": 0.1}}
    assert cfg.output_times() == [0.02, 0.063, 0.124, 0.237]


def test_other_biot_savart_configs_default_delta():
    cfg = parse_config({"scenario": "custom", "M": 20, "T_final": 0.1, "force": {"kind": "biot_savart"}})
    assert cfg.force["biot_savart"]["delta"] == 0.1
    assert cfg.provenance["force.biot_savart.delta"] == "default"


def test_hopf_requires_lambda():
    with pytest.raises(ConfigError) as info:
        parse_config({"scenario": "hopf_parallel", "M": 50})
    assert info.value.path == "coeffs.hopf_lambda"
    cfg = parse_config({"scenario": "hopf_parallel", "M": 50, "coeffs": {"hopf_lambda": 4.5}})
    assert cfg.problem().coeffs.hopf_lambda == 4.5


@pytest.mark.parametrize(
    "raw, path",
    [
        ({"scenario": "gage", "M": 50, "colour": 1}, "colour"),
        ({"scenario": "gage", "M": 50, "coeffs": {"alpha": 1}}, "coeffs.alpha"),
        ({"scenario": "gage", "M": 50, "integrator": {"order": 4}}, "integrator.order"),
        ({"scenario": "knot_biot_savart", "M": 50, "force": {"biot_savart": {"delta": 0.1, "eps": 1}}},
         "force.biot_savart.eps"),
        ({"scenario": "gage", "M": 0}, "M"),
        ({"scenario": "gage", "M": -5}, "M"),
        ({"scenario": "gage", "M": 10.5}, "M"),
        ({"scenario": "gage"}, "M"),
        ({"M": 10}, "scenario"),
        ({"scenario": "spiral", "M": 10}, "scenario"),
        ({"scenario": "custom", "M": 10}, "T_final"),
        ({"scenario": "gage", "M": 50, "coeffs": {"a": 0}}, "coeffs.a"),
        ({"scenario": "gage", "M": 50, "coeffs": {"c": -1}}, "coeffs.c"),
        ({"scenario": "gage", "M": 50, "redistribution": {"omega": -1}}, "redistribution.omega"),
        ({"scenario": "gage", "M": 50, "redistribution": {"mode": "fast"}}, "redistribution.mode"),
        ({"scenario": "gage", "M": 50, "output": {"snapshot_times": [0.5, 2.0]}}, "output.snapshot_times[1]"),
        ({"scenario": "gage", "M": 50, "output": {"snapshot_times": [-0.1]}}, "output.snapshot_times[0]"),
        ({"scenario": "gage", "M": 50, "output": {"formats": ["vtk"]}}, "output.formats[0]"),
        ({"scenario": "gage", "M": 5, "initial_rho": [1, 2]}, "initial_rho"),
        ({"scenario": "gage", "M": 4, "initial_curve": [[0, 0, 0]]}, "initial_curve"),
        ({"scenario": "gage", "M": 50, "initial_curve": {"name": "trefoil"}}, "initial_curve.name"),
        ({"scenario": "gage", "M": 50, "coeffs": {"cubic": 1}}, "coeffs.cubic"),
    ],
)
def test_parse_errors_name_key_paths(raw, path):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.path == path


def test_parse_from_file_and_manifest(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"scenario": "gage", "M": 40}))
    cfg = parse_config(cfg_file)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"kind": "curveflow-manifest", "config": cfg.to_dict()}))
    again = parse_config(manifest)
    assert again.to_dict() == cfg.to_dict()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "missing.json")


def test_every_scenario_parses_with_its_requirements():
    extra = {"knot_biot_savart": {"force": {"biot_savart": {"delta": 0.1}}},
             "hopf_parallel": {"coeffs": {"hopf_lambda": 4.0}},
             "custom": {"T_final": 0.1}}
    for name in SCENARIOS:
        cfg = parse_config({"scenario": name, "M": 24, **extra.get(name, {})})
        state = cfg.initial_state()
        assert state.curve.M == 24 and np.all(np.isfinite(state.rho))


def test_explicit_initial_data_lists():
    M = 6
    nodes = CURVES["circle"](np.arange(M) / M).tolist()
    cfg = parse_config({"scenario": "custom", "M": M, "T_final": 0.1, "initial_curve": nodes, "initial_rho": 2.5})
    st = cfg.initial_state()
    np.testing.assert_array_equal(st.curve.nodes, nodes)
    np.testing.assert_array_equal(st.rho, 2.5)


def test_listing_knot_at_zero():
    X = CURVES["listing_knot"](np.array([0.0]))[0]
    np.testing.assert_allclose(X, [math.cos(0), math.sin(0.5), (math.cos(0.5) + math.sin(0.5)) / 2], atol=1e-15)


def test_circle_sampler_axis_points():
    curve, _ = builtin_initial_data("unit_circle")
    np.testing.assert_allclose(curve(np.arange(4) / 4), [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], atol=1e-15)


def test_initial_scalar_samplers():
    _, step = builtin_initial_data("wavy_circle")
    assert step(np.array([0.5]))[0] == 1.0 and step(np.array([0.0]))[0] == 0.0
    _, wave = builtin_initial_data("listing_knot")
    assert wave(np.array([1 / 12]))[0] == pytest.approx(2.0)
    _, modes = builtin_initial_data("unit_circle")
    assert modes(np.array([0.125]))[0] == pytest.approx(math.sqrt(0.5) + 1)
    with pytest.raises(KeyError, match="trefoil"):
        builtin_initial_data("trefoil")
    wavy = CURVES["wavy_circle"](np.array([1 / 16]))[0]
    np.testing.assert_allclose(wavy, [math.cos(math.pi / 8), math.sin(math.pi / 8), 1.0], atol=1e-15)


def test_clustered_circle_is_a_nonuniform_circle():
    u = np.arange(64) / 64
    nodes = CURVES["clustered_circle"](u)
    np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0, rtol=1e-14)
    d = np.linalg.norm(nodes - np.roll(nodes, 1, axis=0), axis=1)
    assert d.max() / d.min() > 2


def test_hopf_source_is_unit_weighted_and_safe_at_zero():
    u = np.arange(100) / 100
    rho = 0.3 * np.cos(2 * np.pi * u)
    np.testing.assert_allclose(hopf_normalized_source(0, u, rho), np.cos(2 * np.pi * u), rtol=1e-13)
    assert np.all(hopf_normalized_source(0, u, np.zeros(100)) == 0)
    np.testing.assert_allclose(RHOS["cosine"](u, amplitude=0.3), rho)

import json

import numpy as np
import pytest

from hkdicho import (AnalysisConfig, SpecValidationError, certificate_json,
                     example_spec_dict, make_example, parse_spec, run_analysis,
                     write_condition_csvs)
from hkdicho.pipeline import CONDITION_IDS


@pytest.fixture(scope="module")
def certs():
    out = {}
    for name in ("uniform-exponential", "example2", "example6"):
        out[name] = run_analysis(make_example(name))
    return out


def test_uniform_all_conditions_hold(certs):
    cert = certs["uniform-exponential"]
    assert cert.exit_status == 0
    for cid, verdict in cert.data["verdicts"]["per_condition"].items():
        assert verdict == "HOLDS-ON-WINDOW", cid


def test_growth_only_verdicts(certs):
    cert = certs["example6"]
    v = cert.data["verdicts"]
    assert v["per_condition"]["hd1"] == "DIVERGING"
    assert v["per_condition"]["hg1"] == "HOLDS-ON-WINDOW"
    assert v["per_condition"]["kg1"] == "HOLDS-ON-WINDOW"
    assert v["dichotomy_direct"] == "DIVERGING"
    assert v["dichotomy_via_norms"] == "DIVERGING"
    assert v["growth_direct"] == "HOLDS-ON-WINDOW"
    assert cert.exit_status == 1


def test_shear_discrepancy_note(certs):
    cert = certs["example2"]
    assert cert.exit_status == 0
    notes = cert.data["discrepancies"]
    assert len(notes) == 1 and notes[0]["condition"] == "kd1"
    env = np.asarray(cert.condition("kd1")["envelope"], dtype=float)
    assert np.allclose(env, 1.0, atol=1e-9)


def test_direct_and_norm_routes_agree(certs):
    for cert in certs.values():
        assert cert.data["verdicts"]["agreement_direct_vs_norms"]


def test_certificate_has_all_conditions(certs):
    for cert in certs.values():
        assert set(cert.conditions) == set(CONDITION_IDS)
        for entry in cert.conditions.values():
            assert len(entry["raw"]) == cert.data["window"] + 1


def test_certificate_json_deterministic(certs):
    cert1 = certs["example2"]
    cert2 = run_analysis(make_example("example2"))
    assert certificate_json(cert1) == certificate_json(cert2)
    assert cert1.data["digest"] == cert2.data["digest"]


def test_timing_not_serialized(certs):
    blob = certificate_json(certs["example2"])
    assert "timing" not in blob
    assert certs["example2"].timing_seconds > 0


def test_csv_emission(tmp_path, certs):
    paths = write_condition_csvs(certs["uniform-exponential"], tmp_path)
    assert len(paths) == len(CONDITION_IDS)
    lines = (tmp_path / "hd1.csv").read_text().strip().splitlines()
    assert lines[0] == "n,raw_min,envelope,method"
    assert len(lines) == 1 + 33


def test_structure_section(certs):
    s = certs["example2"].data["structure"]
    assert s["cocycle"]["pass"] and s["projectors"]["pass"]
    assert s["invariance"]["pass"] and s["strong_invariance"]["pass"]
    assert s["skew_identities"]["pass"]
    assert s["skew_identities"]["tol"] == 1e-9


def test_parse_generator_spec(tmp_path):
    spec = example_spec_dict("example2")
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    bundle, config, resolved = parse_spec(str(path))
    assert bundle.name == "example2"
    assert bundle.window == 32 and config.window == 32
    assert bundle.h.kind == "exponential"


def test_parse_window_override(tmp_path):
    spec = example_spec_dict("example6")
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    bundle, config, _ = parse_spec(str(path), window=16)
    assert bundle.window == 16 and config.window == 16


def test_parse_explicit_matrices():
    W, d = 4, 2
    spec = {
        "dimension": d,
        "window": W,
        "norm": "max",
        "system": {"matrices": np.repeat(np.diag([0.5, 2.0])[None], W,
                                         axis=0).tolist()},
        "projectors": {"matrices": np.repeat(np.diag([1.0, 0.0])[None], W + 1,
                                             axis=0).tolist()},
        "rates": {"h": {"kind": "exponential", "alpha": 0.6931471805599453},
                  "k": {"kind": "exponential", "alpha": 0.6931471805599453}},
    }
    bundle, config, _ = parse_spec(spec)
    assert bundle.name == "custom" and bundle.window == W


def test_parse_decreasing_rate_rejected():
    spec = {
        "dimension": 2, "window": 2, "norm": "max",
        "system": {"matrices": np.repeat(np.eye(2)[None], 2, axis=0).tolist()},
        "projectors": {"matrices": np.repeat(np.diag([1.0, 0.0])[None], 3,
                                             axis=0).tolist()},
        "rates": {"h": {"kind": "table", "values": [1.0, 2.0, 1.5]},
                  "k": {"kind": "exponential", "alpha": 1.0}},
    }
    with pytest.raises(SpecValidationError, match="NonMonotone"):
        parse_spec(spec)


def test_parse_shape_mismatch_rejected():
    spec = {
        "dimension": 2, "window": 3, "norm": "max",
        "system": {"matrices": np.repeat(np.eye(2)[None], 2, axis=0).tolist()},
        "projectors": {"matrices": np.repeat(np.diag([1.0, 0.0])[None], 4,
                                             axis=0).tolist()},
        "rates": {"h": {"kind": "exponential", "alpha": 1.0},
                  "k": {"kind": "exponential", "alpha": 1.0}},
    }
    with pytest.raises(SpecValidationError, match="matrices"):
        parse_spec(spec)


def test_selected_conditions_drive_exit_status():
    bundle = make_example("example6")
    config = AnalysisConfig(window=32, conditions=("hg1", "kg1"))
    cert = run_analysis(bundle, config)
    assert cert.exit_status == 0  # growth conditions hold on this example
    config_all = AnalysisConfig(window=32)
    assert run_analysis(bundle, config_all).exit_status == 1


def test_small_window_trend_untested():
    cert = run_analysis(make_example("uniform-exponential", window=4))
    entry = cert.condition("hd1")
    assert entry["trend"] == {"status": "window-too-small"}
    assert entry["verdict"] == "HOLDS-ON-WINDOW"

import json

import numpy as np
import pytest

import polymerlab.experiments as ex
from polymerlab.experiments import (ConfigError, StudyConfig, emit_report,
                                    load_config, parse_config_text,
                                    parse_report_csv, quantize12,
                                    read_report_jsonl, rows_to_csv,
                                    run_scaling_study, run_tail_probes,
                                    run_validation_suite,
                                    scaling_exact_r2, validation_manifest)
from polymerlab.gibbs import SamplerDegeneracyError
from polymerlab.spectral import Convention, build_basis


def test_parse_config_text():
    text = """
# comment
J_list = 4, 8
T=32
beta = 0.1   # inline noise is not stripped, keep values clean
convention = paper
"""
    got = parse_config_text("J_list = 4,8\nT=32\nbeta=0.1\n# c\n\n"
                            "convention=paper\n")
    assert got == {"J_list": (4, 8), "T": 32, "beta": 0.1,
                   "convention": Convention.PAPER}
    assert text  # silence the unused literal


def test_parse_config_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config_text("T=4\nbeta=0\nwat=1\n")


def test_parse_config_bad_value_and_shape():
    with pytest.raises(ConfigError):
        parse_config_text("replicates=abc\n")
    with pytest.raises(ConfigError):
        parse_config_text("just a bare line\n")


def test_load_config_overrides(tmp_path):
    p = tmp_path / "study.cfg"
    p.write_text("T=64\nbeta=0.2\nseed=5\n")
    cfg = load_config(str(p), {"beta": 0.3, "T": None})
    assert cfg.T == 64          # None override means "not given"
    assert cfg.beta == 0.3
    assert cfg.seed == 5
    assert load_config(None, {"J_list": (4, 8)}).J_list == (4, 8)


def test_config_validation():
    for kw in ({"kappa": 0.7}, {"beta": -0.1}, {"epsilon": 0.0},
               {"J_list": ()}, {"J_list": (1, 4)}, {"T": 0},
               {"sampler": "bogus"}, {"replicates": 0},
               {"T_list": (0, 4)}, {"ess_floor": 0.0}):
        with pytest.raises(ConfigError):
            StudyConfig(**kw)


def test_config_accepts_convention_string():
    assert StudyConfig(convention="paper").convention is Convention.PAPER
    assert StudyConfig().convention is Convention.LITERAL


def test_quantize12():
    x = 1.0 / 3.0
    q = quantize12(x)
    assert q == float(f"{q:.12g}")
    assert quantize12(q) == q
    assert abs(q - x) < 1e-12


def test_exact_r2_stationary_closed_forms():
    for J in (4, 8, 16):
        b = build_basis(J)
        got = scaling_exact_r2(b, T=64)
        assert got == pytest.approx((J ** 2 - 1) / (3 * J), rel=1e-12)
    for J, val in ((8, 7.0), (16, 35.0), (32, 155.0), (64, 651.0)):
        b = build_basis(J)
        got = scaling_exact_r2(b, T=16, conv=Convention.PAPER)
        assert got == pytest.approx(val, rel=1e-12)


def test_exact_r2_zero_init_matches_recursion():
    b = build_basis(6)
    T = 40
    # independent accumulation: per-mode variance recursion
    from polymerlab.dynamics import mode_innovation_std
    sig2 = mode_innovation_std(b, Convention.LITERAL)[1:] ** 2
    var = np.zeros(5)
    acc = 0.0
    for _ in range(T):
        var = b.rho[1:] ** 2 * var + sig2
        acc += var.sum()
    assert scaling_exact_r2(b, T, init="zero") == pytest.approx(
        acc / (T * 6), rel=1e-12)
    assert scaling_exact_r2(b, T, init="zero") < scaling_exact_r2(b, T)
    with pytest.raises(ValueError):
        scaling_exact_r2(b, T, init="warm")


def _small_cfg(**kw):
    base = dict(J_list=(4, 8, 16), T=32, replicates=300, seed=3)
    base.update(kw)
    return StudyConfig(**base)


def test_scaling_free_study():
    rep = run_scaling_study(_small_cfg())
    assert rep.n_used == 3
    assert all(r["sampler"] == "direct" for r in rep.rows)
    assert [r["J"] for r in rep.rows] == [4, 8, 16]
    for r in rep.rows:
        assert r["R_mean"] == pytest.approx(r["R_exact"], rel=0.05)
    assert 0.3 < rep.fitted_exponent < 0.7


def test_scaling_study_deterministic(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    r1 = run_scaling_study(_small_cfg(output_dir=str(d1)))
    r2 = run_scaling_study(_small_cfg(output_dir=str(d2)))
    assert r1 == r2
    assert (d1 / "scaling.csv").read_bytes() == \
        (d2 / "scaling.csv").read_bytes()
    assert (d1 / "scaling_summary.jsonl").read_bytes() == \
        (d2 / "scaling_summary.jsonl").read_bytes()


def test_scaling_importance_degenerates_and_raises():
    cfg = _small_cfg(beta=5.0, epsilon=1.0, replicates=80,
                     sampler="importance", T=16)
    with pytest.raises(SamplerDegeneracyError):
        run_scaling_study(cfg)


def test_scaling_auto_falls_back_to_metropolis():
    cfg = _small_cfg(beta=5.0, epsilon=0.5, replicates=60, sampler="auto",
                     T=16)
    rep = run_scaling_study(cfg)
    assert all(r["sampler"] == "metropolis" for r in rep.rows)
    assert rep.n_used == 3


def test_tail_probe_requires_horizons():
    with pytest.raises(ConfigError):
        run_tail_probes(_small_cfg(), 0.1, 0.2)
    cfg = _small_cfg(J_list=(8,), T_list=(8, 16))
    with pytest.raises(ConfigError):
        run_tail_probes(cfg, 0.3, 0.2)
    with pytest.raises(ConfigError):
        run_tail_probes(cfg, -0.1, 0.2)


def test_tail_probe_trivial_thresholds():
    cfg = _small_cfg(J_list=(8,), T_list=(16, 32), replicates=1500)
    out = run_tail_probes(cfg, 0.0, 100.0)
    assert [r["T"] for r in out["rows"]] == [16, 32]
    for r in out["rows"]:
        assert r["lower_count"] == 0 and r["lower_prob"] == 0.0
        assert r["upper_count"] == 0 and r["upper_prob"] == 0.0
        assert r["sampler"] == "direct"
    assert out["lower_nonincreasing"] and out["upper_nonincreasing"]


def test_tail_probe_interior_thresholds():
    cfg = _small_cfg(J_list=(8,), T_list=(16, 32), replicates=4000)
    out = run_tail_probes(cfg, 0.2, 0.25)
    # rms ~ 1.62 at J=8: both tails populated at these cuts
    assert all(r["lower_count"] > 0 for r in out["rows"])
    assert all(r["upper_count"] > 0 for r in out["rows"])
    for r in out["rows"]:
        assert r["lower_se"] > 0 and r["upper_se"] > 0


def test_validation_suite_green_and_manifested():
    rep = run_validation_suite(StudyConfig(seed=1))
    assert rep.passed
    assert tuple(r["name"] for r in rep.checks) == validation_manifest()
    assert len(rep.checks) >= 12


def test_validation_crashed_check_is_failure(monkeypatch):
    def boom(config):
        raise RuntimeError("kaput")
    monkeypatch.setattr(ex, "_CHECKS", ex._CHECKS + [("boom", boom)])
    rep = run_validation_suite(StudyConfig(seed=1))
    assert not rep.passed
    row = rep.checks[-1]
    assert row["name"] == "boom" and not row["passed"]
    assert "kaput" in row["detail"]


def test_rows_to_csv_empty_and_format():
    assert rows_to_csv(("a", "b"), []) == "a,b\n"
    text = rows_to_csv(("x", "flag", "miss"),
                       [{"x": 1.5, "flag": True, "miss": None}])
    assert text == "x,flag,miss\n1.5,true,\n"


def test_parse_report_csv_typing():
    rows = parse_report_csv("a,b,c,d\n3,2.5,true,word\n,,false,\n")
    assert rows[0] == {"a": 3, "b": 2.5, "c": True, "d": "word"}
    assert rows[1] == {"a": None, "b": None, "c": False, "d": None}


def test_emit_report_csv_round_trip(tmp_path):
    rep = run_scaling_study(_small_cfg())
    path = emit_report(rep, "csv", str(tmp_path))
    back = parse_report_csv(open(path).read())
    for orig, parsed in zip(rep.rows, back):
        for k in ("J", "R_mean", "R_exact", "flagged"):
            if isinstance(orig[k], float):
                assert parsed[k] == pytest.approx(orig[k], abs=1e-12)
            else:
                assert parsed[k] == orig[k]


def test_emit_report_jsonl_schema(tmp_path):
    rep = run_validation_suite(StudyConfig(seed=1,
                                           output_dir=str(tmp_path)))
    meta, rows = read_report_jsonl(str(tmp_path / "validation.jsonl"))
    assert meta["schema_version"] == "1.0"
    assert meta["kind"] == "validation"
    assert meta["passed"] is True
    assert len(rows) == len(rep.checks)
    assert all(set(r) == {"name", "passed", "detail"} for r in rows)


def test_emit_report_bad_format(tmp_path):
    rep = run_validation_suite(StudyConfig(seed=1))
    with pytest.raises(ValueError):
        emit_report(rep, "xml", str(tmp_path))
    with pytest.raises(TypeError):
        emit_report(object(), "csv", str(tmp_path))


def test_emit_generic_dict(tmp_path):
    rep = {"stem": "probe", "fieldnames": ("k", "v"),
           "rows": [{"k": "x", "v": 2}], "meta": {"kind": "probe"}}
    p_csv = emit_report(rep, "csv", str(tmp_path))
    p_json = emit_report(rep, "jsonl", str(tmp_path))
    assert p_csv.endswith("probe.csv")
    meta, rows = read_report_jsonl(p_json)
    assert meta["schema_version"] == "1.0"
    assert rows == [{"k": "x", "v": 2}]


def test_json_lines_are_compact_and_sorted():
    line = ex._json_line({"b": 1.0 / 3.0, "a": Convention.PAPER})
    obj = json.loads(line)
    assert " " not in line
    assert obj["a"] == "paper"
    assert obj["b"] == quantize12(1.0 / 3.0)

import os

import pytest

from polymerlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectra_stdout(capsys):
    code, out, err = run(capsys, "spectra", "--J", "8")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "m,rho,weight"
    assert len(lines) == 9
    assert "csc2_identity_error" in err


def test_spectra_writes_file(tmp_path, capsys):
    code, out, _ = run(capsys, "spectra", "--J", "4", "--out",
                       str(tmp_path))
    assert code == 0
    assert (tmp_path / "spectra.csv").exists()
    assert "wrote" in out


def test_simulate_csv_and_binary(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--J", "4", "--T", "8",
                       "--seed", "2")
    assert code == 0
    assert out.splitlines()[0] == "t,n,u"
    assert len(out.strip().splitlines()) == 1 + 9 * 4   # (T+1)*J site rows

    code2, _, _ = run(capsys, "simulate", "--J", "4", "--T", "8", "--seed",
                      "2", "--format", "binary", "--out", str(tmp_path))
    assert code2 == 0
    files = os.listdir(tmp_path)
    assert any(f.endswith(".bin") for f in files)


def test_simulate_deterministic(capsys):
    _, a, _ = run(capsys, "simulate", "--J", "4", "--T", "6", "--seed", "9")
    _, b, _ = run(capsys, "simulate", "--J", "4", "--T", "6", "--seed", "9")
    assert a == b


def test_variance_scan(capsys):
    code, out, _ = run(capsys, "variance-scan", "--J", "8")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("J,i,j,d,")
    assert len(lines) == 4                       # d = 1, 2, 4


def test_gibbs_smoke(capsys):
    code, out, _ = run(capsys, "gibbs", "--J", "4", "--T", "8", "--beta",
                       "0.05", "--replicates", "400", "--seed", "1",
                       "--sampler", "importance")
    assert code == 0
    assert "log_Z_hat" in out


def test_gibbs_metropolis_smoke(capsys):
    code, out, _ = run(capsys, "gibbs", "--J", "4", "--T", "8", "--beta",
                       "0.05", "--replicates", "50", "--seed", "1",
                       "--sampler", "metropolis")
    assert code == 0
    assert "acceptance" in out


def test_ldp_rate_rows(capsys):
    code, out, _ = run(capsys, "ldp", "--rho", "0.5", "--x", "1,2,4")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "rho,sigma2,x_or_K,value,empirical,T,samples"
    assert len(lines) == 4


def test_ldp_probe_row(capsys):
    code, out, _ = run(capsys, "ldp", "--rho", "0.0", "--x", "2", "--K",
                       "2.0", "--T", "10", "--replicates", "20000",
                       "--seed", "4")
    assert code == 0
    assert len(out.strip().split("\n")) == 3


def test_ldp_bad_rho_exits_one(capsys):
    code, _, err = run(capsys, "ldp", "--rho", "1.5", "--x", "1")
    assert code == 1
    assert "invariant failure" in err


def test_scaling_smoke(tmp_path, capsys):
    code, out, _ = run(capsys, "scaling", "--J", "4,8,16", "--T", "32",
                       "--replicates", "200", "--seed", "3", "--out",
                       str(tmp_path))
    assert code == 0
    assert (tmp_path / "scaling.csv").exists()
    assert (tmp_path / "scaling_summary.jsonl").exists()
    assert "fitted_exponent" in out


def test_scaling_degeneracy_exits_three(capsys):
    code, _, err = run(capsys, "scaling", "--J", "4,8,16", "--T", "16",
                       "--beta", "5.0", "--sampler", "importance",
                       "--replicates", "60", "--seed", "2")
    assert code == 3
    assert "sampler degeneracy" in err


def test_tails_smoke(capsys):
    code, out, _ = run(capsys, "tails", "--J", "8", "--T-list", "16,32",
                       "--replicates", "1200", "--seed", "5", "--K1",
                       "0.0", "--K2", "50.0")
    assert code == 0
    assert "lower_nonincreasing" in out


def test_validate_exit_zero(capsys):
    code, out, _ = run(capsys, "validate", "--seed", "1")
    assert code == 0
    assert "passed" in out


def test_unknown_config_key_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense=1\n")
    code, _, err = run(capsys, "scaling", "--config", str(cfg))
    assert code == 2
    assert "configuration error" in err


def test_missing_config_exits_two(capsys):
    code, _, err = run(capsys, "validate", "--config", "/no/such/file.cfg")
    assert code == 2
    assert "configuration error" in err


def test_bad_flag_value_exits_two(capsys):
    code, _, err = run(capsys, "scaling", "--J", "4,eight")
    assert code == 2
    assert "configuration error" in err


def test_console_script_installed():
    import shutil
    assert shutil.which("polymerlab") is not None

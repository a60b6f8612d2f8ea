import json

import pytest

from perpetua import cli
from perpetua.checks import Check


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_transform_pqd(capsys):
    code, out, _ = run(["transform", "--seed", "1", "--gamma", "1", "--a-plus", "0.5", "--rho", "2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["lambda_star"] == pytest.approx(0.75, abs=1e-9)
    assert d["admissible"] is True and d["residual"] < 1e-6


def test_compare_case_a(capsys):
    code, out, _ = run(["compare-bk18", "--seed", "1", "--case", "a", "--rho", "2"], capsys)
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "equal" and abs(d["gap"]) < 1e-6


def test_csv_output_is_byte_identical_and_headed(tmp_path, capsys):
    argv = ["tail", "--seed", "4", "--n-samples", "20000", "--t-grid", "1,2,3", "--format", "csv",
            "--workers", "2"]
    _, a, _ = run(argv + ["--out", str(tmp_path / "a")], capsys)
    _, b, _ = run(argv + ["--out", str(tmp_path / "b")], capsys)
    assert a == b
    first = a.splitlines()[0]
    assert first.startswith("# perpetua-manifest: ") and len(first.split()[-1]) == 64
    assert "\r" not in a
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files_a == ["manifest.json", "tail.csv", "tail.json"]
    assert (tmp_path / "a" / "tail.csv").read_bytes() == (tmp_path / "b" / "tail.csv").read_bytes()
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["perpetua_manifest"] == first.split()[-1]
    assert man["config"]["seed"] == 4 and "version" in man
    assert json.loads((tmp_path / "a" / "tail.json").read_text())["perpetua_manifest"] == man["perpetua_manifest"]


def test_reals_use_17_digits(capsys):
    _, out, _ = run(["transform", "--seed", "1", "--gamma", "1", "--a-plus", "0.5", "--rho", "2",
                     "--lambda-grid", "0.3", "--format", "csv"], capsys)
    header, row = out.splitlines()[1:3]
    assert header == "lambda,phi,argmin_y"
    lam, phi, _ = row.split(",")
    assert lam == "0.29999999999999999"
    assert float(phi) == pytest.approx(0.3 / (0.3 + 0.25), rel=1e-9)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "compare-bk18", "seed": 2, "case": "a", "rho": 2.0}))
    code, out, _ = run(["compare-bk18", "--config", str(cfg), "--case", "b", "--rho", "3"], capsys)
    d = json.loads(out)
    assert code == 0 and d["case"] == "b" and d["rho"] == 3.0


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("PERPETUA_SEED", "17")
    code, _, _ = run(["compare-bk18", "--case", "a", "--rho", "2"], capsys)
    assert code == 0


def test_missing_seed_is_schema_error(monkeypatch, capsys):
    monkeypatch.delenv("PERPETUA_SEED", raising=False)
    code, _, err = run(["compare-bk18"], capsys)
    assert code == 2 and "seed" in err


@pytest.mark.parametrize("argv,needle", [
    (["tail", "--seed", "1", "--n-samples", "10"], "$.n_samples"),
    (["tail", "--seed", "1", "--t-grid", "3,2"], "$.t_grid"),
    (["ldm", "--seed", "1", "--model", '{"kind": "other"}'], "$.model.kind"),
    (["ldm", "--seed", "-1"], "$.seed"),
])
def test_schema_violations(argv, needle, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and needle in err


def test_envelope_with_infinite_lambda_star_is_mismatch(capsys):
    # Weibull-2 B under f(t) = t gives g = inf below 1/a_plus, so lambda* = inf
    code, _, err = run(["envelope", "--seed", "1", "--f", '{"rho": 1}', "--N", "1000"], capsys)
    assert code == 3 and "lambda_star" in err


def test_envelope_unsupported_model_is_mismatch(capsys):
    model = '{"kind": "atom_survival", "rho": 3, "alpha": {"variant": "case_b"}}'
    code, _, _ = run(["envelope", "--seed", "1", "--model", model, "--f", '{"rho": 2}', "--N", "1000"], capsys)
    assert code == 3


def test_envelope_small_run(capsys):
    code, out, _ = run(["envelope", "--seed", "1", "--N", "5000", "--n-traj", "2", "--n-start", "100",
                        "--workers", "1"], capsys)
    d = json.loads(out)
    assert code == 0 and d["nondecreasing"] and d["lambda_star"] == pytest.approx(0.75, abs=1e-9)


def test_validate_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "validate_model", lambda *a, **k: [Check("x", 9.0, 4.0, False)])
    code, out, _ = run(["validate-model", "--seed", "1", "--n-samples", "1000"], capsys)
    assert code == 4 and json.loads(out)["passed"] is False


def test_ldm_and_one_step_commands(capsys):
    code, out, _ = run(["ldm", "--seed", "1", "--y-grid", "0.4,0.8"], capsys)
    d = json.loads(out)
    assert code == 0
    for e in d["estimates"]:
        assert e["estimate"] == pytest.approx(e["closed_form"], abs=0.03)
    code, out, _ = run(["one-step", "--seed", "1", "--n-samples", "20000", "--t-grid", "1,2"], capsys)
    assert code == 0 and json.loads(out)["predicted_phi"] == pytest.approx(0.75, abs=1e-9)


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "perpetua", "compare-bk18", "--seed", "1", "--case", "a",
                        "--rho", "3", "--format", "csv"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("# perpetua-manifest: ")

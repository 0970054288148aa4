import json
import os

import numpy as np
import pytest

from unf.cli import build_parser, main


def run_cli(capsys, *args):
    rc = main(list(args))
    out = capsys.readouterr().out
    return rc, out


def run_json(capsys, *args):
    rc, out = run_cli(capsys, *args)
    assert rc == 0
    payload = json.loads(out)
    assert payload["v"] == 1
    return payload


def test_map_params_lorenz(capsys):
    payload = run_json(capsys, "map-params", "--family", "lorenz",
                       "--a", "10", "--b", "2.6667", "--r", "28")
    assert payload["lambda"] == pytest.approx(0.6694, abs=1e-3)
    assert payload["alpha"] == pytest.approx(0.1623, abs=1e-3)
    assert payload["beta"] == pytest.approx(1.0549, abs=1e-3)
    assert payload["zone"] == "LorenzLike"


def test_map_params_chen_curve(capsys):
    payload = run_json(capsys, "map-params", "--family", "chen",
                       "--a", "35", "--b", "3", "--c", "28")
    assert payload["zone"] == "ChenLike"
    assert payload["on_chen_curve"] is True


def test_map_params_tigan(capsys):
    payload = run_json(capsys, "map-params", "--family", "tigan",
                       "--a", "1", "--b", "1", "--c", "2")
    assert payload["zone"] == "TiganBoundary"


def test_map_params_domain_error_exit_code(capsys):
    rc = main(["map-params", "--family", "lorenz", "--a", "10", "--b", "25",
               "--r", "28"])
    assert rc == 2


def test_split_json_roundtrip(capsys):
    payload = run_json(capsys, "split", "--lambda", "2.0", "--alpha", "0.35",
                       "--beta", "1.05487")
    assert payload["k"] == 0 and payload["delta"] < 0 and payload["inside"]


def test_find_homoclinic_lambda(capsys):
    payload = run_json(capsys, "find-homoclinic", "--beta", "1.05487",
                       "--alpha", "0.314", "--lambda-lo", "0.6",
                       "--lambda-hi", "0.9", "--tol", "1e-5")
    assert payload["lambda"] == pytest.approx(0.74564, abs=5e-3)
    assert payload["orientation"] == "Oriented"


def test_find_homoclinic_needs_bracket(capsys):
    rc = main(["find-homoclinic", "--beta", "1.05487"])
    assert rc == 2


def test_integrate_writes_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    payload = run_json(capsys, "integrate", "--lambda", "0.6694",
                       "--alpha", "0.1623", "--beta", "1.05487",
                       "--x0", "0.1", "--t", "5", "--n-samples", "40",
                       "--out", str(out))
    assert payload["written"] == str(out)
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (40, 4)


def test_manifold_ladder(capsys):
    payload = run_json(capsys, "manifold", "--lambda", "0.26",
                       "--alpha", "0.11", "--beta", "2.47",
                       "--what", "ladder", "--k-max", "3")
    assert payload["zk"][0] == pytest.approx(1.33436, abs=1e-4)


def test_lyapunov_cmd(capsys):
    payload = run_json(capsys, "lyapunov", "--lambda", "0.7634",
                       "--alpha", "0.35", "--beta", "1.05487",
                       "--t-total", "600")
    assert payload["Lambda"] < 0
    assert payload["class"] == "Equilibrium"


def test_sweep_deterministic_across_workers(tmp_path, capsys):
    common = ["sweep", "--beta", "2.47", "--alpha-lo", "0.09",
              "--alpha-hi", "0.13", "--lambda-lo", "0.24",
              "--lambda-hi", "0.28", "--n-alpha", "3", "--n-lambda", "3",
              "--t-transient", "40", "--t-total", "240",
              "--rtol", "1e-8", "--atol", "1e-10"]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(common + ["--workers", "1", "--out", str(f1)]) == 0
    capsys.readouterr()
    assert main(common + ["--workers", "8", "--out", str(f2)]) == 0
    capsys.readouterr()
    assert f1.read_bytes() == f2.read_bytes()


def test_env_variable_precedence(capsys, monkeypatch):
    # env var applies when the flag is absent; the flag wins otherwise
    monkeypatch.setenv("UNF_RTOL", "1e-6")
    from unf.cli import _resolve_cfg
    ap = build_parser()
    args = ap.parse_args(["split", "--lambda", "1", "--alpha", "0.3",
                          "--beta", "1.0"])
    assert _resolve_cfg(args).rtol == 1e-6
    args = ap.parse_args(["split", "--lambda", "1", "--alpha", "0.3",
                          "--beta", "1.0", "--rtol", "1e-9"])
    assert _resolve_cfg(args).rtol == 1e-9


def test_help_lists_all_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for cmd in ("map-params", "integrate", "manifold", "split",
                "find-homoclinic", "lyapunov", "sweep", "trace", "symbols"):
        assert cmd in out


def test_help_shows_defaults(capsys):
    from unf.ode import IntegratorConfig
    with pytest.raises(SystemExit):
        main(["split", "--help"])
    out = capsys.readouterr().out
    assert str(IntegratorConfig().rtol) in out
    assert str(IntegratorConfig().escape_radius) in out


def test_csv_stdout_format(capsys):
    rc, out = run_cli(capsys, "map-params", "--family", "tigan", "--a", "1",
                      "--b", "1", "--c", "2", "--format", "csv")
    assert rc == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    values = lines[1].split(",")
    assert len(header) == len(values)
    assert "zone" in header


def test_symbols_cmd(tmp_path, capsys):
    out = tmp_path / "s.csv"
    payload = run_json(capsys, "symbols", "--lambda", "0.6694",
                       "--alpha", "0.1623", "--beta", "1.05487",
                       "--n", "20", "--t-max", "4000", "--out", str(out))
    assert payload["n"] == 20
    lines = out.read_text().splitlines()
    assert lines[0] == "index,side,half_turns"
    assert len(lines) == 21

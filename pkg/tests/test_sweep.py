import numpy as np
import pytest

from unf.lyapunov import classify_attractor, largest_lyapunov
from unf.model import UnfParams
from unf.ode import IntegratorConfig
from unf.sweep import (curve_to_csv, grid_to_csv, parse_grid_csv, sweep_grid,
                       trace_curve)

COARSE = IntegratorConfig(rtol=1e-8, atol=1e-10)
LYAP_KW = dict(t_transient=60.0, t_total=420.0, renorm_dt=1.0)


def test_single_cell_equals_direct_call():
    grid = sweep_grid(1.05487, (0.1623, 0.1623), (0.6694, 0.6694), 1, 1,
                      cfg=COARSE, **LYAP_KW)
    res = largest_lyapunov(UnfParams(0.6694, 0.1623, 1.05487), cfg=COARSE,
                           **LYAP_KW)
    assert grid.Lambda[0, 0] == res.Lambda
    assert grid.classes[0, 0] == classify_attractor(res)[0]


def test_overlay_columns():
    grid = sweep_grid(1.05487, (0.1, 0.4), (0.6, 0.8), 4, 3, cfg=COARSE,
                      **LYAP_KW)
    alphas = np.linspace(0.1, 0.4, 4)
    assert np.allclose(grid.tigan_line, 0.5 * (alphas + 1.05487))
    assert np.all(grid.hopf_line > 0)


def test_worker_count_determinism(tmp_path):
    kw = dict(cfg=COARSE, **LYAP_KW)
    g1 = sweep_grid(2.47, (0.08, 0.2), (0.2, 0.4), 5, 4, workers=1, **kw)
    g3 = sweep_grid(2.47, (0.08, 0.2), (0.2, 0.4), 5, 4, workers=3, **kw)
    p1, p3 = tmp_path / "w1.csv", tmp_path / "w3.csv"
    grid_to_csv(g1, p1)
    grid_to_csv(g3, p3)
    assert p1.read_bytes() == p3.read_bytes()


def test_grid_csv_format_and_roundtrip(tmp_path):
    grid = sweep_grid(2.47, (0.1, 0.12), (0.25, 0.27), 2, 2, cfg=COARSE,
                      **LYAP_KW)
    path = tmp_path / "g.csv"
    over = tmp_path / "g_overlay.csv"
    grid_to_csv(grid, path, overlay_path=over)
    text = path.read_text()
    header = text.splitlines()[0]
    assert header.startswith("# unf-sweep v1; beta=")
    alpha_spec = header.split("alpha=")[1].split(";")[0]
    lo, hi, n = alpha_spec.split(":")
    assert (float(lo), float(hi), int(n)) == (0.1, 0.12, 2)
    assert "\r" not in text
    fields, rows, classes = parse_grid_csv(path)
    assert float(fields["beta"]) == 2.47  # 17 significant digits round-trip
    assert rows.shape == (4, 3)
    assert set(classes) <= set("CPEDX")
    otext = over.read_text().splitlines()
    assert otext[0].startswith("# unf-overlay v1; beta=")
    assert float(otext[0].split("beta=")[1]) == 2.47
    assert otext[1] == "alpha,lambda_tigan,lambda_hopf"


def test_trace_k0_passes_anchor():
    trace = trace_curve(1.05487, 0, (0.30, 0.33), 4, cfg=COARSE,
                        lambda_hint=(0.6, 0.9), tol=1e-5)
    assert len(trace.points) >= 3
    near = [pt for pt in trace.points if abs(pt[0] - 0.314) < 0.008]
    assert near
    # smooth continuation: adjacent lambda values stay close
    lams = [pt[1] for pt in trace.points]
    assert np.max(np.abs(np.diff(lams))) < 0.05
    for _, lam, res in trace.points:
        assert res < 1e-3


def test_trace_k0_lambda_at_anchor_matches_caption():
    trace = trace_curve(1.05487, 0, (0.314, 0.314), 1, cfg=COARSE,
                        lambda_hint=(0.6, 0.9), tol=1e-6)
    a, lam, res = trace.points[0]
    assert abs(lam - 0.74564) < 5e-3


def test_trace_k1_chen_anchor():
    trace = trace_curve(2.47, 1, (0.18, 0.188), 3, cfg=COARSE,
                        lambda_hint=(0.55, 0.75), tol=1e-5)
    assert trace.points
    # the curve passes within 5e-3 of (alpha=0.184, lambda=0.6296)
    best = min(trace.points, key=lambda pt: abs(pt[0] - 0.184))
    assert abs(best[1] - 0.6296) < 5e-3


def test_curve_csv_format(tmp_path):
    trace = trace_curve(1.05487, 0, (0.314, 0.314), 1, cfg=COARSE,
                        lambda_hint=(0.6, 0.9), tol=1e-5)
    path = tmp_path / "c.csv"
    curve_to_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "alpha,lambda,k,residual"
    assert len(lines) == 1 + len(trace.points)
    cols = lines[1].split(",")
    assert len(cols) == 4 and cols[2] == "0"

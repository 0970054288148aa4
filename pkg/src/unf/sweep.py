"""Parameter-plane sweeps and one-parameter homoclinic curve tracing.

Grids map (alpha, lam) cells at fixed beta to attractor classes via the
largest Lyapunov exponent; work is distributed over processes in static
row blocks and gathered into a preallocated buffer, so the output is
byte-identical for any worker count.  Curves continue a homoclinic root in
lam across an alpha range with an adaptive re-bracketing step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (BracketNotSignChanging, EmptyTrace, FateInterference,
                     NumericalError, TwistMismatch, UnfError)
from .homoclinic import _bisect_param, _commit_side, split_function
from .lyapunov import classify_attractor, largest_lyapunov
from .model import UnfParams, hopf_threshold
from .ode import IntegratorConfig

__all__ = [
    "SweepGrid",
    "CurveTrace",
    "sweep_grid",
    "trace_curve",
    "grid_to_csv",
    "parse_grid_csv",
    "curve_to_csv",
]

CLASS_CODES = {"Chaotic": "C", "Periodic": "P", "Equilibrium": "E",
               "Diverged": "D", "Error": "X"}


@dataclass(frozen=True)
class SweepGrid:
    beta: float
    alpha_axis: tuple  # (lo, hi, n)
    lambda_axis: tuple
    Lambda: np.ndarray         # shape (n_alpha, n_lambda)
    classes: np.ndarray        # same shape, single-char codes
    tigan_line: np.ndarray     # lam = A per alpha column
    hopf_line: np.ndarray      # lam_s per alpha column
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CurveTrace:
    k: int
    beta: float
    points: list       # (alpha, lam, residual)
    gaps: list         # (alpha_lo, alpha_hi) sub-ranges lost to interference


def _cell(args):
    beta, alpha, lam, cfg_kw, lyap_kw = args
    cfg = IntegratorConfig(**cfg_kw)
    try:
        res = largest_lyapunov(UnfParams(lam, alpha, beta), cfg=cfg, **lyap_kw)
        label = classify_attractor(res)
        value = res.Lambda
    except UnfError:
        label, value = "Error", math.nan
    return value, CLASS_CODES[label]


def _row(args):
    i, beta, alpha, lams, cfg_kw, lyap_kw = args
    out = [_cell((beta, alpha, lam, cfg_kw, lyap_kw)) for lam in lams]
    return i, out


def sweep_grid(beta: float, alpha_range, lambda_range, n_alpha: int,
               n_lambda: int, workers: int = 1,
               cfg: IntegratorConfig | None = None,
               t_transient: float = 200.0, t_total: float = 2000.0,
               renorm_dt: float = 1.0) -> SweepGrid:
    """Classify every (alpha, lam) cell at fixed beta.

    Cells are seeded on the unstable manifold; per-cell failures are
    recorded as class X and never abort the grid.  The result is
    independent of `workers`.
    """
    if n_alpha < 1 or n_lambda < 1:
        raise ValueError("grid must have at least one cell per axis")
    cfg = cfg or IntegratorConfig()
    alphas = np.linspace(alpha_range[0], alpha_range[1], n_alpha)
    lams = np.linspace(lambda_range[0], lambda_range[1], n_lambda)
    cfg_kw = {"rtol": cfg.rtol, "atol": cfg.atol, "max_step": cfg.max_step,
              "t_max": cfg.t_max, "escape_radius": cfg.escape_radius}
    lyap_kw = {"t_transient": t_transient, "t_total": t_total,
               "renorm_dt": renorm_dt}
    jobs = [(i, beta, float(a), lams, cfg_kw, lyap_kw)
            for i, a in enumerate(alphas)]
    values = np.empty((n_alpha, n_lambda))
    classes = np.empty((n_alpha, n_lambda), dtype="U1")
    if workers <= 1:
        rows = map(_row, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        rows = pool.map(_row, jobs)
    for i, row in rows:
        for j, (val, cls) in enumerate(row):
            values[i, j] = val
            classes[i, j] = cls
    if workers > 1:
        pool.shutdown()
    tigan = np.array([0.5 * (a + beta) for a in alphas])
    hopf = np.array([hopf_threshold(float(a), beta) for a in alphas])
    return SweepGrid(beta=beta,
                     alpha_axis=(float(alphas[0]), float(alphas[-1]), n_alpha),
                     lambda_axis=(float(lams[0]), float(lams[-1]), n_lambda),
                     Lambda=values, classes=classes, tigan_line=tigan,
                     hopf_line=hopf,
                     meta={"t_transient": t_transient, "t_total": t_total,
                           "renorm_dt": renorm_dt, "rtol": cfg.rtol,
                           "atol": cfg.atol})


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def grid_to_csv(grid: SweepGrid, path, overlay_path=None):
    """v1 grid format: one header line, then alpha,lambda,Lambda,class rows
    in row-major (alpha-outer) order; 17 significant digits, LF endings."""
    a_lo, a_hi, n_a = grid.alpha_axis
    l_lo, l_hi, n_l = grid.lambda_axis
    alphas = np.linspace(a_lo, a_hi, n_a)
    lams = np.linspace(l_lo, l_hi, n_l)
    with open(path, "w", newline="") as fh:
        fh.write(f"# unf-sweep v1; beta={_fmt(grid.beta)}; "
                 f"alpha={_fmt(a_lo)}:{_fmt(a_hi)}:{n_a}; "
                 f"lambda={_fmt(l_lo)}:{_fmt(l_hi)}:{n_l}\n")
        for i, a in enumerate(alphas):
            for j, lam in enumerate(lams):
                fh.write(f"{_fmt(a)},{_fmt(lam)},{_fmt(grid.Lambda[i, j])},"
                         f"{grid.classes[i, j]}\n")
    if overlay_path is not None:
        with open(overlay_path, "w", newline="") as fh:
            fh.write(f"# unf-overlay v1; beta={_fmt(grid.beta)}\n")
            fh.write("alpha,lambda_tigan,lambda_hopf\n")
            for a, lt, lh in zip(alphas, grid.tigan_line, grid.hopf_line):
                fh.write(f"{_fmt(a)},{_fmt(lt)},{_fmt(lh)}\n")


def parse_grid_csv(path):
    """Read a v1 grid file back into (header dict, row array, class array)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# unf-sweep v1;"):
            raise ValueError("not a v1 sweep file")
        fields = dict(part.strip().split("=", 1)
                      for part in header[len("# unf-sweep v1;"):].split(";"))
        rows, classes = [], []
        for line in fh:
            a, lam, val, cls = line.strip().split(",")
            rows.append((float(a), float(lam), float(val)))
            classes.append(cls)
    return fields, np.asarray(rows), np.asarray(classes)


def trace_curve(beta: float, k: int, alpha_range, n_points: int,
                cfg: IntegratorConfig | None = None,
                lambda_hint: tuple | None = None, tol: float = 1e-6,
                width0: float = 0.05) -> CurveTrace:
    """Continue the k-twist homoclinic curve lam(alpha) at fixed beta.

    Starts from a coarse lam scan at the first alpha sample (or the hint
    bracket) and re-brackets each subsequent sample around the previous
    root, halving the bracket width on failure and growing it back after
    successes.  Interference sub-ranges are recorded as gaps.
    """
    cfg = cfg or IntegratorConfig()
    alphas = np.linspace(alpha_range[0], alpha_range[1], n_points)
    points, gaps = [], []
    lam_prev = None
    width = width0

    def locate(alpha, bracket):
        def f(lam):
            return _commit_side(UnfParams(lam, alpha, beta), cfg)
        root, m_lo, m_hi = _bisect_param(f, bracket[0], bracket[1], tol)
        half = min(m_lo, m_hi)
        if half != k:
            raise TwistMismatch(half, k, UnfParams(root, alpha, beta))
        sp = split_function(UnfParams(root, alpha, beta), cfg)
        return root, abs(sp.delta)

    for a in alphas:
        a = float(a)
        tried = False
        if lam_prev is None:
            bracket = lambda_hint or (0.05, 1.5)
            grid = np.linspace(bracket[0], bracket[1], 25)
            sides = []
            for lam in grid:
                s, m, _ = _commit_side(UnfParams(float(lam), a, beta), cfg)
                sides.append((float(lam), s, m))
            for (l0, s0, m0), (l1, s1, m1) in zip(sides, sides[1:]):
                if s0 is not None and s1 is not None and s0 != s1 \
                        and min(m0, m1) == k:
                    try:
                        root, res = locate(a, (l0, l1))
                        points.append((a, root, res))
                        lam_prev = root
                        break
                    except (UnfError, NumericalError):
                        continue
            continue
        while width <= 0.12:
            tried = True
            try:
                root, res = locate(a, (lam_prev - width, lam_prev + width))
                points.append((a, root, res))
                lam_prev = root
                width = max(width * 0.6, 1e-3)
                break
            except BracketNotSignChanging:
                width *= 2.0  # root drifted outside the bracket
            except (FateInterference, TwistMismatch):
                gaps.append((a, a))
                width = width0
                break
        else:
            gaps.append((a, a))
            width = width0
    if not points:
        raise EmptyTrace(f"no homoclinic root located for k={k}")
    return CurveTrace(k=k, beta=beta, points=points, gaps=gaps)


def curve_to_csv(trace: CurveTrace, path):
    with open(path, "w", newline="") as fh:
        fh.write("alpha,lambda,k,residual\n")
        for a, lam, res in trace.points:
            fh.write(f"{_fmt(a)},{_fmt(lam)},{trace.k},{_fmt(res)}\n")

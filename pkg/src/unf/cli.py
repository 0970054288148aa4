"""Command-line frontend: one binary, subcommand per operation.

Numeric flags resolve as CLI flag > UNF_* environment variable > built-in
default.  Exit codes: 0 success, 2 domain errors (bad inputs), 3 numerical
failures.  JSON payloads carry a schema version field "v": 1.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError, UnfError
from .homoclinic import (classify_wu_fate, find_alpha_k, find_lambda0,
                         split_function, symbolic_sequence, symbols_to_csv)
from .lyapunov import classify_attractor, largest_lyapunov
from .manifolds import (domains_b, riccati_tau, shoot_unstable, stable_curve,
                        stable_x_at)
from .model import (GlParams, UnfParams, classify_region, family_gl_params,
                    map_p)
from .ode import IntegratorConfig, integrate, trajectory_to_csv, unf_field
from .sweep import curve_to_csv, grid_to_csv, sweep_grid, trace_curve

_DEFAULTS = IntegratorConfig()


def _env_float(name):
    v = os.environ.get(name)
    return float(v) if v not in (None, "") else None


def _resolve_cfg(args) -> IntegratorConfig:
    rtol = args.rtol if args.rtol is not None else _env_float("UNF_RTOL")
    atol = args.atol if args.atol is not None else _env_float("UNF_ATOL")
    return IntegratorConfig(
        rtol=rtol if rtol is not None else _DEFAULTS.rtol,
        atol=atol if atol is not None else _DEFAULTS.atol,
        max_step=_DEFAULTS.max_step,
        t_max=args.t_max if args.t_max is not None else _DEFAULTS.t_max,
        escape_radius=(args.escape_radius if args.escape_radius is not None
                       else _DEFAULTS.escape_radius))


def _resolve_workers(args) -> int:
    if getattr(args, "workers", None) is not None:
        return args.workers
    v = os.environ.get("UNF_WORKERS")
    return int(v) if v not in (None, "") else 1


def _emit(args, payload: dict):
    payload = {"v": 1, **payload}
    if args.format == "csv":
        keys = sorted(payload)
        sys.stdout.write(",".join(keys) + "\n")
        sys.stdout.write(",".join(str(payload[k]) for k in keys) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _params_from(args) -> UnfParams:
    return UnfParams(args.lam, args.alpha, args.beta)


def _add_common(sp):
    sp.add_argument("--rtol", type=float, default=None,
                    help=f"relative tolerance (default {_DEFAULTS.rtol})")
    sp.add_argument("--atol", type=float, default=None,
                    help=f"absolute tolerance (default {_DEFAULTS.atol})")
    sp.add_argument("--t-max", type=float, default=None, dest="t_max",
                    help=f"integration horizon (default {_DEFAULTS.t_max})")
    sp.add_argument("--escape-radius", type=float, default=None,
                    dest="escape_radius",
                    help=f"divergence bound (default {_DEFAULTS.escape_radius})")
    sp.add_argument("--out", default=None, help="output file path")
    sp.add_argument("--format", choices=("json", "csv"), default="json",
                    help="stdout payload format (default json)")


def _add_unf_params(sp):
    sp.add_argument("--lambda", type=float, required=True, dest="lam",
                    help="damping coefficient")
    sp.add_argument("--alpha", type=float, required=True,
                    help="z relaxation rate")
    sp.add_argument("--beta", type=float, required=True,
                    help="quadratic forcing coefficient")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="unf",
        description="Normal-form toolkit for Lorenz/Chen-family systems")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("map-params",
                        help="map generalized-Lorenz parameters to the "
                             "normal form and classify the zone")
    sp.add_argument("--family", choices=("lorenz", "chen", "lu", "tigan"),
                    default=None)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument("--q", type=float, default=None)
    _add_common(sp)

    sp = sub.add_parser("integrate", help="integrate the normal form and "
                                          "export the trajectory as CSV")
    _add_unf_params(sp)
    sp.add_argument("--x0", type=float, default=1e-3)
    sp.add_argument("--y0", type=float, default=0.0)
    sp.add_argument("--z0", type=float, default=0.0)
    sp.add_argument("--t", type=float, default=100.0,
                    help="time span (negative runs reverse)")
    sp.add_argument("--n-samples", type=int, default=2000)
    _add_common(sp)

    sp = sub.add_parser("manifold", help="invariant-manifold objects")
    _add_unf_params(sp)
    sp.add_argument("--what", choices=("unstable", "curve", "ladder",
                                       "domains"), default="unstable")
    sp.add_argument("--delta", type=float, default=1e-6,
                    help="unstable-manifold seed offset")
    sp.add_argument("--eps", type=float, default=1e-6,
                    help="near-axis probe offset for the stable curve")
    sp.add_argument("--k-max", type=int, default=6)
    sp.add_argument("--z-lo", type=float, default=0.05)
    sp.add_argument("--z-hi", type=float, default=None)
    sp.add_argument("--n", type=int, default=24)
    _add_common(sp)

    sp = sub.add_parser("split", help="split function at the first hit of "
                                      "the unstable manifold")
    _add_unf_params(sp)
    _add_common(sp)

    sp = sub.add_parser("fate", help="fate of the unstable separatrix")
    _add_unf_params(sp)
    sp.add_argument("--follow-through", action="store_true")
    _add_common(sp)

    sp = sub.add_parser("find-homoclinic",
                        help="bisect a homoclinic bifurcation in lambda "
                             "(primary) or alpha (twisted, with --k)")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--lambda", type=float, default=None, dest="lam")
    sp.add_argument("--lambda-lo", type=float, default=None, dest="lam_lo")
    sp.add_argument("--lambda-hi", type=float, default=None, dest="lam_hi")
    sp.add_argument("--alpha-lo", type=float, default=None)
    sp.add_argument("--alpha-hi", type=float, default=None)
    sp.add_argument("--k", type=int, default=0,
                    help="twist index for alpha bisection")
    sp.add_argument("--tol", type=float, default=1e-6)
    _add_common(sp)

    sp = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    _add_unf_params(sp)
    sp.add_argument("--x0", type=float, default=None)
    sp.add_argument("--y0", type=float, default=None)
    sp.add_argument("--z0", type=float, default=None)
    sp.add_argument("--t-transient", type=float, default=200.0)
    sp.add_argument("--t-total", type=float, default=2000.0)
    sp.add_argument("--renorm-dt", type=float, default=1.0)
    sp.add_argument("--eps-zero", type=float, default=5e-3)
    _add_common(sp)

    sp = sub.add_parser("sweep", help="parameter-plane classification grid")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--alpha-lo", type=float, required=True)
    sp.add_argument("--alpha-hi", type=float, required=True)
    sp.add_argument("--lambda-lo", type=float, required=True, dest="lam_lo")
    sp.add_argument("--lambda-hi", type=float, required=True, dest="lam_hi")
    sp.add_argument("--n-alpha", type=int, default=40)
    sp.add_argument("--n-lambda", type=int, default=40)
    sp.add_argument("--t-transient", type=float, default=200.0)
    sp.add_argument("--t-total", type=float, default=2000.0)
    sp.add_argument("--renorm-dt", type=float, default=1.0)
    sp.add_argument("--workers", type=int, default=None,
                    help="parallel workers (default UNF_WORKERS or 1)")
    _add_common(sp)

    sp = sub.add_parser("trace", help="continue a homoclinic curve over alpha")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--alpha-lo", type=float, required=True)
    sp.add_argument("--alpha-hi", type=float, required=True)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--lambda-lo", type=float, default=None, dest="lam_lo",
                    help="initial bracket hint")
    sp.add_argument("--lambda-hi", type=float, default=None, dest="lam_hi")
    sp.add_argument("--tol", type=float, default=1e-6)
    _add_common(sp)

    sp = sub.add_parser("symbols", help="three-number symbolic encoding")
    _add_unf_params(sp)
    sp.add_argument("--n", type=int, default=100)
    _add_common(sp)

    return ap


def _cmd_map_params(args):
    if args.family:
        g = family_gl_params(args.family, args.a, args.b, c=args.c, r=args.r)
    else:
        if args.r is None or args.q is None:
            raise DomainError("need --family or explicit --r and --q")
        g = GlParams(args.a, args.b, args.r, args.q)
    p = map_p(g)
    label = classify_region(p, tol=1e-6)
    return {"lambda": p.lam, "alpha": p.alpha, "beta": p.beta, "A": p.A,
            "zone": label.zone, "on_chen_curve": label.on_chen_curve,
            "on_lu_curve": label.on_lu_curve}


def _cmd_integrate(args, cfg):
    p = _params_from(args)
    traj = integrate(unf_field(p), [args.x0, args.y0, args.z0],
                     (0.0, args.t), cfg, n_samples=args.n_samples)
    path = args.out or "trajectory.csv"
    trajectory_to_csv(traj, path)
    return {"written": path, "n_samples": len(traj.t),
            "final": list(map(float, traj.final()))}


def _cmd_manifold(args, cfg):
    p = _params_from(args)
    if args.what == "unstable":
        hit = shoot_unstable(p, args.delta, cfg)
        return {"x_u": hit.x_u, "z_u": hit.z_u, "theta": hit.theta,
                "theta_hz": hit.theta_hz, "t_flight": hit.t_flight}
    if args.what == "ladder":
        lad = riccati_tau(p, args.k_max, cfg)
        out = {"eta0": lad.eta0, "tau": list(map(float, lad.tau)),
               "zk": list(map(float, lad.zk)),
               "t_inf": lad.t_inf, "z_star": lad.z_star}
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write("k,tau,zk\n")
                for i, (t, z) in enumerate(zip(lad.tau, lad.zk), start=1):
                    fh.write(f"{i},{t:.17g},{z:.17g}\n")
            out["written"] = args.out
        return out
    if args.what == "domains":
        doms = domains_b(p, args.k_max, cfg)
        return {"domains": [{"k": d.k, "z_lo": d.z_lo, "z_hi": d.z_hi,
                             "half_turns": d.half_turns, "skirt": d.skirt}
                            for d in doms]}
    curve = stable_curve(p, eps=args.eps, z_range=(args.z_lo, args.z_hi),
                         n=args.n, cfg=cfg)
    path = args.out or "stable_curve.csv"
    with open(path, "w", newline="") as fh:
        fh.write("z,x\n")
        for z, x in curve.samples:
            fh.write(f"{z:.17g},{x:.17g}\n")
    return {"written": path,
            "zero_ladder": list(map(float, curve.zero_ladder)),
            "z_star": curve.z_star, "n_samples": len(curve.samples)}


def _cmd_split(args, cfg):
    sp = split_function(_params_from(args), cfg)
    return {"k": sp.k, "delta": sp.delta, "half_turns": sp.half_turns,
            "inside": sp.inside, "x_u": sp.x_u, "z_u": sp.z_u, "x_s": sp.x_s,
            "boundary_degenerate": sp.boundary_degenerate}


def _cmd_fate(args, cfg):
    label = classify_wu_fate(_params_from(args), cfg,
                             follow_through=args.follow_through)
    return {"kind": label.kind, "time": label.time,
            "state": list(map(float, label.state))}


def _cmd_find_homoclinic(args, cfg):
    if args.lam_lo is not None and args.lam_hi is not None:
        if args.alpha is None:
            raise DomainError("lambda bisection needs --alpha")
        bp = find_lambda0(args.alpha, args.beta, (args.lam_lo, args.lam_hi),
                          tol=args.tol, cfg=cfg)
    elif args.alpha_lo is not None and args.alpha_hi is not None:
        if args.lam is None:
            raise DomainError("alpha bisection needs --lambda")
        bp = find_alpha_k(args.lam, args.beta, args.k,
                          (args.alpha_lo, args.alpha_hi), tol=args.tol,
                          cfg=cfg)
    else:
        raise DomainError("provide --lambda-lo/--lambda-hi or "
                          "--alpha-lo/--alpha-hi")
    return {"lambda": bp.params.lam, "alpha": bp.params.alpha,
            "beta": bp.params.beta, "k": bp.k, "orientation": bp.orientation,
            "residual": bp.residual, "half_turns": bp.half_turns}


def _cmd_lyapunov(args, cfg):
    p = _params_from(args)
    s0 = None
    if args.x0 is not None:
        s0 = [args.x0, args.y0 or 0.0, args.z0 or 0.0]
    res = largest_lyapunov(p, s0=s0, cfg=cfg, t_transient=args.t_transient,
                           t_total=args.t_total, renorm_dt=args.renorm_dt)
    return {"Lambda": res.Lambda, "t_used": res.t_used,
            "converged": res.converged, "uncertainty": res.uncertainty,
            "class": classify_attractor(res, args.eps_zero)}


def _cmd_sweep(args, cfg):
    workers = _resolve_workers(args)
    grid = sweep_grid(args.beta, (args.alpha_lo, args.alpha_hi),
                      (args.lam_lo, args.lam_hi), args.n_alpha,
                      args.n_lambda, workers=workers, cfg=cfg,
                      t_transient=args.t_transient, t_total=args.t_total,
                      renorm_dt=args.renorm_dt)
    path = args.out or "sweep.csv"
    overlay = os.path.splitext(path)[0] + "_overlay.csv"
    grid_to_csv(grid, path, overlay_path=overlay)
    counts = {c: int(np.sum(grid.classes == c)) for c in "CPEDX"}
    return {"written": path, "overlay": overlay, "cells": counts,
            "workers": workers}


def _cmd_trace(args, cfg):
    hint = None
    if args.lam_lo is not None and args.lam_hi is not None:
        hint = (args.lam_lo, args.lam_hi)
    trace = trace_curve(args.beta, args.k, (args.alpha_lo, args.alpha_hi),
                        args.n, cfg=cfg, lambda_hint=hint, tol=args.tol)
    path = args.out or "curve.csv"
    curve_to_csv(trace, path)
    return {"written": path, "n_points": len(trace.points),
            "gaps": trace.gaps}


def _cmd_symbols(args, cfg):
    syms = symbolic_sequence(_params_from(args), n_symbols=args.n, cfg=cfg)
    path = args.out or "symbols.csv"
    symbols_to_csv(syms, path)
    twists = [s.half_turns for s in syms]
    return {"written": path, "n": len(syms), "max_half_turns": max(twists),
            "twisted": int(sum(1 for h in twists if h >= 1))}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "map-params":
            payload = _cmd_map_params(args)
        else:
            cfg = _resolve_cfg(args)
            handler = {
                "integrate": _cmd_integrate,
                "manifold": _cmd_manifold,
                "split": _cmd_split,
                "fate": _cmd_fate,
                "find-homoclinic": _cmd_find_homoclinic,
                "lyapunov": _cmd_lyapunov,
                "sweep": _cmd_sweep,
                "trace": _cmd_trace,
                "symbols": _cmd_symbols,
            }[args.cmd]
            payload = handler(args, cfg)
    except DomainError as e:
        sys.stderr.write(f"error: {e.__class__.__name__}: {e}\n")
        return 2
    except (NumericalError, UnfError) as e:
        sys.stderr.write(f"error: {e.__class__.__name__}: {e}\n")
        return 3
    _emit(args, payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())

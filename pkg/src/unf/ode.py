"""Adaptive integration with dense output and Poincare-section events.

Registered fields (the normal form, the generalized Lorenz system, their
tangent-augmented variants and the auxiliary scalar/planar systems) run in
the compiled Dormand-Prince core.  Arbitrary Python callables fall back to
scipy's RK45, which uses the same method family; both paths honour the same
config and event semantics.

The section S is the half-plane pair {y = 0, z > 0}; crossings with z <= 0
are skipped, and crossing states are refined on the dense interpolant until
|y| <= 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from . import _kernels as _k
from .errors import Escaped, EventNotFound, StepSizeUnderflow
from .model import GlParams, UnfParams

__all__ = [
    "IntegratorConfig",
    "FieldHandle",
    "Trajectory",
    "SectionCrossing",
    "unf_field",
    "gl_field",
    "integrate",
    "integrate_to_section",
    "trajectory_to_csv",
]

_EVENT_YTOL = 1e-10


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards shared by every integration in the toolkit."""

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = 0.2
    t_max: float = 1000.0
    escape_radius: float = 50.0

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.escape_radius <= 0:
            raise ValueError("escape_radius must be positive")

    def with_(self, **kw) -> "IntegratorConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class FieldHandle:
    """A registered compiled right-hand side."""

    fid: int
    params: tuple
    dim: int
    name: str

    def __call__(self, t, y):
        out = np.zeros(self.dim)
        _k._rhs(self.fid, t, np.asarray(y, dtype=float), np.asarray(self.params), out)
        return out


def unf_field(p: UnfParams, tangent: bool = False) -> FieldHandle:
    fid = _k.FID_UNF_TAN if tangent else _k.FID_UNF
    return FieldHandle(fid, p.as_tuple(), _k.FIELD_DIM[fid], "unf")


def gl_field(g: GlParams, tangent: bool = False) -> FieldHandle:
    fid = _k.FID_GL_TAN if tangent else _k.FID_GL
    return FieldHandle(fid, g.as_tuple(), _k.FIELD_DIM[fid], "gl")


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), dim)
    status: str = "ok"

    def final(self):
        return self.y[-1]


@dataclass(frozen=True)
class SectionCrossing:
    state: np.ndarray
    time: float
    side: int  # +1 if x > 0 else -1
    theta: float  # accumulated planar angle of (x, y) since the start
    theta_hz: float = 0.0  # portion accumulated while z > threshold
    direction: int = 0  # -1: y decreasing, +1: y increasing
    zdot: float = 0.0


_STATUS_NAMES = {
    _k.OK: "ok", _k.EVENT: "event", _k.ESCAPED: "escaped",
    _k.UNDERFLOW: "underflow", _k.CONV_EP: "conv_ep", _k.CONV_EM: "conv_em",
    _k.BUF_FULL: "buffer_full", _k.BALL_EXIT: "ball_exit",
    _k.COMMITTED: "committed",
}

_NO_SAMPLES = np.empty(0)
_NO_YSAMPLES = np.empty((0, 1))
_NO_W = np.zeros(1)
_NO_EVBUF = np.empty((0, 9))


def _drive_field(fh: FieldHandle, y0, t0, t1, cfg: IntegratorConfig, *,
                 ev_active=0, ev_w=None, ev_dir=0, ev_zpos=0, ev_side=0,
                 ev_gtol=_EVENT_YTOL, ev_terminal=0, max_ev=0,
                 commit_active=0, commit_zc=1.0, commit_xmin=0.0,
                 theta_active=None, hz_thresh=math.inf,
                 ball_active=0, ball_rin=0.05, ball_rout=0.2,
                 conv_active=0, conv_xe=0.0, conv_ze=0.0, conv_tol=1e-6,
                 ts_sample=None, escape=None):
    """Low-level wrapper over the compiled driver.  Internal."""
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (fh.dim,):
        raise ValueError(f"state must have shape ({fh.dim},)")
    if theta_active is None:
        theta_active = 1 if fh.dim >= 2 else 0
    if ev_w is None:
        ev_w = np.zeros(fh.dim)
        if fh.dim >= 2:
            ev_w[1] = 1.0
    ev_buf = np.empty((max_ev, 9)) if max_ev > 0 else _NO_EVBUF
    if ts_sample is None:
        ts_sample = _NO_SAMPLES
    ys_sample = (np.empty((len(ts_sample), fh.dim)) if len(ts_sample)
                 else _NO_YSAMPLES)
    esc = cfg.escape_radius if escape is None else escape
    status, t_end, y_end, theta, theta_hz, n_ev, z_max, t_zmax = _k._drive(
        fh.fid, np.asarray(fh.params, dtype=float), y0, float(t0), float(t1),
        cfg.rtol, cfg.atol, cfg.max_step, esc,
        ev_active, np.asarray(ev_w, dtype=float), ev_dir, ev_zpos, ev_side,
        ev_gtol, ev_terminal, ev_buf, max_ev,
        commit_active, commit_zc, commit_xmin,
        theta_active, hz_thresh,
        ball_active, ball_rin, ball_rout,
        conv_active, conv_xe, conv_ze, conv_tol,
        np.asarray(ts_sample, dtype=float), ys_sample)
    return {
        "status": _STATUS_NAMES[status],
        "t": t_end, "y": y_end, "theta": theta, "theta_hz": theta_hz,
        "events": ev_buf[:n_ev], "z_max": z_max, "t_zmax": t_zmax,
        "samples": ys_sample,
    }


def integrate(fld, s0, t_span, cfg: IntegratorConfig | None = None,
              n_samples: int = 0) -> Trajectory:
    """Integrate `fld` from s0 over t_span = (t0, t1); t1 < t0 runs reverse.

    Raises Escaped when the state norm exceeds cfg.escape_radius and
    StepSizeUnderflow when the controller stalls.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    s0 = np.asarray(s0, dtype=float)
    ts = np.linspace(t0, t1, max(n_samples, 2))
    if isinstance(fld, FieldHandle):
        res = _drive_field(fld, s0, t0, t1, cfg, ts_sample=ts)
        if res["status"] == "escaped":
            raise Escaped(res["y"], res["t"])
        if res["status"] == "underflow":
            raise StepSizeUnderflow(f"step underflow at t={res['t']:.6g}")
        ys = res["samples"]
        ys[-1] = res["y"]
        ys[0] = s0
        return Trajectory(t=ts, y=ys)
    return _integrate_callable(fld, s0, t0, t1, cfg, ts)


def _integrate_callable(fld: Callable, s0, t0, t1, cfg, ts) -> Trajectory:
    from scipy.integrate import solve_ivp

    esc = cfg.escape_radius

    def hit_escape(t, y):
        return esc - float(np.linalg.norm(y[: min(len(y), 3)]))

    hit_escape.terminal = True
    hit_escape.direction = -1
    sol = solve_ivp(fld, (t0, t1), s0, method="RK45", rtol=cfg.rtol,
                    atol=cfg.atol, max_step=cfg.max_step, t_eval=ts,
                    events=hit_escape, dense_output=False)
    if sol.status == 1:  # escape event
        raise Escaped(sol.y_events[0][0], sol.t_events[0][0])
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    return Trajectory(t=sol.t, y=sol.y.T)


def integrate_to_section(fld, s0,
                         direction: Literal["down", "up", "any"] = "any",
                         cfg: IntegratorConfig | None = None,
                         reverse: bool = False,
                         hz_thresh: float = math.inf) -> SectionCrossing:
    """First crossing of S = {y = 0, z > 0} in the requested y-direction.

    `down` means y decreasing through 0, `up` increasing.  The crossing is
    refined on the dense interpolant to |y| <= 1e-10.  theta is the
    continuously unwrapped planar angle of (x, y) accumulated from s0.
    """
    cfg = cfg or IntegratorConfig()
    s0 = np.asarray(s0, dtype=float)
    if abs(s0[1]) <= _EVENT_YTOL:
        raise ValueError("initial state lies on the section")
    t1 = -cfg.t_max if reverse else cfg.t_max
    dirmap = {"down": -1, "up": 1, "any": 0}
    ev_dir = dirmap[direction]
    if reverse and ev_dir != 0:
        ev_dir = -ev_dir  # y-direction is stated in forward time
    if isinstance(fld, FieldHandle):
        res = _drive_field(fld, s0, 0.0, t1, cfg, ev_active=1, ev_dir=ev_dir,
                           ev_zpos=1, ev_terminal=1, max_ev=4,
                           hz_thresh=hz_thresh)
        if res["status"] == "escaped":
            raise Escaped(res["y"], res["t"])
        if res["status"] == "underflow":
            raise StepSizeUnderflow(f"step underflow at t={res['t']:.6g}")
        if res["status"] != "event":
            raise EventNotFound(
                f"no section crossing before t={t1:.6g}")
        st = res["y"]
        return SectionCrossing(
            state=st, time=res["t"], side=1 if st[0] > 0 else -1,
            theta=res["theta"], theta_hz=res["theta_hz"],
            direction=int(res["events"][-1, 6]) if len(res["events"]) else 0,
            zdot=float(res["events"][-1, 7]) if len(res["events"]) else 0.0)
    return _section_callable(fld, s0, ev_dir, t1, cfg)


def _section_callable(fld, s0, ev_dir, t1, cfg) -> SectionCrossing:
    from scipy.integrate import solve_ivp

    def sec(t, y):
        return y[1]

    sec.terminal = True
    sec.direction = ev_dir * (1 if t1 >= 0 else -1)

    def hit_escape(t, y):
        return cfg.escape_radius - float(np.linalg.norm(y[:3]))

    hit_escape.terminal = True
    hit_escape.direction = -1

    t0 = 0.0
    s = s0.copy()
    theta = 0.0
    for _ in range(64):  # retry across skipped z <= 0 crossings
        sol = solve_ivp(fld, (t0, t1), s, method="RK45", rtol=cfg.rtol,
                        atol=cfg.atol, max_step=cfg.max_step,
                        events=(sec, hit_escape), dense_output=True)
        # accumulate theta along this leg
        ts = np.linspace(t0, sol.t[-1], max(8, int(abs(sol.t[-1] - t0) / 0.05)))
        ys = sol.sol(ts)
        ang = np.unwrap(np.arctan2(ys[1], ys[0]))
        theta += ang[-1] - ang[0]
        if sol.t_events[1].size:
            raise Escaped(sol.y_events[1][0], sol.t_events[1][0])
        if not sol.t_events[0].size:
            raise EventNotFound(f"no section crossing before t={t1:.6g}")
        te, ye = sol.t_events[0][0], sol.y_events[0][0]
        if ye[2] > 0.0:
            dy = fld(te, ye)
            return SectionCrossing(
                state=ye, time=te, side=1 if ye[0] > 0 else -1, theta=theta,
                direction=int(math.copysign(1, dy[1])), zdot=float(dy[2]))
        # z <= 0 crossing: step past and continue
        t0 = te + math.copysign(1e-9, t1 - te)
        s = ye + 1e-9 * np.asarray(fld(te, ye))
    raise EventNotFound("no admissible section crossing found")


def trajectory_to_csv(traj: Trajectory, path):
    """Write t,x,y,z columns (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        fh.write("t,x,y,z\n")
        for ti, yi in zip(traj.t, traj.y):
            cols = [ti] + [yi[i] if i < len(yi) else 0.0 for i in range(3)]
            fh.write(",".join(f"{v:.17g}" for v in cols) + "\n")

"""Homoclinic-orbit detection for the saddle at the origin.

The split function measures the signed gap between the first section hit
p_u of the unstable manifold and the stable manifold's trace at the same
height; its zeros are principal homoclinic bifurcations.  Root location
works on the side decision of the continued separatrix (the sign of its
first amplitude-growing section crossing), which flips exactly when the
connection is crossed; the winding count of the located orbit is the
number of focus-region crossings swallowed before that decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (BracketNotSignChanging, EventNotFound, Escaped,
                     FateInterference, NoConvergence, TwistMismatch)
from .manifolds import (COMMIT_X_FLOOR, _bisect_fate_flip, domain_index,
                        riccati_tau, section_fate, shoot_unstable, wu_seed)
from .model import UnfParams, equilibria
from .ode import IntegratorConfig, _drive_field, unf_field

__all__ = [
    "SplitResult",
    "BifurcationPoint",
    "FateLabel",
    "split_function",
    "classify_wu_fate",
    "find_lambda0",
    "find_alpha_k",
    "scan_alpha_roots",
    "winding_half_turns",
    "symbolic_sequence",
    "Symbol",
]


@dataclass(frozen=True)
class FateLabel:
    kind: Literal["SectionHit", "ConvergedToFocusPlus",
                  "ConvergedToFocusMinus", "Diverged", "Undecided"]
    time: float = math.nan
    state: tuple = ()

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class SplitResult:
    """Signed split at the first section hit of the unstable manifold.

    k is the ladder-domain index of z_u (near-axis bookkeeping); half_turns
    is the winding actually performed by the continued orbit, which is the
    twist index of a nearby principal homoclinic orbit.  inside <=> delta < 0
    on the x > 0 branch."""

    k: int
    delta: float
    half_turns: int
    inside: bool
    x_u: float
    z_u: float
    x_s: float
    boundary_degenerate: bool = False


@dataclass(frozen=True)
class BifurcationPoint:
    params: UnfParams
    k: int
    orientation: Literal["Oriented", "NonOriented"]
    residual: float
    half_turns: int

    def __post_init__(self):
        expected = "Oriented" if self.k % 2 == 0 else "NonOriented"
        if self.orientation != expected:
            raise ValueError("orientation does not match index parity")


def _hz(p: UnfParams) -> float:
    return 1.0 + 0.25 * p.lam * p.lam


def _wu_commit(p: UnfParams, cfg: IntegratorConfig, side: int = 1,
               delta: float = 1e-6):
    """Shoot the unstable branch to its first section hit, then follow the
    hit to its excursion-side decision.

    Returns dict with the hit coordinates (branch-local, x_u > 0), the
    decision side mapped onto the x > 0 frame (0 = escaped/undecided) and
    the winding tick count between hit and decision.
    """
    out = {"status": "", "t": 0.0, "y": np.zeros(3), "hit": None,
           "side": 0, "ticks": 0}
    try:
        hit = shoot_unstable(p, delta, cfg, side)
    except Escaped as e:
        out["status"] = "escaped"
        out["t"], out["y"] = e.time, np.asarray(e.state)
        return out
    except (EventNotFound, NoConvergence):
        out["status"] = "no_hit"
        return out
    x_local = side * hit.x_u  # involution maps the x < 0 branch onto x > 0
    out["hit"] = (x_local, hit.z_u)
    s, m, res = section_fate(p, x_local, hit.z_u, cfg, full=True)
    if s != 0:
        out["status"] = "decided"
    else:
        out["status"] = "escaped" if res["status"] == "escaped" \
            else "undecided"
        out["t"], out["y"] = res["t"], res["y"]
    out["side"] = s
    out["ticks"] = m
    return out


def classify_wu_fate(p: UnfParams, cfg: IntegratorConfig | None = None,
                     follow_through: bool = False,
                     side: int = 1, delta: float = 1e-6) -> FateLabel:
    """Fate of the unstable branch: first section hit (default) or, with
    follow_through, its asymptotic destination across section hits."""
    cfg = cfg or IntegratorConfig(t_max=2000.0)
    fh = unf_field(p)
    seed = wu_seed(p, delta, side)
    conv_xe = conv_ze = 0.0
    conv_active = 0
    try:
        _, ep, _ = equilibria(p)
        conv_xe, conv_ze = float(ep[0]), float(ep[2])
        conv_active = 1
    except Exception:
        pass
    res = _drive_field(fh, seed, 0.0, cfg.t_max, cfg,
                       ev_active=0 if follow_through else 1,
                       ev_dir=-side, ev_zpos=1, ev_side=side,
                       ev_terminal=0 if follow_through else 1, max_ev=4,
                       conv_active=conv_active, conv_xe=conv_xe,
                       conv_ze=conv_ze, conv_tol=1e-6, hz_thresh=_hz(p))
    st = res["status"]
    t, y = float(res["t"]), tuple(res["y"][:3])
    if st == "event":
        return FateLabel("SectionHit", t, y)
    if st == "conv_ep":
        return FateLabel("ConvergedToFocusPlus", t, y)
    if st == "conv_em":
        return FateLabel("ConvergedToFocusMinus", t, y)
    if st == "escaped":
        return FateLabel("Diverged", t, y)
    return FateLabel("Undecided", t, y)


def split_function(p: UnfParams, cfg: IntegratorConfig | None = None,
                   side: int = 1, k_cap: int = 64,
                   xtol: float = 1e-9) -> SplitResult:
    """Split value at the first section hit of the unstable manifold.

    Raises FateInterference when the branch diverges (no hit, or no side
    decision after the hit): the split is undefined across heteroclinic
    interference.
    """
    cfg = cfg or IntegratorConfig()
    r = _wu_commit(p, cfg, side)
    if r["hit"] is None or r["side"] == 0:
        label = FateLabel("Diverged" if r["status"] == "escaped"
                          else "Undecided", float(r["t"]), tuple(r["y"][:3]))
        raise FateInterference(label)
    x_u, z_u = float(r["hit"][0]), float(r["hit"][1])
    s = r["side"]
    m = r["ticks"]

    # ladder domain of the hit height
    k_max = 8
    ladder = riccati_tau(p, k_max, cfg)
    while ladder.zk[-1] <= z_u and k_max < k_cap:
        k_max = min(2 * k_max, k_cap)
        ladder = riccati_tau(p, k_max, cfg)
    k_dom = domain_index(ladder, z_u)
    degen = bool(np.any(np.abs(ladder.zk - z_u) <= 1e-9 * (1.0 + z_u)))

    inside = (s == (1 if m % 2 == 0 else -1))
    x_s = _sheet_near(p, x_u, z_u, s, inside, cfg, xtol)
    delta = x_u - x_s
    return SplitResult(k=k_dom, delta=float(delta), half_turns=m,
                       inside=bool(inside), x_u=x_u, z_u=z_u, x_s=float(x_s),
                       boundary_degenerate=degen)


def _sheet_near(p, x_u, z_u, s, inside, cfg, xtol):
    """Stable-manifold sheet location adjacent to x_u at height z_u.

    Scans away from x_u on the side indicated by the inside flag (the sheet
    lies above x_u when inside, below when outside) until the fate flips,
    then bisects."""
    fracs = (0.004, 0.01, 0.02, 0.04, 0.08, 0.15, 0.3, 0.5, 0.8, 1.2, 1.8,
             2.6)
    lo, hi = None, None
    for f in fracs:
        xq = x_u * (1.0 + f) if inside else x_u * (1.0 - f)
        if xq <= 0 or xq > 2.6:
            break
        fq, _ = section_fate(p, xq, z_u, cfg)
        if fq == 0:
            continue
        if fq != s:
            if inside:
                lo, hi, f_lo, f_hi = x_u, xq, s, fq
            else:
                lo, hi, f_lo, f_hi = xq, x_u, fq, s
            break
    if lo is None:
        raise NoConvergence(
            f"no adjacent stable-manifold sheet near x={x_u:.6g}, z={z_u:.6g}")
    return _bisect_fate_flip(p, z_u, lo, hi, f_lo, f_hi, cfg, xtol)


def _commit_side(p: UnfParams, cfg: IntegratorConfig, side: int = 1):
    """Raw side decision of the continued branch, mapped to the x > 0 frame.

    This is the bisection observable: it flips exactly when a connection is
    crossed, whereas winding-tick counts can change away from roots.  Returns
    (side or None, ticks, fate label when undecidable)."""
    r = _wu_commit(p, cfg, side)
    if r["hit"] is None or r["side"] == 0:
        label = FateLabel("Diverged" if r["status"] == "escaped"
                          else "Undecided", float(r["t"]), tuple(r["y"][:3]))
        return None, r["ticks"], label
    return r["side"], r["ticks"], None


def _bisect_param(eval_sign, lo, hi, tol):
    """Plain bisection on a +-1-valued parameter function.

    eval_sign returns (sign, meta); sign None raises FateInterference with
    the offending sub-bracket."""
    s_lo, m_lo, lab = eval_sign(lo)
    if s_lo is None:
        raise FateInterference(lab, bracket=(lo, hi))
    s_hi, m_hi, lab = eval_sign(hi)
    if s_hi is None:
        raise FateInterference(lab, bracket=(lo, hi))
    if s_lo == s_hi:
        raise BracketNotSignChanging(
            f"side decision is {s_lo} at both ends of ({lo}, {hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        s_m, m_m, lab = eval_sign(mid)
        if s_m is None:
            raise FateInterference(lab, bracket=(lo, hi))
        if s_m == s_lo:
            lo, m_lo = mid, m_m
        else:
            hi, m_hi = mid, m_m
    return 0.5 * (lo + hi), m_lo, m_hi


def find_lambda0(alpha: float, beta: float, bracket=(0.3, 2.0),
                 tol: float = 1e-6,
                 cfg: IntegratorConfig | None = None) -> BifurcationPoint:
    """Damping value of the primary (untwisted) symmetric homoclinic pair.

    Bisects the side decision over lam in `bracket`; the located orbit must
    carry zero winding."""
    cfg = cfg or IntegratorConfig()

    def f(lam):
        return _commit_side(UnfParams(lam, alpha, beta), cfg)

    root, m_lo, m_hi = _bisect_param(f, float(bracket[0]), float(bracket[1]),
                                     tol)
    half = min(m_lo, m_hi)
    if half != 0:
        raise TwistMismatch(half, 0, UnfParams(root, alpha, beta))
    sp = split_function(UnfParams(root, alpha, beta), cfg)
    return BifurcationPoint(params=UnfParams(root, alpha, beta), k=0,
                            orientation="Oriented",
                            residual=abs(sp.delta), half_turns=half)


def find_alpha_k(lam: float, beta: float, k: int, bracket,
                 tol: float = 1e-6,
                 cfg: IntegratorConfig | None = None) -> BifurcationPoint:
    """Relaxation-rate value of a twisted homoclinic pair with k half-turns.

    Bisects the split sign over alpha in `bracket` and verifies that the
    located orbit's winding equals k (TwistMismatch otherwise)."""
    cfg = cfg or IntegratorConfig()

    def f(al):
        return _commit_side(UnfParams(lam, al, beta), cfg)

    root, m_lo, m_hi = _bisect_param(f, float(bracket[0]), float(bracket[1]),
                                     tol)
    half = min(m_lo, m_hi)
    if half != k:
        raise TwistMismatch(half, k, UnfParams(lam, root, beta))
    sp = split_function(UnfParams(lam, root, beta), cfg)
    orient = "Oriented" if k % 2 == 0 else "NonOriented"
    return BifurcationPoint(params=UnfParams(lam, root, beta), k=k,
                            orientation=orient, residual=abs(sp.delta),
                            half_turns=half)


def locate_twisted_root(lam: float, beta: float, bracket,
                        tol: float = 1e-6,
                        cfg: IntegratorConfig | None = None) -> BifurcationPoint:
    """Bisect the side flip inside `bracket` and report the located
    connection with whatever twist it carries (discovery variant of
    find_alpha_k)."""
    cfg = cfg or IntegratorConfig()

    def f(al):
        return _commit_side(UnfParams(lam, al, beta), cfg)

    root, m_lo, m_hi = _bisect_param(f, float(bracket[0]), float(bracket[1]),
                                     tol)
    half = min(m_lo, m_hi)
    sp = split_function(UnfParams(lam, root, beta), cfg)
    orient = "Oriented" if half % 2 == 0 else "NonOriented"
    return BifurcationPoint(params=UnfParams(lam, root, beta), k=half,
                            orientation=orient, residual=abs(sp.delta),
                            half_turns=half)


def scan_alpha_roots(lam: float, beta: float, alpha_range, n: int,
                     cfg: IntegratorConfig | None = None):
    """Scan the side decision over an alpha grid; returns candidate brackets
    [(a_lo, a_hi, ticks_lo, ticks_hi), ...] where the side flips."""
    cfg = cfg or IntegratorConfig()
    alphas = np.linspace(alpha_range[0], alpha_range[1], n)
    out = []
    prev = None
    for a in alphas:
        s, m, _ = _commit_side(UnfParams(lam, a, beta), cfg)
        if s is not None and prev is not None and s != prev[1]:
            out.append((prev[0], float(a), prev[2], m))
        if s is not None:
            prev = (float(a), s, m)
    return out


def winding_half_turns(theta_total: float) -> int:
    """Number of half-turns in an unwrapped focus-region angle."""
    if not math.isfinite(theta_total):
        raise ValueError("theta_total must be finite")
    return int(math.floor(abs(theta_total) / math.pi))


@dataclass(frozen=True)
class Symbol:
    side: Literal["L", "R"]
    half_turns: int


def symbolic_sequence(p: UnfParams, s0=None, n_symbols: int = 100,
                      cfg: IntegratorConfig | None = None) -> list[Symbol]:
    """Three-number encoding of a trajectory: excursion side plus the
    winding performed around the axis while entering it.

    Section crossings without an interleaved dip below the focus threshold
    are winding ticks; crossings preceded by such a dip are excursion
    returns, and maximal same-side groups of those collapse into one symbol
    carrying the ticks accumulated since the previous group."""
    cfg = cfg or IntegratorConfig(t_max=20000.0)
    if s0 is None:
        s0 = wu_seed(p)
    fh = unf_field(p)
    zc = _hz(p)
    max_ev = max(64, 24 * n_symbols)
    res = _drive_field(fh, np.asarray(s0, dtype=float), 0.0, cfg.t_max, cfg,
                       ev_active=1, ev_dir=0, ev_zpos=0, ev_terminal=0,
                       max_ev=max_ev, hz_thresh=zc)
    if res["status"] == "escaped":
        raise FateInterference(FateLabel("Diverged", float(res["t"]),
                                         tuple(res["y"][:3])))
    ev = res["events"]
    symbols: list[Symbol] = []
    ticks = 0
    cur_side = 0
    cur_ticks = 0
    for row in ev:
        committed = row[8] < zc and abs(row[1]) > COMMIT_X_FLOOR
        if not committed:
            ticks += 1
            continue
        side = 1 if row[1] > 0 else -1
        if side != cur_side:
            if cur_side != 0:
                symbols.append(Symbol("R" if cur_side > 0 else "L",
                                      cur_ticks))
                if len(symbols) >= n_symbols:
                    return symbols
            cur_side = side
            cur_ticks = ticks
        ticks = 0
    if cur_side != 0 and len(symbols) < n_symbols:
        symbols.append(Symbol("R" if cur_side > 0 else "L", cur_ticks))
    if len(symbols) < n_symbols:
        raise EventNotFound(
            f"collected {len(symbols)} of {n_symbols} symbols before the "
            f"horizon; raise t_max or the event buffer")
    return symbols


def symbols_to_csv(symbols: list[Symbol], path):
    with open(path, "w", newline="") as fh:
        fh.write("index,side,half_turns\n")
        for i, s in enumerate(symbols):
            fh.write(f"{i},{s.side},{s.half_turns}\n")

"""Invariant-manifold computations for the saddle at the origin.

The 1D unstable manifold is grown by shooting from its local quadratic seed
to the first section crossing.  The 2D stable manifold is handled through
two independent routes that cross-validate each other:

* the transverse linearization along the invariant z-axis, reduced to a
  Riccati equation whose rotation roots tau_k give the heights z_k where
  the first-intersection curve of the stable manifold pinches onto the
  axis (`riccati_tau`), and
* direct forward shooting from section points, classifying which side of
  the stable manifold a point lies on by the side of its first
  amplitude-growing section crossing (`stable_x_at`, `stable_curve`).

The second route never touches the Riccati machinery, so agreement of its
zero ladder with z_k is a genuine two-route check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import (Escaped, EventNotFound, ConvergedToFocus, InvalidDomain,
                     LadderTruncated, NoConvergence, OutOfRange)
from .model import UnfParams, equilibria, saddle_spectrum
from .ode import FieldHandle, IntegratorConfig, _drive_field, unf_field

__all__ = [
    "UnstableHit",
    "StableCurve",
    "RiccatiLadder",
    "DomainB",
    "wu_seed",
    "shoot_unstable",
    "section_fate",
    "stable_x_at",
    "stable_curve",
    "riccati_tau",
    "domains_b",
    "aux_separatrix_x0",
    "absorbing_layer",
    "small_alpha_zu",
    "turning_point_check",
]

# a section crossing decides an excursion side when the orbit dipped below
# the focus threshold 1 + lam^2/4 since the previous crossing; the floor
# guards the sign against roundoff exactly on the connection
COMMIT_X_FLOOR = 1e-9


@dataclass(frozen=True)
class UnstableHit:
    """First intersection of the unstable manifold with S+ (or S- for the
    mirrored branch)."""

    x_u: float
    z_u: float
    theta: float
    theta_hz: float
    t_flight: float
    side: int = 1


@dataclass(frozen=True)
class RiccatiLadder:
    """Rotation roots of the tangent stable manifold along the axis.

    tau is strictly increasing with shrinking gaps; zk are the pinch
    heights (1 + lam^2/4) * exp(alpha * tau_k).  t_inf / z_star hold the
    extrapolated accumulation values when the gap ratios indicate geometric
    convergence and +inf otherwise (the gaps decay harmonically, ~2/(alpha k),
    so the ladder is unbounded for this family; the fields are kept for
    diagnostic use)."""

    eta0: float
    tau: np.ndarray
    zk: np.ndarray
    t_inf: float
    z_star: float


@dataclass(frozen=True)
class DomainB:
    """Section domain between consecutive pinch heights; half_turns is the
    winding count of descents entering through it near the axis."""

    k: int
    z_lo: float
    z_hi: float
    half_turns: int
    skirt: bool = False


@dataclass(frozen=True)
class StableCurve:
    """Sampled first-intersection curve x = x_s(z) of the stable manifold
    with the half-plane x > 0 (signed: the sign alternates across pinches),
    plus the refined pinch heights."""

    samples: list  # (z, signed x_s)
    zero_ladder: np.ndarray
    z_star: float


def wu_seed(p: UnfParams, delta: float = 1e-6, side: int = 1) -> np.ndarray:
    """Local seed on the unstable manifold: y = e1 x, z = beta x^2/(alpha+2 e1)."""
    if not (0.0 < delta <= 1e-5):
        raise InvalidDomain("delta must be in (0, 1e-5]")
    e1 = saddle_spectrum(p).e1
    x = side * delta
    return np.array([x, e1 * x, p.beta * delta * delta / (p.alpha + 2.0 * e1)])


def _hz(p: UnfParams) -> float:
    return 1.0 + 0.25 * p.lam * p.lam


def shoot_unstable(p: UnfParams, delta: float = 1e-6,
                   cfg: IntegratorConfig | None = None,
                   side: int = 1) -> UnstableHit:
    """First crossing of the unstable manifold with S+ (y decreasing, x > 0).

    Raises Escaped in the globally unstable regime and ConvergedToFocus if
    the branch spirals into a focus without crossing (reported separately
    from a plain missing event).
    """
    cfg = cfg or IntegratorConfig(t_max=400.0)
    fh = unf_field(p)
    seed = wu_seed(p, delta, side)
    res = _drive_field(fh, seed, 0.0, cfg.t_max, cfg, ev_active=1,
                       ev_dir=-side, ev_zpos=1, ev_side=side, ev_terminal=1,
                       max_ev=4, hz_thresh=_hz(p))
    if res["status"] == "escaped":
        raise Escaped(res["y"], res["t"])
    if res["status"] != "event":
        try:
            _, ep, em = equilibria(p)
            target = ep if side > 0 else em
            if np.linalg.norm(res["y"] - target) < 1e-6:
                raise ConvergedToFocus(side, res["y"], res["t"])
        except InvalidDomain:
            pass
        raise EventNotFound(f"no S crossing before t={cfg.t_max:.6g}")
    st = res["y"]
    return UnstableHit(x_u=float(st[0]), z_u=float(st[2]),
                       theta=float(res["theta"]),
                       theta_hz=float(res["theta_hz"]),
                       t_flight=float(res["t"]), side=side)


# ----------------------------------------------------------------------
# stable-manifold side classification by forward shooting


def section_fate(p: UnfParams, x: float, z: float,
                 cfg: IntegratorConfig | None = None, full: bool = False):
    """Side decision for the forward orbit of the section point (x, 0, z).

    Follows the orbit through its near-axis winding until the first
    crossing preceded by a dip below the focus threshold (an excursion
    return), or until it settles onto one of the foci.  Returns
    (side, ticks): side = sign of x at the decision, ticks = number of
    winding crossings seen before it.  side = 0 when the orbit escapes or
    the horizon runs out (fate undecidable).  With full=True the raw drive
    result is appended: (side, ticks, res).
    """
    cfg = cfg or IntegratorConfig()
    fh = unf_field(p)
    conv_xe = conv_ze = 0.0
    conv_active = 0
    if p.alpha + p.beta > 0:
        s_ab = p.alpha + p.beta
        conv_xe = math.sqrt(p.alpha / s_ab)
        conv_ze = p.beta / s_ab
        conv_active = 1
    zc = _hz(p)
    res = _drive_field(fh, np.array([x, 0.0, z]), 0.0, cfg.t_max, cfg,
                       ev_active=1, ev_dir=0, ev_zpos=0, ev_terminal=0,
                       max_ev=4096, commit_active=1,
                       commit_zc=zc, commit_xmin=COMMIT_X_FLOOR,
                       conv_active=conv_active, conv_xe=conv_xe,
                       conv_ze=conv_ze, conv_tol=1e-6,
                       hz_thresh=zc)
    ev = res["events"]
    if res["status"] == "committed":
        side = 1 if res["y"][0] > 0 else -1
        ticks = max(0, len(ev) - 1)
    elif res["status"] in ("conv_ep", "conv_em"):
        side = 1 if res["status"] == "conv_ep" else -1
        ticks = len(ev)
    else:
        side, ticks = 0, len(ev)
    if full:
        return side, ticks, res
    return side, ticks


def _bisect_fate_flip(p, z, x_lo, x_hi, f_lo, f_hi, cfg, xtol):
    """Bisect the fate flip inside (x_lo, x_hi); both fates valid and distinct."""
    for _ in range(200):
        if x_hi - x_lo <= xtol:
            break
        m = 0.5 * (x_lo + x_hi)
        fm, _ = section_fate(p, m, z, cfg)
        if fm == 0:
            # undecidable probe: nudge toward the upper end
            m2 = 0.75 * x_hi + 0.25 * x_lo
            fm, _ = section_fate(p, m2, z, cfg)
            if fm == 0:
                raise NoConvergence(f"undecidable fates near z={z:.6g}")
            m = m2
        if fm == f_lo:
            x_lo = m
        else:
            x_hi = m
    return 0.5 * (x_lo + x_hi)


def stable_x_at(p: UnfParams, z_target: float,
                cfg: IntegratorConfig | None = None,
                xtol: float = 1e-9, eps: float = 1e-5,
                x_max: float | None = None, branch: int = 1) -> float:
    """Signed first-intersection value x_s(z_target) of the stable manifold.

    Locates the innermost side-flip of `section_fate` along the ray
    x in (eps, x_max) at the requested height; the sign is the inner fate
    (positive on the skirt, alternating across each pinch).  branch=-1
    returns the mirrored branch.
    """
    cfg = cfg or IntegratorConfig()
    if z_target <= 0.0:
        raise OutOfRange("z_target must be > 0")
    if x_max is None:
        x_max = 1.45  # just above the aux-system bound sqrt(2)
    f_in, _ = section_fate(p, eps, z_target, cfg)
    if f_in == 0:
        raise NoConvergence(f"inner fate undecidable at z={z_target:.6g}")
    grid = np.concatenate([[eps], np.linspace(0.02, x_max, 28)])
    x_lo, f_lo = eps, f_in
    x_flip = None
    for xg in grid[1:]:
        fg, _ = section_fate(p, xg, z_target, cfg)
        if fg == 0:
            continue
        if fg != f_lo:
            x_flip = _bisect_fate_flip(p, z_target, x_lo, xg, f_lo, fg,
                                       cfg, xtol)
            break
        x_lo, f_lo = xg, fg
    if x_flip is None:
        raise NoConvergence(f"no manifold intersection found at z={z_target:.6g}")
    return branch * f_in * x_flip


def stable_curve(p: UnfParams, eps: float = 1e-6,
                 z_range: tuple = (0.05, None), n: int = 24,
                 cfg: IntegratorConfig | None = None,
                 k_zeros: int = 4) -> StableCurve:
    """Sample the signed curve x_s(z) on a z-grid and refine its pinches.

    eps is the near-axis probe offset used for the parity reference; pinch
    heights are refined by bisecting the parity flip of `section_fate` at
    that offset, so the whole object is independent of the Riccati route.
    Samples whose fates cannot be decided are dropped.
    """
    if not (1e-7 <= eps <= 1e-3):
        raise InvalidDomain("eps must lie in [1e-7, 1e-3]")
    cfg = cfg or IntegratorConfig()
    z_lo, z_hi = z_range
    if z_hi is None:
        # cover the first k_zeros pinches with margin: walk the parity
        parity_z = _parity_flips(p, eps, z_lo, k_zeros, cfg)
        z_hi = (parity_z[-1] * 1.15) if len(parity_z) else 4.0
    else:
        parity_z = _parity_flips(p, eps, z_lo, k_zeros, cfg, z_cap=z_hi)
    zs = np.linspace(z_lo, z_hi, n)
    samples = []
    for z in zs:
        try:
            xs = stable_x_at(p, z, cfg, eps=eps)
        except (NoConvergence, OutOfRange):
            continue
        samples.append((float(z), float(xs)))
    zeros = _refine_parity_flips(p, eps, parity_z, cfg)
    z_star = _extrapolate_accumulation(zeros) if len(zeros) >= 3 else math.inf
    return StableCurve(samples=samples, zero_ladder=np.asarray(zeros),
                       z_star=z_star)


def _parity_flips(p, eps, z_lo, k_zeros, cfg, z_cap=None, dz0=0.05):
    """Walk upward in z locating sign flips of the near-axis fate parity."""
    flips = []
    z = max(z_lo, 0.02)
    f_prev, _ = section_fate(p, eps, z, cfg)
    dz = dz0 * (1.0 + z)
    guard = 0
    while len(flips) < k_zeros and guard < 4000:
        guard += 1
        z_next = z + dz
        if z_cap is not None and z_next > z_cap:
            break
        f, _ = section_fate(p, eps, z_next, cfg)
        if f != 0 and f_prev != 0 and f != f_prev:
            flips.append((z, z_next, f_prev, f))
        if f != 0:
            f_prev = f
        z = z_next
        dz = 0.05 * (1.0 + z)
    return flips


def _refine_parity_flips(p, eps, flips, cfg, ztol_rel=1e-7):
    zeros = []
    for z_lo, z_hi, f_lo, f_hi in flips:
        for _ in range(80):
            if z_hi - z_lo <= ztol_rel * (1.0 + z_hi):
                break
            m = 0.5 * (z_lo + z_hi)
            fm, _ = section_fate(p, eps, m, cfg)
            if fm == 0 or fm == f_lo:
                z_lo = m
            else:
                z_hi = m
        zeros.append(0.5 * (z_lo + z_hi))
    return zeros


def _extrapolate_accumulation(seq):
    """Aitken limit of a sequence; +inf when the gaps are not geometric.

    The pinch sequences of this family have harmonically decaying gaps
    (gap ratios increase toward 1), so this reports +inf for them; the
    extrapolation only fires on genuinely geometric tails."""
    s = np.asarray(seq, dtype=float)
    if len(s) < 4:
        return math.inf
    d = np.diff(s[-4:])
    if np.any(d <= 0):
        return math.inf
    r1 = d[1] / d[0]
    r2 = d[2] / d[1]
    if r2 > 0.95 or r2 >= r1:
        return math.inf
    return float(s[-1] + d[2] * r2 / (1.0 - r2))


# ----------------------------------------------------------------------
# Riccati route: rotation ladder of the tangent stable manifold


def riccati_tau(p: UnfParams, k_max: int,
                cfg: IntegratorConfig | None = None,
                z_floor: float = 1e-9) -> RiccatiLadder:
    """Rotation roots tau_k of the tangent-manifold slope along the axis.

    The bounded slope solution on the decaying-z side is obtained by
    backward integration from its attracting asymptotic value
    sqrt(1 + lam^2/4); the growing-z continuation is integrated in the
    linear form v'' = -(z(t) - zc) v (which has no blowups) and tau_k are
    the roots of v' + (lam/2) v.
    """
    if k_max < 1:
        raise InvalidDomain("k_max must be >= 1")
    cfg = cfg or IntegratorConfig()
    lam, al = p.lam, p.alpha
    if al <= 0 or lam < 0:
        raise InvalidDomain("need alpha > 0 and lam >= 0")
    zc = 1.0 + 0.25 * lam * lam
    eta_inf = math.sqrt(zc)
    t_far = math.log(zc / z_floor) / al

    ric = FieldHandle(_k.FID_RIC_SADDLE, (lam, al), 1, "ric_saddle")
    res = _drive_field(ric, np.array([eta_inf]), t_far, 0.0,
                       cfg.with_(max_step=min(5.0, 0.5 / al)),
                       theta_active=0, escape=1e6)
    if res["status"] != "ok":
        raise NoConvergence("bounded-slope integration failed")
    eta0 = float(res["y"][0])

    vfield = FieldHandle(_k.FID_FOCUS_V, (lam, al), 2, "focus_v")
    t_hi = (2.0 / al) * (math.log(k_max + 4.0) + 4.0) + 50.0
    ev_w = np.array([0.5 * lam, 1.0])
    res = _drive_field(vfield, np.array([1.0, eta0]), 0.0, t_hi,
                       cfg.with_(max_step=min(0.5, 0.2 / al)),
                       ev_active=1, ev_w=ev_w, ev_gtol=1e-12,
                       max_ev=k_max, theta_active=0, escape=0.0)
    taus = res["events"][:, 0]
    if len(taus) < k_max:
        ladder = _ladder_from(eta0, taus, zc, al)
        raise LadderTruncated(ladder, k_max)
    return _ladder_from(eta0, taus[:k_max], zc, al)


def _ladder_from(eta0, taus, zc, al):
    taus = np.asarray(taus, dtype=float)
    zk = zc * np.exp(al * taus)
    t_inf = _extrapolate_accumulation(taus) if len(taus) >= 3 else math.inf
    z_star = zc * math.exp(al * t_inf) if math.isfinite(t_inf) else math.inf
    return RiccatiLadder(eta0=float(eta0), tau=taus, zk=zk,
                         t_inf=t_inf, z_star=z_star)


def domains_b(p: UnfParams, k_max: int,
              cfg: IntegratorConfig | None = None) -> list[DomainB]:
    """Adjacent section domains bounded by the pinch heights.

    b_0 spans (0, z_1) (the skirt, no winding); b_k spans (z_k, z_{k+1})
    and carries winding count k.
    """
    ladder = riccati_tau(p, k_max + 1, cfg)
    zk = ladder.zk
    out = [DomainB(k=0, z_lo=0.0, z_hi=float(zk[0]), half_turns=0, skirt=True)]
    for k in range(1, k_max + 1):
        out.append(DomainB(k=k, z_lo=float(zk[k - 1]), z_hi=float(zk[k]),
                           half_turns=k))
    return out


def domain_index(ladder: RiccatiLadder, z: float) -> int:
    """Index k of the domain containing height z; ties go to the lower one."""
    return int(np.searchsorted(ladder.zk, z, side="left"))


# ----------------------------------------------------------------------
# auxiliary planar system and closed-form bounds


def aux_separatrix_x0(lam: float, cfg: IntegratorConfig | None = None,
                      delta: float = 1e-9) -> float:
    """First positive-axis intersection of the stable separatrix of the
    planar system x' = y, y' = -(x^2 - 1) x - lam y, by reverse shooting.

    Equals sqrt(2) at lam = 0 and grows with lam; bounds the x-extent of
    the stable manifold's section trace.
    """
    if lam < 0:
        raise InvalidDomain("lam must be >= 0")
    cfg = cfg or IntegratorConfig()
    e2 = -lam / 2.0 - math.sqrt(lam * lam / 4.0 + 1.0)
    fh = FieldHandle(_k.FID_AUX2D, (lam,), 2, "aux2d")
    seed = np.array([delta, e2 * delta])
    ev_w = np.array([0.0, 1.0])
    res = _drive_field(fh, seed, 0.0, -cfg.t_max, cfg, ev_active=1,
                       ev_w=ev_w, ev_dir=0, ev_side=1, ev_terminal=1,
                       max_ev=2, theta_active=0, escape=100.0)
    if res["status"] != "event":
        raise NoConvergence("separatrix did not return to the x-axis")
    return float(res["y"][0])


def absorbing_layer(lam: float, c1: float, c2: float):
    """Height interval (z1, z2) on which the quadratic form

        c2 (z-1) x^2 - (C - z) x y + (lam - c2) y^2,   C = c1 + 1 - lam c2,

    is positive definite, so the Lyapunov function (c1 x^2)/2 + x^4/4
    + c2 x y + y^2/2 decays and orbits inside the layer collapse onto the
    invariant axis.  Definiteness requires B (z-1) > (C-z)^2 with
    B = 4 c2 (lam - c2), giving z_{1,2} = C + B/2 -/+ sqrt(BC + B^2/4 - B).
    """
    if not (c1 > c2 * c2 > 0.0):
        raise InvalidDomain("need c1 > c2^2 > 0")
    if lam <= c2:
        raise InvalidDomain("need lam > c2 for a definite form")
    B = 4.0 * c2 * (lam - c2)
    C = c1 + 1.0 - lam * c2
    rad = B * C + 0.25 * B * B - B
    if rad < 0.0:
        raise InvalidDomain("no definite layer for these constants")
    root = math.sqrt(rad)
    return (C + 0.5 * B - root, C + 0.5 * B + root)


def small_alpha_zu(beta: float, z0: float, rho: float, phi: float,
                   lam: float, Omega: float | None = None):
    """Limit height of the unstable manifold in the alpha -> 0 regime.

    With the near-axis solution x(t) = rho e^{-lam t/2} sin(Omega t + phi),
    the pumped height is z_u = z0 + beta rho^2 M_inf where

        M_inf = 1/(2 lam) - (lam cos 2phi - 2 Omega sin 2phi)
                            / (2 (lam^2 + 4 Omega^2)).

    Returns (z_u, M_inf).  M_inf is always below 1/lam; it is below
    1/(2 lam) when the phase term is positive.
    """
    if lam <= 0:
        raise InvalidDomain("lam must be > 0")
    om2 = z0 - 1.0 - 0.25 * lam * lam
    if om2 <= 0:
        raise InvalidDomain("entry height must exceed the focus threshold")
    if Omega is None:
        Omega = math.sqrt(om2)
    m_inf = (1.0 / (2.0 * lam)
             - 0.5 * (lam * math.cos(2 * phi) - 2 * Omega * math.sin(2 * phi))
             / (lam * lam + 4.0 * Omega * Omega))
    assert m_inf < 1.0 / lam
    return z0 + beta * rho * rho * m_inf, m_inf


def entry_prediction(p: UnfParams, eps: float = 1e-3,
                     cfg: IntegratorConfig | None = None,
                     t_hi: float = 400.0):
    """Predict the turning height of the unstable manifold from its entry
    into the eps-tube around the axis; returns (z_pred, entry data)."""
    cfg = cfg or IntegratorConfig()
    fh = unf_field(p)
    seed = wu_seed(p)
    ts = np.linspace(0.0, t_hi, 200_000)
    res = _drive_field(fh, seed, 0.0, t_hi, cfg, ts_sample=ts)
    ys = res["samples"]
    r2 = ys[:, 0] ** 2 + ys[:, 1] ** 2
    outside = r2 > eps * eps
    if not outside.any():
        raise NoConvergence("orbit never left the tube")
    i_out = int(np.argmax(outside))
    back_in = ~outside[i_out:]
    if not back_in.any():
        raise NoConvergence("orbit never re-entered the tube")
    i_in = i_out + int(np.argmax(back_in))
    x0, y0, z0 = ys[i_in]
    om2 = z0 - 1.0 - 0.25 * p.lam * p.lam
    if om2 <= 0:
        raise NoConvergence("re-entry below the focus threshold")
    Om = math.sqrt(om2)
    psi = math.atan2(2.0 * Om, p.lam)
    c = (x0 * math.cos(psi) + y0 / math.sqrt(z0 - 1.0)) / math.sin(psi)
    rho = math.hypot(x0, c)
    phi = math.atan2(x0, c)
    z_pred, _ = small_alpha_zu(p.beta, z0, rho, phi, p.lam, Om)
    return z_pred, (z0, rho, phi)


def turning_point_check(p: UnfParams, eps: float = 1e-3,
                        cfg: IntegratorConfig | None = None,
                        t_hi: float = 400.0):
    """Compare the predicted turning height against the integrated maximum."""
    cfg = cfg or IntegratorConfig()
    z_pred, _ = entry_prediction(p, eps, cfg, t_hi)
    fh = unf_field(p)
    res = _drive_field(fh, wu_seed(p), 0.0, t_hi, cfg)
    return z_pred, float(res["z_max"])

"""Vector fields, equilibria, spectra and the exact parameter/coordinate maps.

Two systems live here: the cubic normal form

    x' = y
    y' = -(x^2 + z - 1) x - lam*y
    z' = -alpha*z + beta*x^2

and the generalized Lorenz family

    x' = -a (x - y)
    y' = (r - z) x - q y
    z' = x y - b z

with the one-to-one change of variables V (and its inverse) conjugating the
second into the first, and the induced parameter map P.  Everything in this
module is closed-form; no integration happens here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateParameters, InvalidDomain, NonPositiveBeta

__all__ = [
    "UnfParams",
    "GlParams",
    "SaddleSpectrum",
    "RegionLabel",
    "family_gl_params",
    "unf_vector_field",
    "unf_jacobian",
    "gl_vector_field",
    "gl_jacobian",
    "equilibria",
    "saddle_spectrum",
    "hopf_threshold",
    "map_v",
    "map_v_inverse",
    "map_p",
    "characteristic_A",
    "classify_region",
    "shimizu_rescale",
]


@dataclass(frozen=True)
class UnfParams:
    """Normal-form parameter triple (lam, alpha, beta), all >= 0 and finite."""

    lam: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("lam", "alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidDomain(f"{name} must be finite, got {v}")

    @property
    def A(self) -> float:
        """Characteristic parameter (alpha + beta) / 2, recomputed on demand."""
        return 0.5 * (self.alpha + self.beta)

    def as_tuple(self):
        return (self.lam, self.alpha, self.beta)


@dataclass(frozen=True)
class GlParams:
    """Generalized-Lorenz parameters (a, b, r, q) with a, b > 0, r > q > -a."""

    a: float
    b: float
    r: float
    q: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidDomain(f"need a, b > 0, got a={self.a}, b={self.b}")
        if not (self.r > self.q > -self.a):
            raise InvalidDomain(
                f"need r > q > -a, got r={self.r}, q={self.q}, -a={-self.a}"
            )

    @property
    def omega(self) -> float:
        """Time-scale factor 1/sqrt(a (r - q)); recomputed, never cached."""
        return 1.0 / math.sqrt(self.a * (self.r - self.q))

    def as_tuple(self):
        return (self.a, self.b, self.r, self.q)


def family_gl_params(family: str, a: float, b: float, c: float | None = None,
                     r: float | None = None) -> GlParams:
    """Build GlParams for a named family member.

    lorenz: q=1 and r given explicitly; chen: r=c-a, q=-c; lu: r=0, q=-c;
    tigan: r=c-a, q=0.
    """
    family = family.lower()
    if family == "lorenz":
        if r is None:
            raise InvalidDomain("lorenz family needs r")
        return GlParams(a, b, r, 1.0)
    if c is None:
        raise InvalidDomain(f"{family} family needs c")
    if family == "chen":
        return GlParams(a, b, c - a, -c)
    if family == "lu":
        return GlParams(a, b, 0.0, -c)
    if family == "tigan":
        return GlParams(a, b, c - a, 0.0)
    raise InvalidDomain(f"unknown family {family!r}")


# ----------------------------------------------------------------------
# vector fields and jacobians


def unf_vector_field(p: UnfParams, s) -> np.ndarray:
    x, y, z = s
    return np.array([
        y,
        -(x * x + z - 1.0) * x - p.lam * y,
        -p.alpha * z + p.beta * x * x,
    ])


def unf_jacobian(p: UnfParams, s) -> np.ndarray:
    x, _, z = s
    return np.array([
        [0.0, 1.0, 0.0],
        [-(3.0 * x * x + z - 1.0), -p.lam, -x],
        [2.0 * p.beta * x, 0.0, -p.alpha],
    ])


def gl_vector_field(g: GlParams, s) -> np.ndarray:
    x, y, z = s
    return np.array([
        -g.a * (x - y),
        (g.r - z) * x - g.q * y,
        x * y - g.b * z,
    ])


def gl_jacobian(g: GlParams, s) -> np.ndarray:
    x, y, z = s
    return np.array([
        [-g.a, g.a, 0.0],
        [g.r - z, -g.q, -x],
        [y, x, -g.b],
    ])


# ----------------------------------------------------------------------
# equilibria and spectra


def equilibria(p: UnfParams):
    """The saddle O and the symmetric pair E+/E-.

    Returns (O, E+, E-) as arrays.  Raises DegenerateParameters when
    alpha + beta = 0 (E places undefined).
    """
    s = p.alpha + p.beta
    if s <= 0.0:
        raise DegenerateParameters("alpha + beta must be > 0 for E+-")
    xe = math.sqrt(p.alpha / s)
    ze = p.beta / s
    origin = np.zeros(3)
    return origin, np.array([xe, 0.0, ze]), np.array([-xe, 0.0, ze])


@dataclass(frozen=True)
class SaddleSpectrum:
    """Eigenvalues at the origin: e1 > 0 > e3 > e2 in the leading-direction
    regime, with e1*e2 = -1 exactly.  sigma is the saddle quantity
    (1 - alpha^2)/alpha - lam; it is None when alpha = 0 (flagged instead of
    returning an infinity)."""

    e1: float
    e2: float
    e3: float
    sigma: float | None

    @property
    def alpha_zero(self) -> bool:
        return self.sigma is None


def saddle_spectrum(p: UnfParams) -> SaddleSpectrum:
    root = math.sqrt(p.lam * p.lam / 4.0 + 1.0)
    e1 = -p.lam / 2.0 + root
    e2 = -p.lam / 2.0 - root
    sigma = None
    if p.alpha > 0.0:
        sigma = (1.0 - p.alpha * p.alpha) / p.alpha - p.lam
    return SaddleSpectrum(e1=e1, e2=e2, e3=-p.alpha, sigma=sigma)


def hopf_threshold(alpha: float, beta: float) -> float:
    """Damping value lam_s below which the foci E+- lose stability.

    Solves (lam + alpha)(lam (alpha+beta) + 2) = 2 (alpha+beta), the
    Routh-Hurwitz marginal condition at E+-.
    """
    s = alpha + beta
    if s <= 0.0:
        raise DegenerateParameters("alpha + beta must be > 0")
    m = 2.0 + alpha * beta + alpha * alpha
    return (math.sqrt(m * m + 8.0 * beta * s) - m) / (2.0 * s)


# ----------------------------------------------------------------------
# conjugacy maps


def map_v(g: GlParams, s, t: float = 0.0):
    """Push a generalized-Lorenz state (and time) into normal-form coordinates."""
    w = g.omega
    x, y, z = s
    out = np.array([
        w / math.sqrt(2.0) * x,
        w * w * g.a / math.sqrt(2.0) * (y - x),
        w * w * (g.a * z - 0.5 * x * x),
    ])
    return out, t / w


def map_v_inverse(g: GlParams, s, t: float = 0.0):
    """Inverse of map_v: normal-form state (and time) back to (a,b,r,q) coordinates."""
    w = g.omega
    x, y, z = s
    xg = math.sqrt(2.0) / w * x
    yg = math.sqrt(2.0) / w * (x + y / (g.a * w))
    zg = (z + x * x) / (g.a * w * w)
    return np.array([xg, yg, zg]), w * t


def map_p(g: GlParams) -> UnfParams:
    """Parameter map (a, b, r, q) -> (lam, alpha, beta).

    Requires b < 2a so that beta > 0; the triple is otherwise outside the
    normal form's positive-parameter regime and is rejected.
    """
    if g.b >= 2.0 * g.a:
        raise NonPositiveBeta(f"b={g.b} >= 2a={2 * g.a} maps to beta <= 0")
    w = g.omega
    return UnfParams(lam=(g.q + g.a) * w, alpha=g.b * w, beta=(2.0 * g.a - g.b) * w)


def characteristic_A(p: UnfParams) -> float:
    return p.A


@dataclass(frozen=True)
class RegionLabel:
    zone: Literal["LorenzLike", "ChenLike", "TiganBoundary"]
    on_chen_curve: bool
    on_lu_curve: bool


def classify_region(p: UnfParams, tol: float = 1e-9) -> RegionLabel:
    """Place a parameter triple relative to the lam = A boundary.

    lam > A is the Lorenz-like zone (images of q > 0), lam < A the Chen-like
    zone (-a < q < 0), and |lam - A| <= tol the boundary (q = 0).  Curve
    membership uses the exact one-parameter images of the Chen and Lu
    families, defined for A > 1.
    """
    A = p.A
    scale = max(1.0, abs(p.lam), abs(A))
    d = p.lam - A
    if d > tol * scale:
        zone = "LorenzLike"
    elif d < -tol * scale:
        zone = "ChenLike"
    else:
        zone = "TiganBoundary"
    on_chen = A > 1.0 and abs(p.lam - (A * A - 1.0) / (2.0 * A)) <= tol * scale
    on_lu = A > 1.0 and abs(p.lam - (A * A - 1.0) / A) <= tol * scale
    return RegionLabel(zone=zone, on_chen_curve=on_chen, on_lu_curve=on_lu)


# ----------------------------------------------------------------------
# large-beta rescaling


def shimizu_rescale(p: UnfParams):
    """Rescale x, y by sqrt(beta/alpha), exposing mu = alpha/beta.

    Returns (mu, scale, field) where `scale` multiplies the (x, y) coordinates
    and `field(s)` evaluates the rescaled right-hand side

        X' = Y,  Y' = -(mu X^2 + z - 1) X - lam Y,  z' = alpha (X^2 - z),

    which tends to the Shimizu-Morioka system as mu -> 0.  The map
    T(x,y,z) = (scale*x, scale*y, z) conjugates the original field into it.
    """
    if p.beta <= 0.0:
        raise DegenerateParameters("beta must be > 0 to rescale")
    if p.alpha <= 0.0:
        raise DegenerateParameters("alpha must be > 0 to rescale")
    mu = p.alpha / p.beta
    scale = math.sqrt(p.beta / p.alpha)
    lam, alpha = p.lam, p.alpha

    def field(s):
        X, Y, z = s
        return np.array([
            Y,
            -(mu * X * X + z - 1.0) * X - lam * Y,
            alpha * (X * X - z),
        ])

    return mu, scale, field

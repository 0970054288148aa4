import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unf.errors import DegenerateParameters, InvalidDomain, NonPositiveBeta
from unf.model import (GlParams, UnfParams, classify_region, equilibria,
                       family_gl_params, gl_vector_field, hopf_threshold,
                       map_p, map_v, map_v_inverse, saddle_spectrum,
                       shimizu_rescale, unf_jacobian, unf_vector_field)

LORENZ_GL = GlParams(10.0, 8.0 / 3.0, 28.0, 1.0)
CHEN_GL = GlParams(35.0, 3.0, -7.0, -28.0)


def fd_jacobian(f, s, h=1e-6):
    s = np.asarray(s, dtype=float)
    J = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (f(s + e) - f(s - e)) / (2 * h)
    return J


# ----------------------------------------------------------------- fields

def test_unf_field_fixed_points():
    p = UnfParams(0.37, 0.21, 1.4)
    assert np.allclose(unf_vector_field(p, [0, 0, 0]), 0.0)
    _, ep, em = equilibria(p)
    assert np.allclose(unf_vector_field(p, ep), 0.0, atol=1e-15)
    assert np.allclose(unf_vector_field(p, em), 0.0, atol=1e-15)


def test_unf_field_direct_value():
    p = UnfParams(0.5, 0.2, 1.0)
    out = unf_vector_field(p, [1.0, 1.0, 1.0])
    assert np.allclose(out, [1.0, -1.5, 0.8])


def test_gl_field_values():
    g = LORENZ_GL
    assert np.allclose(gl_vector_field(g, [0, 0, 0]), 0.0)
    assert np.allclose(gl_vector_field(g, [1.0, 1.0, 1.0]),
                       [0.0, 26.0, -5.0 / 3.0])
    xfp = math.sqrt(g.b * (g.r - 1))
    assert np.allclose(gl_vector_field(g, [xfp, xfp, g.r - 1]), 0.0,
                       atol=1e-12)


def test_unf_jacobian_at_origin_and_trace():
    p = UnfParams(0.9, 0.3, 2.0)
    J = unf_jacobian(p, [0.0, 0.0, 0.0])
    assert np.allclose(J, [[0, 1, 0], [1, -p.lam, 0], [0, 0, -p.alpha]])
    for s in ([0.3, -0.2, 0.9], [1.1, 0.4, 2.2]):
        assert np.isclose(np.trace(unf_jacobian(p, s)), -p.lam - p.alpha)


def test_unf_jacobian_matches_finite_differences():
    p = UnfParams(0.26, 0.11, 2.47)
    s = np.array([0.3, -0.2, 0.9])
    J = unf_jacobian(p, s)
    Jfd = fd_jacobian(lambda q: unf_vector_field(p, q), s)
    assert np.max(np.abs(J - Jfd)) / np.max(np.abs(J)) < 1e-6


# ------------------------------------------------------------ equilibria

def test_equilibria_symmetric_and_beta_zero():
    _, ep, _ = equilibria(UnfParams(0.5, 1.3, 1.3))
    assert np.allclose(ep, [math.sqrt(0.5), 0.0, 0.5])
    _, ep, _ = equilibria(UnfParams(0.5, 0.7, 0.0))
    assert np.allclose(ep, [1.0, 0.0, 0.0])
    _, ep, _ = equilibria(UnfParams(0.26, 0.11, 2.47))
    assert np.allclose(ep, [0.20649, 0.0, 0.95736], atol=5e-6)
    with pytest.raises(DegenerateParameters):
        equilibria(UnfParams(0.5, 0.0, 0.0))


# -------------------------------------------------------------- spectrum

@settings(max_examples=200, deadline=None)
@given(lam=st.floats(0.0, 10.0))
def test_eigenvalue_product_identity(lam):
    sp = saddle_spectrum(UnfParams(lam, 0.2, 1.0))
    assert abs(sp.e1 * sp.e2 + 1.0) < 1e-12


def test_spectrum_values_and_ordering():
    sp = saddle_spectrum(UnfParams(0.0, 0.3, 1.0))
    assert sp.e1 == pytest.approx(1.0) and sp.e2 == pytest.approx(-1.0)
    sp = saddle_spectrum(UnfParams(0.6694, 0.1623, 1.05487))
    assert sp.e1 == pytest.approx(0.7198255, abs=1e-6)
    assert sp.e2 == pytest.approx(-1.3892255, abs=1e-6)
    assert sp.e3 == -0.1623
    assert sp.sigma == pytest.approx(5.3297295, abs=1e-6)
    assert sp.sigma > 0 and sp.e1 > 0 > sp.e3 > sp.e2
    # leading-direction ordering under the saddle condition
    assert abs(sp.e3) < sp.e1 < abs(sp.e2)
    # alpha = 1 makes sigma = -lam
    sp = saddle_spectrum(UnfParams(0.4, 1.0, 1.0))
    assert sp.sigma == pytest.approx(-0.4)
    assert saddle_spectrum(UnfParams(0.4, 0.0, 1.0)).alpha_zero


# ------------------------------------------------------------------ hopf

def test_hopf_threshold_values():
    assert hopf_threshold(0.7, 0.0) == pytest.approx(0.0, abs=1e-14)
    assert hopf_threshold(0.1623, 1.05487) == pytest.approx(0.69359, abs=5e-5)
    ls = hopf_threshold(0.11, 2.47)
    assert ls == pytest.approx(1.01020, abs=5e-5)
    assert ls > 0.26  # the classical-Chen image sits below its Hopf curve
    with pytest.raises(DegenerateParameters):
        hopf_threshold(0.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0.01, 3.0), beta=st.floats(0.01, 3.0))
def test_hopf_threshold_gives_marginal_pair(alpha, beta):
    lam_s = hopf_threshold(alpha, beta)
    p = UnfParams(lam_s, alpha, beta)
    _, ep, _ = equilibria(p)
    eig = np.linalg.eigvals(unf_jacobian(p, ep))
    pair = sorted(eig, key=lambda v: abs(v.real))[:2]
    assert max(abs(v.real) for v in pair) < 1e-7


# ------------------------------------------------------------------ maps

def gl_strategy():
    return st.tuples(st.floats(0.5, 30.0), st.floats(0.1, 10.0),
                     st.floats(-20.0, 60.0), st.floats(-15.0, 15.0))


@settings(max_examples=150, deadline=None)
@given(gl_strategy(), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(-5, 5))
def test_map_v_roundtrip(gt, x, y, z, t):
    a, b, r, q = gt
    try:
        g = GlParams(a, b, r, q)
    except InvalidDomain:
        return
    s = np.array([x, y, z])
    s2, t2 = map_v_inverse(g, *map_v(g, s, t))
    assert np.max(np.abs(s2 - s)) < 1e-12 * max(1.0, np.max(np.abs(s)))
    assert abs(t2 - t) < 1e-12 * max(1.0, abs(t))


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_map_v_conjugacy_pushforward(x, y, z):
    # D(V) F_gl rescaled by dt/dtau = omega equals F_unf(V(s))
    for g in (LORENZ_GL, CHEN_GL):
        p = map_p(g)
        s = np.array([x, y, z])
        V = lambda q: map_v(g, q)[0]
        J = fd_jacobian(V, s, h=1e-6)
        lhs = J @ gl_vector_field(g, s) * g.omega
        rhs = unf_vector_field(p, V(s))
        assert np.max(np.abs(lhs - rhs)) < 1e-6  # FD-limited


def test_map_v_conjugacy_pushforward_exact(rng):
    # same check with an analytic Jacobian of V, to 1e-9
    for g in (LORENZ_GL, CHEN_GL):
        p = map_p(g)
        w = g.omega
        for _ in range(100):
            s = rng.uniform(-2, 2, 3)
            x = s[0]
            J = np.array([
                [w / math.sqrt(2), 0.0, 0.0],
                [-w * w * g.a / math.sqrt(2), w * w * g.a / math.sqrt(2), 0.0],
                [-w * w * x, 0.0, w * w * g.a],
            ])
            lhs = J @ gl_vector_field(g, s) * w
            rhs = unf_vector_field(p, map_v(g, s)[0])
            assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_map_v_sends_fixed_point_to_fixed_point():
    g = LORENZ_GL
    p = map_p(g)
    xfp = math.sqrt(g.b * (g.r - 1))
    img, _ = map_v(g, [xfp, xfp, g.r - 1])
    _, ep, _ = equilibria(p)
    assert np.allclose(img, ep, atol=1e-12)


def test_map_p_lorenz_and_chen_images():
    p = map_p(LORENZ_GL)
    w = 1.0 / math.sqrt(270.0)
    assert p.lam == pytest.approx(11 * w, abs=1e-14)
    assert p.alpha == pytest.approx(8 / 3 * w, abs=1e-14)
    assert p.beta == pytest.approx(52 / 3 * w, abs=1e-14)
    assert p.A == pytest.approx(10 * w, abs=1e-14)

    p = map_p(CHEN_GL)
    s15 = math.sqrt(15.0)
    assert p.lam == pytest.approx(1 / s15, abs=1e-14)
    assert p.alpha == pytest.approx(3 / (7 * s15), abs=1e-14)
    assert p.beta == pytest.approx(67 / (7 * s15), abs=1e-14)
    assert p.A == pytest.approx(5 / s15, abs=1e-14)


def test_map_p_tigan_q0_forces_lam_equal_A():
    p = map_p(GlParams(1.0, 1.0, 1.0, 0.0))
    assert (p.lam, p.alpha, p.beta) == pytest.approx((1.0, 1.0, 1.0))
    assert p.lam == pytest.approx(p.A)


def test_map_p_rejections():
    with pytest.raises(NonPositiveBeta):
        map_p(GlParams(10.0, 25.0, 28.0, 1.0))
    with pytest.raises(InvalidDomain):
        GlParams(10.0, 1.0, 0.5, 1.0)  # r <= q
    with pytest.raises(InvalidDomain):
        GlParams(10.0, 1.0, 28.0, -11.0)  # q <= -a


# -------------------------------------------------------- classification

def test_classify_region_anchors():
    assert classify_region(map_p(LORENZ_GL)).zone == "LorenzLike"
    lbl = classify_region(map_p(CHEN_GL))
    assert lbl.zone == "ChenLike" and lbl.on_chen_curve
    p = map_p(CHEN_GL)
    assert abs(p.lam - (p.A ** 2 - 1) / (2 * p.A)) < 1e-10
    assert classify_region(UnfParams(1.0, 1.0, 1.0)).zone == "TiganBoundary"


@settings(max_examples=150, deadline=None)
@given(gl_strategy())
def test_zone_matches_q_sign(gt):
    a, b, r, q = gt
    try:
        g = GlParams(a, b, r, q)
        p = map_p(g)
    except (InvalidDomain, NonPositiveBeta):
        return
    zone = classify_region(p).zone
    if q > 1e-9:
        assert zone == "LorenzLike"
    elif q < -1e-9:
        assert zone == "ChenLike"
    else:
        assert zone == "TiganBoundary"


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 30.0), st.floats(0.05, 1.0))
def test_lu_family_lands_on_lu_curve(a, bfrac):
    c = a * 0.3  # a > c keeps lam > 0 and A > 1
    b = bfrac * min(2 * a - 1e-6, 5.0)
    try:
        g = family_gl_params("lu", a, b, c=c)
        p = map_p(g)
    except (InvalidDomain, NonPositiveBeta):
        return
    assert abs(p.lam - (p.A ** 2 - 1) / p.A) < 1e-10
    assert classify_region(p).on_lu_curve


# ------------------------------------------------------ shimizu rescale

def test_shimizu_rescale_mu_and_conjugacy(rng):
    mu, scale, field = shimizu_rescale(UnfParams(0.3, 0.04, 2.47))
    assert mu == pytest.approx(0.016194, abs=1e-6)
    p = UnfParams(0.3, 0.04, 2.47)
    for _ in range(20):
        s = rng.uniform(-1.5, 1.5, 3)
        T = np.array([scale * s[0], scale * s[1], s[2]])
        lhs = np.array([scale, scale, 1.0]) * unf_vector_field(p, s)
        rhs = field(T)
        assert np.max(np.abs(lhs - rhs)) < 1e-10
    with pytest.raises(DegenerateParameters):
        shimizu_rescale(UnfParams(0.3, 0.04, 0.0))

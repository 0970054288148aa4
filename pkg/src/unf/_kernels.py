"""Compiled integration core: Dormand-Prince 5(4) with dense output.

One driver serves every registered right-hand side (field ids below).  It
handles adaptive stepping, escape detection, section-crossing events refined
on the dense interpolant, planar winding-angle accumulation, near-saddle
ball transit, focus convergence, and amplitude-growth commitment of section
crossings.  Everything is plain float64 arithmetic with no parallelism, so
results are bit-reproducible regardless of the calling context.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# field ids
FID_UNF = 0        # params (lam, alpha, beta), dim 3
FID_GL = 1         # params (a, b, r, q), dim 3
FID_UNF_TAN = 2    # params (lam, alpha, beta), dim 6: state + tangent vector
FID_GL_TAN = 3     # params (a, b, r, q), dim 6
FID_AUX2D = 4      # params (lam,), dim 2: x' = y, y' = -(x^2-1)x - lam y
FID_RIC_SADDLE = 5 # params (lam, alpha), dim 1: eta' = zc e^{-alpha t} - zc + eta^2
FID_FOCUS_V = 6    # params (lam, alpha), dim 2: v'' = -zc (e^{alpha t} - 1) v

FIELD_DIM = {FID_UNF: 3, FID_GL: 3, FID_UNF_TAN: 6, FID_GL_TAN: 6,
             FID_AUX2D: 2, FID_RIC_SADDLE: 1, FID_FOCUS_V: 2}

# driver status codes
OK = 0
EVENT = 1
ESCAPED = 2
UNDERFLOW = 3
CONV_EP = 4
CONV_EM = 5
BUF_FULL = 6
BALL_EXIT = 7
COMMITTED = 8

# Dormand-Prince 5(4) tableau with the quartic dense-output matrix.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 6))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B = _A[6]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@njit(cache=True)
def _rhs(fid, t, y, par, out):
    if fid == FID_UNF:
        lam, al, be = par[0], par[1], par[2]
        x, v, z = y[0], y[1], y[2]
        out[0] = v
        out[1] = -(x * x + z - 1.0) * x - lam * v
        out[2] = -al * z + be * x * x
    elif fid == FID_GL:
        a, b, r, q = par[0], par[1], par[2], par[3]
        x, v, z = y[0], y[1], y[2]
        out[0] = -a * (x - v)
        out[1] = (r - z) * x - q * v
        out[2] = x * v - b * z
    elif fid == FID_UNF_TAN:
        lam, al, be = par[0], par[1], par[2]
        x, v, z = y[0], y[1], y[2]
        dx, dv, dz = y[3], y[4], y[5]
        out[0] = v
        out[1] = -(x * x + z - 1.0) * x - lam * v
        out[2] = -al * z + be * x * x
        out[3] = dv
        out[4] = -(3.0 * x * x + z - 1.0) * dx - lam * dv - x * dz
        out[5] = 2.0 * be * x * dx - al * dz
    elif fid == FID_GL_TAN:
        a, b, r, q = par[0], par[1], par[2], par[3]
        x, v, z = y[0], y[1], y[2]
        dx, dv, dz = y[3], y[4], y[5]
        out[0] = -a * (x - v)
        out[1] = (r - z) * x - q * v
        out[2] = x * v - b * z
        out[3] = -a * (dx - dv)
        out[4] = (r - z) * dx - q * dv - x * dz
        out[5] = v * dx + x * dv - b * dz
    elif fid == FID_AUX2D:
        lam = par[0]
        x, v = y[0], y[1]
        out[0] = v
        out[1] = -(x * x - 1.0) * x - lam * v
    elif fid == FID_RIC_SADDLE:
        lam, al = par[0], par[1]
        zc = 1.0 + 0.25 * lam * lam
        out[0] = zc * np.exp(-al * t) - zc + y[0] * y[0]
    else:  # FID_FOCUS_V
        lam, al = par[0], par[1]
        zc = 1.0 + 0.25 * lam * lam
        out[0] = y[1]
        out[1] = -zc * (np.exp(al * t) - 1.0) * y[0]


@njit(cache=True)
def _dense_eval(y0, K, h, theta, out):
    # y(t0 + theta*h) from the quartic interpolant
    n = y0.shape[0]
    t2 = theta * theta
    t3 = t2 * theta
    t4 = t3 * theta
    for i in range(n):
        acc = 0.0
        for s in range(7):
            q = (_P[s, 0] * theta + _P[s, 1] * t2 + _P[s, 2] * t3
                 + _P[s, 3] * t4)
            acc += K[s, i] * q
        out[i] = y0[i] + h * acc


@njit(cache=True)
def _gval(ev_w, y):
    acc = 0.0
    for i in range(ev_w.shape[0]):
        acc += ev_w[i] * y[i]
    return acc


@njit(cache=True)
def _drive(fid, par, y0, t0, t1, rtol, atol, max_step, escape_r,
           ev_active, ev_w, ev_dir, ev_zpos, ev_side, ev_gtol, ev_terminal,
           ev_buf, max_ev,
           commit_active, commit_zc, commit_xmin,
           theta_active, hz_thresh,
           ball_active, ball_rin, ball_rout,
           conv_active, conv_xe, conv_ze, conv_tol,
           ts_sample, ys_sample):
    """Adaptive DP54 run.  Returns (status, t_end, y_end, theta, theta_hz,
    n_events, z_max, t_zmax).

    ev_buf rows: t, x, y, z, theta, theta_hz, gdir, zdot, zmin_since_prev.

    A recorded section crossing "commits" (decides an excursion side) when
    the orbit's z dipped below commit_zc since the previous crossing (or
    since the start) and |x| exceeds commit_xmin; crossings without such a
    dip are near-axis winding ticks.
    """
    n = y0.shape[0]
    dirn = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)

    y = y0.copy()
    t = t0
    f0 = np.zeros(n)
    _rhs(fid, t, y, par, f0)

    # initial step heuristic
    sc = 0.0
    fn = 0.0
    for i in range(n):
        s = atol + rtol * abs(y[i])
        sc += (y[i] / s) ** 2
        fn += (f0[i] / s) ** 2
    d0 = np.sqrt(sc / n)
    d1 = np.sqrt(fn / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    if h > max_step:
        h = max_step
    if h > span:
        h = span
    h *= dirn

    K = np.zeros((7, n))
    ytmp = np.zeros(n)
    ynew = np.zeros(n)
    yint = np.zeros(n)
    ftmp = np.zeros(n)

    theta = 0.0
    theta_hz = 0.0
    n_ev = 0
    z_max = y[2] if n >= 3 else 0.0
    t_zmax = t0
    z_min_gap = y[2] if n >= 3 else 0.0  # z floor since the last crossing
    in_ball = 0
    isamp = 0
    g_prev = _gval(ev_w, y) if ev_active == 1 else 0.0
    min_h = 1e-14 * (1.0 + abs(t0) + abs(t1))
    nstep = 0

    while True:
        if dirn * (t - t1) >= 0.0:
            return (OK, t, y, theta, theta_hz, n_ev, z_max, t_zmax)
        if abs(h) < min_h:
            return (UNDERFLOW, t, y, theta, theta_hz, n_ev, z_max, t_zmax)
        if dirn * (t + h - t1) > 0.0:
            h = t1 - t
        nstep += 1
        if nstep > 100_000_000:
            return (UNDERFLOW, t, y, theta, theta_hz, n_ev, z_max, t_zmax)

        # stages
        for i in range(n):
            K[0, i] = f0[i]
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            _rhs(fid, t + _C[s] * h, ytmp, par, K[s])
        for i in range(n):
            ynew[i] = ytmp[i]  # stage 6 used B row: ytmp currently holds it
        # error estimate
        errn = 0.0
        for i in range(n):
            e = 0.0
            for s in range(7):
                e += _E[s] * K[s, i]
            e *= h
            scale = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            errn += (e / scale) ** 2
        errn = np.sqrt(errn / n)

        if errn > 1.0:
            fac = 0.9 * errn ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            continue

        # accepted
        t_new = t + h

        # escape check (state components only)
        if escape_r > 0.0:
            m = 3 if n >= 3 else n
            r2 = 0.0
            for i in range(m):
                r2 += ynew[i] * ynew[i]
            if r2 > escape_r * escape_r:
                return (ESCAPED, t_new, ynew, theta, theta_hz, n_ev,
                        z_max, t_zmax)

        # dense samples
        while (isamp < ts_sample.shape[0]
               and dirn * (ts_sample[isamp] - t_new) <= 0.0):
            th = (ts_sample[isamp] - t) / h
            _dense_eval(y, K, h, th, yint)
            for i in range(n):
                ys_sample[isamp, i] = yint[i]
            isamp += 1

        # winding angle
        d_theta = 0.0
        if theta_active == 1:
            cross = y[0] * ynew[1] - y[1] * ynew[0]
            dot = y[0] * ynew[0] + y[1] * ynew[1]
            if dot != 0.0 or cross != 0.0:
                d_theta = np.arctan2(cross, dot)
            theta += d_theta
            if n >= 3 and 0.5 * (y[2] + ynew[2]) > hz_thresh:
                theta_hz += d_theta

        # z extrema tracking
        if n >= 3 and ynew[2] > z_max:
            z_max = ynew[2]
            t_zmax = t_new
        if n >= 3 and ynew[2] < z_min_gap:
            z_min_gap = ynew[2]

        # event detection
        if ev_active == 1:
            g_new = _gval(ev_w, ynew)
            if g_prev != 0.0 and (g_prev * g_new < 0.0 or g_new == 0.0):
                # refine on the interpolant (Illinois)
                ta, tb = 0.0, 1.0
                ga, gb = g_prev, g_new
                tc = 0.5
                gc = gb
                for _ in range(120):
                    if gb == ga:
                        tc = 0.5 * (ta + tb)
                    else:
                        tc = tb - gb * (tb - ta) / (gb - ga)
                        if tc <= ta or tc >= tb:
                            tc = 0.5 * (ta + tb)
                    _dense_eval(y, K, h, tc, yint)
                    gc = _gval(ev_w, yint)
                    if abs(gc) <= ev_gtol:
                        break
                    if gc * ga < 0.0:
                        tb, gb = tc, gc
                        ga *= 0.5  # Illinois weighting
                    else:
                        ta, ga = tc, gc
                _dense_eval(y, K, h, tc, yint)
                t_ev = t + tc * h
                g_dir = 1.0 if g_new > g_prev else -1.0
                accept_ev = True
                if ev_dir != 0 and int(g_dir) != ev_dir:
                    accept_ev = False
                if accept_ev and ev_zpos == 1 and n >= 3 and yint[2] <= 0.0:
                    accept_ev = False
                if accept_ev and ev_side != 0:
                    if ev_side == 1 and yint[0] <= 0.0:
                        accept_ev = False
                    if ev_side == -1 and yint[0] >= 0.0:
                        accept_ev = False
                if accept_ev:
                    th_ev = theta
                    thz_ev = theta_hz
                    if theta_active == 1:
                        crs = y[0] * yint[1] - y[1] * yint[0]
                        dt_ = y[0] * yint[0] + y[1] * yint[1]
                        da = np.arctan2(crs, dt_) if (dt_ != 0.0 or crs != 0.0) else 0.0
                        th_ev = theta - d_theta + da
                        d_hz_step = 0.0
                        if n >= 3 and 0.5 * (y[2] + ynew[2]) > hz_thresh:
                            d_hz_step = d_theta
                        d_hz_ev = 0.0
                        if n >= 3 and 0.5 * (y[2] + yint[2]) > hz_thresh:
                            d_hz_ev = da
                        thz_ev = theta_hz - d_hz_step + d_hz_ev
                    _rhs(fid, t_ev, yint, par, ftmp)
                    zdot = ftmp[2] if n >= 3 else 0.0
                    z_gap = z_min_gap
                    if n >= 3 and yint[2] < z_gap:
                        z_gap = yint[2]
                    if n_ev < max_ev:
                        ev_buf[n_ev, 0] = t_ev
                        ev_buf[n_ev, 1] = yint[0]
                        ev_buf[n_ev, 2] = yint[1] if n >= 2 else 0.0
                        ev_buf[n_ev, 3] = yint[2] if n >= 3 else 0.0
                        ev_buf[n_ev, 4] = th_ev
                        ev_buf[n_ev, 5] = thz_ev
                        ev_buf[n_ev, 6] = g_dir
                        ev_buf[n_ev, 7] = zdot
                        ev_buf[n_ev, 8] = z_gap
                        n_ev += 1
                    if n >= 3:
                        # next gap starts at the crossing; the accepted step's
                        # endpoint already belongs to it
                        z_min_gap = min(yint[2], ynew[2])
                    if ev_terminal == 1:
                        return (EVENT, t_ev, yint.copy(), th_ev, thz_ev,
                                n_ev, z_max, t_zmax)
                    if (commit_active == 1 and z_gap < commit_zc
                            and abs(yint[0]) > commit_xmin):
                        return (COMMITTED, t_ev, yint.copy(), th_ev,
                                thz_ev, n_ev, z_max, t_zmax)
                    if n_ev >= max_ev:
                        return (BUF_FULL, t_ev, yint.copy(), th_ev, thz_ev,
                                n_ev, z_max, t_zmax)
            g_prev = g_new

        # focus convergence (checked at accepted endpoints)
        if conv_active == 1 and n >= 3:
            dxp = ynew[0] - conv_xe
            dxm = ynew[0] + conv_xe
            dz = ynew[2] - conv_ze
            dp = np.sqrt(dxp * dxp + ynew[1] * ynew[1] + dz * dz)
            dm = np.sqrt(dxm * dxm + ynew[1] * ynew[1] + dz * dz)
            if dp < conv_tol:
                return (CONV_EP, t_new, ynew, theta, theta_hz, n_ev,
                        z_max, t_zmax)
            if dm < conv_tol:
                return (CONV_EM, t_new, ynew, theta, theta_hz, n_ev,
                        z_max, t_zmax)

        # near-saddle ball transit
        if ball_active == 1 and n >= 3:
            r2 = ynew[0] ** 2 + ynew[1] ** 2 + ynew[2] ** 2
            if in_ball == 0:
                # probe interior points of the step too: fast transits
                hit = r2 < ball_rin * ball_rin
                if not hit:
                    for kq in range(1, 4):
                        _dense_eval(y, K, h, 0.25 * kq, yint)
                        rq = yint[0] ** 2 + yint[1] ** 2 + yint[2] ** 2
                        if rq < ball_rin * ball_rin:
                            hit = True
                            break
                if hit:
                    in_ball = 1
            else:
                if r2 > ball_rout * ball_rout:
                    return (BALL_EXIT, t_new, ynew, theta, theta_hz, n_ev,
                            z_max, t_zmax)

        # roll state
        t = t_new
        for i in range(n):
            y[i] = ynew[i]
            f0[i] = K[6, i]  # FSAL

        # step-size growth
        if errn == 0.0:
            fac = 10.0
        else:
            fac = 0.9 * errn ** -0.2
            if fac > 10.0:
                fac = 10.0
            if fac < 0.2:
                fac = 0.2
        h *= fac
        if abs(h) > max_step:
            h = max_step * dirn

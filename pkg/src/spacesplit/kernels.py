"""Compiled hot loops for the Baker family.

Single-orbit recursions are inherently sequential, so the production-size
runs (N ~ 5e5 steps and up) go through these numba kernels.  The formulas
here mirror `dynamics.BakerMap` and the step operations in `tangent`; the
test suite pins the two paths against each other on a common orbit.

Status codes returned by the scan: 0 ok, 2 degenerate tangent.
"""
import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def baker_trajectory(x0, s, n_total):
    pts = np.empty((n_total, 2))
    x1 = x0[0]
    x2 = x0[1]
    s1, s2, s3, s4 = s[0], s[1], s[2], s[3]
    pts[0, 0] = x1
    pts[0, 1] = x2
    for i in range(1, n_total):
        branch = math.floor(x1 / math.pi)
        y1 = 2.0 * x1 + (s1 + s2 * math.sin(2.0 * x2) / 2.0) * math.sin(x1)
        y2 = (x2 + (s4 + s3 * math.sin(x1)) * math.sin(2.0 * x2)) / 2.0 + math.pi * branch
        x1 = y1 % TWO_PI
        if x1 >= TWO_PI:
            x1 = 0.0
        x2 = y2 % TWO_PI
        if x2 >= TWO_PI:
            x2 = 0.0
        if math.isnan(x1) or math.isnan(x2):
            pts[0, 0] = np.nan
            return pts
        pts[i, 0] = x1
        pts[i, 1] = x2
    return pts


@njit(cache=True)
def baker_tangent_scan(pts, s, kp, runup, q0, v0, p0, y0, g0, w0, yd0, diagnostics):
    """Run all tangent recursions along a precomputed orbit.

    Frames are stored for rows >= runup.  With diagnostics, the curvature
    vector w, its projection gamma, the density gradient g and the unstable
    derivative b (via a second y-recursion driven by w instead of p) are
    carried alongside the production quantities.
    """
    n_total = pts.shape[0]
    n_keep = n_total - runup
    q = np.empty((n_keep, 2))
    alpha = np.empty(n_keep)
    v = np.empty((n_keep, 2))
    a = np.empty(n_keep)
    p = np.empty((n_keep, 2))
    y = np.empty((n_keep, 2))
    c = np.empty(n_keep)
    nd = n_keep if diagnostics else 0
    w = np.empty((nd, 2))
    gam = np.empty(nd)
    g = np.empty(nd)
    b = np.empty(nd)

    q1, q2 = q0[0], q0[1]
    v1, v2 = v0[0], v0[1]
    p1, p2 = p0[0], p0[1]
    y1, y2 = y0[0], y0[1]
    gv = g0
    w1, w2 = w0[0], w0[1]
    yd1, yd2 = yd0[0], yd0[1]

    if runup == 0:
        # the initial frame is the raw initialization; transition-defined
        # scalars (alpha, a, c, gamma, b) have no value yet
        q[0, 0], q[0, 1] = q1, q2
        alpha[0] = 1.0
        v[0, 0], v[0, 1] = v1, v2
        a[0] = 0.0
        p[0, 0], p[0, 1] = p1, p2
        y[0, 0], y[0, 1] = y1, y2
        c[0] = 0.0
        if diagnostics:
            w[0, 0], w[0, 1] = w1, w2
            gam[0] = 0.0
            g[0] = gv
            b[0] = 0.0

    s1, s2, s3, s4 = s[0], s[1], s[2], s[3]
    status = 0
    for i in range(n_total - 1):
        x1 = pts[i, 0]
        x2 = pts[i, 1]
        sin1 = math.sin(x1)
        cos1 = math.cos(x1)
        sin2 = math.sin(2.0 * x2)
        cos2 = math.cos(2.0 * x2)
        j11 = 2.0 + (s1 + s2 * sin2 / 2.0) * cos1
        j12 = s2 * cos2 * sin1
        j21 = s3 * cos1 * sin2 / 2.0
        j22 = (1.0 + 2.0 * (s4 + s3 * sin1) * cos2) / 2.0
        t100 = -(s1 + s2 * sin2 / 2.0) * sin1
        t101 = s2 * cos2 * cos1
        t111 = -2.0 * s2 * sin2 * sin1
        t200 = -s3 * sin1 * sin2 / 2.0
        t201 = s3 * cos1 * cos2
        t211 = -2.0 * (s4 + s3 * sin1) * sin2
        if kp == 0:
            chi1 = sin1
            chi2 = 0.0
            m11, m12, m21, m22 = cos1, 0.0, 0.0, 0.0
        elif kp == 1:
            chi1 = sin1 * sin2 / 2.0
            chi2 = 0.0
            m11, m12, m21, m22 = sin2 * cos1 / 2.0, cos2 * sin1, 0.0, 0.0
        elif kp == 2:
            chi1 = 0.0
            chi2 = sin1 * sin2 / 2.0
            m11, m12, m21, m22 = 0.0, 0.0, sin2 * cos1 / 2.0, sin1 * cos2
        else:
            chi1 = 0.0
            chi2 = sin2 / 2.0
            m11, m12, m21, m22 = 0.0, 0.0, 0.0, cos2

        dq1 = j11 * q1 + j12 * q2
        dq2 = j21 * q1 + j22 * q2
        al = math.sqrt(dq1 * dq1 + dq2 * dq2)
        if al < 1e-14:
            status = 2
            break
        nq1 = dq1 / al
        nq2 = dq2 / al

        d2qq1 = t100 * q1 * q1 + 2.0 * t101 * q1 * q2 + t111 * q2 * q2
        d2qq2 = t200 * q1 * q1 + 2.0 * t201 * q1 * q2 + t211 * q2 * q2
        d2qv1 = t100 * q1 * v1 + t101 * (q1 * v2 + q2 * v1) + t111 * q2 * v2
        d2qv2 = t200 * q1 * v1 + t201 * (q1 * v2 + q2 * v1) + t211 * q2 * v2
        dchi1 = (m11 * q1 + m12 * q2) / al
        dchi2 = (m21 * q1 + m22 * q2) / al

        tv1 = j11 * v1 + j12 * v2 + chi1
        tv2 = j21 * v1 + j22 * v2 + chi2
        na = nq1 * tv1 + nq2 * tv2
        nv1 = tv1 - na * nq1
        nv2 = tv2 - na * nq2

        np1 = (d2qq1 + j11 * p1 + j12 * p2) / (al * al)
        np2 = (d2qq2 + j21 * p1 + j22 * p2) / (al * al)

        z1 = (d2qv1 + j11 * y1 + j12 * y2) / al + dchi1 - na * np1
        z2 = (d2qv2 + j21 * y1 + j22 * y2) / al + dchi2 - na * np2
        nc = z1 * nq1 + z2 * nq2 + nv1 * np1 + nv2 * np2
        ny1 = z1 - nc * nq1
        ny2 = z2 - nc * nq2

        ngam = 0.0
        nb = 0.0
        if diagnostics:
            u1 = j11 * w1 + j12 * w2 + d2qq1
            u2 = j21 * w1 + j22 * w2 + d2qq2
            proj = nq1 * u1 + nq2 * u2
            ngam = proj / al
            nw1 = (u1 - proj * nq1) / (al * al)
            nw2 = (u2 - proj * nq2) / (al * al)
            gv = (gv - ngam) / al
            zt1 = (d2qv1 + j11 * yd1 + j12 * yd2) / al + dchi1 - na * nw1
            zt2 = (d2qv2 + j21 * yd1 + j22 * yd2) / al + dchi2 - na * nw2
            nb = zt1 * nq1 + zt2 * nq2 + nv1 * nw1 + nv2 * nw2
            yd1 = zt1 - nb * nq1
            yd2 = zt2 - nb * nq2
            w1, w2 = nw1, nw2

        q1, q2 = nq1, nq2
        v1, v2 = nv1, nv2
        p1, p2 = np1, np2
        y1, y2 = ny1, ny2

        j = i + 1 - runup
        if j >= 0:
            q[j, 0], q[j, 1] = q1, q2
            alpha[j] = al
            v[j, 0], v[j, 1] = v1, v2
            a[j] = na
            p[j, 0], p[j, 1] = p1, p2
            y[j, 0], y[j, 1] = y1, y2
            c[j] = nc
            if diagnostics:
                w[j, 0], w[j, 1] = w1, w2
                gam[j] = ngam
                g[j] = gv
                b[j] = nb

    return status, q, alpha, v, a, p, y, c, w, gam, g, b

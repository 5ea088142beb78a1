"""Independent reference computations used by the tests.

Nothing here imports the package: the field, eigenvectors and section
crossings are rebuilt from scratch on top of scipy's DOP853 with event
location, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def field(d, e, theta):
    def f(t, s):
        x, y = s
        return [y, -(x * x - theta) * y - x * (x + d) * (x + e) / (d * e)]

    return f


def saddle_vectors(d, e, theta, x0):
    J = np.array([[0.0, 1.0], [-(3 * x0**2 + 2 * (d + e) * x0 + d * e) / (d * e), theta - x0**2]])
    w, V = np.linalg.eig(J)
    order = np.argsort(w.real)
    vs, vu = V[:, order[0]].real, V[:, order[1]].real
    vs, vu = vs * np.sign(vs[0]), vu * np.sign(vu[0])
    return vs / np.linalg.norm(vs), vu / np.linalg.norm(vu)


def _hit(f, s0, t_end, coord, value, accept):
    k = 0 if coord == "x" else 1

    def ev(t, s):
        return s[k] - value

    def escape(t, s):
        return 50.0 - max(abs(s[0]), abs(s[1]))

    escape.terminal = True
    sol = solve_ivp(f, (0, t_end), s0, method="DOP853", rtol=1e-12, atol=1e-13, events=(ev, escape))
    for pt in sol.y_events[0]:
        if accept(pt):
            return pt
    raise RuntimeError("no acceptable crossing")


def gap(d, e, theta, kind, offset=1e-6):
    f = field(d, e, theta)
    if kind == "homoclinic":
        xs = -d
        vs, vu = saddle_vectors(d, e, theta, xs)
        side = 1.0 if xs < 0 else -1.0
        far = (lambda p: p[0] > 0) if xs < 0 else (lambda p: p[0] < 0)
        pu = _hit(f, [xs + side * offset * vu[0], side * offset * vu[1]], 80, "y", 0.0, far)
        ps = _hit(f, [xs + side * offset * vs[0], side * offset * vs[1]], -80, "y", 0.0, far)
        return abs(ps[0]) - abs(pu[0])
    a, b = sorted([-d, -e])  # left, right saddle
    src, tgt = (a, b) if kind == "heteroclinic-upper" else (b, a)
    half = (lambda p: p[1] > 0) if kind == "heteroclinic-upper" else (lambda p: p[1] < 0)
    _, vu = saddle_vectors(d, e, theta, src)
    vs, _ = saddle_vectors(d, e, theta, tgt)
    su = 1.0 if tgt > src else -1.0
    ss = 1.0 if src > tgt else -1.0
    xm = 0.5 * (a + b)
    pu = _hit(f, [src + su * offset * vu[0], su * offset * vu[1]], 80, "x", xm, half)
    ps = _hit(f, [tgt + ss * offset * vs[0], ss * offset * vs[1]], -80, "x", xm, half)
    return pu[1] - ps[1]


def gap_root(d, e, lo, hi, kind):
    return brentq(lambda th: gap(d, e, th, kind), lo, hi, xtol=1e-10)


def z2_homology_brute(D, degrees):
    """Per-degree dim ker - dim im of a Z2 matrix, by enumerating vectors.

    Degree-q chains are all 2^n bit vectors supported on the degree-q
    generators; kernel and image sizes are counted directly.
    """
    D = np.asarray(D, dtype=np.int64) % 2
    degrees = list(degrees)
    out = []
    for q in range(3):
        cq = [i for i, g in enumerate(degrees) if g == q]
        cq1 = [i for i, g in enumerate(degrees) if g == q + 1]
        n = len(D)
        ker = 0
        for bits in itertools.product((0, 1), repeat=len(cq)):
            v = np.zeros(n, dtype=np.int64)
            v[cq] = bits
            if not (D @ v % 2).any():
                ker += 1
        images = set()
        for bits in itertools.product((0, 1), repeat=len(cq1)):
            v = np.zeros(n, dtype=np.int64)
            v[cq1] = bits
            images.add(tuple(D @ v % 2))
        out.append(int(round(np.log2(ker))) - int(round(np.log2(len(images)))))
    return tuple(out)

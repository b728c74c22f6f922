"""Reference implementations that share no code with the package.

They are deliberately plain: scalar loops, explicit node systems, brute-force
scans.  Tests compare the vectorised package code against them.
"""

import cmath
import math

import numpy as np


def rlc_from_table(fs, q, k2, c0):
    """Closed-form motional elements, written out independently."""
    cm = c0 * k2 / (1.0 - k2)
    w = 2.0 * math.pi * fs
    lm = 1.0 / (w * w * cm)
    rm = w * lm / q
    return rm, lm, cm


def mbvd_admittance(f, c0, rs, ls, elements, r0=0.0):
    """Admittance of one mBVD one-port at a single frequency.

    ``elements`` is a list of (rm, lm, cm).
    """
    w = 2.0 * math.pi * f
    zc0 = r0 + 1.0 / (1j * w * c0)
    y = 1.0 / zc0
    for rm, lm, cm in elements:
        y += 1.0 / (rm + 1j * w * lm + 1.0 / (1j * w * cm))
    return 1.0 / (rs + 1j * w * ls + 1.0 / y)


def nodal_sparameters(elements, z0):
    """S-parameters of a ladder by node-voltage analysis.

    ``elements`` is a list of ("series" | "shunt", admittance) at one
    frequency.  Every series element opens a new node; shunt elements tie the
    current node to ground.  Each port is a Thevenin source of 2 V behind z0
    (unit incident power wave); the other port is terminated in z0.
    """
    n_nodes = 1
    branches = []  # (node_a, node_b or None for ground, y)
    for kind, y in elements:
        if kind == "series":
            branches.append((n_nodes - 1, n_nodes, y))
            n_nodes += 1
        else:
            branches.append((n_nodes - 1, None, y))
    p1, p2 = 0, n_nodes - 1
    g = 1.0 / z0

    def solve(drive):
        Y = np.zeros((n_nodes, n_nodes), dtype=complex)
        for a, b, y in branches:
            Y[a, a] += y
            if b is not None:
                Y[b, b] += y
                Y[a, b] -= y
                Y[b, a] -= y
        Y[p1, p1] += g
        Y[p2, p2] += g
        rhs = np.zeros(n_nodes, dtype=complex)
        rhs[drive] += 2.0 * g
        return np.linalg.solve(Y, rhs)

    v = solve(p1)
    s11, s21 = v[p1] - 1.0, v[p2]
    v = solve(p2)
    s22, s12 = v[p2] - 1.0, v[p1]
    return complex(s11), complex(s12), complex(s21), complex(s22)


def brute_force_extrema(model_admittance, f_min, f_max, points):
    """Argmax/argmin indices of |Y| on a dense log grid, plus the grid."""
    lf = np.linspace(math.log10(f_min), math.log10(f_max), points)
    mag = np.abs(model_admittance(10.0**lf))
    inner = mag[1:-1]
    maxima = np.flatnonzero((inner > mag[:-2]) & (inner >= mag[2:])) + 1
    minima = np.flatnonzero((inner < mag[:-2]) & (inner <= mag[2:])) + 1
    return lf, maxima, minima


def golden_max(fun, a, b, tol=1e-13):
    """Independent golden-section maximiser used for closed-form cross-checks."""
    r = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - r * (b - a), a + r * (b - a)
    while b - a > tol * max(abs(a), 1.0):
        if fun(c) > fun(d):
            b, d = d, c
            c = b - r * (b - a)
        else:
            a, c = c, d
            d = a + r * (b - a)
    return 0.5 * (a + b)


def polar(mag, deg):
    return cmath.rect(mag, math.radians(deg))

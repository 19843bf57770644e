"""Carlson symmetric elliptic integrals by the duplication theorem, for complex arguments.

The algorithms follow B. C. Carlson, "Numerical computation of real or
complex elliptic integrals", Numer. Algorithms 10 (1995).  Principal square
roots are used throughout, so the usual restrictions on the arguments apply
(no argument on the closed negative real axis, and for ``rj`` the
Cauchy-principal-value cases are not handled).
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-16


def rf(x: complex, y: complex, z: complex) -> complex:
    """``R_F(x, y, z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z))``."""
    x, y, z = complex(x), complex(y), complex(z)
    a0 = (x + y + z) / 3
    q = (3 * _TOL) ** (-1 / 6) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a, xm, ym, zm = a0, x, y, z
    scale = 1.0
    while scale * q >= abs(a):
        sx, sy, sz = np.sqrt(xm), np.sqrt(ym), np.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        xm, ym, zm, a = (xm + lam) / 4, (ym + lam) / 4, (zm + lam) / 4, (a + lam) / 4
        scale /= 4
    bx = (a0 - x) * scale / a
    by = (a0 - y) * scale / a
    bz = -bx - by
    e2 = bx * by - bz * bz
    e3 = bx * by * bz
    return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / np.sqrt(a)


def rc(x: complex, y: complex) -> complex:
    """``R_C(x, y) = R_F(x, y, y)``."""
    return rf(x, y, y)


def rj(x: complex, y: complex, z: complex, p: complex) -> complex:
    """``R_J(x, y, z, p) = 3/2 int_0^inf dt / ((t+p) sqrt((t+x)(t+y)(t+z)))``."""
    x, y, z, p = complex(x), complex(y), complex(z), complex(p)
    a0 = (x + y + z + 2 * p) / 5
    delta = (p - x) * (p - y) * (p - z)
    q = (_TOL / 4) ** (-1 / 6) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z), abs(a0 - p))
    a, xm, ym, zm, pm = a0, x, y, z, p
    scale = 1.0
    total = 0j
    while scale * q >= abs(a):
        sx, sy, sz, sp = np.sqrt(xm), np.sqrt(ym), np.sqrt(zm), np.sqrt(pm)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = scale ** 3 * delta / (d * d)
        total += scale / d * rc(1.0, 1.0 + e)
        xm, ym, zm, pm, a = [(v + lam) / 4 for v in (xm, ym, zm, pm, a)]
        scale /= 4
    bx = (a0 - x) * scale / a
    by = (a0 - y) * scale / a
    bz = (a0 - z) * scale / a
    bp = -(bx + by + bz) / 2
    e2 = bx * by + bx * bz + by * bz - 3 * bp * bp
    e3 = bx * by * bz + 2 * e2 * bp + 4 * bp ** 3
    e4 = (2 * bx * by * bz + e2 * bp + 3 * bp ** 3) * bp
    e5 = bx * by * bz * bp * bp
    series = 1 - 3 * e2 / 14 + e3 / 6 + 9 * e2 * e2 / 88 - 3 * e4 / 22 - 9 * e2 * e3 / 52 + 3 * e5 / 26
    return scale * a ** -1.5 * series + 6 * total


def incomplete_first(z: complex, k2: complex) -> complex:
    """``int_0^z dt / sqrt((1 - t^2)(1 - k2 t^2))`` along the straight segment."""
    z2 = z * z
    return z * rf(1 - z2, 1 - k2 * z2, 1.0)


def incomplete_third(z: complex, n: complex, k2: complex) -> complex:
    """``int_0^z dt / ((1 - n t^2) sqrt((1 - t^2)(1 - k2 t^2)))`` along the straight segment."""
    z2 = z * z
    return z * rf(1 - z2, 1 - k2 * z2, 1.0) + n * z * z2 / 3 * rj(1 - z2, 1 - k2 * z2, 1.0, 1 - n * z2)


def on_principal_path(w: complex) -> bool:
    """True if ``1 - t w`` stays off the closed negative real axis for ``t`` in [0, 1]."""
    return not (abs(w.imag) <= 1e-14 * max(1.0, abs(w)) and w.real >= 1.0)

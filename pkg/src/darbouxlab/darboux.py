"""The two-form on the factorizable part of GL(n, C) and its Darboux coordinates.

The form at ``a`` is built from the differentials of the triangular factors,

    Omega = tr[ v_+^{-1} dv_+ ^ a_+^{-1} da_+ - v_-^{-1} dv_- ^ a_-^{-1} da_- ],

and the wedge of matrix one-forms is evaluated as ``tr(X1 Y2 - X2 Y1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePoint, InvalidMatrix, SingularLeadingMinor
from .matgroup import (
    SINGULAR_TOL,
    PermutationSchedule,
    TriangularFactorization,
    as_matrix,
    cofactor_matrix,
    default_schedule,
    factorize,
    minor,
    minor_log_gradient,
    minor_scale,
    principal_minors,
)

# A log-minor combination is a list of (coefficient, rows, cols) with indices into ``a``.
LogTerm = tuple[int, list[int], list[int]]


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        base = as_matrix(self.base)
        direction = np.asarray(self.direction, dtype=complex)
        if direction.shape != base.shape:
            raise InvalidMatrix("tangent direction must match the base point's shape")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)


def factor_differentials(fac: TriangularFactorization, adot) -> tuple[np.ndarray, ...]:
    """Return ``(a_+^{-1} da_+, v_+^{-1} dv_+, a_-^{-1} da_-, v_-^{-1} dv_-)`` along ``adot``.

    Differentiating ``a v_+ = a_+`` gives ``a_+^{-1} adot v_+ = a_+^{-1} da_+ - v_+^{-1} dv_+``;
    the first term is upper triangular and the second strictly lower, so a
    triangular split recovers both.  The minus side is the mirror image.
    """
    m_plus = np.linalg.solve(fac.a_plus, adot @ fac.v_plus)
    m_minus = np.linalg.solve(fac.a_minus, adot @ fac.v_minus)
    return np.triu(m_plus), -np.tril(m_plus, -1), np.tril(m_minus), -np.triu(m_minus, 1)


def _wedge(x1, y1, x2, y2) -> complex:
    return complex(np.trace(x1 @ y2) - np.trace(x2 @ y1))


def omega(fac: TriangularFactorization, adot1, adot2) -> complex:
    """The form evaluated on two directions at the point ``fac.a``."""
    ap1, vp1, am1, vm1 = factor_differentials(fac, adot1)
    ap2, vp2, am2, vm2 = factor_differentials(fac, adot2)
    return _wedge(vp1, ap1, vp2, ap2) - _wedge(vm1, am1, vm2, am2)


def omega_alt(fac: TriangularFactorization, adot1, adot2) -> complex:
    """Same value as ``omega`` from ``tr[v_- (dv) v_+^{-1} ^ a^{-1} da]`` with ``v = v_-^{-1} v_+``."""

    def parts(adot):
        _, vp, _, vm = factor_differentials(fac, adot)
        w = fac.v_plus @ vp @ np.linalg.inv(fac.v_plus) - fac.v_minus @ vm @ np.linalg.inv(fac.v_minus)
        return w, np.linalg.solve(fac.a, adot)

    w1, z1 = parts(adot1)
    w2, z2 = parts(adot2)
    return _wedge(w1, z1, w2, z2)


def _common_base(t1: TangentVector, t2: TangentVector) -> np.ndarray:
    if t1.base.shape != t2.base.shape or not np.array_equal(t1.base, t2.base):
        raise InvalidMatrix("tangent vectors must share a base point")
    return t1.base


def omega_eval(t1: TangentVector, t2: TangentVector, singular_tol: float = SINGULAR_TOL) -> complex:
    a = _common_base(t1, t2)
    return omega(factorize(a, singular_tol), t1.direction, t2.direction)


def omega_eval_alt(t1: TangentVector, t2: TangentVector, singular_tol: float = SINGULAR_TOL) -> complex:
    a = _common_base(t1, t2)
    return omega_alt(factorize(a, singular_tol), t1.direction, t2.direction)


def omega_gram(a, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """Matrix of the form on the matrix units ``e_jk`` (row-major order)."""
    fac = factorize(a, singular_tol)
    n = fac.n
    units = []
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1.0
            units.append(factor_differentials(fac, e))
    g = np.zeros((n * n, n * n), dtype=complex)
    for i, (ap1, vp1, am1, vm1) in enumerate(units):
        for j in range(i + 1, n * n):
            ap2, vp2, am2, vm2 = units[j]
            g[i, j] = _wedge(vp1, ap1, vp2, ap2) - _wedge(vm1, am1, vm2, am2)
            g[j, i] = -g[i, j]
    return g


# --- Darboux coordinates -------------------------------------------------------------


def chart_terms(schedule: PermutationSchedule) -> list[tuple[list[LogTerm], list[LogTerm]]]:
    """Log-minor combinations defining ``(p_nu, q_nu)`` for every step of the schedule.

    The minors belong to the conjugated matrix ``r^{-1} a r``; they are
    rewritten here as minors of ``a`` on permuted index lists.
    """
    out = []
    for nu in range(len(schedule)):
        jset, i, j = schedule.block_indices(nu)
        p_terms = [
            (1, jset + [i], jset + [i]),
            (1, jset + [j], jset + [j]),
            (-1, jset, jset),
            (-1, jset + [i, j], jset + [i, j]),
        ]
        q_terms = [(1, jset + [j], jset + [i]), (-1, jset + [i], jset + [j])]
        out.append((p_terms, q_terms))
    return out


def _check_minors(a, terms: list[LogTerm], nu: int, singular_tol: float) -> list[complex]:
    vals = []
    for _, rows, cols in terms:
        m = minor(a, rows, cols)
        if abs(m) < singular_tol * max(minor_scale(a, len(rows)), 1e-300):
            raise DegeneratePoint(nu, f"minor on rows {rows}, cols {cols} vanishes")
        vals.append(m)
    return vals


def log_combination(a, terms: list[LogTerm], nu: int = -1, singular_tol: float = SINGULAR_TOL) -> complex:
    """Principal log of the product of minors raised to the term coefficients."""
    vals = _check_minors(a, terms, nu, singular_tol)
    ratio = 1.0 + 0j
    for (c, _, _), m in zip(terms, vals):
        ratio = ratio * m if c > 0 else ratio / m
    return complex(np.log(ratio))


def log_combination_gradient(a, terms: list[LogTerm]) -> np.ndarray:
    a = np.asarray(a)
    g = np.zeros(a.shape, dtype=complex)
    for c, rows, cols in terms:
        g += c * minor_log_gradient(a, rows, cols)
    return g


def casimir_values(a, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """``phi_j = d+_j / d-_{j+1}`` for ``j = 1..n``; the last equals ``det a``."""
    a = as_matrix(a)
    n = a.shape[0]
    d = principal_minors(a)
    for j in range(2, n + 1):
        if abs(d.minus[j]) < singular_tol * minor_scale(a, n - j + 1):
            raise SingularLeadingMinor(j, abs(d.minus[j]))
    return d.plus[1:n + 1] / d.minus[2:n + 2]


@dataclass(frozen=True)
class DarbouxChart:
    p: np.ndarray
    q: np.ndarray
    schedule: PermutationSchedule
    casimirs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def to_json(self) -> dict:
        return {
            "n": self.schedule.n,
            "positions": list(self.schedule.positions),
            "p_re": self.p.real.tolist(),
            "p_im": self.p.imag.tolist(),
            "q_re": self.q.real.tolist(),
            "q_im": self.q.imag.tolist(),
            "casimirs_re": self.casimirs.real.tolist(),
            "casimirs_im": self.casimirs.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DarbouxChart":
        sched = PermutationSchedule(int(obj["n"]), tuple(obj["positions"]))

        def cplx(key):
            return np.asarray(obj[f"{key}_re"], dtype=float) + 1j * np.asarray(obj[f"{key}_im"], dtype=float)

        return cls(cplx("p"), cplx("q"), sched, cplx("casimirs"))


def darboux_coordinates(a, schedule: PermutationSchedule | None = None,
                        singular_tol: float = SINGULAR_TOL) -> DarbouxChart:
    a = as_matrix(a, n_min=2)
    schedule = schedule or default_schedule(a.shape[0])
    p, q = [], []
    for nu, (pt, qt) in enumerate(chart_terms(schedule)):
        p.append(log_combination(a, pt, nu, singular_tol))
        q.append(log_combination(a, qt, nu, singular_tol))
    return DarbouxChart(np.array(p), np.array(q), schedule, casimir_values(a, singular_tol))


def chart_gradients(a, schedule: PermutationSchedule | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of all ``p_nu`` and ``q_nu``, stacked as arrays of shape ``(N, n, n)``."""
    a = as_matrix(a, n_min=2)
    schedule = schedule or default_schedule(a.shape[0])
    terms = chart_terms(schedule)
    gp = np.array([log_combination_gradient(a, pt) for pt, _ in terms])
    gq = np.array([log_combination_gradient(a, qt) for _, qt in terms])
    return gp, gq


def chart_form(gp: np.ndarray, gq: np.ndarray, adot1, adot2) -> complex:
    """``sum_nu dp_nu ^ dq_nu`` evaluated on two directions, given the chart gradients."""
    dp1 = np.einsum("vjk,jk->v", gp, adot1)
    dq1 = np.einsum("vjk,jk->v", gq, adot1)
    dp2 = np.einsum("vjk,jk->v", gp, adot2)
    dq2 = np.einsum("vjk,jk->v", gq, adot2)
    return complex(np.sum(dp1 * dq2 - dp2 * dq1))


def random_direction(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def verify_decomposition(a, schedule: PermutationSchedule | None = None, trials: int = 10,
                         rng: np.random.Generator | None = None, relative: bool = True) -> float:
    """Max mismatch between the form and ``sum dp ^ dq`` over random tangent pairs.

    With ``relative=True`` each mismatch is divided by the size of the
    individual terms, ``max(1, |Omega|, sum |dp dq| )``.
    """
    a = as_matrix(a, n_min=2)
    n = a.shape[0]
    schedule = schedule or default_schedule(n)
    rng = rng or np.random.default_rng()
    fac = factorize(a)
    gp, gq = chart_gradients(a, schedule)
    worst = 0.0
    for _ in range(trials):
        x1, x2 = random_direction(rng, n), random_direction(rng, n)
        w = omega(fac, x1, x2)
        c = chart_form(gp, gq, x1, x2)
        scale = 1.0
        if relative:
            dp1, dq2 = np.einsum("vjk,jk->v", gp, x1), np.einsum("vjk,jk->v", gq, x2)
            dp2, dq1 = np.einsum("vjk,jk->v", gp, x2), np.einsum("vjk,jk->v", gq, x1)
            scale = max(1.0, abs(w), float(np.sum(np.abs(dp1 * dq2)) + np.sum(np.abs(dp2 * dq1))))
        worst = max(worst, abs(w - c) / scale)
    return worst


# --- symmetries ----------------------------------------------------------------------

TRANSPOSE_INVERSE = "transpose-inverse"
ANTIDIAGONAL = "antidiagonal-conjugation"


def apply_symmetry(which: str, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if which == TRANSPOSE_INVERSE:
        return np.linalg.inv(a).T
    if which == ANTIDIAGONAL:
        return a[::-1, ::-1].copy()
    raise ValueError(f"unknown symmetry {which!r}")


def push_forward(which: str, a, adot) -> np.ndarray:
    """Image of the direction ``adot`` at ``a`` under the symmetry's differential."""
    a = np.asarray(a, dtype=complex)
    adot = np.asarray(adot, dtype=complex)
    if which == TRANSPOSE_INVERSE:
        ainv = np.linalg.inv(a)
        return -(ainv @ adot @ ainv).T
    if which == ANTIDIAGONAL:
        return adot[::-1, ::-1].copy()
    raise ValueError(f"unknown symmetry {which!r}")


def symmetry_pullback(a, which: str, t1: TangentVector, t2: TangentVector) -> complex:
    """The form at the image point evaluated on the pushed-forward tangents."""
    base = _common_base(t1, t2)
    if not np.array_equal(base, np.asarray(a, dtype=complex)):
        raise InvalidMatrix("tangent vectors must be based at a")
    b = apply_symmetry(which, base)
    return omega(factorize(b), push_forward(which, base, t1.direction), push_forward(which, base, t2.direction))


# --- explicit three-dimensional chart --------------------------------------------------


def cofactor_chart3(a) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form cofactor expressions of the default ``n = 3`` chart.

    Returns ``(p, q)`` with
    ``p = log(a11 a22 / A33), log(A11 A33 / (det a * a22)), log(a22 a33 / A11)`` and
    ``q = log(a21 / a12), log(A13 / A31), log(a32 / a23)``.
    """
    a = np.asarray(a, dtype=complex)
    cof = cofactor_matrix(a)
    det = np.linalg.det(a)
    p = np.log([
        a[0, 0] * a[1, 1] / cof[2, 2],
        cof[0, 0] * cof[2, 2] / (det * a[1, 1]),
        a[1, 1] * a[2, 2] / cof[0, 0],
    ])
    q = np.log([a[1, 0] / a[0, 1], cof[0, 2] / cof[2, 0], a[2, 1] / a[1, 2]])
    return p, q


def unwrap_log(values, period: complex = 2j * np.pi) -> np.ndarray:
    """Remove jumps of ``period`` multiples from a sequence of log values."""
    values = np.asarray(values, dtype=complex)
    out = values.copy()
    for i in range(1, len(out)):
        jump = np.round(((out[i] - out[i - 1]) / period).real)
        out[i] -= jump * period
    return out

"""Dense complex matrices, minors, triangular factorizations and transposition schedules.

Indices are 0-based throughout: row ``j`` of an ``n x n`` matrix has ``0 <= j < n``.
A transposition position ``k`` swaps entries ``k`` and ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidIndexSets, InvalidMatrix, NotInGLStar, SingularLeadingMinor

SINGULAR_TOL = 1e-10
FACTOR_TOL = 1e-9
MAX_N = 8


def as_matrix(a, *, n_min: int = 1, n_max: int = MAX_N) -> np.ndarray:
    """Validate and convert ``a`` to a square finite complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {arr.shape}")
    if not n_min <= arr.shape[0] <= n_max:
        raise InvalidMatrix(f"dimension {arr.shape[0]} outside [{n_min}, {n_max}]")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    return arr


def index_set(idx: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    """Return ``idx`` as a tuple after checking it is strictly increasing (and inside ``range(n)``)."""
    out = tuple(int(i) for i in idx)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise InvalidIndexSets(f"index set {out} is not strictly increasing")
    if n is not None and out and (out[0] < 0 or out[-1] >= n):
        raise InvalidIndexSets(f"index set {out} outside range({n})")
    return out


def _det_small(m: np.ndarray) -> complex:
    k = m.shape[0]
    if k == 0:
        return 1.0 + 0j
    if k == 1:
        return complex(m[0, 0])
    if k == 2:
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    if k == 3:
        return complex(
            m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
        )
    return complex(np.linalg.det(m))


def minor(a, rows: Sequence[int], cols: Sequence[int]) -> complex:
    """Determinant of ``a[rows][:, cols]``; 1 for empty index sets.

    Rows and columns are taken in the order given, so callers may pass
    permuted index lists to get minors of a conjugated matrix.
    """
    rows, cols = list(rows), list(cols)
    if len(rows) != len(cols):
        raise InvalidIndexSets(f"|rows| = {len(rows)} but |cols| = {len(cols)}")
    a = np.asarray(a)
    return _det_small(a[np.ix_(rows, cols)])


def minor_log_gradient(a, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Gradient of ``log minor(a, rows, cols)`` with respect to the entries of ``a``.

    By Jacobi's formula d log det M = tr(M^{-1} dM), so the partial with
    respect to ``a[rows[i], cols[j]]`` is ``inv(M)[j, i]``.
    """
    a = np.asarray(a)
    g = np.zeros(a.shape, dtype=complex)
    if len(rows) == 0:
        return g
    sub = a[np.ix_(rows, cols)]
    g[np.ix_(rows, cols)] = np.linalg.inv(sub).T
    return g


def minor_gradient(a, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Gradient of ``minor(a, rows, cols)`` (the adjugate transpose embedded in n x n)."""
    a = np.asarray(a)
    g = np.zeros(a.shape, dtype=complex)
    k = len(rows)
    if k == 0:
        return g
    sub = a[np.ix_(rows, cols)]
    if k == 1:
        g[rows[0], cols[0]] = 1.0
        return g
    # cofactors directly, so the gradient stays valid where the minor vanishes
    cof = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            keep_r = [r for r in range(k) if r != i]
            keep_c = [c for c in range(k) if c != j]
            cof[i, j] = (-1) ** (i + j) * _det_small(sub[np.ix_(keep_r, keep_c)])
    g[np.ix_(rows, cols)] = cof
    return g


def minor_scale(a, order: int) -> float:
    """Upper bound on |m| for any minor of the given order: product of the largest singular values."""
    sv = np.linalg.svd(np.asarray(a), compute_uv=False)
    return float(np.prod(sv[:order]))


@dataclass(frozen=True)
class PrincipalMinors:
    """Upper and lower principal minors with padding ``d[0] = d[n+1] = 1``.

    ``plus[j]`` is the minor on rows/columns ``0..j-1`` and ``minus[j]`` the
    minor on ``j-1..n-1``, for ``1 <= j <= n``.
    """

    plus: np.ndarray
    minus: np.ndarray

    @property
    def n(self) -> int:
        return len(self.plus) - 2

    @property
    def upper(self) -> np.ndarray:
        return self.plus[1:-1]

    @property
    def lower(self) -> np.ndarray:
        return self.minus[1:-1]


def principal_minors(a) -> PrincipalMinors:
    a = as_matrix(a)
    n = a.shape[0]
    plus = np.ones(n + 2, dtype=complex)
    minus = np.ones(n + 2, dtype=complex)
    for j in range(1, n + 1):
        plus[j] = minor(a, range(j), range(j))
        minus[j] = minor(a, range(j - 1, n), range(j - 1, n))
    return PrincipalMinors(plus, minus)


def check_gl_star(a, singular_tol: float = SINGULAR_TOL) -> PrincipalMinors:
    """Return the principal minors, raising ``NotInGLStar`` if any is numerically zero."""
    a = as_matrix(a)
    d = principal_minors(a)
    sv = np.linalg.svd(a, compute_uv=False)
    n = a.shape[0]
    for j in range(1, n + 1):
        if abs(d.plus[j]) < singular_tol * np.prod(sv[:j]):
            raise NotInGLStar(j, "upper", abs(d.plus[j]))
        k = n - j + 1
        if abs(d.minus[j]) < singular_tol * np.prod(sv[:k]):
            raise NotInGLStar(j, "lower", abs(d.minus[j]))
    return d


def ldu(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Doolittle elimination without pivoting: ``a = L @ diag(D) @ U`` with L, U unit triangular."""
    u = np.array(a, dtype=complex)
    n = u.shape[0]
    low = np.eye(n, dtype=complex)
    for k in range(n - 1):
        low[k + 1:, k] = u[k + 1:, k] / u[k, k]
        u[k + 1:, k:] -= np.outer(low[k + 1:, k], u[k, k:])
        u[k + 1:, k] = 0.0
    d = np.diag(u).copy()
    u = u / d[:, None]
    np.fill_diagonal(u, 1.0)
    return low, d, u


def _unit_upper_inverse(u: np.ndarray) -> np.ndarray:
    n = u.shape[0]
    inv = solve_triangular(u, np.eye(n, dtype=complex), lower=False, unit_diagonal=True)
    np.fill_diagonal(inv, 1.0)
    return np.triu(inv)


@dataclass(frozen=True)
class TriangularFactorization:
    """Factors with ``a = a_plus @ inv(v_plus) = a_minus @ inv(v_minus)``.

    ``a_plus`` is upper triangular, ``v_plus`` unit lower triangular,
    ``a_minus`` lower triangular and ``v_minus`` unit upper triangular.
    The diagonals are stored as vectors.
    """

    a: np.ndarray
    a_plus: np.ndarray
    v_plus: np.ndarray
    a_minus: np.ndarray
    v_minus: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def delta_plus(self) -> np.ndarray:
        return np.diag(self.a_plus).copy()

    @property
    def delta_minus(self) -> np.ndarray:
        return np.diag(self.a_minus).copy()

    @property
    def delta(self) -> np.ndarray:
        return self.delta_plus / self.delta_minus

    @cached_property
    def v(self) -> np.ndarray:
        """``v = inv(v_minus) @ v_plus``."""
        return np.linalg.solve(self.v_minus, self.v_plus)

    def residuals(self) -> dict[str, float]:
        scale = max(1.0, float(np.linalg.norm(self.a)))
        return {
            "plus": float(np.linalg.norm(self.a @ self.v_plus - self.a_plus)) / scale,
            "minus": float(np.linalg.norm(self.a @ self.v_minus - self.a_minus)) / scale,
        }


def factorize(a, singular_tol: float = SINGULAR_TOL) -> TriangularFactorization:
    """Both triangular factorizations of ``a``; raises ``NotInGLStar`` off the open stratum."""
    a = as_matrix(a)
    check_gl_star(a, singular_tol)
    # a = L D U, so a @ inv(U) = L D is lower triangular
    low, d, up = ldu(a)
    a_minus = low * d[None, :]
    v_minus = _unit_upper_inverse(up)
    # the reversed matrix gives the opposite ordering: a = (R L' R)(R D' R)(R U' R)
    low_r, d_r, up_r = ldu(a[::-1, ::-1])
    a_plus = low_r[::-1, ::-1] * d_r[::-1][None, :]
    v_plus = _unit_upper_inverse(up_r)[::-1, ::-1].copy()
    return TriangularFactorization(a, np.triu(a_plus), np.tril(v_plus), np.tril(a_minus), np.triu(v_minus))


class GaussFactors(NamedTuple):
    b_minus: np.ndarray  # unit lower triangular
    delta: np.ndarray  # diagonal entries
    b_plus: np.ndarray  # unit upper triangular


def gauss_factorize(v, singular_tol: float = SINGULAR_TOL) -> GaussFactors:
    """Write ``v = inv(b_minus) @ diag(delta) @ b_plus`` with unit triangular ``b_minus`` (lower), ``b_plus`` (upper)."""
    v = as_matrix(v)
    n = v.shape[0]
    sv = np.linalg.svd(v, compute_uv=False)
    for j in range(1, n + 1):
        m = minor(v, range(j), range(j))
        if abs(m) < singular_tol * np.prod(sv[:j]):
            raise SingularLeadingMinor(j, abs(m))
    low, d, up = ldu(v)
    b_minus = solve_triangular(low, np.eye(n, dtype=complex), lower=True, unit_diagonal=True)
    b_minus = np.tril(b_minus)
    np.fill_diagonal(b_minus, 1.0)
    return GaussFactors(b_minus, d, up)


def antidiagonal(n: int) -> np.ndarray:
    return np.eye(n)[::-1].copy()


@dataclass(frozen=True)
class PermutationSchedule:
    """A word of adjacent transpositions whose product reverses ``0..n-1``.

    Step ``nu`` swaps positions ``positions[nu]`` and ``positions[nu] + 1``.
    Permutations are kept as index arrays ``perm`` so that conjugating a
    matrix is the exact remapping ``a[perm][:, perm]``.
    """

    n: int
    positions: tuple[int, ...]

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise ValueError("schedules need n >= 2")
        object.__setattr__(self, "positions", tuple(int(k) for k in self.positions))
        if len(self.positions) != n * (n - 1) // 2:
            raise ValueError(f"expected {n * (n - 1) // 2} transpositions, got {len(self.positions)}")
        if any(not 0 <= k < n - 1 for k in self.positions):
            raise ValueError("transposition position out of range")
        if not np.array_equal(self.perms[-1], np.arange(n)[::-1]):
            raise ValueError("schedule does not compose to the antidiagonal permutation")

    def __len__(self) -> int:
        return len(self.positions)

    @cached_property
    def perms(self) -> tuple[np.ndarray, ...]:
        """Partial products ``r_0 = identity, ..., r_N = reversal`` as index arrays."""
        p = np.arange(self.n)
        out = [p.copy()]
        for k in self.positions:
            p[[k, k + 1]] = p[[k + 1, k]]
            out.append(p.copy())
        return tuple(out)

    def permutation_matrix(self, nu: int) -> np.ndarray:
        """Matrix ``r_nu`` with ``r_nu^{-1} a r_nu = conjugate(a, nu)``."""
        return np.eye(self.n, dtype=int)[:, self.perms[nu]]

    def conjugate(self, a, nu: int) -> np.ndarray:
        """``r_nu^{-1} a r_nu`` by index remapping."""
        p = self.perms[nu]
        return np.asarray(a)[np.ix_(p, p)]

    def pair(self, nu: int) -> tuple[int, int]:
        """Original indices ``(i, j)`` swapped at step ``nu`` (i sits at position k before the swap)."""
        p, k = self.perms[nu], self.positions[nu]
        return int(p[k]), int(p[k + 1])

    def block_indices(self, nu: int) -> tuple[list[int], int, int]:
        """Original-coordinate indices ``(J, i, j)`` of the minors used by block ``nu``."""
        p, k = self.perms[nu], self.positions[nu]
        return [int(x) for x in p[:k]], int(p[k]), int(p[k + 1])


def default_schedule(n: int) -> PermutationSchedule:
    """Bubble the first entry to the far right, then the next one, and so on."""
    return PermutationSchedule(n, tuple(k for m in range(n - 1, 0, -1) for k in range(m)))


def reverse_bubble_schedule(n: int) -> PermutationSchedule:
    """Bubble the last entry to the far left first; a second valid schedule."""
    return PermutationSchedule(n, tuple(k for m in range(n - 1) for k in range(n - 2, m - 1, -1)))


def block_reduce(a, schedule: PermutationSchedule, nu: int, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """The 2 x 2 block of step ``nu`` as a matrix of minor ratios of ``r_nu^{-1} a r_nu``."""
    b = schedule.conjugate(as_matrix(a), nu)
    k = schedule.positions[nu]
    jset = list(range(k))
    m0 = minor(b, jset, jset)
    if abs(m0) < singular_tol * minor_scale(b, k):
        raise SingularLeadingMinor(k, abs(m0))
    out = np.empty((2, 2), dtype=complex)
    for r in range(2):
        for c in range(2):
            out[r, c] = minor(b, jset + [k + r], jset + [k + c]) / m0
    return out


def schur_block(a, schedule: PermutationSchedule, nu: int) -> np.ndarray:
    """Same block as ``block_reduce`` via the Schur complement ``D - C A^{-1} B``."""
    b = schedule.conjugate(as_matrix(a), nu)
    k = schedule.positions[nu]
    blk = [k, k + 1]
    d = b[np.ix_(blk, blk)]
    if k == 0:
        return d.copy()
    jset = list(range(k))
    return d - b[np.ix_(blk, jset)] @ np.linalg.solve(b[np.ix_(jset, jset)], b[np.ix_(jset, blk)])


def cofactor_matrix(a) -> np.ndarray:
    """``A = det(a) * inv(a).T``."""
    a = np.asarray(a, dtype=complex)
    return np.linalg.det(a) * np.linalg.inv(a).T


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"n": int(a.shape[0]), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    n = int(obj["n"])
    re = np.asarray(obj["re"], dtype=float).reshape(n, n)
    im = np.asarray(obj.get("im", np.zeros(n * n)), dtype=float).reshape(n, n)
    return as_matrix(re + 1j * im)


def random_gl_star(rng: np.random.Generator, n: int, radius: float = 0.4, min_minor: float = 1e-3) -> np.ndarray:
    """Identity plus entries uniform in the complex disc of the given radius, resampled until
    every principal minor exceeds ``min_minor`` in magnitude."""
    while True:
        r = radius * np.sqrt(rng.uniform(size=(n, n)))
        a = np.eye(n) + r * np.exp(2j * np.pi * rng.uniform(size=(n, n)))
        d = principal_minors(a)
        if min(np.abs(d.plus[1:n + 1]).min(), np.abs(d.minus[1:n + 1]).min()) >= min_minor:
            return a


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed U(n) element: QR of a complex Gaussian with the phases of R removed."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]

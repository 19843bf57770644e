"""Quadratic Poisson bracket on n x n matrices, its Casimirs and Hamiltonian flows.

On coordinate functions the bracket is

    (a_jk, a_lm) = 1/4 [sgn(l - j) - sgn(m - k)] a_jm a_lk,      sgn(0) = 0,

extended to smooth functions by the derivation rule.  The scattering-side
analogues live here as well: the local bracket, which equals ``4 pi i`` times
this one, and the bilinear bracket ``<f, g>`` between two different points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .darboux import DarbouxChart, LogTerm, chart_terms, log_combination, log_combination_gradient
from .errors import StratumExit
from .matgroup import (
    SINGULAR_TOL,
    PermutationSchedule,
    as_matrix,
    default_schedule,
    factorize,
    minor,
    minor_gradient,
    minor_log_gradient,
    principal_minors,
)
from .ode import integrate

FD_STEP = 1e-5

Matrix = np.ndarray


def fd_gradient(f: Callable[[Matrix], complex], a, step: float = FD_STEP) -> np.ndarray:
    """Five-point central differences along each real matrix-unit direction.

    For holomorphic ``f`` the derivative along the real direction ``e_jk`` is
    the complex partial ``df/da_jk``.
    """
    a = np.asarray(a, dtype=complex)
    h = step * max(1.0, float(np.max(np.abs(a))))
    g = np.empty(a.shape, dtype=complex)
    for idx in np.ndindex(a.shape):
        vals = []
        for s in (2, 1, -1, -2):
            b = a.copy()
            b[idx] += s * h
            vals.append(f(b))
        g[idx] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * h)
    return g


@dataclass(frozen=True)
class SmoothFunction:
    """A holomorphic function of the matrix entries with an optional analytic gradient."""

    evaluator: Callable[[Matrix], complex]
    gradient_fn: Callable[[Matrix], Matrix] | None = None
    name: str = ""
    fd_step: float = FD_STEP

    def __call__(self, a) -> complex:
        return complex(self.evaluator(np.asarray(a, dtype=complex)))

    def gradient(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if self.gradient_fn is not None:
            return np.asarray(self.gradient_fn(a), dtype=complex)
        return fd_gradient(self.evaluator, a, self.fd_step)

    def __add__(self, other: "SmoothFunction") -> "SmoothFunction":
        return SmoothFunction(
            lambda a: self(a) + other(a),
            lambda a: self.gradient(a) + other.gradient(a),
            f"({self.name} + {other.name})",
        )

    def __sub__(self, other: "SmoothFunction") -> "SmoothFunction":
        return SmoothFunction(
            lambda a: self(a) - other(a),
            lambda a: self.gradient(a) - other.gradient(a),
            f"({self.name} - {other.name})",
        )

    def __mul__(self, other: "SmoothFunction") -> "SmoothFunction":
        return SmoothFunction(
            lambda a: self(a) * other(a),
            lambda a: self(a) * other.gradient(a) + other(a) * self.gradient(a),
            f"{self.name}*{other.name}",
        )

    def scaled(self, c: complex) -> "SmoothFunction":
        return SmoothFunction(lambda a: c * self(a), lambda a: c * self.gradient(a), f"{c}*{self.name}")

    def compose(self, phi: Callable[[Matrix], Matrix]) -> "SmoothFunction":
        """``f o phi`` with a finite-difference gradient."""
        return SmoothFunction(lambda a: self(phi(a)), None, f"{self.name}∘phi", self.fd_step)


def coordinate(j: int, k: int) -> SmoothFunction:
    def grad(a):
        g = np.zeros(a.shape, dtype=complex)
        g[j, k] = 1.0
        return g

    return SmoothFunction(lambda a: a[j, k], grad, f"a[{j},{k}]")


def minor_function(rows: Sequence[int], cols: Sequence[int]) -> SmoothFunction:
    rows, cols = list(rows), list(cols)
    return SmoothFunction(lambda a: minor(a, rows, cols), lambda a: minor_gradient(a, rows, cols),
                          f"m({rows};{cols})")


def log_minor_function(terms: list[LogTerm], name: str = "") -> SmoothFunction:
    return SmoothFunction(lambda a: log_combination(a, terms), lambda a: log_combination_gradient(a, terms), name)


def casimir_function(j: int) -> SmoothFunction:
    """``phi_j = d+_j / d-_{j+1}`` for ``1 <= j <= n``."""

    def value(a):
        n = a.shape[0]
        return minor(a, range(j), range(j)) / minor(a, range(j, n), range(j, n))

    def grad(a):
        n = a.shape[0]
        lg = minor_log_gradient(a, list(range(j)), list(range(j))) - minor_log_gradient(
            a, list(range(j, n)), list(range(j, n)))
        return value(a) * lg

    return SmoothFunction(value, grad, f"phi_{j}")


def chart_functions(schedule: PermutationSchedule) -> tuple[list[SmoothFunction], list[SmoothFunction]]:
    ps, qs = [], []
    for nu, (pt, qt) in enumerate(chart_terms(schedule)):
        ps.append(log_minor_function(pt, f"p_{nu}"))
        qs.append(log_minor_function(qt, f"q_{nu}"))
    return ps, qs


# --- the bracket ----------------------------------------------------------------------


def _sgn_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.sign(idx[:, None] - idx[None, :]).astype(float)  # S[l, j] = sgn(l - j)


def bracket_tensor(a) -> np.ndarray:
    """``P[j, k, l, m] = (a_jk, a_lm)``."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    s = _sgn_matrix(n)
    coef = 0.25 * (s.T[:, None, :, None] - s.T[None, :, None, :])  # sgn(l-j) - sgn(m-k)
    return coef * np.einsum("jm,lk->jklm", a, a)


def hamiltonian_vector_field(a, grad_h) -> np.ndarray:
    """``X[l, m] = (H, a_lm)`` for a function with gradient ``grad_h`` at ``a``.

    Summing the bracket tensor by hand gives ``X = (C a - a D) / 4`` with
    ``C = S * (G a^T)^T`` and ``D = S^T * (G^T a)``, ``S[l, j] = sgn(l - j)``.
    """
    a = np.asarray(a, dtype=complex)
    g = np.asarray(grad_h, dtype=complex)
    s = _sgn_matrix(a.shape[0])
    c = s * (g @ a.T).T
    d = s.T * (g.T @ a)
    return 0.25 * (c @ a - a @ d)


def bracket(f: SmoothFunction, g: SmoothFunction, a) -> complex:
    a = np.asarray(a, dtype=complex)
    return complex(np.sum(g.gradient(a) * hamiltonian_vector_field(a, f.gradient(a))))


def bracket_function(f: SmoothFunction, g: SmoothFunction) -> SmoothFunction:
    """``(f, g)`` as a new function; its gradient is by finite differences."""
    return SmoothFunction(lambda a: bracket(f, g, a), None, f"({f.name},{g.name})")


def casimir_values(a, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    from .darboux import casimir_values as _cv

    return _cv(a, singular_tol)


# --- conjugation flows --------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalGenerator:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=complex).ravel()
        if abs(mu.sum()) > 1e-14 * max(1.0, float(np.abs(mu).max(initial=0.0))):
            raise ValueError("diagonal generator must be trace free")
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return len(self.mu)

    @classmethod
    def centered(cls, values) -> "DiagonalGenerator":
        v = np.asarray(values, dtype=complex)
        return cls(v - v.mean())


def linear_flow(a0, mu: DiagonalGenerator, t: float) -> np.ndarray:
    """``exp(t mu) a0 exp(-t mu)`` in closed form."""
    a0 = np.asarray(a0, dtype=complex)
    return a0 * np.exp(t * (mu.mu[:, None] - mu.mu[None, :]))


def _hamiltonian_terms(n: int) -> list[list[LogTerm]]:
    """``log delta_jj`` as log-minor combinations, ``delta = delta_-^{-1} delta_+``."""
    out = []
    for j in range(1, n + 1):
        out.append([
            (1, list(range(j - 1, n)), list(range(j - 1, n))),
            (-1, list(range(j, n)), list(range(j, n))),
            (-1, list(range(j)), list(range(j))),
            (1, list(range(j - 1)), list(range(j - 1))),
        ])
    return out


@dataclass(frozen=True)
class FlowHamiltonian:
    value: complex  # sum mu_j log delta_jj from the factorization
    weight_value: complex  # the same from principal-minor ratios
    coefficients: np.ndarray  # c_nu with value = sum c_nu p_nu
    schedule: PermutationSchedule


def chart_coefficients(mu: DiagonalGenerator, schedule: PermutationSchedule) -> np.ndarray:
    """Coefficients ``c_nu = mu_j - mu_i`` for the pair ``(i, j)`` swapped at step ``nu``."""
    return np.array([mu.mu[j] - mu.mu[i] for i, j in (schedule.pair(nu) for nu in range(len(schedule)))])


def flow_hamiltonian(a, mu: DiagonalGenerator, schedule: PermutationSchedule | None = None,
                     singular_tol: float = SINGULAR_TOL) -> FlowHamiltonian:
    a = as_matrix(a, n_min=2)
    n = a.shape[0]
    schedule = schedule or default_schedule(n)
    fac = factorize(a, singular_tol)
    value = complex(np.sum(mu.mu * np.log(fac.delta)))
    d = principal_minors(a)
    ratios = d.minus[1:n + 1] * d.plus[0:n] / (d.minus[2:n + 2] * d.plus[1:n + 1])
    weight = complex(np.sum(mu.mu * np.log(ratios)))
    return FlowHamiltonian(value, weight, chart_coefficients(mu, schedule), schedule)


def flow_hamiltonian_function(mu: DiagonalGenerator) -> SmoothFunction:
    """``H(a) = tr(mu log delta(a))`` with an analytic gradient."""
    terms = _hamiltonian_terms(mu.n)

    def value(a):
        return sum(m * log_combination(a, t) for m, t in zip(mu.mu, terms))

    def grad(a):
        return sum(m * log_combination_gradient(a, t) for m, t in zip(mu.mu, terms))

    return SmoothFunction(value, grad, "tr(mu log delta)")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n, n)
    casimirs: np.ndarray  # (len(times), n)

    @property
    def casimir_drift(self) -> np.ndarray:
        """Per-output-time max deviation of the Casimirs from their initial values."""
        return np.max(np.abs(self.casimirs - self.casimirs[0]), axis=1)


def _stratum_guard(singular_tol: float):
    def check(t, y):
        d = principal_minors(y)
        sv = np.linalg.svd(y, compute_uv=False)
        n = y.shape[0]
        for j in range(1, n + 1):
            if abs(d.plus[j]) < singular_tol * np.prod(sv[:j]) or abs(d.minus[j]) < singular_tol * np.prod(sv[:n - j + 1]):
                raise StratumExit(t, f"principal minor of order {j}")

    return check


def hamiltonian_flow(a0, h: SmoothFunction, t: float, steps: int = 100, rtol: float = 1e-9,
                     atol: float = 1e-12, max_step: float = 1e-2, scale: complex = 1.0,
                     post_step=None, singular_tol: float = SINGULAR_TOL) -> Trajectory:
    """Integrate ``a' = scale * (H, a)`` and sample at ``steps + 1`` evenly spaced times."""
    a0 = as_matrix(a0)
    times = np.linspace(0.0, t, steps + 1)

    def rhs(_, y):
        return scale * hamiltonian_vector_field(y, h.gradient(y))

    sol = integrate(rhs, a0, times, rtol=rtol, atol=atol, max_step=max_step, post_step=post_step,
                    check=_stratum_guard(singular_tol))
    cas = np.array([casimir_values(y) for y in sol.y])
    return Trajectory(times, sol.y, cas)


# --- scattering-side brackets ---------------------------------------------------------------


def local_bracket_tensor(a) -> np.ndarray:
    """``[a_jk, a_lm] = pi i a_jm a_lk [sgn(l - j) - sgn(m - k)]``, written out directly."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    out = np.zeros((n,) * 4, dtype=complex)
    for j, k, l, m in np.ndindex(out.shape):
        out[j, k, l, m] = np.pi * 1j * a[j, m] * a[l, k] * (np.sign(l - j) - np.sign(m - k))
    return out


def local_bracket(f: SmoothFunction, g: SmoothFunction, a) -> complex:
    a = np.asarray(a, dtype=complex)
    return complex(np.einsum("jk,jklm,lm->", f.gradient(a), local_bracket_tensor(a), g.gradient(a)))


def nonlocal_bracket(f: SmoothFunction, g: SmoothFunction, s1, s2) -> complex:
    """``<f, g> = sum df/da_jk(s1) dg/da_lm(s2) a_jk(s1) a_lm(s2) [delta_jl - delta_km]``."""
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    w1 = f.gradient(s1) * s1
    w2 = g.gradient(s2) * s2
    return complex(np.sum(w1.sum(axis=1) * w2.sum(axis=1)) - np.sum(w1.sum(axis=0) * w2.sum(axis=0)))


def epsilon(rows1, cols1, rows2, cols2) -> int:
    return len(set(rows1) & set(rows2)) - len(set(cols1) & set(cols2))


def renormalized_chart(chart: DarbouxChart) -> DarbouxChart:
    """``p -> p / 2`` and ``q -> q / (2 pi i)``."""
    return DarbouxChart(chart.p / 2, chart.q / (2j * np.pi), chart.schedule, chart.casimirs)

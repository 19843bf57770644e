"""Forward scattering for ``psi' = (xi J + q) psi`` with ``J = diag(i lambda)``, and the flow hierarchy.

The solver integrates the bounded function ``m = psi exp(-x xi J)``,

    m' = xi [J, m] + q m,        m(x_0) = 1,

for all spectral nodes at once, and reads off the scattering matrix at the
right end ``x_1`` as ``s = exp(-x_1 xi J) m(x_1) exp(x_1 xi J)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import CubicSpline

from .darboux import chart_terms, log_combination
from .errors import (
    DegeneratePoint,
    FlaggedNodesExceeded,
    InvalidMatrix,
    NormTooLarge,
    NotInGLStar,
    RecursionInconsistency,
    StepFailure,
    OdeFailure,
)
from .matgroup import PermutationSchedule, default_schedule, factorize, matrix_from_json, matrix_to_json
from .ode import integrate
from .poisson import (
    DiagonalGenerator,
    bracket_tensor,
    chart_coefficients,
    chart_functions,
    coordinate,
    local_bracket_tensor,
    nonlocal_bracket,
    bracket,
)

TAIL_TOL = 1e-12
RECURSION_TOL = 1e-5


@dataclass(frozen=True)
class Potential:
    """Matrix potential sampled on the uniform grid ``x0 + h * arange(len(values))``."""

    x0: float
    h: float
    values: np.ndarray  # (N, n, n)
    skew: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise InvalidMatrix(f"potential values must have shape (N, n, n), got {v.shape}")
        if len(v) < 3:
            raise InvalidMatrix("potential needs at least three grid nodes")
        if not np.all(np.isfinite(v)):
            raise InvalidMatrix("potential has non-finite values")
        n = v.shape[1]
        if np.any(v[:, np.arange(n), np.arange(n)] != 0):
            raise InvalidMatrix("potential must have zero diagonal")
        if self.skew and np.abs(v + np.conj(np.swapaxes(v, 1, 2))).max() > 1e-14:
            raise InvalidMatrix("potential flagged skew but q + q* != 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values))

    @property
    def x1(self) -> float:
        return float(self.x[-1])

    def tail(self) -> float:
        return float(max(np.abs(self.values[0]).max(), np.abs(self.values[-1]).max()))

    def l1_norm(self) -> float:
        """``int ||q(x)|| dx`` with the spectral norm, by the trapezoid rule."""
        return float(trapezoid(np.linalg.norm(self.values, ord=2, axis=(1, 2)), dx=self.h))

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.values, axis=0)

    @classmethod
    def from_function(cls, f: Callable[[float], np.ndarray], L: float = 12.0, h: float = 1 / 64,
                      skew: bool = False) -> "Potential":
        n_nodes = int(round(2 * L / h)) + 1
        xs = -L + h * np.arange(n_nodes)
        vals = np.array([f(x) for x in xs], dtype=complex)
        n = vals.shape[1]
        vals[:, np.arange(n), np.arange(n)] = 0.0
        if skew:
            vals = 0.5 * (vals - np.conj(np.swapaxes(vals, 1, 2)))
        return cls(-L, h, vals, skew)

    @classmethod
    def zero(cls, n: int, L: float = 12.0, h: float = 1 / 64) -> "Potential":
        n_nodes = int(round(2 * L / h)) + 1
        return cls(-L, h, np.zeros((n_nodes, n, n), dtype=complex), True)

    def with_values(self, values) -> "Potential":
        return Potential(self.x0, self.h, values, False)

    def to_json(self) -> dict:
        return {"x0": self.x0, "h": self.h, "n_nodes": len(self.values), "n": self.n, "skew": self.skew,
                "matrices": [matrix_to_json(m) for m in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "Potential":
        mats = np.array([matrix_from_json(m) for m in obj["matrices"]])
        if len(mats) != int(obj["n_nodes"]) or mats.shape[1] != int(obj["n"]):
            raise InvalidMatrix("potential header does not match its matrices")
        return cls(float(obj["x0"]), float(obj["h"]), mats, bool(obj.get("skew", False)))


def gaussian_bumps(amplitudes: dict[tuple[int, int], complex], n: int, centers: dict | None = None,
                   width: float = 1.0, L: float = 12.0, h: float = 1 / 64, skew: bool = True) -> Potential:
    """Potential with entries ``q_jk(x) = c_jk exp(-(x - x_jk)^2 / (2 w^2))`` for the given (j, k)."""
    centers = centers or {}

    def f(x):
        q = np.zeros((n, n), dtype=complex)
        for (j, k), c in amplitudes.items():
            q[j, k] = c * np.exp(-((x - centers.get((j, k), 0.0)) ** 2) / (2 * width ** 2))
            if skew:
                q[k, j] = -np.conj(q[j, k])
        return q

    return Potential.from_function(f, L, h, skew)


def three_wave_demo(amplitude: float = 0.12, L: float = 12.0, h: float = 1 / 64) -> Potential:
    """Small skew-hermitian 3 x 3 potential: three offset Gaussian wave packets."""
    amps = {(0, 1): amplitude, (0, 2): amplitude * np.exp(0.7j), (1, 2): amplitude * 1j}
    centers = {(0, 1): -1.0, (0, 2): 0.5, (1, 2): 1.5}
    return gaussian_bumps(amps, 3, centers, 1.0, L, h, skew=True)


@dataclass(frozen=True)
class SpectralConfig:
    lambdas: tuple[float, ...] = (1.0, 0.0, -1.0)
    xi_min: float = -4.0
    xi_max: float = 4.0
    n_xi: int = 257
    rtol: float = 1e-10
    atol: float = 1e-12
    norm_cap: float = 5.0

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if any(b >= a for a, b in zip(lam, lam[1:])):
            raise ValueError("lambdas must be strictly decreasing")
        if self.n_xi < 3:
            raise ValueError("need at least three spectral nodes")

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def J(self) -> np.ndarray:
        return np.diag(1j * np.array(self.lambdas))

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.n_xi)

    @property
    def gaps(self) -> np.ndarray:
        """``J_jj - J_kk = i (lambda_j - lambda_k)``."""
        lam = np.array(self.lambdas)
        return 1j * (lam[:, None] - lam[None, :])

    def provenance(self) -> dict:
        return {"lambdas": list(self.lambdas), "xi_min": self.xi_min, "xi_max": self.xi_max,
                "n_xi": self.n_xi, "rtol": self.rtol, "atol": self.atol}


@dataclass(frozen=True)
class ScatteringRecord:
    xi: np.ndarray
    s: np.ndarray  # (M, n, n)
    s_plus: np.ndarray
    v_plus: np.ndarray
    s_minus: np.ndarray
    v_minus: np.ndarray
    flagged: np.ndarray  # bool (M,), True where the factorization failed
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.s.shape[1]

    @property
    def delta_plus(self) -> np.ndarray:
        return np.diagonal(self.s_plus, axis1=1, axis2=2)

    @property
    def delta_minus(self) -> np.ndarray:
        return np.diagonal(self.s_minus, axis1=1, axis2=2)

    @property
    def delta(self) -> np.ndarray:
        return self.delta_plus / self.delta_minus

    def det_residual(self) -> float:
        return float(np.abs(np.linalg.det(self.s) - 1).max())

    def unitarity_residual(self) -> float:
        eye = np.eye(self.n)
        return float(np.abs(self.s @ np.conj(np.swapaxes(self.s, 1, 2)) - eye).max())

    def factor_residual(self) -> float:
        ok = ~self.flagged
        r1 = np.abs(self.s[ok] @ self.v_plus[ok] - self.s_plus[ok]).max(initial=0.0)
        r2 = np.abs(self.s[ok] @ self.v_minus[ok] - self.s_minus[ok]).max(initial=0.0)
        v1 = np.linalg.solve(self.v_minus[ok], self.v_plus[ok])
        v2 = np.linalg.solve(self.s_minus[ok], self.s_plus[ok])
        return float(max(r1, r2, np.abs(v1 - v2).max(initial=0.0)))

    def reduction_residual(self) -> float:
        """``max |v_+^* v_- - 1|``, which vanishes for unitary data."""
        ok = ~self.flagged
        prod = np.conj(np.swapaxes(self.v_plus[ok], 1, 2)) @ self.v_minus[ok]
        return float(np.abs(prod - np.eye(self.n)).max(initial=0.0))

    def with_s(self, s: np.ndarray, provenance: dict | None = None) -> "ScatteringRecord":
        return _record_from_s(self.xi, s, provenance if provenance is not None else self.provenance)

    def to_json(self) -> dict:
        nodes = []
        for i, x in enumerate(self.xi):
            nodes.append({"xi": float(x), "flagged": bool(self.flagged[i]), "s": matrix_to_json(self.s[i]),
                          "v_plus": matrix_to_json(self.v_plus[i]), "v_minus": matrix_to_json(self.v_minus[i])})
        return {"provenance": self.provenance, "nodes": nodes}

    @classmethod
    def from_json(cls, obj: dict) -> "ScatteringRecord":
        xi = np.array([nd["xi"] for nd in obj["nodes"]])
        s = np.array([matrix_from_json(nd["s"]) for nd in obj["nodes"]])
        return _record_from_s(xi, s, obj.get("provenance", {}))


def _record_from_s(xi, s, provenance) -> ScatteringRecord:
    m, n = s.shape[0], s.shape[1]
    sp = np.tile(np.eye(n, dtype=complex), (m, 1, 1))
    vp, sm, vm = sp.copy(), sp.copy(), sp.copy()
    flagged = np.zeros(m, dtype=bool)
    for i in range(m):
        try:
            f = factorize(s[i])
        except NotInGLStar:
            flagged[i] = True
            continue
        sp[i], vp[i], sm[i], vm[i] = f.a_plus, f.v_plus, f.a_minus, f.v_minus
    return ScatteringRecord(np.asarray(xi, dtype=float), s, sp, vp, sm, vm, flagged, dict(provenance))


def forward_scatter(q: Potential, cfg: SpectralConfig, xi=None) -> ScatteringRecord:
    """Scattering matrix at every spectral node, with its two triangular factorizations."""
    if q.n != cfg.n:
        raise ValueError(f"potential is {q.n} x {q.n} but J has {cfg.n} eigenvalues")
    norm = q.l1_norm()
    if norm > cfg.norm_cap:
        raise NormTooLarge(f"int ||q|| = {norm:.3g} exceeds cap {cfg.norm_cap}")
    if norm >= 1:
        warnings.warn(f"int ||q|| = {norm:.3g} >= 1; uniqueness of the normalized solution is not guaranteed",
                      stacklevel=2)
    xi = cfg.xi if xi is None else np.asarray(xi, dtype=float)
    phase = xi[:, None, None] * cfg.gaps[None, :, :]
    spline = q.spline

    def rhs(x, m):
        return phase * m + spline(x)[None, :, :] @ m

    m0 = np.tile(np.eye(cfg.n, dtype=complex), (len(xi), 1, 1))
    try:
        sol = integrate(rhs, m0, [q.x0, q.x1], rtol=cfg.rtol, atol=cfg.atol, max_step=0.25)
    except StepFailure as exc:
        raise OdeFailure(str(exc)) from exc
    s = sol.y[-1] * np.exp(-q.x1 * phase)
    prov = cfg.provenance() | {"x0": q.x0, "x1": q.x1, "h": q.h, "l1_norm": norm, "tail": q.tail(),
                               "ode_steps": sol.n_accepted}
    return _record_from_s(xi, s, prov)


# --- hierarchy -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class HierarchyTerm:
    k: int
    values: np.ndarray  # (N, n, n)
    compatibility_residual: float = 0.0


def _d_dx(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences along axis 0, one-sided fourth-order stencils at the ends."""
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * h)
    d[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * h)
    return d


def _commutator(a, b):
    return a @ b - b @ a


def _offdiag(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    out = x.copy()
    out[..., np.arange(n), np.arange(n)] = 0.0
    return out


def _diag(x: np.ndarray) -> np.ndarray:
    return x - _offdiag(x)


def recursion_source(q: Potential, f_k: np.ndarray, q_sign: int = 1) -> np.ndarray:
    """``F_k' + q_sign [q, F_k]`` on the grid."""
    return _d_dx(f_k, q.h) + q_sign * _commutator(q.values, f_k)


def hierarchy_terms(q: Potential, mu: DiagonalGenerator, k_max: int, cfg: SpectralConfig | None = None,
                    recursion_tol: float = RECURSION_TOL, q_sign: int = 1) -> list[HierarchyTerm]:
    """``F_0, ..., F_{k_max}`` with ``[J, F_{k+1}] = F_k' + q_sign [q, F_k]`` and ``F_{k+1} = 0`` at the left end.

    The off-diagonal part of ``F_{k+1}`` comes from inverting ``ad J``; its
    diagonal part is fixed by requiring the next source to be off-diagonal,
    ``diag(F_{k+1})' = -q_sign diag([q, F_{k+1}])``, integrated from the left end.

    ``q_sign = 1`` is the textbook form of the recursion.  Its flows are
    isospectral for ``psi' = (xi J - q) psi``; the flows that are isospectral
    for the operator solved by ``forward_scatter`` use ``q_sign = -1``.
    """
    if q_sign not in (1, -1):
        raise ValueError("q_sign must be +1 or -1")
    if k_max > 3:
        raise ValueError("k_max above 3 is not supported")
    cfg = cfg or SpectralConfig(tuple(float(v) for v in np.arange(q.n)[::-1] - (q.n - 1) / 2))
    gaps = cfg.gaps.copy()
    np.fill_diagonal(gaps, 1.0)
    f = np.broadcast_to(np.diag(mu.mu), q.values.shape).astype(complex)
    terms = [HierarchyTerm(0, f, 0.0)]
    scale = max(1.0, float(np.abs(mu.mu).max()))
    for k in range(k_max):
        src = recursion_source(q, f, q_sign)
        resid = float(np.abs(_diag(src)).max())
        if resid > recursion_tol * scale:
            raise RecursionInconsistency(f"diagonal of F_{k}' + [q, F_{k}] is {resid:.3e}")
        off = _offdiag(src) / gaps
        dd = -q_sign * _diag(_commutator(q.values, off))
        diag_part = cumulative_trapezoid(dd, dx=q.h, axis=0, initial=0.0)
        f = off + _diag(diag_part)
        terms[-1] = HierarchyTerm(k, terms[-1].values, resid)
        terms.append(HierarchyTerm(k + 1, f, 0.0))
    last = float(np.abs(_diag(recursion_source(q, f, q_sign))).max())
    terms[-1] = HierarchyTerm(k_max, f, last)
    return terms


def flow_velocity(q: Potential, mu: DiagonalGenerator, k: int, cfg: SpectralConfig | None = None,
                  q_sign: int = -1) -> np.ndarray:
    """``q_t = [J, F_{k+1}(q)]``, which equals the off-diagonal part of ``F_k' + q_sign [q, F_k]``.

    The default ``q_sign = -1`` gives the flows that ``forward_scatter`` linearizes.
    """
    f_k = hierarchy_terms(q, mu, k, cfg, q_sign=q_sign)[-1].values
    return _offdiag(recursion_source(q, f_k, q_sign))


def evolve_scattering(rec: ScatteringRecord, mu: DiagonalGenerator, k: int, t: float) -> ScatteringRecord:
    """``s(xi, t) = exp(t xi^k mu) s(xi) exp(-t xi^k mu)``, refactorized node by node."""
    w = t * rec.xi ** k
    phase = np.exp(w[:, None, None] * (mu.mu[:, None] - mu.mu[None, :])[None, :, :])
    prov = rec.provenance | {"evolved": {"mu": [str(m) for m in mu.mu], "k": k, "t": t}}
    return rec.with_s(rec.s * phase, prov)


@dataclass(frozen=True)
class LinearizationReport:
    residual: float  # for the resolved sign
    sign: int  # +1 if s_t = xi^k [mu, s], -1 if s_t = -xi^k [mu, s]
    residual_plus: float
    residual_minus: float
    dt: float


def linearization_check(q: Potential, mu: DiagonalGenerator, k: int, dt: float, cfg: SpectralConfig,
                        base: ScatteringRecord | None = None, q_sign: int = -1) -> LinearizationReport:
    """Compare a finite-difference time derivative of ``s`` under one Euler step of the flow with ``xi^k [mu, s]``.

    Both signs of the right-hand side are tried and the better one is reported.
    """
    if k > 2:
        raise ValueError("k above 2 is not supported")
    base = base or forward_scatter(q, cfg)
    vel = flow_velocity(q, mu, k, cfg, q_sign)
    stepped = forward_scatter(q.with_values(q.values + dt * vel), cfg, base.xi)
    ds = (stepped.s - base.s) / dt
    pred = (base.xi ** k)[:, None, None] * _commutator(np.diag(mu.mu)[None], base.s)
    rp = float(np.abs(ds - pred).max())
    rm = float(np.abs(ds + pred).max())
    sign = 1 if rp <= rm else -1
    return LinearizationReport(min(rp, rm), sign, rp, rm, dt)


# --- functionals -----------------------------------------------------------------------------------


def p_values(a, schedule: PermutationSchedule) -> np.ndarray:
    return np.array([log_combination(a, pt, nu) for nu, (pt, _) in enumerate(chart_terms(schedule))])


@dataclass(frozen=True)
class HamiltonianReport:
    value: complex  # (1 / 2 pi i) int xi^k tr(mu log delta) dxi
    action_integrals: np.ndarray  # int xi^k p_nu dxi
    coefficients: np.ndarray  # c_nu / (2 pi i)
    decomposition: complex  # sum coefficients * action_integrals


def hierarchy_hamiltonian(rec: ScatteringRecord, mu: DiagonalGenerator, k: int,
                          schedule: PermutationSchedule | None = None,
                          max_flagged: float = 0.01) -> HamiltonianReport:
    if rec.flagged.mean() > max_flagged:
        raise FlaggedNodesExceeded(f"{rec.flagged.sum()} of {len(rec.flagged)} nodes lack a factorization")
    schedule = schedule or default_schedule(rec.n)
    ok = ~rec.flagged
    xi = rec.xi[ok]
    weight = xi ** k
    density = np.sum(mu.mu[None, :] * np.log(rec.delta[ok]), axis=1)
    value = complex(trapezoid(weight * density, xi) / (2j * np.pi))
    pv = np.array([p_values(s, schedule) for s in rec.s[ok]])
    actions = trapezoid(weight[:, None] * pv, xi, axis=0)
    coef = chart_coefficients(mu, schedule) / (2j * np.pi)
    return HamiltonianReport(value, actions, coef, complex(np.sum(coef * actions)))


@dataclass(frozen=True)
class BracketReport:
    local_vs_poisson: float  # max |[a_jk, a_lm] - 4 pi i (a_jk, a_lm)|
    nonlocal_p: float  # max |<p_nu, a_jk>(s(xi), s(eta))|
    renormalized_canonical: float  # max |[p'_mu, q'_nu] - delta_mu_nu|
    nodes_checked: int
    nodes_skipped: int


def pointwise_bracket_check(rec: ScatteringRecord, schedule: PermutationSchedule | None = None,
                            stride: int = 1) -> BracketReport:
    """Pointwise algebraic identities of the scattering-side brackets at each spectral node.

    The renormalized chart ``p' = p / 2, q' = q / (2 pi i)`` is checked through
    ``[p'_mu, q'_nu] = 4 pi i (p_mu / 2, q_nu / (2 pi i)) = (p_mu, q_nu)``.
    """
    n = rec.n
    schedule = schedule or default_schedule(n)
    ps, qs = chart_functions(schedule)
    coords = [coordinate(j, k) for j in range(n) for k in range(n)]
    idx = np.nonzero(~rec.flagged)[0][::stride]
    lp = npb = canon = 0.0
    skipped = 0
    for pos, i in enumerate(idx):
        s = rec.s[i]
        lp = max(lp, float(np.abs(local_bracket_tensor(s) - 4j * np.pi * bracket_tensor(s)).max()))
        s2 = rec.s[idx[(pos + 1) % len(idx)]]
        for p in ps:
            for c in coords:
                npb = max(npb, abs(nonlocal_bracket(p, c, s, s2)))
        try:
            m = np.array([[4j * np.pi * bracket(p.scaled(0.5), qq.scaled(1 / (2j * np.pi)), s) for qq in qs]
                          for p in ps])
            canon = max(canon, float(np.abs(m - np.eye(len(ps))).max()))
        except (DegeneratePoint, np.linalg.LinAlgError):
            skipped += 1
    return BracketReport(lp, npb, canon, len(idx), skipped)

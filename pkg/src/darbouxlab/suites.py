"""Seeded verification suites and experiment drivers used by the command line.

Each suite is a list of named checks.  A check runs a number of seeded
trials, each producing one nonnegative residual, and passes when the largest
residual is within its tolerance.
"""

from __future__ import annotations

import dataclasses
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .darboux import (
    ANTIDIAGONAL,
    TRANSPOSE_INVERSE,
    TangentVector,
    chart_form,
    chart_gradients,
    cofactor_chart3,
    darboux_coordinates,
    omega,
    omega_alt,
    random_direction,
    symmetry_pullback,
    apply_symmetry,
    unwrap_log,
)
from .errors import BranchPathFailure, CoincidentRoots, ConfigError, DegeneratePoint
from .io import record_summary, write_csv, write_json
from .matgroup import (
    MAX_N,
    default_schedule,
    factorize,
    minor,
    random_gl_star,
    random_unitary,
    reverse_bubble_schedule,
)
from .poisson import (
    DiagonalGenerator,
    bracket,
    bracket_function,
    bracket_tensor,
    casimir_function,
    casimir_values,
    chart_coefficients,
    chart_functions,
    coordinate,
    epsilon,
    flow_hamiltonian,
    flow_hamiltonian_function,
    hamiltonian_flow,
    linear_flow,
    local_bracket_tensor,
    minor_function,
    nonlocal_bracket,
)
from .scattering import (
    Potential,
    SpectralConfig,
    evolve_scattering,
    forward_scatter,
    gaussian_bumps,
    hierarchy_hamiltonian,
    linearization_check,
    p_values,
    pointwise_bracket_check,
    three_wave_demo,
)
from .su3 import (
    angle_form_check,
    angle_variables,
    zeta_identity_residual,
    pendulum_flow,
    quadratic_relations,
    random_sl3,
    random_su3,
    theta2_quadrature,
)

SUITES = ("form", "bracket", "casimir", "flows", "su3", "scatter")

DEFAULT_TOLERANCES = {
    "decomposition": 1e-8,
    "omega_alt": 1e-10,
    "antisymmetry": 1e-12,
    "symmetry": 1e-9,
    "schedule_independence": 1e-8,
    "cofactor_chart": 1e-10,
    "bracket_antisymmetry": 1e-9,
    "leibniz": 1e-9,
    "jacobi": 1e-7,
    "canonical": 1e-8,
    "bracket_values": 1e-12,
    "oddness": 1e-9,
    "minor_pairs": 1e-10,
    "nonlocal": 1e-10,
    "local_factor": 1e-12,
    "casimir": 1e-10,
    "casimir_det": 1e-10,
    "unimodular": 1e-10,
    "p_drift": 1e-12,
    "q_rate": 1e-10,
    "hamiltonian_weight": 1e-10,
    "hamiltonian_flow": 1e-7,
    "zeta_identity": 1e-9,
    "actions_drift": 1e-8,
    "energy_drift": 1e-6,
    "omega_ddot": 1e-5,
    "quadratic": 1e-8,
    "theta2": 1e-10,
    "angle_form": 1e-6,
    "zero_potential": 1e-12,
    "born": 5.0,
    "det": 1e-8,
    "unitarity": 1e-7,
    "factor": 1e-8,
    "linearization": 1e-3,
    "p_invariance": 1e-8,
    "hamiltonian_drift": 1e-8,
    "pointwise_local": 1e-12,
}


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n: int = 3
    trials: int = 20
    tolerances: dict = field(default_factory=dict)
    L: float = 12.0
    h: float = 1 / 64
    xi_min: float = -4.0
    xi_max: float = 4.0
    n_xi: int = 257
    su3_t: float = 10.0
    su3_steps: int = 10000
    out_dir: str = "darbouxlab_out"

    def __post_init__(self):
        if not 2 <= self.n <= MAX_N:
            raise ConfigError(f"n must lie in [2, {MAX_N}], got {self.n}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        for key, value in self.tolerances.items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}")
            if not value > 0:
                raise ConfigError(f"tolerance {key!r} must be positive")
        if self.n_xi < 3 or self.su3_steps < 3:
            raise ConfigError("grid counts must be at least 3")
        if self.L <= 0 or self.h <= 0 or 2 * self.L / self.h < 2:
            raise ConfigError("x grid needs L > 0, h > 0 and at least three nodes")
        if not self.xi_max > self.xi_min:
            raise ConfigError("xi_max must exceed xi_min")
        if self.su3_t <= 0:
            raise ConfigError("su3_t must be positive")

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        """Build from string or typed values, e.g. a parsed config file merged with CLI flags."""
        kwargs: dict = {}
        tols = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            if raw is None:
                continue
            if key.startswith("tol_"):
                tols[key[4:]] = _parse_float(key, raw)
            elif key == "tolerances":
                tols.update(raw)
            elif key in types:
                kind = types[key]
                try:
                    kwargs[key] = int(raw) if kind == "int" else float(raw) if kind == "float" else str(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return cls(tolerances=tols, **kwargs)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def spectral(self) -> SpectralConfig:
        lam = tuple(float(v) for v in (self.n - 1) / 2 - np.arange(self.n))
        return SpectralConfig(lam, self.xi_min, self.xi_max, self.n_xi)


def _parse_float(key, raw) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def trial_rng(seed: int, stream: str, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream name, trial index)."""
    ss = np.random.SeedSequence([seed, zlib.crc32(stream.encode()), trial])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class CheckResult:
    name: str
    residuals: tuple[float, ...]
    tolerance: float
    wall_time: float
    skipped: int = 0

    @property
    def max_residual(self) -> float:
        return float(max(self.residuals)) if self.residuals else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.residuals) and self.max_residual <= self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "max_residual": self.max_residual, "tolerance": self.tolerance,
                "passed": self.passed, "wall_time": self.wall_time, "trials": len(self.residuals),
                "skipped": self.skipped}


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: tuple[CheckResult, ...]
    config: dict
    artifacts: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "config": self.config,
                "checks": [c.to_json() for c in self.checks], "artifacts": list(self.artifacts)}

    def trial_rows(self):
        for c in self.checks:
            for i, r in enumerate(c.residuals):
                yield [self.suite, c.name, str(i), r]

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status} {self.suite}.{c.name}: max residual {c.max_residual:.3e} "
                       f"(tol {c.tolerance:.1e}, {len(c.residuals)} trials)")
        return out


class _Skip(Exception):
    pass


def _run_check(cfg: ExperimentConfig, suite: str, name: str, tol_key: str, trials: int,
               fn: Callable[[np.random.Generator], float | list[float]]) -> CheckResult:
    """Run ``fn`` once per trial with its own generator.  ``fn`` may return several residuals."""
    t0 = time.perf_counter()
    res: list[float] = []
    skipped = 0
    for i in range(trials):
        try:
            r = fn(trial_rng(cfg.seed, f"{suite}.{name}", i))
        except (_Skip, DegeneratePoint, CoincidentRoots, BranchPathFailure):
            skipped += 1
            continue
        res.extend(float(v) for v in np.atleast_1d(r))
    return CheckResult(name, tuple(res), cfg.tol(tol_key), time.perf_counter() - t0, skipped)


def _rel(x, y) -> float:
    return abs(x - y) / max(1.0, abs(x), abs(y))


# --- form -----------------------------------------------------------------------------------


def suite_form(cfg: ExperimentConfig) -> list[CheckResult]:
    n = cfg.n
    sched = default_schedule(n)

    def point(rng):
        a = random_gl_star(rng, n)
        return a, random_direction(rng, n), random_direction(rng, n)

    def decomposition(rng):
        a, x1, x2 = point(rng)
        gp, gq = chart_gradients(a, sched)
        return _rel(omega(factorize(a), x1, x2), chart_form(gp, gq, x1, x2))

    def alt(rng):
        a, x1, x2 = point(rng)
        f = factorize(a)
        return _rel(omega(f, x1, x2), omega_alt(f, x1, x2))

    def antisym(rng):
        a, x1, x2 = point(rng)
        f = factorize(a)
        return abs(omega(f, x1, x2) + omega(f, x2, x1)) / max(1.0, abs(omega(f, x1, x2)))

    def symmetry(rng):
        a, x1, x2 = point(rng)
        w = omega(factorize(a), x1, x2)
        t1, t2 = TangentVector(a, x1), TangentVector(a, x2)
        out = []
        for which in (TRANSPOSE_INVERSE, ANTIDIAGONAL):
            out.append(abs(symmetry_pullback(a, which, t1, t2) + w) / max(1.0, abs(w)))
        return out

    def schedules(rng):
        a, x1, x2 = point(rng)
        g1 = chart_gradients(a, sched)
        g2 = chart_gradients(a, reverse_bubble_schedule(n))
        return _rel(chart_form(*g1, x1, x2), chart_form(*g2, x1, x2))

    checks = [
        _run_check(cfg, "form", "decomposition", "decomposition", cfg.trials, decomposition),
        _run_check(cfg, "form", "omega_alt", "omega_alt", cfg.trials, alt),
        _run_check(cfg, "form", "antisymmetry", "antisymmetry", cfg.trials, antisym),
        _run_check(cfg, "form", "symmetry", "symmetry", cfg.trials, symmetry),
        _run_check(cfg, "form", "schedule_independence", "schedule_independence", cfg.trials, schedules),
    ]
    if n == 3:
        def cofactor(rng):
            a = random_gl_star(rng, 3)
            p, q = cofactor_chart3(a)
            ch = darboux_coordinates(a, sched)
            return max(np.abs(p - ch.p).max(), np.abs(np.exp(q) - np.exp(ch.q)).max())

        checks.append(_run_check(cfg, "form", "cofactor_chart", "cofactor_chart", cfg.trials, cofactor))
    return checks


# --- bracket --------------------------------------------------------------------------------


def _random_minor(rng, n):
    k = int(rng.integers(1, n + 1))
    rows = tuple(sorted(rng.choice(n, k, replace=False)))
    cols = tuple(sorted(rng.choice(n, k, replace=False)))
    return rows, cols


def _random_function(rng, n):
    if rng.uniform() < 0.5:
        return coordinate(int(rng.integers(n)), int(rng.integers(n)))
    return minor_function(*_random_minor(rng, n))


def suite_bracket(cfg: ExperimentConfig) -> list[CheckResult]:
    n = cfg.n

    def antisym(rng):
        a = random_gl_star(rng, n)
        f, g = _random_function(rng, n), _random_function(rng, n)
        return abs(bracket(f, g, a) + bracket(g, f, a))

    def leibniz(rng):
        a = random_gl_star(rng, n)
        f, g, h = (_random_function(rng, n) for _ in range(3))
        return abs(bracket(f, g * h, a) - g(a) * bracket(f, h, a) - h(a) * bracket(f, g, a))

    def jacobi(rng):
        a = random_gl_star(rng, n)
        f, g, h = (_random_function(rng, n) for _ in range(3))
        return abs(bracket(bracket_function(f, g), h, a) + bracket(bracket_function(g, h), f, a)
                   + bracket(bracket_function(h, f), g, a))

    ps, qs = chart_functions(default_schedule(n))

    def canonical(rng):
        a = random_gl_star(rng, n)
        pq = np.array([[bracket(p, q, a) for q in qs] for p in ps])
        pp = np.array([[bracket(p, p2, a) for p2 in ps] for p in ps])
        qq = np.array([[bracket(q, q2, a) for q2 in qs] for q in qs])
        return max(np.abs(pq - np.eye(len(ps))).max(), np.abs(pp).max(), np.abs(qq).max())

    def values(rng):
        a = random_gl_star(rng, 2)
        a11, a12, a21, a22 = a.ravel()
        c = coordinate
        # the last value carries a minus sign: (a21, a12) = -a11 a22 / 2
        return [abs(bracket(c(0, 0), c(1, 1), a)),
                abs(bracket(c(0, 0), c(1, 0), a) - a11 * a21 / 4),
                abs(bracket(c(1, 0), c(0, 1), a) + a11 * a22 / 2)]

    def oddness(rng):
        a = random_gl_star(rng, n)
        f, g = _random_function(rng, n), _random_function(rng, n)
        out = []
        for which in (TRANSPOSE_INVERSE, ANTIDIAGONAL):
            phi = lambda m, w=which: apply_symmetry(w, m)  # noqa: E731
            lhs = bracket(f.compose(phi), g.compose(phi), a)
            rhs = bracket(f, g, phi(a))
            out.append(abs(lhs + rhs) / max(1.0, abs(rhs)))
        return out

    def minor_pairs(rng):
        s1, s2 = random_gl_star(rng, n), random_gl_star(rng, n)
        (j, k), (j2, k2) = _random_minor(rng, n), _random_minor(rng, n)
        lhs = nonlocal_bracket(minor_function(j, k), minor_function(j2, k2), s1, s2)
        rhs = epsilon(j, k, j2, k2) * minor(s1, j, k) * minor(s2, j2, k2)
        return _rel(lhs, rhs)

    def nonlocal_zero(rng):
        s1, s2 = random_gl_star(rng, n), random_gl_star(rng, n)
        f = _random_function(rng, n)
        out = [abs(nonlocal_bracket(p, f, s1, s2)) for p in ps]
        out += [abs(nonlocal_bracket(q1, q2, s1, s2)) for q1 in qs for q2 in qs]
        return out

    def local(rng):
        a = random_gl_star(rng, n)
        return float(np.abs(local_bracket_tensor(a) - 4j * np.pi * bracket_tensor(a)).max())

    small = max(1, cfg.trials // 4)
    return [
        _run_check(cfg, "bracket", "antisymmetry", "bracket_antisymmetry", cfg.trials, antisym),
        _run_check(cfg, "bracket", "leibniz", "leibniz", cfg.trials, leibniz),
        _run_check(cfg, "bracket", "jacobi", "jacobi", cfg.trials, jacobi),
        _run_check(cfg, "bracket", "canonical", "canonical", small, canonical),
        _run_check(cfg, "bracket", "bracket_values", "bracket_values", cfg.trials, values),
        _run_check(cfg, "bracket", "oddness", "oddness", small, oddness),
        _run_check(cfg, "bracket", "minor_pairs", "minor_pairs", cfg.trials, minor_pairs),
        _run_check(cfg, "bracket", "nonlocal_zero", "nonlocal", cfg.trials, nonlocal_zero),
        _run_check(cfg, "bracket", "local_factor", "local_factor", cfg.trials, local),
    ]


# --- casimir --------------------------------------------------------------------------------


def suite_casimir(cfg: ExperimentConfig) -> list[CheckResult]:
    n = cfg.n
    phis = [casimir_function(j) for j in range(1, n + 1)]
    coords = [coordinate(k, l) for k in range(n) for l in range(n)]

    def central(rng):
        a = random_gl_star(rng, n)
        return max(abs(bracket(phi, c, a)) for phi in phis for c in coords)

    def det(rng):
        a = random_gl_star(rng, n)
        return abs(casimir_values(a)[-1] - np.linalg.det(a))

    def unimodular(rng):
        u = random_unitary(rng, n)
        try:
            return float(np.abs(np.abs(casimir_values(u)) - 1).max())
        except Exception as exc:  # a Haar point may sit on a singular stratum
            raise _Skip from exc

    return [
        _run_check(cfg, "casimir", "centrality", "casimir", cfg.trials, central),
        _run_check(cfg, "casimir", "last_is_det", "casimir_det", cfg.trials, det),
        _run_check(cfg, "casimir", "unimodular", "unimodular", cfg.trials, unimodular),
    ]


# --- flows ----------------------------------------------------------------------------------


def _random_mu(rng, n) -> DiagonalGenerator:
    return DiagonalGenerator.centered(0.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))


def suite_flows(cfg: ExperimentConfig) -> list[CheckResult]:
    n = cfg.n
    sched = default_schedule(n)
    times = np.linspace(0.0, 1.0, 6)

    def p_drift(rng):
        a, mu = random_gl_star(rng, n), _random_mu(rng, n)
        p0 = darboux_coordinates(a, sched).p
        return max(np.abs(darboux_coordinates(linear_flow(a, mu, t), sched).p - p0).max() for t in times)

    def q_rate(rng):
        # q_nu advances at twice the chart coefficient c_nu = mu_j - mu_i
        a, mu = random_gl_star(rng, n), _random_mu(rng, n)
        qs = np.array([darboux_coordinates(linear_flow(a, mu, t), sched).q for t in times])
        qs = np.array([unwrap_log(col) for col in qs.T]).T
        slope = np.polyfit(times, qs, 1)[0]
        return float(np.abs(slope - 2 * chart_coefficients(mu, sched)).max())

    def weight(rng):
        a, mu = random_gl_star(rng, n), _random_mu(rng, n)
        h = flow_hamiltonian(a, mu, sched)
        return max(abs(h.value - h.weight_value),
                   abs(h.value - np.sum(h.coefficients * darboux_coordinates(a, sched).p)))

    def ham_flow(rng):
        # (H, a) = [mu, a] / 2, so twice the Hamiltonian vector field is the conjugation flow
        a, mu = random_gl_star(rng, n), _random_mu(rng, n)
        traj = hamiltonian_flow(a, flow_hamiltonian_function(mu), 1.0, steps=10, scale=2.0)
        return max(np.abs(s - linear_flow(a, mu, t)).max() / max(1.0, np.abs(s).max())
                   for t, s in zip(traj.times, traj.states))

    return [
        _run_check(cfg, "flows", "p_drift", "p_drift", cfg.trials, p_drift),
        _run_check(cfg, "flows", "q_rate", "q_rate", cfg.trials, q_rate),
        _run_check(cfg, "flows", "hamiltonian_weight", "hamiltonian_weight", cfg.trials, weight),
        _run_check(cfg, "flows", "hamiltonian_flow", "hamiltonian_flow", min(cfg.trials, 5), ham_flow),
    ]


# --- su3 --------------------------------------------------------------------------------------


def _skew_generator(rng) -> np.ndarray:
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = x - x.conj().T
    return x - np.trace(x) / 3 * np.eye(3)


def pendulum_run(cfg: ExperimentConfig):
    a0 = random_su3(trial_rng(cfg.seed, "su3.pendulum", 0))
    return pendulum_flow(a0, cfg.su3_t, steps=cfg.su3_steps)


def pendulum_checks(traj) -> dict[str, float]:
    """Drift and residual summaries of a pendulum trajectory.

    ``omega_ddot`` compares the centered difference of the exact rate
    ``omega'`` with ``-K sin(omega)`` where ``K = rho / I_2^2``.
    """
    dt = traj.times[1] - traj.times[0]
    wdd = (traj.omega_dot[2:] - traj.omega_dot[:-2]) / (2 * dt)
    k = traj.stiffness()[1:-1]
    e = traj.energy()
    quad = max(max(quadratic_relations(s)) for s in traj.states[:: max(1, len(traj.states) // 200)])
    return {
        "actions_drift": traj.action_drift,
        "energy_drift": float(np.abs(e - e[0]).max()),
        "omega_ddot": float(np.abs(wdd + k * np.sin(traj.omega[1:-1])).max()),
        "quadratic": quad,
        "zeta_identity": float(np.max(traj.zeta_identity)),
    }


def suite_su3(cfg: ExperimentConfig) -> tuple[list[CheckResult], object]:
    def ident(rng):
        return [abs(zeta_identity_residual(random_sl3(rng))), abs(zeta_identity_residual(random_su3(rng)))]

    def theta2(rng):
        a = random_su3(rng)
        return abs(angle_variables(a).theta[1] - theta2_quadrature(a))

    def angle_form(rng):
        a = random_su3(rng)
        lhs, rhs = angle_form_check(a, _skew_generator(rng), _skew_generator(rng))
        return abs(lhs - rhs) / max(1.0, abs(rhs))

    checks = [
        _run_check(cfg, "su3", "zeta_identity", "zeta_identity", cfg.trials, ident),
        _run_check(cfg, "su3", "theta2", "theta2", cfg.trials, theta2),
        _run_check(cfg, "su3", "angle_form", "angle_form", max(1, cfg.trials // 2), angle_form),
    ]
    t0 = time.perf_counter()
    traj = pendulum_run(cfg)
    summary = pendulum_checks(traj)
    wall = time.perf_counter() - t0
    for key in ("actions_drift", "energy_drift", "omega_ddot", "quadratic"):
        checks.append(CheckResult(f"pendulum_{key}", (summary[key],), cfg.tol(key), wall))
    return checks, traj


# --- scatter ----------------------------------------------------------------------------------


def demo_potential(n: int, L: float = 12.0, h: float = 1 / 64) -> Potential:
    """The three-wave demo for ``n = 3``, otherwise small Gaussian packets on every upper entry."""
    if n == 3:
        return three_wave_demo(L=L, h=h)
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    amp = 0.25 / len(pairs)
    amps = {pk: amp * np.exp(0.5j * i) for i, pk in enumerate(pairs)}
    centers = {pk: -1.5 + 3.0 * i / max(1, len(pairs) - 1) for i, pk in enumerate(pairs)}
    return gaussian_bumps(amps, n, centers, 1.0, L, h, skew=True)


def born_error(eps: float, scfg: SpectralConfig | None = None, L: float = 12.0, h: float = 1 / 64) -> float:
    """Max entry error of the first Born approximation for the n = 2 bump ``eps exp(-x^2/2)`` (skew)."""
    scfg = scfg or SpectralConfig((0.5, -0.5), n_xi=17)
    q = gaussian_bumps({(0, 1): eps}, 2, L=L, h=h, skew=True)
    rec = forward_scatter(q, scfg)
    # int exp(-x xi (J_j - J_k)) c exp(-x^2/2) dx = c sqrt(2 pi) exp(-(xi g)^2 / 2) with g = J_j - J_k
    err = 0.0
    for i, xi in enumerate(rec.xi):
        born = np.eye(2, dtype=complex)
        for (j, k), c in (((0, 1), eps), ((1, 0), -eps)):
            g = scfg.gaps[j, k]
            born[j, k] += c * np.sqrt(2 * np.pi) * np.exp((xi * g) ** 2 / 2)
        err = max(err, float(np.abs(rec.s[i] - born).max()))
    return err


def scatter_checks(cfg: ExperimentConfig, k: int = 1, dt: float = 1e-4) -> list[CheckResult]:
    scfg = cfg.spectral()
    n = cfg.n
    sched = default_schedule(n)
    checks = []

    def timed(name, tol_key, fn):
        t0 = time.perf_counter()
        r = np.atleast_1d(fn())
        checks.append(CheckResult(name, tuple(float(v) for v in r), cfg.tol(tol_key), time.perf_counter() - t0))

    timed("zero_potential", "zero_potential",
          lambda: np.abs(forward_scatter(Potential.zero(n, cfg.L, cfg.h), scfg).s - np.eye(n)).max())
    eps = 1e-3
    timed("born", "born", lambda: born_error(eps, L=cfg.L, h=cfg.h) / eps ** 2)
    q = demo_potential(n, cfg.L, cfg.h)
    rec = forward_scatter(q, scfg)
    timed("det", "det", rec.det_residual)
    timed("unitarity", "unitarity", lambda: [rec.unitarity_residual(), rec.reduction_residual()])
    timed("factor", "factor", rec.factor_residual)
    mu = DiagonalGenerator.centered(1j * np.linspace(1.0, -0.6, n) ** 2)
    timed("linearization", "linearization", lambda: linearization_check(q, mu, k, dt, scfg, base=rec).residual)

    def invariance():
        p0 = np.array([p_values(s, sched) for s in rec.s])
        h0 = hierarchy_hamiltonian(rec, mu, k, sched).value
        out_p, out_h = 0.0, 0.0
        for t in (0.25, 0.5, 1.0):
            ev = evolve_scattering(rec, mu, k, t)
            out_p = max(out_p, float(np.abs(np.array([p_values(s, sched) for s in ev.s]) - p0).max()))
            h1 = hierarchy_hamiltonian(ev, mu, k, sched).value
            out_h = max(out_h, abs(h1 - h0) / max(abs(h0), 1e-300))
        return out_p, out_h

    t0 = time.perf_counter()
    dp, dh = invariance()
    wall = time.perf_counter() - t0
    checks.append(CheckResult("p_invariance", (dp,), cfg.tol("p_invariance"), wall))
    checks.append(CheckResult("hamiltonian_drift", (dh,), cfg.tol("hamiltonian_drift"), wall))

    def ham_decomposition():
        hr = hierarchy_hamiltonian(rec, mu, k, sched)
        return abs(hr.value - hr.decomposition) / max(abs(hr.value), 1e-300)

    timed("hamiltonian_decomposition", "hamiltonian_drift", ham_decomposition)

    def pointwise():
        b = pointwise_bracket_check(rec, sched, stride=8)
        return [b.local_vs_poisson, b.nonlocal_p]

    timed("pointwise_brackets", "pointwise_local", pointwise)
    return checks


# --- drivers ----------------------------------------------------------------------------------


def run_suite(name: str, cfg: ExperimentConfig, write: bool = True) -> SuiteReport:
    """Run one suite (or ``all``) and, if ``write``, emit ``report_<name>.json`` and ``trials_<name>.csv``."""
    if name not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    names = SUITES if name == "all" else (name,)
    out = Path(cfg.out_dir)
    checks: list[CheckResult] = []
    artifacts = []
    for suite in names:
        if suite == "su3":
            found, traj = suite_su3(cfg)
            if write:
                header, data = traj.csv_rows()
                path = out / "pendulum.csv"
                write_csv(path, header, data)
                artifacts.append(str(path))
        elif suite == "scatter":
            found = scatter_checks(cfg)
        else:
            found = {"form": suite_form, "bracket": suite_bracket, "casimir": suite_casimir,
                     "flows": suite_flows}[suite](cfg)
        prefix = f"{suite}." if name == "all" else ""
        checks.extend(dataclasses.replace(c, name=prefix + c.name) for c in found)
    report = SuiteReport(name, tuple(checks), cfg.to_json(), tuple(artifacts))
    if write:
        csv_path = out / f"trials_{name}.csv"
        write_csv(csv_path, ["suite", "check", "trial", "residual"], report.trial_rows())
        json_path = out / f"report_{name}.json"
        report = dataclasses.replace(report, artifacts=report.artifacts + (str(csv_path), str(json_path)))
        write_json(json_path, report.to_json())
    return report


@dataclass(frozen=True)
class FlowSpec:
    mu: DiagonalGenerator
    k: int
    t: float


def scatter_run(potential: Potential, cfg: ExperimentConfig, flow: FlowSpec | None = None,
                samples: int = 5) -> dict:
    """Scatter a potential, write the record, and optionally evolve it and report chart invariance.

    The invariance report fits ``q_nu(xi, t)`` linearly in ``t`` at every node
    and compares the slope with ``2 xi^k c_nu``.
    """
    lam = tuple(float(v) for v in (potential.n - 1) / 2 - np.arange(potential.n))
    scfg = SpectralConfig(lam, cfg.xi_min, cfg.xi_max, cfg.n_xi)
    sched = default_schedule(potential.n)
    out = Path(cfg.out_dir)
    rec = forward_scatter(potential, scfg)
    write_json(out / "record.json", rec.to_json())
    write_csv(out / "record.csv", *record_summary(rec, sched))
    summary = {"record": str(out / "record.json"), "summary": str(out / "record.csv"),
               "det_residual": rec.det_residual(), "unitarity_residual": rec.unitarity_residual(),
               "flagged": int(rec.flagged.sum())}
    if flow is None:
        return summary
    ev = evolve_scattering(rec, flow.mu, flow.k, flow.t)
    write_json(out / "evolved.json", ev.to_json())
    write_csv(out / "evolved.csv", *record_summary(ev, sched))
    times = np.linspace(0.0, flow.t, samples)
    coef = chart_coefficients(flow.mu, sched)
    p_drift = 0.0
    slope_res = 0.0
    skipped = 0
    ok = ~(rec.flagged | ev.flagged)
    gen = flow.mu.mu[:, None] - flow.mu.mu[None, :]
    for i in np.nonzero(ok)[0]:
        w = rec.xi[i] ** flow.k
        try:
            path = [darboux_coordinates(rec.s[i] * np.exp(t * w * gen), sched) for t in times]
        except DegeneratePoint:
            skipped += 1
            continue
        p = np.array([c.p for c in path])
        qv = np.array([unwrap_log(col) for col in np.array([c.q for c in path]).T]).T
        p_drift = max(p_drift, float(np.abs(p - p[0]).max()))
        if flow.t != 0:
            slope = np.polyfit(times, qv, 1)[0]
            slope_res = max(slope_res, float(np.abs(slope - 2 * rec.xi[i] ** flow.k * coef).max()))
    h0 = hierarchy_hamiltonian(rec, flow.mu, flow.k, sched).value
    h1 = hierarchy_hamiltonian(ev, flow.mu, flow.k, sched).value
    inv = {"p_drift": p_drift, "q_slope_residual": slope_res, "nodes_skipped": skipped,
           "hamiltonian": [h0.real, h0.imag], "hamiltonian_drift": abs(h1 - h0),
           "mu_re": flow.mu.mu.real.tolist(), "mu_im": flow.mu.mu.imag.tolist(), "k": flow.k, "t": flow.t}
    write_json(out / "invariance.json", inv)
    summary.update(evolved=str(out / "evolved.json"), invariance=inv)
    return summary

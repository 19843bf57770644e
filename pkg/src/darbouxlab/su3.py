"""Action-angle variables on SU(3) and the pendulum flow generated by ``log I_2``.

Notation: ``A`` is the cofactor matrix ``det(a) inv(a).T``, ``I_j = a_jj A_jj``,
``zeta = a_11 a_22 a_33``, ``I0 = I2 - I1 - I3 - 1`` and ``rho = sqrt(I1 I2 I3)``.
On SL(3, C) these satisfy

    (zeta I0 + 2 I1 I3)^2 + 4 cos^2(q2 / 2) (zeta - I1)(zeta - I3)(zeta - I1 I3) = 0,

so the cubic ``F + G`` below (the left side with the cosine factor set to one)
governs the angle variables.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .darboux import omega as omega_form
from .elliptic import incomplete_first, incomplete_third, on_principal_path
from .errors import BranchAmbiguity, BranchPathFailure, CoincidentRoots, DegeneratePoint, InvalidMatrix
from .matgroup import as_matrix, cofactor_matrix, factorize, minor_log_gradient, random_unitary
from .ode import integrate
from .poisson import hamiltonian_vector_field

ZERO_TOL = 1e-12


def is_su3(a, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=complex)
    return a.shape == (3, 3) and np.abs(a @ a.conj().T - np.eye(3)).max() <= tol and abs(np.linalg.det(a) - 1) <= tol


def random_su3(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed SU(3) element."""
    q = random_unitary(rng, 3)
    return q / np.linalg.det(q) ** (1 / 3)


def random_sl3(rng: np.random.Generator, radius: float = 0.4) -> np.ndarray:
    a = np.eye(3) + radius * (rng.uniform(-1, 1, (3, 3)) + 1j * rng.uniform(-1, 1, (3, 3)))
    return a / np.linalg.det(a) ** (1 / 3)


def su3_chart(a) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates ``(p1, p2, p3), (q1, q2, q3)`` with

    ``p1 = log(a11 A11)``, ``p2 = log(a11 a22 a33)``, ``p3 = log(a33 A33)``,
    ``q1 = i log(a23 A13 / (a32 A31))``, ``q2 = i log(a21 A31 a32 / (a12 A13 a23))``,
    ``q3 = i log(A13 a12 / (A31 a21))``.
    """
    a = as_matrix(a)
    if a.shape != (3, 3):
        raise InvalidMatrix("su3_chart needs a 3 x 3 matrix")
    c = cofactor_matrix(a)
    scale = max(1.0, float(np.abs(a).max()))
    needed = {"a12": a[0, 1], "a21": a[1, 0], "a23": a[1, 2], "a32": a[2, 1], "A13": c[0, 2], "A31": c[2, 0]}
    for name, v in needed.items():
        if abs(v) < ZERO_TOL * scale ** 2:
            raise DegeneratePoint(-1, f"{name} vanishes")
    p = np.log([a[0, 0] * c[0, 0], a[0, 0] * a[1, 1] * a[2, 2], a[2, 2] * c[2, 2]])
    q = 1j * np.log([
        a[1, 2] * c[0, 2] / (a[2, 1] * c[2, 0]),
        a[1, 0] * c[2, 0] * a[2, 1] / (a[0, 1] * c[0, 2] * a[1, 2]),
        c[0, 2] * a[0, 1] / (c[2, 0] * a[1, 0]),
    ])
    return p, q


def su3_chart_gradients(a) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of the six chart functions, each an array of shape (3, 3, 3)."""
    a = np.asarray(a, dtype=complex)
    g = lambda rows, cols: minor_log_gradient(a, rows, cols)  # noqa: E731
    ga = lambda j, k: g([j], [k])  # noqa: E731

    def gc(j, k):  # log of cofactor A_jk, up to a constant sign
        return g([r for r in range(3) if r != j], [c for c in range(3) if c != k])

    gp = np.array([ga(0, 0) + gc(0, 0), ga(0, 0) + ga(1, 1) + ga(2, 2), ga(2, 2) + gc(2, 2)])
    gq = 1j * np.array([
        ga(1, 2) + gc(0, 2) - ga(2, 1) - gc(2, 0),
        ga(1, 0) + gc(2, 0) + ga(2, 1) - ga(0, 1) - gc(0, 2) - ga(1, 2),
        gc(0, 2) + ga(0, 1) - gc(2, 0) - ga(1, 0),
    ])
    return gp, gq


@dataclass(frozen=True)
class Actions:
    I: np.ndarray  # (I1, I2, I3)
    zeta: complex
    I0: complex
    rho: complex
    omega: float

    @property
    def I1(self) -> complex:
        return self.I[0]

    @property
    def I2(self) -> complex:
        return self.I[1]

    @property
    def I3(self) -> complex:
        return self.I[2]


def actions(a, previous_omega: float | None = None) -> Actions:
    """Actions and the pendulum angle ``omega``.

    ``omega`` is taken as ``-i log(zeta / rho)``, so that ``zeta = rho e^{i omega}``
    holds exactly; on SU(3) it is ``arg zeta``.  When ``previous_omega`` is
    given the 2 pi branch nearest to it is returned.
    """
    a = as_matrix(a)
    c = cofactor_matrix(a)
    i_vals = np.diag(a) * np.diag(c)
    zeta = complex(np.prod(np.diag(a)))
    i0 = i_vals[1] - i_vals[0] - i_vals[2] - 1
    rho = complex(np.sqrt(np.prod(i_vals)))
    if abs(zeta) < ZERO_TOL:
        warnings.warn("zeta is numerically zero; omega is undefined", BranchAmbiguity, stacklevel=2)
        omega = float("nan")
    else:
        omega = complex(-1j * np.log(zeta / rho)).real
        if previous_omega is not None and np.isfinite(previous_omega):
            omega += 2 * np.pi * np.round((previous_omega - omega) / (2 * np.pi))
    return Actions(i_vals, zeta, complex(i0), rho, omega)


def zeta_identity_residual(a) -> complex:
    """Left side of the zeta / cos(q2) identity; vanishes on SL(3, C)."""
    a = as_matrix(a)
    _, q = su3_chart(a)
    st = actions(a)
    i1, _, i3 = st.I
    z = st.zeta
    return complex((z * st.I0 + 2 * i1 * i3) ** 2 + 4 * np.cos(q[1] / 2) ** 2 * (z - i1) * (z - i3) * (z - i1 * i3))


# --- angle variables ----------------------------------------------------------------------


def cubic_roots(I, I0) -> tuple[complex, complex]:
    """Nonzero roots ``alpha, beta`` of ``F + G = zeta (4 zeta^2 + B zeta + C)``.

    ``alpha`` is the root with the larger imaginary part, or the larger real
    part when both are real.  On SU(3) the roots are real or a conjugate pair,
    so this labelling is continuous away from coincident roots.
    """
    i1, _, i3 = I
    b = I0 ** 2 - 4 * (i1 + i3 + i1 * i3)
    c = 4 * i1 * i3 * (I0 + 1 + i1 + i3)
    disc = np.sqrt(complex(b * b - 16 * c))
    r1, r2 = (-b + disc) / 8, (-b - disc) / 8
    # recompute the smaller root from the product to avoid cancellation
    if abs(r1) >= abs(r2) and r1 != 0:
        r2 = c / (4 * r1)
    elif r2 != 0:
        r1 = c / (4 * r2)
    r1, r2 = complex(r1), complex(r2)
    tol = 1e-12 * max(abs(r1), abs(r2), 1e-300)
    if abs(r1.imag - r2.imag) > tol:
        return (r1, r2) if r1.imag > r2.imag else (r2, r1)
    return (r1, r2) if r1.real >= r2.real else (r2, r1)


@dataclass(frozen=True)
class AngleVariables:
    theta: np.ndarray  # complex Theta_1..3
    alpha: complex
    beta: complex
    z: complex
    k2: complex

    @property
    def real(self) -> np.ndarray:
        return self.theta.real


def _w_end(zeta, I, I0, q2) -> complex:
    """Branch of ``sqrt(F + G)`` fixed by the point: ``sin(q2) G / (2 i (zeta I0 + 2 I1 I3))``."""
    i1, _, i3 = I
    g = 4 * (zeta - i1) * (zeta - i3) * (zeta - i1 * i3)
    return complex(np.sin(q2) * g / (2j * (zeta * I0 + 2 * i1 * i3)))


def _third_kind_integral(c, alpha, beta, z, k2) -> complex:
    """``int_alpha^zeta dzeta / (W (zeta - c))`` in the z variable."""
    n = (beta - c) / (alpha - c)
    if abs(n) < 1e-8:
        raise BranchPathFailure("characteristic of the third-kind integral vanishes")
    if not on_principal_path(n * z * z):
        raise BranchPathFailure("third-kind integral crosses its branch cut")
    f1 = incomplete_first(z, k2)
    p3 = incomplete_third(z, n, k2)
    return (f1 / n + (1 - 1 / n) * p3) / (np.sqrt(alpha) * (alpha - c))


def angle_variables(a, root_tol: float = 1e-8, q_ref=None) -> AngleVariables:
    """Angles conjugate to ``I_1, I_2, I_3``, with integrals starting at the root ``alpha``.

    With ``W^2 = F + G`` on the branch fixed by the point,

        Theta_2 = 2i int dzeta / W,
        Theta_1 = q1 / I1 + i int (-2 + (I0 + 2 I3)/(zeta - I1) + I3 (I0 + 2)/(zeta - I1 I3)) dzeta / W,

    and ``Theta_3`` is ``Theta_1`` with the indices 1 and 3 exchanged.  The
    substitution ``z^2 = (zeta - alpha)/(zeta - beta)`` turns these into
    Carlson forms of the first and third kinds.
    """
    a = as_matrix(a)
    _, q = su3_chart(a)
    if q_ref is not None:
        q = q + 2 * np.pi * np.round((np.asarray(q_ref) - q).real / (2 * np.pi))
    st = actions(a)
    I, I0, zeta = st.I, st.I0, st.zeta
    alpha, beta = cubic_roots(I, I0)
    if abs(alpha - beta) < root_tol * abs(alpha):
        raise CoincidentRoots(f"alpha = {alpha}, beta = {beta}")
    if abs(beta) < root_tol * abs(alpha):
        raise CoincidentRoots("beta coincides with the root at zero")
    k2 = beta / alpha
    z2 = (zeta - alpha) / (zeta - beta)
    if not (on_principal_path(z2) and on_principal_path(k2 * z2)):
        raise BranchPathFailure("straight path in z meets a branch point")
    z = np.sqrt(z2)
    w_end = _w_end(zeta, I, I0, q[1])
    w_formula = 2 * z * (alpha - beta) * np.sqrt(alpha) * np.sqrt(1 - k2 * z2) / ((1 - z2) * np.sqrt(1 - z2))
    if abs(w_formula + w_end) < abs(w_formula - w_end):
        z = -z
    first = incomplete_first(z, k2) / np.sqrt(alpha)  # int_alpha^zeta dzeta / W
    i1, _, i3 = I
    theta2 = 2j * first
    theta1 = q[0] / i1 + 1j * (-2 * first + (I0 + 2 * i3) * _third_kind_integral(i1, alpha, beta, z, k2)
                               + i3 * (I0 + 2) * _third_kind_integral(i1 * i3, alpha, beta, z, k2))
    theta3 = q[2] / i3 + 1j * (-2 * first + (I0 + 2 * i1) * _third_kind_integral(i3, alpha, beta, z, k2)
                               + i1 * (I0 + 2) * _third_kind_integral(i1 * i3, alpha, beta, z, k2))
    return AngleVariables(np.array([theta1, theta2, theta3]), alpha, beta, complex(z), complex(k2))


def theta2_quadrature(a, path: str = "z", epsabs: float = 1e-14, pieces: int = 64) -> complex:
    """``2i int_alpha^zeta dzeta / W`` by adaptive quadrature, independent of the Carlson forms.

    ``path="z"`` integrates along the image of the straight segment ``[0, z]``
    under ``zeta = (alpha - beta z^2) / (1 - z^2)``, the contour on which
    :func:`angle_variables` is evaluated.  ``path="straight"`` uses the
    straight segment in ``zeta``; the two agree unless the region between them
    contains a branch point, in which case they differ by a period.

    With ``s`` in [0, 1] parametrizing either contour, ``W = 2 s P(s)`` where
    ``P`` is regular and nonzero; ``P`` is continued from ``P(1) = W_end / 2``.
    """
    a = as_matrix(a)
    _, q = su3_chart(a)
    st = actions(a)
    alpha, beta = cubic_roots(st.I, st.I0)
    zeta1 = st.zeta
    w_end = _w_end(zeta1, st.I, st.I0, q[1])
    if path == "z":
        z2 = (zeta1 - alpha) / (zeta1 - beta)
        if not on_principal_path(z2):
            raise BranchPathFailure("straight path in z meets a branch point")
        c = z2 * (alpha - beta)

        def zeta(s):
            return (alpha - beta * s * s * z2) / (1 - s * s * z2)

        def p_squared(s):
            zt = zeta(s)
            return c * zt * (zt - beta) / (1 - s * s * z2)

        def numerator(s):  # (dzeta / ds) / (2 s)
            return c / (1 - s * s * z2) ** 2
    elif path == "straight":
        d = zeta1 - alpha

        def zeta(s):
            return alpha + s * s * d

        def p_squared(s):
            zt = zeta(s)
            return d * zt * (zt - beta)

        def numerator(s):
            return d
    else:
        raise ValueError(f"unknown path {path!r}")

    knots = np.linspace(0.0, 1.0, pieces + 1)
    refs = np.empty(pieces + 1, dtype=complex)
    refs[-1] = w_end / 2
    for i in range(pieces - 1, -1, -1):
        val = np.sqrt(complex(p_squared(knots[i])))
        refs[i] = val if abs(val - refs[i + 1]) <= abs(val + refs[i + 1]) else -val
    total = 0j
    for i in range(pieces):
        mid = 0.5 * (knots[i] + knots[i + 1])
        ref_mid = np.sqrt(complex(p_squared(mid)))
        if abs(ref_mid - refs[i]) + abs(ref_mid - refs[i + 1]) > abs(ref_mid + refs[i]) + abs(ref_mid + refs[i + 1]):
            ref_mid = -ref_mid

        def integrand(s, ref=ref_mid):
            val = np.sqrt(complex(p_squared(s)))
            if abs(val - ref) > abs(val + ref):
                val = -val
            return numerator(s) / val

        re, _ = quad(lambda s: integrand(s).real, knots[i], knots[i + 1], epsabs=epsabs, epsrel=1e-13, limit=200)
        im, _ = quad(lambda s: integrand(s).imag, knots[i], knots[i + 1], epsabs=epsabs, epsrel=1e-13, limit=200)
        total += re + 1j * im
    return 2j * total


# --- pendulum flow ----------------------------------------------------------------------------


def log_i2_gradient(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return minor_log_gradient(a, [1], [1]) + minor_log_gradient(a, [0, 2], [0, 2])


def pendulum_vector_field(a) -> np.ndarray:
    """``a' = -i (log I_2, a)``."""
    return -1j * hamiltonian_vector_field(a, log_i2_gradient(a))


def polar_projection(a) -> np.ndarray:
    """Nearest unitary matrix, ``a (a* a)^{-1/2}``."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def _abs2(a) -> np.ndarray:
    return (np.abs(a) ** 2).ravel()


@dataclass(frozen=True)
class PendulumTrajectory:
    times: np.ndarray
    states: np.ndarray
    I: np.ndarray  # (T, 3) complex
    rho: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    zeta_identity: np.ndarray
    abs2: np.ndarray  # (T, 9)

    @property
    def action_drift(self) -> float:
        return float(np.abs(self.I - self.I[0]).max())

    @property
    def unitarity_drift(self) -> float:
        eye = np.eye(3)
        return float(max(np.abs(s @ s.conj().T - eye).max() for s in self.states))

    def stiffness(self) -> np.ndarray:
        """``rho / I_2^2``, the constant ``K`` in ``omega'' = -K sin(omega)`` for this flow."""
        return (self.rho / self.I[:, 1] ** 2).real

    def energy(self) -> np.ndarray:
        return 0.5 * self.omega_dot ** 2 - self.stiffness() * np.cos(self.omega)

    def csv_rows(self) -> tuple[list[str], np.ndarray]:
        header = ["t", "I1", "I2", "I3", "omega", "omega_dot", "zeta_identity"] + [
            f"abs2_{j + 1}{k + 1}" for j in range(3) for k in range(3)]
        cols = [self.times, self.I[:, 0].real, self.I[:, 1].real, self.I[:, 2].real, self.omega,
                self.omega_dot, self.zeta_identity]
        data = np.column_stack(cols + [self.abs2])
        return header, data


def omega_rate(a) -> float:
    """``omega'`` from the vector field: ``-i zeta'/zeta = -i sum a'_jj / a_jj``."""
    ad = pendulum_vector_field(a)
    return complex(-1j * np.sum(np.diag(ad) / np.diag(a))).real


def pendulum_flow(a0, t: float, steps: int = 1000, rtol: float = 1e-11, atol: float = 1e-13,
                  max_step: float = 1e-2, reunitarize: bool = True) -> PendulumTrajectory:
    """Integrate the ``log I_2`` flow on SU(3) and sample ``steps + 1`` evenly spaced times."""
    a0 = as_matrix(a0)
    if not is_su3(a0, 1e-8):
        raise InvalidMatrix("pendulum_flow expects an SU(3) starting point")
    times = np.linspace(0.0, t, steps + 1)
    proj = (lambda _, y: polar_projection(y)) if reunitarize else None
    sol = integrate(lambda _, y: pendulum_vector_field(y), a0, times, rtol=rtol, atol=atol,
                    max_step=max_step, post_step=proj)
    i_vals, rho, omega, omega_dot, res, abs2 = [], [], [], [], [], []
    prev = None
    for y in sol.y:
        st = actions(y, prev)
        prev = st.omega
        i_vals.append(st.I)
        rho.append(st.rho)
        omega.append(st.omega)
        omega_dot.append(omega_rate(y))
        res.append(abs(zeta_identity_residual(y)))
        abs2.append(_abs2(y))
    return PendulumTrajectory(times, sol.y, np.array(i_vals), np.array(rho), np.array(omega),
                              np.array(omega_dot), np.array(res), np.array(abs2))


def quadratic_relations(a) -> tuple[float, float]:
    """Max residuals of the sum and product relations for the off-diagonal pairs.

    For distinct ``j, k, l``: ``a_jk A_jk + a_kj A_kj = 1 - I_j - I_k + I_l`` and
    ``(a_jk A_jk)(a_kj A_kj) = I_j I_k + I_l - 2 rho cos(omega)``.
    """
    a = as_matrix(a)
    c = cofactor_matrix(a)
    st = actions(a)
    I = st.I
    worst_sum = worst_prod = 0.0
    for j, k, l in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        x, y = a[j, k] * c[j, k], a[k, j] * c[k, j]
        worst_sum = max(worst_sum, abs(x + y - (1 - I[j] - I[k] + I[l])))
        worst_prod = max(worst_prod, abs(x * y - (I[j] * I[k] + I[l] - 2 * st.rho * np.cos(st.omega))))
    return worst_sum, worst_prod


def paired_roots(I, rho, omega, j: int, k: int) -> tuple[complex, complex]:
    """Roots of ``x^2 - S x + P`` whose roots are ``a_jk A_jk`` and ``a_kj A_kj``."""
    l = 3 - j - k
    s = 1 - I[j] - I[k] + I[l]
    p = I[j] * I[k] + I[l] - 2 * rho * np.cos(omega)
    disc = np.sqrt(complex(s * s - 4 * p))
    return (s + disc) / 2, (s - disc) / 2


def turning_points(traj: PendulumTrajectory, tol: float = 1e-10) -> np.ndarray:
    """Times where ``omega'`` changes sign, refined by bisection on short re-integrations."""
    out = []
    wd = traj.omega_dot
    for i in np.nonzero(np.sign(wd[:-1]) * np.sign(wd[1:]) < 0)[0]:
        lo, hi = 0.0, traj.times[i + 1] - traj.times[i]
        a_lo = traj.states[i]
        f_lo = wd[i]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            sol = integrate(lambda _, y: pendulum_vector_field(y), a_lo, [lo, mid], rtol=1e-12, atol=1e-14)
            f_mid = omega_rate(sol.y[-1])
            if np.sign(f_mid) == np.sign(f_lo):
                lo, a_lo, f_lo = mid, sol.y[-1], f_mid
            else:
                hi = mid
        out.append(traj.times[i] + 0.5 * (lo + hi))
    return np.array(out)


def su3_tangent(a, rng: np.random.Generator) -> np.ndarray:
    """Random tangent ``a X`` with ``X`` traceless skew-hermitian."""
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = x - x.conj().T
    x -= np.trace(x) / 3 * np.eye(3)
    return np.asarray(a) @ x


def angle_form_check(a, x1, x2, step: float = 1e-4, min_step: float = 1e-6, agree: float = 1e-10) -> tuple[complex, complex]:
    """``(sum dI_j ^ dTheta_j, i Omega)`` on the tangents ``a X1, a X2`` (X skew-hermitian).

    Differentials are five-point central differences along the curves
    ``a expm(s X)``, with the chart angles kept on the branch of the base
    point.  The step is halved until two successive estimates agree, which
    matters close to the poles of the angle integrands.
    """
    a = as_matrix(a)
    q0 = su3_chart(a)[1]
    weights = {2: -1 / 12, 1: 8 / 12, -1: -8 / 12, -2: 1 / 12}

    def diffs(x, h):
        d_i = np.zeros(3, dtype=complex)
        d_t = np.zeros(3, dtype=complex)
        for s, w in weights.items():
            b = a @ expm(s * h * x)
            d_i += w * actions(b).I / h
            d_t += w * angle_variables(b, q_ref=q0).theta / h
        return d_i, d_t

    def estimate(h):
        di1, dt1 = diffs(x1, h)
        di2, dt2 = diffs(x2, h)
        return complex(np.sum(di1 * dt2 - di2 * dt1))

    rhs = 1j * omega_form(factorize(a), a @ x1, a @ x2)
    h = step
    lhs = estimate(h)
    while h / 2 >= min_step:
        h /= 2
        nxt = estimate(h)
        done = abs(nxt - lhs) <= agree * max(1.0, abs(nxt))
        lhs = nxt
        if done:
            break
    return lhs, rhs

"""Adaptive Dormand-Prince 5(4) integrator for complex array-valued ODEs.

Written in-house rather than using ``scipy.integrate.solve_ivp`` because the
flows need a projection hook after every accepted step and because the
scattering solver integrates a whole batch of spectral nodes as one state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepFailure

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW


@dataclass(frozen=True)
class OdeSolution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t),) + y0.shape
    n_accepted: int
    n_rejected: int
    n_rhs: int


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_eval,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_step: float = np.inf,
    first_step: float | None = None,
    post_step: Callable[[float, np.ndarray], np.ndarray] | None = None,
    check: Callable[[float, np.ndarray], None] | None = None,
    max_steps: int = 1_000_000,
) -> OdeSolution:
    """Integrate ``y' = rhs(t, y)`` and return the state at each time in ``t_eval``.

    ``t_eval`` must be monotone; the first entry is the initial time.  Steps
    are clipped so that every output time is hit exactly.  ``post_step`` may
    replace the state after each accepted step (e.g. a projection) and
    ``check`` may raise to abort.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_eval),) + y.shape, dtype=complex)
    out[0] = y
    if len(t_eval) == 1:
        return OdeSolution(t_eval, out, 0, 0, 0)
    direction = np.sign(t_eval[-1] - t_eval[0]) or 1.0
    t = float(t_eval[0])
    k1 = rhs(t, y)
    n_rhs = 1
    span = abs(t_eval[-1] - t_eval[0])
    if first_step is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(k1) / scale)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    else:
        h = first_step
    h = min(h, max_step, span)
    min_step = 1e-14 * max(1.0, span)
    accepted = rejected = 0
    stages = [None] * 7
    for idx in range(1, len(t_eval)):
        target = float(t_eval[idx])
        while direction * (target - t) > 0:
            if accepted + rejected > max_steps:
                raise StepFailure(f"step budget exhausted at t = {t:.6g}")
            remaining = abs(target - t)
            last = h >= remaining
            hs = remaining if last else h
            stages[0] = k1
            for s in range(1, 7):
                incr = sum(_A[s][i] * stages[i] for i in range(s) if _A[s][i] != 0.0)
                stages[s] = rhs(t + direction * _C[s] * hs, y + direction * hs * incr)
            n_rhs += 6
            y_new = y + direction * hs * sum(_B[i] * stages[i] for i in range(6) if _B[i] != 0.0)
            err = direction * hs * sum(_E[i] * stages[i] for i in range(7) if _E[i] != 0.0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.max(np.abs(err) / scale))
            if not np.isfinite(err_norm):
                err_norm = np.inf
            if err_norm <= 1.0:
                t = target if last else t + direction * hs
                y = y_new
                k1 = stages[6]
                accepted += 1
                if post_step is not None:
                    y = post_step(t, y)
                    k1 = rhs(t, y)
                    n_rhs += 1
                if check is not None:
                    check(t, y)
                factor = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
                h = min(max(hs, h if last else hs) * factor, max_step)
            else:
                rejected += 1
                h = hs * max(0.2, 0.9 * err_norm ** -0.2)
                if h < min_step:
                    raise StepFailure(f"step size collapsed to {h:.3e} at t = {t:.6g}")
        out[idx] = y
    return OdeSolution(t_eval, out, accepted, rejected, n_rhs)

"""Darboux coordinates, Poisson brackets and scattering data on GL(n, C), with numerical checks."""

from .darboux import DarbouxChart, TangentVector, darboux_coordinates, omega_eval, omega_eval_alt, verify_decomposition
from .matgroup import (
    PermutationSchedule,
    TriangularFactorization,
    default_schedule,
    factorize,
    gauss_factorize,
    minor,
    principal_minors,
)
from .poisson import DiagonalGenerator, SmoothFunction, bracket, flow_hamiltonian, hamiltonian_flow, linear_flow
from .scattering import Potential, ScatteringRecord, SpectralConfig, evolve_scattering, forward_scatter
from .su3 import actions, angle_variables, pendulum_flow, zeta_identity_residual
from .suites import ExperimentConfig, run_suite

__all__ = [
    "DarbouxChart",
    "DiagonalGenerator",
    "ExperimentConfig",
    "PermutationSchedule",
    "Potential",
    "ScatteringRecord",
    "SmoothFunction",
    "SpectralConfig",
    "TangentVector",
    "TriangularFactorization",
    "actions",
    "angle_variables",
    "bracket",
    "darboux_coordinates",
    "default_schedule",
    "evolve_scattering",
    "factorize",
    "flow_hamiltonian",
    "forward_scatter",
    "gauss_factorize",
    "hamiltonian_flow",
    "linear_flow",
    "minor",
    "omega_eval",
    "omega_eval_alt",
    "pendulum_flow",
    "principal_minors",
    "run_suite",
    "verify_decomposition",
    "zeta_identity_residual",
]

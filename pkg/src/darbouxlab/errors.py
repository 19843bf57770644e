"""Exception types raised across the package."""

from __future__ import annotations


class DarbouxLabError(Exception):
    """Base class for all package errors."""


class InvalidMatrix(DarbouxLabError, ValueError):
    pass


class InvalidIndexSets(DarbouxLabError, ValueError):
    pass


class NotInGLStar(DarbouxLabError):
    """A principal minor is too small for the two triangular factorizations to exist."""

    def __init__(self, j: int, side: str, magnitude: float = float("nan")):
        self.j = j
        self.side = side
        self.magnitude = magnitude
        super().__init__(f"{side} principal minor d_{j} is numerically zero (|d| = {magnitude:.3e})")


class SingularLeadingMinor(DarbouxLabError):
    def __init__(self, j: int, magnitude: float = float("nan")):
        self.j = j
        self.magnitude = magnitude
        super().__init__(f"leading minor of order {j} is numerically zero (|m| = {magnitude:.3e})")


class DegeneratePoint(DarbouxLabError):
    """A minor entering a chart coordinate vanishes."""

    def __init__(self, nu: int, detail: str = ""):
        self.nu = nu
        super().__init__(f"chart coordinate {nu} undefined" + (f": {detail}" if detail else ""))


class StepFailure(DarbouxLabError):
    pass


class StratumExit(DarbouxLabError):
    def __init__(self, t: float, detail: str = ""):
        self.t = t
        super().__init__(f"trajectory left the factorizable set at t = {t:.6g}" + (f": {detail}" if detail else ""))


class BranchAmbiguity(UserWarning):
    pass


class CoincidentRoots(DarbouxLabError):
    pass


class BranchPathFailure(DarbouxLabError):
    pass


class NormTooLarge(DarbouxLabError):
    pass


class OdeFailure(DarbouxLabError):
    pass


class RecursionInconsistency(DarbouxLabError):
    pass


class FlaggedNodesExceeded(DarbouxLabError):
    pass


class ConfigError(DarbouxLabError):
    pass


class FileFormatError(DarbouxLabError):
    pass

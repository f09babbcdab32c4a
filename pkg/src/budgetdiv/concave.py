"""Simplex-constrained concave welfare maximization (log and power welfare).

Wraps the multiplicative-update kernel with support cleanup and a KKT
certificate.  The log case backs the Nash product rule: at its optimum the
marginals sum_{i: x in A_i} 1/u_i equal n on the support and are at most n
elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Distribution, Profile

DEFAULT_EPS = 1e-10
DEFAULT_MAX_ITER = 200_000
SUPPORT_THRESHOLD = 1e-9


class SolverError(RuntimeError):
    """Iterative solve failed; carries the last residual for diagnostics."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


@dataclass(frozen=True)
class ConcaveProgram:
    """Welfare maximization instance: log welfare if alpha is None, else power."""

    profile: Profile
    alpha: float = None
    eps: float = DEFAULT_EPS
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"power exponent must lie in (0, 1), got {self.alpha}")
        if not self.eps > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class ConcaveSolution:
    dist: Distribution
    kkt_residual: float
    iterations: int
    converged: bool


def maximize_concave(cp: ConcaveProgram) -> ConcaveSolution:
    """Run welfare ascent; callers decide what to do with non-convergence.

    The returned distribution has shares below 1e-9 zeroed and the rest
    renormalized; kkt_residual is the relative stationarity gap of that
    cleaned distribution (two-sided on its support, one-sided off it).
    """
    mat = np.array(cp.profile.matrix)  # writable copy keeps one kernel signature
    alpha = 0.0 if cp.alpha is None else float(cp.alpha)
    shares, resid, iters = kernels.welfare_ascent(mat, alpha, cp.eps, cp.max_iter)
    converged = resid <= max(cp.eps, 1e-9)
    cleaned = np.where(shares > SUPPORT_THRESHOLD, shares, 0.0)
    cleaned /= cleaned.sum()
    supported, onesided = kernels.stationarity_residual(mat, cleaned, alpha)
    return ConcaveSolution(
        dist=Distribution.from_floats(cleaned),
        kkt_residual=max(supported, onesided),
        iterations=iters,
        converged=converged,
    )


def nash_welfare(profile: Profile, shares) -> float:
    """Nash welfare (product of utilities) of a float share vector."""
    u = profile.matrix @ np.asarray(shares, dtype=float)
    return float(np.prod(u))


def log_nash_welfare(profile: Profile, shares) -> float:
    u = profile.matrix @ np.asarray(shares, dtype=float)
    if np.any(u <= 0.0):
        return -np.inf
    return float(np.log(u).sum())

"""Left null eigenvector of the Laplacian and its gain-scaled variant."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RESIDUAL_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
POSITIVITY_FLOOR = 1e-14


class SingularSystem(ArithmeticError):
    pass


class NonPositive(ArithmeticError):
    pass


@dataclass(frozen=True)
class EigenCentrality:
    nu: np.ndarray
    residual: float


def left_null_eigenvector(net, residual_tol: float = RESIDUAL_TOL) -> EigenCentrality:
    """Normalized ``nu`` with ``nu^T L = 0`` and ``sum(nu) = 1``.

    Solves the stacked system ``[L^T; 1^T] nu = [0, ..., 0, 1]`` by least
    squares.
    """
    lap = net.laplacian if hasattr(net, "laplacian") else np.asarray(net, dtype=float)
    n = lap.shape[0]
    system = np.vstack([lap.T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    nu, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=None)
    if rank < n:
        raise SingularSystem(f"null space of L^T has dimension {n - rank + 1}; graph not connected")
    nu = nu / nu.sum()
    residual = float(np.max(np.abs(nu @ lap)))
    if residual > residual_tol:
        raise SingularSystem(f"left null vector residual {residual:.3e} exceeds {residual_tol:.0e}")
    if np.any(nu <= POSITIVITY_FLOOR):
        raise NonPositive("left null vector has non-positive entries; graph not strongly connected?")
    return EigenCentrality(nu, residual)


def scaled_eigenvector(nu, gamma) -> np.ndarray:
    """Normalized left null vector of ``diag(gamma) L`` given that of ``L``.

    Entry ``i`` is proportional to ``nu_i / gamma_i``.
    """
    nu = np.asarray(nu, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0):
        raise ValueError("gains must be strictly positive")
    w = nu / gamma
    return w / w.sum()

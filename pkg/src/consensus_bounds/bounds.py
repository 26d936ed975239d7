"""Consensus bounds from extremal gain vectors.

For fixed gains the consensus value would be ``nu_gamma^T x0`` with
``nu_gamma`` proportional to ``nu / gamma``.  Minimizing and maximizing that
ratio over the gain box is a linear-fractional program in ``phi = 1/gamma``,
which the Charnes-Cooper substitution turns into an LP.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linprog import LinearProgram, Status, solve_lp
from .spectral import left_null_eigenvector, scaled_eigenvector

TAU_MIN = 1e-12
SNAP_TOL = 1e-9


class DegenerateTau(ArithmeticError):
    pass


class BoundsError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhiBox:
    phi_low: np.ndarray
    phi_high: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.phi_low, dtype=float)
        hi = np.asarray(self.phi_high, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("phi_low and phi_high differ in shape")
        if np.any(lo <= 0) or np.any(lo > hi):
            raise ValueError("need 0 < phi_low <= phi_high")
        object.__setattr__(self, "phi_low", lo)
        object.__setattr__(self, "phi_high", hi)

    @classmethod
    def from_gamma(cls, gamma_low, gamma_high) -> "PhiBox":
        return cls(1.0 / np.asarray(gamma_high, float), 1.0 / np.asarray(gamma_low, float))

    @classmethod
    def from_spec(cls, net, spec) -> "PhiBox":
        return cls.from_gamma(*spec.bounds(net))


@dataclass(frozen=True)
class LinearFractionalProgram:
    """Optimize ``sum(nu * phi * x0) / (nu @ phi)`` over ``phi`` in ``box``."""

    nu: np.ndarray
    x0: np.ndarray
    box: PhiBox
    direction: str

    def objective(self, phi) -> np.ndarray:
        """Objective at one ``phi`` or at each row of a 2-D array of them."""
        w = np.asarray(phi) * self.nu
        return (w @ self.x0) / w.sum(axis=-1)


def build_lfp(nu, x0, box: PhiBox, direction: str) -> LinearFractionalProgram:
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    nu = np.asarray(nu, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if nu.shape != x0.shape or nu.shape != box.phi_low.shape:
        raise ValueError("nu, x0 and box must have the same length")
    return LinearFractionalProgram(nu, x0, box, direction)


def charnes_cooper(lfp: LinearFractionalProgram) -> LinearProgram:
    """LP over ``(chi, tau)`` with ``chi = phi * tau`` and ``tau = 1 / (nu @ phi)``.

    Rows: ``chi - phi_high tau <= 0``, ``-chi + phi_low tau <= 0``,
    ``nu @ chi = 1``; ``tau >= TAU_MIN``.
    """
    nu, x0, box = lfp.nu, lfp.x0, lfp.box
    n = nu.size
    eye = np.eye(n)
    a_ineq = np.block([[eye, -box.phi_high[:, None]],
                       [-eye, box.phi_low[:, None]]])
    a_eq = np.concatenate([nu, [0.0]])[None, :]
    return LinearProgram(
        c=np.concatenate([nu * x0, [0.0]]),
        sense="minimize" if lfp.direction == "min" else "maximize",
        A_ineq=a_ineq, b_ineq=np.zeros(2 * n),
        A_eq=a_eq, b_eq=[1.0],
        var_bounds=[(0.0, None)] * n + [(TAU_MIN, None)],
    )


def solve_lfp(lfp: LinearFractionalProgram, method: str = "auto") -> tuple[float, np.ndarray]:
    """Optimal value and optimal ``phi`` (snapped onto the box corners)."""
    n = lfp.nu.size
    sol = solve_lp(charnes_cooper(lfp), method=method)
    if sol.status is not Status.OPTIMAL:
        raise BoundsError(f"Charnes-Cooper LP returned {sol.status.value}")
    chi, tau = sol.z[:n], sol.z[n]
    if tau <= TAU_MIN * (1 + 1e-6):
        raise DegenerateTau(f"tau sits at its floor ({tau:.3e})")
    phi = np.clip(chi / tau, lfp.box.phi_low, lfp.box.phi_high)
    return float(lfp.objective(phi)), phi


def _snap(gamma, lo, hi, tol=SNAP_TOL):
    gamma = np.where(np.abs(gamma - lo) <= tol, lo, gamma)
    return np.where(np.abs(gamma - hi) <= tol, hi, gamma)


@dataclass(frozen=True)
class BoundsResult:
    alpha_min: float
    alpha_max: float
    gamma_star_low: np.ndarray
    gamma_star_high: np.ndarray
    nu_under: np.ndarray
    nu_over: np.ndarray
    conservative_low: float
    conservative_high: float

    @property
    def gap(self) -> float:
        return self.alpha_max - self.alpha_min

    @property
    def conservative_gap(self) -> float:
        return self.conservative_high - self.conservative_low


def extremal_gamma(nu, x0, gamma_low, gamma_high, direction: str, method: str = "auto"):
    """Gain vector attaining the min or max of ``nu_gamma @ x0`` and that value."""
    box = PhiBox.from_gamma(gamma_low, gamma_high)
    value, phi = solve_lfp(build_lfp(nu, x0, box, direction), method=method)
    gamma = _snap(1.0 / phi, gamma_low, gamma_high)
    return value, gamma


def solve_bounds(net, x0, spec, nu=None, method: str = "auto", check: bool = True) -> BoundsResult:
    """Lower and upper consensus bounds for initial opinions ``x0``.

    ``nu`` may be passed to reuse a precomputed left null vector of ``L``.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({net.n},)")
    if np.any(x0 < 0) or np.any(x0 > 1):
        raise ValueError("opinions must lie in [0, 1]")
    if nu is None:
        nu = left_null_eigenvector(net).nu
    lo, hi = spec.bounds(net)
    _, g_low = extremal_gamma(nu, x0, lo, hi, "min", method)
    _, g_high = extremal_gamma(nu, x0, lo, hi, "max", method)
    nu_under = scaled_eigenvector(nu, g_low)
    nu_over = scaled_eigenvector(nu, g_high)
    c_lo, c_hi = conservative_bounds(x0)
    res = BoundsResult(float(nu_under @ x0), float(nu_over @ x0), g_low, g_high,
                       nu_under, nu_over, c_lo, c_hi)
    if check:
        _check_result(res)
    return res


def _check_result(res: BoundsResult, tol: float = 1e-10) -> None:
    if not (res.conservative_low - tol <= res.alpha_min <= res.alpha_max + tol
            and res.alpha_max <= res.conservative_high + tol):
        raise BoundsError(f"bounds out of order: {res.conservative_low} <= {res.alpha_min} "
                          f"<= {res.alpha_max} <= {res.conservative_high} fails")
    for v in (res.nu_under, res.nu_over):
        if abs(v.sum() - 1) > tol or np.any(v <= 0):
            raise BoundsError("extremal eigenvector is not a positive probability vector")


def conservative_bounds(x0) -> tuple[float, float]:
    x0 = np.asarray(x0, dtype=float)
    return float(x0.min()), float(x0.max())


def vertex_oracle(net, x0, spec, nu=None, chunk: int = 1 << 14) -> tuple[float, float]:
    """Extreme bounds by evaluating every corner of the gain box (n <= 20)."""
    if net.n > 20:
        raise ValueError(f"vertex enumeration refused for n={net.n} > 20")
    if nu is None:
        nu = left_null_eigenvector(net).nu
    lo, hi = spec.bounds(net)
    lfp = build_lfp(nu, x0, PhiBox.from_gamma(lo, hi), "min")
    phi_lo, phi_hi = lfp.box.phi_low, lfp.box.phi_high
    best_lo, best_hi = np.inf, -np.inf
    corners = product((False, True), repeat=net.n)
    while True:
        block = np.array([c for _, c in zip(range(chunk), corners)], dtype=bool)
        if block.size == 0:
            break
        vals = lfp.objective(np.where(block, phi_hi, phi_lo))
        best_lo = min(best_lo, vals.min())
        best_hi = max(best_hi, vals.max())
    return float(best_lo), float(best_hi)

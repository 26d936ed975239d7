"""Uncertain opinion dynamics ``x(k+1) = (I - diag(gamma(k)) L) x(k)``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

CONSENSUS_TOL = 1e-9
MAX_STEPS = 10**6
SLACK = 1e-12
MODELS = ("stubborn", "uniform", "constant")


class NotConverged(RuntimeError):
    """Raised when ``simulate`` hits ``max_steps``; ``.record`` holds the run."""

    def __init__(self, record):
        self.record = record
        super().__init__(f"no consensus after {record.steps} steps "
                         f"(spread {record.spread:.3e})")


@dataclass(frozen=True)
class GammaSpec:
    """Gain bounds ``omega / n_i`` plus the model that produces ``gamma(k)``.

    ``model`` is ``"stubborn"`` (``x_i (1 - x_i) / n_i``), ``"uniform"``
    (i.i.d. uniform on each agent's interval) or ``"constant"`` (the fixed
    vector ``gamma``).
    """

    omega_low: float
    omega_high: float
    model: str = "stubborn"
    gamma: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 < self.omega_low <= self.omega_high <= 1:
            raise ValueError("need 0 < omega_low <= omega_high <= 1, got "
                             f"{self.omega_low}, {self.omega_high}")
        if self.model not in MODELS:
            raise ValueError(f"unknown gamma model {self.model!r}, expected one of {MODELS}")
        if self.model == "constant" and self.gamma is None:
            raise ValueError("constant model needs a gamma vector")

    def bounds(self, net) -> tuple[np.ndarray, np.ndarray]:
        counts = np.asarray(net.neighbor_counts, dtype=float)
        return self.omega_low / counts, self.omega_high / counts


def gamma_stubbornness(x, net) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x * (1 - x) / net.neighbor_counts


def gamma_uniform_random(spec: GammaSpec, net, rng) -> np.ndarray:
    lo, hi = spec.bounds(net)
    return rng.uniform(lo, hi)


def step(x, gamma, net) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x - gamma * (net.laplacian @ x)


def check_assumption2(nu_under, nu_over, gamma, net, x, slack: float = SLACK) -> tuple[bool, bool]:
    """Sign conditions that make the under/over projections monotone."""
    drift = gamma * (net.laplacian @ np.asarray(x, dtype=float))
    return bool(nu_under @ drift <= slack), bool(nu_over @ drift >= -slack)


@dataclass
class TrajectoryRecord:
    states: np.ndarray | None
    theta_under: np.ndarray | None
    theta_over: np.ndarray | None
    flags: np.ndarray | None  # shape (steps, 2): lower / upper condition per transition
    alpha: float
    steps: int
    converged: bool
    spread: float
    x_final: np.ndarray

    @property
    def assumption_held(self) -> bool | None:
        if self.flags is None:
            return None
        return bool(self.flags.all())

    def flag_rates(self) -> tuple[float, float, float]:
        """Per-step satisfaction rates of the lower, upper and joint conditions."""
        if self.flags is None or len(self.flags) == 0:
            return 1.0, 1.0, 1.0
        f = self.flags
        return float(f[:, 0].mean()), float(f[:, 1].mean()), float(f.all(axis=1).mean())


def _gamma_source(spec: GammaSpec, net, lo, hi, rng):
    if spec.model == "stubborn":
        counts = np.asarray(net.neighbor_counts, dtype=float)
        # clamp keeps gamma_i > 0 when an opinion sits at 0 or 1
        return lambda x: np.clip(x * (1 - x) / counts, lo, hi)
    if spec.model == "uniform":
        if rng is None:
            raise ValueError("uniform gamma model needs an rng")
        return lambda x: rng.uniform(lo, hi)
    gamma = np.asarray(spec.gamma, dtype=float)
    if gamma.shape != lo.shape or np.any(gamma < lo * (1 - 1e-12)) or np.any(gamma > hi * (1 + 1e-12)):
        raise ValueError("constant gamma outside its per-agent bounds")
    return lambda x: gamma


def simulate(net, x0, spec: GammaSpec, nu_under=None, nu_over=None, tol: float = CONSENSUS_TOL,
             max_steps: int = MAX_STEPS, rng=None, record_states: bool = True,
             slack: float = SLACK, raise_on_fail: bool = True) -> TrajectoryRecord:
    """Iterate the dynamics until ``max(x) - min(x) <= tol``.

    When both extremal eigenvectors are given the projections are traced and
    the two sign conditions are checked at every transition.
    """
    x = np.array(x0, dtype=float)
    if x.shape != (net.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({net.n},)")
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("opinions must lie in [0, 1]")
    lo, hi = spec.bounds(net)
    gamma_of = _gamma_source(spec, net, lo, hi, rng)
    track = nu_under is not None and nu_over is not None
    lap = net.laplacian
    if net.n > 200:
        lap = sparse.csr_matrix(lap)

    states = [x.copy()] if record_states else None
    th_u, th_o, flags = [], [], []
    if track:
        nu_under = np.asarray(nu_under, dtype=float)
        nu_over = np.asarray(nu_over, dtype=float)
        th_u.append(nu_under @ x)
        th_o.append(nu_over @ x)

    k = 0
    spread = x.max() - x.min()
    while spread > tol and k < max_steps:
        drift = gamma_of(x) * (lap @ x)
        if track:
            flags.append((nu_under @ drift <= slack, nu_over @ drift >= -slack))
        x = x - drift
        k += 1
        spread = x.max() - x.min()
        if track:
            th_u.append(nu_under @ x)
            th_o.append(nu_over @ x)
        if record_states:
            states.append(x.copy())

    rec = TrajectoryRecord(
        states=np.array(states) if record_states else None,
        theta_under=np.array(th_u) if track else None,
        theta_over=np.array(th_o) if track else None,
        flags=np.array(flags, dtype=bool).reshape(-1, 2) if track else None,
        alpha=float((x.max() + x.min()) / 2),
        steps=k,
        converged=bool(spread <= tol),
        spread=float(spread),
        x_final=x,
    )
    if not rec.converged and raise_on_fail:
        raise NotConverged(rec)
    return rec

"""Impulsive budget allocation that pushes the consensus bounds toward a target.

A campaign moves each agent's initial opinion toward ``d`` by a fraction
``u_i``; the allocation is chosen to raise the lower bound (``d = 1``) or to
lower the upper bound (``d = 0``).  The relaxed LP with iterative
redistribution is compared against an influence-power ranking; exhaustive
enumeration gives the optimum on small instances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb, floor

import numpy as np

from .bounds import TAU_MIN, extremal_gamma, solve_bounds
from .dynamics import GammaSpec, gamma_stubbornness, simulate
from .linprog import LinearProgram, Status, solve_lp
from .spectral import left_null_eigenvector, scaled_eigenvector

BRUTE_FORCE_CAP = 10**6
BUDGET_TOL = 1e-9


class TooLarge(ValueError):
    pass


class AllocationError(RuntimeError):
    pass


@dataclass
class ControlProblem:
    """Budget allocation instance.

    ``budget`` defaults to ``n_b * u_max``; ``n_b`` defaults to the number of
    agents the budget can fund at ``u_max``.
    """

    net: object
    x0: np.ndarray
    d: int
    u_max: float
    spec: GammaSpec
    budget: float | None = None
    n_b: int | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (self.net.n,):
            raise ValueError(f"x0 has shape {self.x0.shape}, expected ({self.net.n},)")
        if np.any(self.x0 < 0) or np.any(self.x0 > 1):
            raise ValueError("opinions must lie in [0, 1]")
        if self.d not in (0, 1):
            raise ValueError(f"target d must be 0 or 1, got {self.d}")
        if not 0 <= self.u_max <= 1:
            raise ValueError(f"u_max must be in [0, 1], got {self.u_max}")
        if self.budget is None and self.n_b is None:
            raise ValueError("give a budget or n_b")
        if self.budget is None:
            self.budget = self.n_b * self.u_max
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.n_b is None:
            self.n_b = min(self.net.n, floor(self.budget / self.u_max + BUDGET_TOL)) if self.u_max > 0 else 0
        if not 0 <= self.n_b <= self.net.n:
            raise ValueError(f"n_b must be in [0, {self.net.n}], got {self.n_b}")

    @cached_property
    def nu(self) -> np.ndarray:
        return left_null_eigenvector(self.net).nu

    @cached_property
    def gamma_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.spec.bounds(self.net)

    @property
    def bound_direction(self) -> str:
        return "min" if self.d == 1 else "max"

    def bound_after(self, u) -> float:
        """``alpha_min`` (d = 1) or ``alpha_max`` (d = 0) after applying ``u``."""
        lo, hi = self.gamma_bounds
        value, _ = extremal_gamma(self.nu, apply_control(self.x0, u, self.d), lo, hi,
                                  self.bound_direction)
        return value

    def better(self, a: float, b: float) -> bool:
        return a > b if self.d == 1 else a < b


@dataclass
class AllocationPlan:
    u: np.ndarray
    predicted_bound: float
    strategy: str
    u_max: float
    info: dict = field(default_factory=dict, repr=False)

    @property
    def funded(self) -> np.ndarray:
        return np.flatnonzero(np.isclose(self.u, self.u_max, rtol=0, atol=1e-12) & (self.u > 0))

    @property
    def budget_used(self) -> float:
        return float(self.u.sum())


def apply_control(x0, u, d) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    u = np.asarray(u, dtype=float)
    return d * u + x0 * (1 - u)


def _binary_plan(p: ControlProblem, funded, strategy, **info) -> AllocationPlan:
    u = np.zeros(p.net.n)
    u[list(funded)] = p.u_max
    if u.sum() > p.budget + BUDGET_TOL:
        raise AllocationError(f"{strategy}: plan spends {u.sum()} > budget {p.budget}")
    return AllocationPlan(u, p.bound_after(u), strategy, p.u_max, info)


def relaxed_allocation_lp(nu, x0, d, phi_low, phi_high, u_max, budget, active=None,
                  exact_ucap: bool = True) -> LinearProgram:
    """Relaxed allocation LP over ``(u~, phi~, chi)``.

    ``u~ = phi u chi`` and ``phi~ = phi chi`` with ``chi = 1 / (nu @ phi)``.
    The budget row uses ``phi_low`` in place of the unknown ``phi``, which
    only tightens it.  Agents outside ``active`` get ``u~ = 0``.
    """
    n = nu.size
    if active is None:
        active = np.ones(n, dtype=bool)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if exact_ucap:
        ucap = np.hstack([eye, -u_max * eye, np.zeros((n, 1))])
    else:
        ucap = np.hstack([eye, zero, -u_max * np.ones((n, 1))])
    a_ineq = np.vstack([
        np.hstack([zero, eye, -phi_high[:, None]]),
        np.hstack([zero, -eye, phi_low[:, None]]),
        ucap,
        np.concatenate([1.0 / phi_low, np.zeros(n), [-budget]])[None, :],
    ])
    c = np.concatenate([nu * (d - x0), nu * x0, [0.0]])
    bounds = ([(0.0, None) if a else (0.0, 0.0) for a in active]
              + [(0.0, None)] * n + [(TAU_MIN, None)])
    return LinearProgram(
        c=c, sense="maximize" if d == 1 else "minimize",
        A_ineq=a_ineq, b_ineq=np.zeros(3 * n + 1),
        A_eq=np.concatenate([np.zeros(n), nu, [0.0]])[None, :], b_eq=[1.0],
        var_bounds=bounds,
    )


def maxmin_lp(nu, x0, d, phi_low, phi_high, u_max, budget, active=None) -> LinearProgram:
    """Continuous-``u`` allocation LP that optimizes the bound itself.

    For fixed ``u`` the bound is a Charnes-Cooper LP; replacing it by its
    dual leaves one LP over ``(u, a, b, lam)`` whose optimum is the best
    ``alpha_min`` (d = 1) reachable with fractional ``u``.  For ``d = 0`` the
    opinions are mirrored, since ``alpha_max(x) = 1 - alpha_min(1 - x)``.
    """
    n = nu.size
    x = x0 if d == 1 else 1.0 - x0
    if active is None:
        active = np.ones(n, dtype=bool)
    eye = np.eye(n)
    rows = np.hstack([-np.diag(nu * (1 - x)), -eye, eye, nu[:, None]])
    box = np.concatenate([np.zeros(n), phi_high, -phi_low, [0.0]])[None, :]
    spend = np.concatenate([np.ones(n), np.zeros(2 * n + 1)])[None, :]
    c = np.zeros(3 * n + 1)
    c[-1] = 1.0
    bounds = ([(0.0, u_max) if a else (0.0, 0.0) for a in active]
              + [(0.0, None)] * (2 * n) + [(None, None)])
    return LinearProgram(c=c, sense="maximize", A_ineq=np.vstack([rows, box, spend]),
                         b_ineq=np.concatenate([nu * x, [0.0, budget]]), var_bounds=bounds)


def allocate_corollary1(p: ControlProblem, exact_ucap: bool = True, formulation: str = "joint",
                        bin_tol: float = 1e-6, method: str = "auto") -> AllocationPlan:
    """Relaxed-LP allocation, re-solved until the budget is spent.

    Agents whose recovered ``u_i`` reaches ``u_max`` are frozen there, their
    controlled opinions replace ``x0`` and the LP is solved again for the
    rest.  Budget that the relaxation leaves stranded goes to the unfrozen
    agents with the largest recovered ``u_i``.

    ``formulation="joint"`` is :func:`relaxed_allocation_lp`, optimized jointly over
    allocation and gains; ``"maxmin"`` uses :func:`maxmin_lp` instead.
    ``exact_ucap=False`` caps ``u~ <= u_max chi`` rather than
    ``u~ <= u_max phi~``; under that cap no ``u_i`` can reach ``u_max``.
    """
    if formulation not in ("joint", "maxmin"):
        raise ValueError(f"formulation must be 'joint' or 'maxmin', got {formulation!r}")
    n = p.net.n
    if p.budget <= 0 or p.u_max <= 0:
        return _binary_plan(p, [], "cor1", rounds=0)
    lo, hi = p.gamma_bounds
    phi_low, phi_high = 1.0 / hi, 1.0 / lo
    eps = bin_tol * p.u_max
    x = p.x0.copy()
    frozen = np.zeros(n, dtype=bool)
    remaining = p.budget
    last_u = np.zeros(n)
    rounds = 0
    while remaining >= p.u_max - BUDGET_TOL and not frozen.all():
        if formulation == "joint":
            lp = relaxed_allocation_lp(p.nu, x, p.d, phi_low, phi_high, p.u_max, remaining,
                               active=~frozen, exact_ucap=exact_ucap)
        else:
            lp = maxmin_lp(p.nu, x, p.d, phi_low, phi_high, p.u_max, remaining, active=~frozen)
        sol = solve_lp(lp, method=method)
        if sol.status is not Status.OPTIMAL:
            raise AllocationError(f"allocation LP returned {sol.status.value}")
        rounds += 1
        if formulation == "joint":
            u = np.where(frozen, 0.0, sol.z[:n] / sol.z[n:2 * n])
        else:
            u = np.where(frozen, 0.0, np.clip(sol.z[:n], 0.0, p.u_max))
        if u.sum() > remaining + BUDGET_TOL * max(1.0, remaining):
            raise AllocationError(f"budget row violated: {u.sum()} > {remaining}")
        last_u = u
        slots = floor(remaining / p.u_max + BUDGET_TOL)
        new = np.flatnonzero(~frozen & (u >= p.u_max - eps))
        if new.size == 0:
            break
        new = new[np.argsort(-u[new], kind="stable")][:slots]
        frozen[new] = True
        x[new] = apply_control(x[new], p.u_max, p.d)
        remaining -= p.u_max * new.size

    slots = min(floor(remaining / p.u_max + BUDGET_TOL), int((~frozen).sum()))
    if slots > 0:
        candidates = np.flatnonzero(~frozen)
        order = candidates[np.argsort(-last_u[candidates], kind="stable")]
        frozen[order[:slots]] = True
    return _binary_plan(p, np.flatnonzero(frozen), "cor1", rounds=rounds,
                        exact_ucap=exact_ucap, formulation=formulation)


def influence_power(p: ControlProblem) -> np.ndarray:
    """``rho_i = nu_gamma(0)_i |d - x_i(0)|`` with stubbornness gains at ``x0``."""
    lo, hi = p.gamma_bounds
    gamma0 = np.clip(gamma_stubbornness(p.x0, p.net), lo, hi)
    return scaled_eigenvector(p.nu, gamma0) * np.abs(p.d - p.x0)


def allocate_baseline(p: ControlProblem) -> AllocationPlan:
    rho = influence_power(p)
    top = np.argsort(-rho, kind="stable")[:p.n_b]
    return _binary_plan(p, np.sort(top), "baseline", rho=rho)


def allocate_bruteforce(p: ControlProblem, cap: int = BRUTE_FORCE_CAP) -> AllocationPlan:
    n, k = p.net.n, p.n_b
    total = comb(n, k)
    if total > cap:
        raise TooLarge(f"C({n}, {k}) = {total} subsets exceeds cap {cap}")
    best, best_set = None, ()
    u = np.zeros(n)
    for subset in combinations(range(n), k):
        u[:] = 0.0
        u[list(subset)] = p.u_max
        value = p.bound_after(u)
        if best is None or p.better(value, best):
            best, best_set = value, subset
    return _binary_plan(p, best_set, "brute", evaluated=total)


STRATEGIES = {
    "cor1": allocate_corollary1,
    "baseline": allocate_baseline,
    "brute": allocate_bruteforce,
}


def allocate(p: ControlProblem, strategy: str, **kwargs) -> AllocationPlan:
    try:
        fn = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {sorted(STRATEGIES)}") from None
    return fn(p, **kwargs)


@dataclass
class EvaluationRecord:
    predicted_bound: float
    alpha_min: float
    alpha_max: float
    alphas: np.ndarray
    assumption_held: np.ndarray
    contained: np.ndarray

    @property
    def alpha_mean(self) -> float:
        return float(self.alphas.mean()) if self.alphas.size else float("nan")

    @property
    def containment_rate(self) -> float:
        return float(self.contained.mean()) if self.contained.size else float("nan")

    @property
    def containment_rate_assumption(self) -> float:
        held = self.assumption_held
        return float(self.contained[held].mean()) if held.any() else float("nan")

    def as_row(self) -> dict:
        return {
            "predicted_bound": self.predicted_bound,
            "alpha_min": self.alpha_min,
            "alpha_max": self.alpha_max,
            "trials": int(self.alphas.size),
            "alpha_mean": self.alpha_mean,
            "containment_rate": self.containment_rate,
            "assumption_rate": float(self.assumption_held.mean()) if self.alphas.size else float("nan"),
            "containment_rate_assumption": self.containment_rate_assumption,
        }


def evaluate_allocation(p: ControlProblem, plan: AllocationPlan, trials: int, rng,
                        spec: GammaSpec | None = None, tol: float = 1e-9,
                        max_steps: int = 10**6) -> EvaluationRecord:
    """Simulate the controlled network ``trials`` times and compare with the bounds."""
    spec = spec or p.spec
    xu = apply_control(p.x0, plan.u, p.d)
    res = solve_bounds(p.net, xu, spec, nu=p.nu)
    alphas, held, contained = [], [], []
    for _ in range(trials):
        rec = simulate(p.net, xu, spec, res.nu_under, res.nu_over, tol=tol,
                       max_steps=max_steps, rng=rng, record_states=False)
        alphas.append(rec.alpha)
        held.append(rec.assumption_held)
        contained.append(res.alpha_min - 1e-9 <= rec.alpha <= res.alpha_max + 1e-9)
    return EvaluationRecord(plan.predicted_bound, res.alpha_min, res.alpha_max,
                            np.array(alphas), np.array(held, dtype=bool),
                            np.array(contained, dtype=bool))

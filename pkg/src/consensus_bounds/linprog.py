"""Small dense linear-program solver.

The default backend is a two-phase bounded-variable primal simplex on a dense
tableau.  Entering variables are priced by largest reduced cost with
lowest-index tie-breaks; after a run of degenerate pivots the solver falls
back to Bland's rule until progress resumes, which rules out cycling.
Problems whose tableau would be large are handed to HiGHS' dual simplex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
DEGENERATE_RUN = 30
AUTO_SIMPLEX_LIMIT = 400_000


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _as_rows(a, ncols):
    if a is None:
        return np.zeros((0, ncols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, ncols))
    return a


@dataclass
class LinearProgram:
    """``c @ z`` to minimize or maximize subject to ``A_ineq z <= b_ineq``,
    ``A_eq z = b_eq`` and per-variable bounds (``None``/``inf`` = unbounded).
    Variables default to ``[0, inf)``.
    """

    c: np.ndarray
    sense: str = "minimize"
    A_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    var_bounds: list | np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")
        self.A_ineq = _as_rows(self.A_ineq, n)
        self.A_eq = _as_rows(self.A_eq, n)
        self.b_ineq = np.asarray([] if self.b_ineq is None else self.b_ineq, dtype=float).ravel()
        self.b_eq = np.asarray([] if self.b_eq is None else self.b_eq, dtype=float).ravel()
        for name, a, b in (("ineq", self.A_ineq, self.b_ineq), ("eq", self.A_eq, self.b_eq)):
            if a.shape[1] != n:
                raise ValueError(f"A_{name} has {a.shape[1]} columns, c has {n}")
            if a.shape[0] != b.size:
                raise ValueError(f"A_{name} has {a.shape[0]} rows, b_{name} has {b.size}")
        if self.var_bounds is None:
            self.var_bounds = [(0.0, None)] * n
        if len(self.var_bounds) != n:
            raise ValueError(f"{len(self.var_bounds)} bounds for {n} variables")
        lo = np.array([-np.inf if b[0] is None else b[0] for b in self.var_bounds], dtype=float)
        hi = np.array([np.inf if b[1] is None else b[1] for b in self.var_bounds], dtype=float)
        if np.any(lo > hi):
            raise ValueError("a variable has lower bound above its upper bound")
        self.lower, self.upper = lo, hi

    @property
    def n(self) -> int:
        return self.c.size

    def violation(self, z) -> float:
        """Largest constraint violation of ``z`` (0 when feasible)."""
        z = np.asarray(z, dtype=float)
        v = [0.0]
        if self.b_ineq.size:
            v.append(np.max(self.A_ineq @ z - self.b_ineq))
        if self.b_eq.size:
            v.append(np.max(np.abs(self.A_eq @ z - self.b_eq)))
        v.append(np.max(self.lower - z, initial=0.0))
        v.append(np.max(z - self.upper, initial=0.0))
        return float(max(v))


@dataclass
class LpSolution:
    status: Status
    z: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = field(default=0, repr=False)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def solve_lp(lp: LinearProgram, method: str = "auto") -> LpSolution:
    """Solve ``lp``.  ``method`` is ``"simplex"``, ``"highs"`` or ``"auto"``."""
    if method == "auto":
        rows = lp.A_ineq.shape[0] + lp.A_eq.shape[0]
        cols = lp.n + lp.A_ineq.shape[0] + rows
        method = "simplex" if rows * cols <= AUTO_SIMPLEX_LIMIT else "highs"
    if method == "simplex":
        return _solve_simplex(lp)
    if method == "highs":
        return _solve_highs(lp)
    raise ValueError(f"unknown method {method!r}")


def _solve_highs(lp: LinearProgram) -> LpSolution:
    from scipy.optimize import linprog

    sign = 1.0 if lp.sense == "minimize" else -1.0
    bounds = [(None if np.isinf(l) else l, None if np.isinf(h) else h)
              for l, h in zip(lp.lower, lp.upper)]
    kwargs = dict(A_ub=lp.A_ineq if lp.b_ineq.size else None,
                  b_ub=lp.b_ineq if lp.b_ineq.size else None,
                  A_eq=lp.A_eq if lp.b_eq.size else None,
                  b_eq=lp.b_eq if lp.b_eq.size else None,
                  bounds=bounds, method="highs-ds")
    res = linprog(sign * lp.c, **kwargs)
    if res.status in (2, 3):
        # presolve may report "infeasible" for unbounded problems; settle it
        # with a pure feasibility solve
        feas = linprog(np.zeros(lp.n), **kwargs)
        status = Status.UNBOUNDED if feas.status == 0 else Status.INFEASIBLE
        return LpSolution(status, iterations=res.nit)
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    z = np.asarray(res.x, dtype=float)
    return LpSolution(Status.OPTIMAL, z, float(lp.c @ z), res.nit)


def _standard_form(lp: LinearProgram):
    """Map ``z = offset + M y`` with ``0 <= y <= ub`` and add slack columns.

    Returns ``A y_full = b`` over structural+slack columns, the cost vector,
    the column upper bounds, the mapping and the number of structural columns.
    """
    n = lp.n
    cols = []
    ub = []
    offset = np.zeros(n)
    for j, (lo, hi) in enumerate(zip(lp.lower, lp.upper)):
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            ub.append(hi - lo)
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
            ub.append(np.inf)
        else:
            cols.append((j, 1.0))
            ub.append(np.inf)
            cols.append((j, -1.0))
            ub.append(np.inf)
    mapping = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        mapping[j, k] = s

    m_ineq = lp.A_ineq.shape[0]
    a_rows = np.vstack([lp.A_ineq, lp.A_eq]) if lp.A_eq.size or m_ineq else np.zeros((0, n))
    b_rows = np.concatenate([lp.b_ineq, lp.b_eq])
    a_struct = a_rows @ mapping
    b = b_rows - a_rows @ offset
    m = a_struct.shape[0]
    slack = np.zeros((m, m_ineq))
    slack[np.arange(m_ineq), np.arange(m_ineq)] = 1.0
    a_full = np.hstack([a_struct, slack])
    c = np.concatenate([lp.c @ mapping, np.zeros(m_ineq)])
    if lp.sense == "maximize":
        c = -c
    ub_full = np.concatenate([np.array(ub, dtype=float), np.full(m_ineq, np.inf)])
    return a_full, b, c, ub_full, mapping, offset, len(cols)


class _Tableau:
    """Bounded-variable simplex state: ``T = B^-1 A``, basic values, bound flags."""

    def __init__(self, a, b, ub, basis):
        self.T = a.copy()
        self.ub = ub
        self.basis = np.array(basis, dtype=int)
        self.at_upper = np.zeros(a.shape[1], dtype=bool)
        self.is_basic = np.zeros(a.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.xb = b.copy()
        self.blocked = np.zeros(a.shape[1], dtype=bool)
        self.iterations = 0

    def reduced_costs(self, c):
        return c - c[self.basis] @ self.T

    def run(self, c, max_iter):
        d = self.reduced_costs(c)
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            free = ~self.is_basic & ~self.blocked
            eligible = free & (((~self.at_upper) & (d < -FEAS_TOL)) | (self.at_upper & (d > FEAS_TOL)))
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                return Status.OPTIMAL
            if degenerate >= DEGENERATE_RUN:
                j = cand[0]
            else:
                j = cand[np.argmax(np.abs(d[cand]))]
            direction = -1.0 if self.at_upper[j] else 1.0
            col = self.T[:, j]
            delta = -direction * col  # change of x_B per unit step
            step = self.ub[j]
            leave = -1
            leave_to_upper = False
            dec = delta < -PIVOT_TOL
            if dec.any():
                idx = np.flatnonzero(dec)
                ratios = np.maximum(self.xb[idx], 0.0) / -delta[idx]
                r = np.argmin(ratios)
                if ratios[r] < step:
                    step, leave, leave_to_upper = ratios[r], idx[r], False
                    ties = idx[ratios <= step + 1e-12]
                    if ties.size > 1:
                        leave = ties[np.argmin(self.basis[ties])]
            inc = (delta > PIVOT_TOL) & np.isfinite(self.ub[self.basis])
            if inc.any():
                idx = np.flatnonzero(inc)
                ratios = np.maximum(self.ub[self.basis[idx]] - self.xb[idx], 0.0) / delta[idx]
                r = np.argmin(ratios)
                if ratios[r] < step or (leave >= 0 and ratios[r] <= step + 1e-12
                                        and self.basis[idx[r]] < self.basis[leave]):
                    step, leave, leave_to_upper = ratios[r], idx[r], True
            if not np.isfinite(step):
                return Status.UNBOUNDED
            self.iterations += 1
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self.xb += step * delta
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            entering_value = self.ub[j] - step if self.at_upper[j] else step
            out = self.basis[leave]
            self.pivot(leave, j)
            self.xb[leave] = entering_value
            self.at_upper[out] = leave_to_upper
            self.at_upper[j] = False
            d = d - d[j] * self.T[leave]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        out = self.basis[r]
        self.is_basic[out] = False
        self.is_basic[j] = True
        self.basis[r] = j


def _solve_simplex(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    a, b, c, ub, mapping, offset, n_struct = _standard_form(lp)
    m, ncols = a.shape
    m_ineq = lp.A_ineq.shape[0]
    if np.any(ub < 0):
        return LpSolution(Status.INFEASIBLE)
    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000

    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1
    basis = []
    art_rows = []
    for r in range(m):
        if r < m_ineq and not flip[r]:
            basis.append(n_struct + r)
        else:
            art_rows.append(r)
    n_art = len(art_rows)
    if n_art:
        art = np.zeros((m, n_art))
        art[art_rows, np.arange(n_art)] = 1.0
        a = np.hstack([a, art])
        ub = np.concatenate([ub, np.full(n_art, np.inf)])
        c = np.concatenate([c, np.zeros(n_art)])
        basis = [None] * m
        for k, r in enumerate(art_rows):
            basis[r] = ncols + k
        for r in range(m):
            if basis[r] is None:
                basis[r] = n_struct + r
    tab = _Tableau(a, b, ub, basis)

    if n_art:
        c1 = np.zeros(a.shape[1])
        c1[ncols:] = 1.0
        tab.run(c1, max_iter)
        if tab.xb[tab.basis >= ncols].sum() > FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
            return LpSolution(Status.INFEASIBLE, iterations=tab.iterations)
        tab.blocked[ncols:] = True
        keep = np.ones(m, dtype=bool)
        for r in np.flatnonzero(tab.basis >= ncols):
            row = np.abs(tab.T[r, :ncols])
            row[tab.is_basic[:ncols]] = 0.0
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                value = tab.ub[j] if tab.at_upper[j] else 0.0
                tab.pivot(r, j)
                tab.xb[r] = value
                tab.at_upper[j] = False
            else:
                keep[r] = False  # redundant equality row
        if not keep.all():
            tab.T = tab.T[keep]
            tab.xb = tab.xb[keep]
            tab.basis = tab.basis[keep]
            a, b = a[keep], b[keep]

    status = tab.run(c, max_iter)
    if status is Status.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, iterations=tab.iterations)

    y = np.where(tab.at_upper, tab.ub, 0.0)
    y[~np.isfinite(y)] = 0.0
    y[tab.basis] = 0.0
    # recompute basic values from the original columns to shed pivot drift
    bmat = a[:, tab.basis]
    try:
        y[tab.basis] = np.linalg.solve(bmat, b - a @ y)
    except np.linalg.LinAlgError:
        y[tab.basis] = tab.xb
    z = offset + mapping @ y[:n_struct]
    z = np.clip(z, lp.lower, lp.upper)
    return LpSolution(Status.OPTIMAL, z, float(lp.c @ z), tab.iterations)

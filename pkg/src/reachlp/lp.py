"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Every LP in the package goes through :func:`solve_lp`.  The solver works on a
full tableau, which is adequate for the desk-scale problems built here (a few
dozen rows, a few thousand columns at most) and keeps the pivot sequence a
pure function of the input bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg.blas import dger

from .errors import IterationLimit, MalformedProblem, NumericalError

TOL_FEAS = 1e-9
TOL_GAP = 1e-7
MAX_PIVOTS = 100_000

# reduced-cost / pivot-element thresholds inside the tableau
_TOL_RC = 1e-10
_TOL_PIV = 1e-10

LE, EQ, GE = "<=", "=", ">="
_REL_ALIASES = {"<=": LE, "≤": LE, "le": LE, "=": EQ, "==": EQ, "eq": EQ, ">=": GE, "≥": GE, "ge": GE}

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``sense`` c^T x subject to ``A x (rel) rhs``.

    ``free[j]`` marks variable j as unrestricted; all others are nonnegative.
    """

    objective: np.ndarray
    A: np.ndarray
    rhs: np.ndarray
    relations: Sequence[str]
    sense: str = "max"
    free: Optional[np.ndarray] = None

    @classmethod
    def from_rows(cls, sense, objective, rows, free=None):
        """Build from ``[(coeffs, relation, rhs), ...]``."""
        n = len(objective)
        if rows:
            A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), -1)
        else:
            A = np.zeros((0, n))
        rel = [r[1] for r in rows]
        rhs = np.array([r[2] for r in rows], dtype=float)
        return cls(np.asarray(objective, dtype=float), A, rhs, rel, sense, free)

    @property
    def n(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LPSolution:
    status: str
    x: Optional[np.ndarray]
    objective: Optional[float]
    duals: Optional[np.ndarray]
    iterations: int
    phase1_value: float
    # infeasible: w with w^T rhs < 0 and w^T A >= 0 (nonneg vars), = 0 (free vars),
    # w >= 0 on <= rows, w <= 0 on >= rows
    farkas: Optional[np.ndarray] = None
    # unbounded: feasible direction along which the objective improves without limit
    ray: Optional[np.ndarray] = None
    gap: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _validate(p: LinearProgram):
    c = np.asarray(p.objective, dtype=float).ravel()
    n = c.size
    if n == 0:
        raise MalformedProblem("linear program needs at least one variable")
    A = np.asarray(p.A, dtype=float)
    if A.size == 0:
        A = A.reshape(0, n)
    if A.ndim != 2 or A.shape[1] != n:
        raise MalformedProblem(f"constraint matrix shape {A.shape} does not match {n} variables")
    m = A.shape[0]
    rhs = np.asarray(p.rhs, dtype=float).ravel()
    if rhs.size != m:
        raise MalformedProblem(f"{rhs.size} right-hand sides for {m} constraints")
    if len(p.relations) != m:
        raise MalformedProblem(f"{len(p.relations)} relations for {m} constraints")
    try:
        rel = np.array([_REL_ALIASES[r] for r in p.relations], dtype=object)
    except KeyError as exc:
        raise MalformedProblem(f"unknown relation {exc.args[0]!r}") from None
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
        raise MalformedProblem("non-finite data")
    if p.sense not in ("max", "min"):
        raise MalformedProblem(f"unknown sense {p.sense!r}")
    if p.free is None:
        free = np.zeros(n, dtype=bool)
    else:
        free = np.asarray(p.free, dtype=bool).ravel()
        if free.size != n:
            raise MalformedProblem("free mask length does not match variables")
    return c, A, rhs, rel, free


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    # T is Fortran-ordered so the rank-1 update runs in place
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    out = dger(-1.0, col, T[r].copy(), a=T, overwrite_a=True)
    if out is not T:
        T[...] = out


def _bland(T, basis, ncols, max_iter, count):
    """Run Bland-rule pivots on tableau T (last row = reduced costs).

    Returns (status, entering column or -1, pivot count).
    """
    m = T.shape[0] - 1
    while True:
        cand = np.flatnonzero(T[-1, :ncols] < -_TOL_RC)
        if cand.size == 0:
            return OPTIMAL, -1, count
        j = int(cand[0])
        colj = T[:m, j]
        pos = np.flatnonzero(colj > _TOL_PIV)
        if pos.size == 0:
            return UNBOUNDED, j, count
        ratios = T[pos, -1] / colj[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
        r = int(ties[np.argmin(basis[ties])])
        if count >= max_iter:
            raise IterationLimit(f"simplex exceeded {max_iter} pivots")
        _pivot(T, r, j)
        basis[r] = j
        count += 1


def solve_lp(
    p: LinearProgram,
    tol_feas: float = TOL_FEAS,
    tol_gap: float = TOL_GAP,
    max_iter: int = MAX_PIVOTS,
) -> LPSolution:
    """Solve ``p`` exactly up to floating point.

    Dual multipliers follow the sensitivity convention: ``duals[i]`` is the
    rate of change of the optimal value with respect to ``rhs[i]``, so the
    optimal value equals ``duals @ rhs``.
    """
    c, A, rhs, rel, free = _validate(p)
    m, n = A.shape
    free_idx = np.flatnonzero(free)
    nf = free_idx.size

    # standard form: min cost^T z  s.t.  M z = r, z >= 0, r >= 0
    ineq = np.flatnonzero(rel != EQ)
    slack = np.zeros((m, ineq.size))
    slack[ineq, np.arange(ineq.size)] = np.where(rel[ineq] == LE, 1.0, -1.0)
    M = np.hstack([A, -A[:, free_idx], slack])
    r = rhs.copy()
    sign = np.where(r < 0, -1.0, 1.0)
    M *= sign[:, None]
    r *= sign
    ns = M.shape[1]
    cost = np.concatenate([c, -c[free_idx], np.zeros(ineq.size)])
    if p.sense == "max":
        cost = -cost

    # rows whose slack enters with +1 start basic on it, the rest need artificials
    basis = np.full(m, -1, dtype=np.int64)
    if ineq.size:
        scols = n + nf + np.arange(ineq.size)
        good = M[ineq, scols] > 0
        basis[ineq[good]] = scols[good]
    art_rows = np.flatnonzero(basis < 0)
    na = art_rows.size
    art = np.zeros((m, na))
    art[art_rows, np.arange(na)] = 1.0
    basis[art_rows] = ns + np.arange(na)

    T = np.zeros((m + 1, ns + na + 1), order="F")
    T[:m, :ns] = M
    T[:m, ns:ns + na] = art
    T[:m, -1] = r

    count = 0
    phase1_value = 0.0
    if na:
        T[-1, :] = -T[art_rows].sum(axis=0)
        T[-1, ns:ns + na] = 0.0
        _, _, count = _bland(T, basis, ns, max_iter, count)
        phase1_value = float(-T[-1, -1])
        if phase1_value > tol_feas:
            farkas = _phase1_certificate(M, basis, ns, na, art_rows, sign, T)
            return LPSolution(INFEASIBLE, None, None, None, count, phase1_value, farkas=farkas)
        # drive zero-level artificials out of the basis, drop redundant rows
        keep = np.ones(m, dtype=bool)
        for row in range(m):
            if basis[row] < ns:
                continue
            nz = np.flatnonzero(np.abs(T[row, :ns]) > _TOL_PIV)
            if nz.size:
                _pivot(T, row, int(nz[0]))
                basis[row] = nz[0]
                count += 1
            else:
                keep[row] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        T = np.asfortranarray(np.delete(T, np.s_[ns:ns + na], axis=1))
        basis = basis[keep]
    else:
        keep = np.ones(m, dtype=bool)

    rows = np.flatnonzero(keep)
    T[-1, :] = 0.0
    T[-1, :ns] = cost
    T[-1, :] -= cost[basis] @ T[:-1]
    status, enter, count = _bland(T, basis, ns, max_iter, count)

    if status == UNBOUNDED:
        d = np.zeros(ns)
        d[enter] = 1.0
        d[basis] = -T[:-1, enter]
        ray = d[:n].copy()
        ray[free_idx] -= d[n:n + nf]
        return LPSolution(UNBOUNDED, None, None, None, count, phase1_value, ray=ray)

    # re-solve with the original data on the final basis to shed tableau drift
    z = np.zeros(ns)
    y_std = np.zeros(m)
    B = M[rows][:, basis]
    try:
        z[basis] = np.linalg.solve(B, r[rows])
        y_std[rows] = np.linalg.solve(B.T, cost[basis])
    except np.linalg.LinAlgError:
        z[basis] = T[:-1, -1]
        y_std[rows] = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
    x = z[:n].copy()
    x[free_idx] -= z[n:n + nf]
    duals = sign * y_std
    if p.sense == "max":
        duals = -duals
    obj = float(c @ x)
    gap = abs(obj - float(duals @ rhs))

    viol = _violation(A, rhs, rel, x, free)
    if viol > tol_feas or gap > tol_gap:
        raise NumericalError(f"optimal basis fails re-check (violation {viol:.3e}, gap {gap:.3e})")
    return LPSolution(OPTIMAL, x, obj, duals, count, phase1_value, gap=gap)


def _phase1_certificate(M, basis, ns, na, art_rows, sign, T):
    m = M.shape[0]
    art = np.zeros((m, na))
    art[art_rows, np.arange(na)] = 1.0
    full = np.hstack([M, art])
    cost1 = np.zeros(ns + na)
    cost1[ns:] = 1.0
    B = full[:, basis]
    try:
        y = np.linalg.solve(B.T, cost1[basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(B.T, cost1[basis], rcond=None)[0]
    return -(sign * y)


def _violation(A, rhs, rel, x, free) -> float:
    if A.shape[0] == 0:
        res = np.zeros(0)
    else:
        ax = A @ x - rhs
        res = np.where(rel == LE, ax, np.where(rel == GE, -ax, np.abs(ax))).astype(float)
    neg = -x[~free]
    worst = 0.0
    if res.size:
        worst = max(worst, float(res.max()))
    if neg.size:
        worst = max(worst, float(neg.max()))
    return worst

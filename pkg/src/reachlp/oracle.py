"""Ground truth from the contraction mapping X -> CX + V.

Two independent routes to the limit set: the support-function series
sigma_{X*}(a) = sum_j sigma_V((C^T)^j a), and the projected set iteration
b -> T(b) with T(b)_i = sigma_{Q_{A,b}}(C^T a_i) + sigma_eps(a_i).  The
iteration evaluates supports over the vertices of Q_{A,b}, so it shares no
code path with the extreme-point construction of the dual LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import List, Optional

import numpy as np

from .errors import DimensionMismatch, EmptyPolytope, NotConverged
from .geometry import HPolytope, hausdorff_polyhedral, is_nonempty, support_polytope, vertices
from .lyapunov import EllNorm, auto_norm
from .normals import FacetNormals
from .system import ControlSystem, support_V

log = logging.getLogger(__name__)

SERIES_MAX_TERMS = 1_000_000


def series_tail(norm: EllNorm, sys: ControlSystem, w_norm, epsilon: float = 0.0):
    """Bound on sum_{j >= K} |sigma_eps((C^T)^j a)| given |(C^T)^K a|_2 = ``w_norm``.

    C^T contracts with rate ell in the dual norm of |.|_ell, whose
    equivalence constants are those of |.|_ell swapped.
    """
    radius = sys.V_radius() + epsilon
    return radius * norm.equivalence * np.asarray(w_norm) / (1.0 - norm.ell)


def support_series(sys: ControlSystem, a, tol: float = 1e-9, norm: Optional[EllNorm] = None, epsilon: float = 0.0):
    """Partial sum S_K of sigma_{X*}(a) with |sigma_{X*}(a) - S_K| <= tail <= tol.

    ``a`` may be a single direction (d,) or a stack (N, d); the return values
    then have shape () or (N,).  The direction is propagated by repeated
    multiplication with C^T.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if norm is None:
        norm = auto_norm(sys.C)
    W = np.atleast_2d(np.asarray(a, dtype=float)).copy()
    total = np.zeros(len(W))
    tail = series_tail(norm, sys, np.linalg.norm(W, axis=1), epsilon)
    for _ in range(SERIES_MAX_TERMS):
        if tail.max() <= tol:
            break
        total += support_V(sys, W, epsilon)
        W = W @ sys.C  # rows become (C^T w)^T
        tail = series_tail(norm, sys, np.linalg.norm(W, axis=1), epsilon)
    if np.ndim(a) == 1:
        return float(total[0]), float(tail[0])
    return total, tail


def iterate_once(normals: FacetNormals, b, sys: ControlSystem, epsilon: float = 0.0, method: str = "vertices"):
    """Tight offsets of the projection of C Q_{A,b} + B_eps(V) onto the normal family."""
    Q = HPolytope(normals, b)
    directions = normals.A @ sys.C
    if method == "vertices":
        inner = (vertices(Q) @ directions.T).max(axis=0)
    elif method == "lp":
        if not is_nonempty(Q):
            raise EmptyPolytope("iteration from an empty polytope")
        inner = np.array([support_polytope(Q, c) for c in directions])
    else:
        raise ValueError(f"unknown method {method!r}")
    return inner + support_V(sys, normals.A, epsilon)


def default_seed(normals: FacetNormals, sys: ControlSystem) -> np.ndarray:
    """b_0 = A x_0 for the fixed point x_0 = C x_0 + D u_0 of some u_0 in U.

    {x_0} lies in X*, so the iteration from here increases monotonically.
    For U symmetric about the origin this is b_0 = 0.
    """
    x0 = np.linalg.solve(np.eye(sys.d) - sys.C, sys.V_point())
    return normals.A @ x0


@dataclass
class IterationState:
    k: int
    b: np.ndarray
    increments: List[float] = field(default_factory=list)
    converged: bool = False


def projected_iteration(
    normals: FacetNormals,
    sys: ControlSystem,
    epsilon: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    *,
    norm: Optional[EllNorm] = None,
    b0=None,
    strict: bool = False,
    method: str = "vertices",
) -> IterationState:
    """Iterate T until |b_{k+1} - b_k|_inf <= tol (1 - ell).

    On hitting ``max_iter`` the last iterate is returned with
    ``converged=False``, or :class:`NotConverged` is raised when ``strict``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if norm is None:
        norm = auto_norm(sys.C)
    b = default_seed(normals, sys) if b0 is None else np.asarray(b0, dtype=float).copy()
    state = IterationState(0, b)
    stop = tol * (1.0 - norm.ell)
    for k in range(1, max_iter + 1):
        nxt = iterate_once(normals, state.b, sys, epsilon, method)
        inc = float(np.abs(nxt - state.b).max())
        state.b, state.k = nxt, k
        state.increments.append(inc)
        if inc <= stop:
            state.converged = True
            return state
    log.warning("projected iteration stopped after %d steps (last increment %.3g)", max_iter, state.increments[-1])
    if strict:
        raise NotConverged(f"projected iteration did not converge in {max_iter} steps", state)
    return state


PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class CompareReport:
    containment: List[str]        # per facet
    max_gap: float                # |b_lp - b_hat|_inf
    agreement: bool               # max_gap <= tol
    hausdorff: Optional[float] = None
    hausdorff_bound: Optional[float] = None
    hausdorff_ok: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return (
            FAIL not in self.containment
            and self.agreement
            and self.hausdorff_ok is not False
        )

    @property
    def inconclusive(self) -> bool:
        return INCONCLUSIVE in self.containment

    def as_dict(self) -> dict:
        return {
            "containment": list(self.containment),
            "max_gap": self.max_gap,
            "agreement": self.agreement,
            "hausdorff": self.hausdorff,
            "hausdorff_bound": self.hausdorff_bound,
            "hausdorff_ok": self.hausdorff_ok,
            "ok": self.ok,
        }


def compare_results(
    b_lp,
    series,
    b_hat,
    tails=None,
    tol: float = 1e-6,
    *,
    normals: Optional[FacetNormals] = None,
    bound: Optional[float] = None,
) -> CompareReport:
    """Cross-check an LP solution against the series values and the iteration limit.

    Facet i passes when series_i + tail_i <= b_lp_i + tol, fails when
    series_i - tail_i > b_lp_i + tol, and is inconclusive in between.  With
    ``normals`` and a Euclidean ``bound`` the l-inf Hausdorff distance between
    Q_{A,b_lp} and Q_{A,series} is checked against it; the l-inf distance
    never exceeds the Euclidean one.
    """
    b_lp = np.asarray(b_lp, dtype=float)
    series = np.asarray(series, dtype=float)
    b_hat = np.asarray(b_hat, dtype=float)
    tails = np.zeros_like(series) if tails is None else np.asarray(tails, dtype=float)
    if not (b_lp.shape == series.shape == b_hat.shape == tails.shape) or b_lp.ndim != 1:
        raise DimensionMismatch(
            f"inconsistent shapes {b_lp.shape}, {series.shape}, {b_hat.shape}, {tails.shape}"
        )
    status = np.where(
        series + tails <= b_lp + tol, PASS, np.where(series - tails > b_lp + tol, FAIL, INCONCLUSIVE)
    )
    gap = float(np.abs(b_lp - b_hat).max())
    report = CompareReport([str(s) for s in status], gap, gap <= tol)
    if normals is not None and bound is not None:
        if normals.N != b_lp.size:
            raise DimensionMismatch(f"{normals.N} normals for {b_lp.size} offsets")
        dist = hausdorff_polyhedral(HPolytope(normals, b_lp), HPolytope(normals, series), "inf")
        report.hausdorff = dist
        report.hausdorff_bound = float(bound)
        report.hausdorff_ok = bool(dist <= bound + tol)
    return report

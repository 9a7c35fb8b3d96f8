"""Outer approximation of the limit set as the maximizer of 1^T b over Omega_eps.

Omega_eps = {b : (e_i - p)^T b <= sigma_eps(a_i) for every extreme point p of
P_i = {p >= 0 : A^T p = C^T a_i}}.  The maximizer b* is the tight offset
vector of the smallest invariant polytope Q_{A,b} under x -> Cx + B_eps(V).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import time
from typing import Optional, Sequence
import warnings

import numpy as np

from .errors import DualUnbounded, EmptyExtremeSet, EmptyPolytope, InternalError
from .geometry import HPolytope, enumerate_extreme_points, is_nonempty, kappa_estimate, support_polytope, vertices
from .lp import INFEASIBLE, UNBOUNDED, LinearProgram, LPSolution, TOL_FEAS, TOL_GAP, solve_lp
from .lyapunov import Assumption2Check, EllNorm, ErrorRadius, auto_norm, check_assumption2, error_radius, state_bound
from .normals import FacetNormals
from .system import ControlSystem, support_V

log = logging.getLogger(__name__)

CERT_TOL = 1e-7
PROBE_SCALE = 1e-9
PROBE_SHIFT_MAX = 1e-6


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows (e_i - p)^T b <= sigma_eps(a_i), grouped by facet i in ascending order."""

    normals: FacetNormals
    epsilon: float
    sigma: np.ndarray     # (N,) support of B_eps(V) at each normal
    facet: np.ndarray     # (M,) facet index of each row
    points: np.ndarray    # (M, N) extreme point p of each row
    bases: np.ndarray     # (M, d) column subset that produced p

    @property
    def G(self) -> np.ndarray:
        G = -self.points.copy()
        G[np.arange(len(G)), self.facet] += 1.0
        return G

    @property
    def h(self) -> np.ndarray:
        return self.sigma[self.facet]

    @property
    def starts(self) -> np.ndarray:
        """Index of the first row of every facet."""
        return np.searchsorted(self.facet, np.arange(self.normals.N))

    def facet_points(self, i: int) -> np.ndarray:
        return self.points[self.facet == i]

    def __len__(self):
        return len(self.facet)


def assemble_omega(normals: FacetNormals, sys: ControlSystem, epsilon: float = 0.0) -> ConstraintSystem:
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    A = normals.A
    sigma = np.asarray(support_V(sys, A, epsilon), dtype=float)
    directions = A @ sys.C  # row i is (C^T a_i)^T
    facet, points, bases = [], [], []
    for i, c in enumerate(directions):
        ext = enumerate_extreme_points(normals, c)
        if len(ext) == 0:
            raise EmptyExtremeSet(
                f"facet {i}: no p >= 0 solves A^T p = C^T a_{i}; the normals do not positively span", facet=i
            )
        facet.append(np.full(len(ext), i))
        points.append(ext.points)
        bases.append(ext.bases)
    return ConstraintSystem(
        normals, float(epsilon), sigma, np.concatenate(facet), np.vstack(points), np.vstack(bases)
    )


def solve_dual_lp(cons: ConstraintSystem, objective=None, tol_feas=TOL_FEAS, tol_gap=TOL_GAP):
    """max objective^T b over Omega_eps, returning (b, LP solution).

    Solved through its LP dual min h^T y s.t. G^T y = objective, y >= 0, which
    has N rows instead of one row per extreme point; b is read off as the
    multipliers of the equality rows.
    """
    N = cons.normals.N
    w = np.ones(N) if objective is None else np.asarray(objective, dtype=float)
    lp = LinearProgram(cons.h, cons.G.T, w, ["="] * N, "min")
    sol = solve_lp(lp, tol_feas=tol_feas, tol_gap=tol_gap)
    if sol.status == INFEASIBLE:
        ray = -sol.farkas
        raise DualUnbounded(
            "max 1^T b over Omega is unbounded; the standing assumptions fail "
            f"(ascent ray {np.round(ray, 12).tolist()})",
            ray=ray,
        )
    if sol.status == UNBOUNDED:
        raise InternalError("solver reports Omega empty, which the construction rules out")
    return sol.duals, sol


def verify_invariance(normals: FacetNormals, b, sys: ControlSystem, epsilon: float = 0.0) -> np.ndarray:
    """m_i = b_i - sigma_eps(a_i) - max{(C^T a_i)^T x : x in Q_{A,b}}; all m_i >= 0 iff F_eps(Q) is inside Q."""
    Q = HPolytope(normals, b)
    if not is_nonempty(Q):
        raise EmptyPolytope("invariance is undefined for an empty polytope")
    sigma = support_V(sys, normals.A, epsilon)
    directions = normals.A @ sys.C
    inner = np.array([support_polytope(Q, c) for c in directions])
    return Q.b - sigma - inner


def verify_tightness(b, cons: ConstraintSystem) -> np.ndarray:
    """r_i = min over ext(P_i) of (p - e_i)^T b + sigma_eps(a_i); zero at the optimum."""
    b = np.asarray(b, dtype=float)
    vals = cons.points @ b - b[cons.facet] + cons.sigma[cons.facet]
    return np.minimum.reduceat(vals, cons.starts)


def check_disjunctive(b, cons: ConstraintSystem, tol: float = CERT_TOL, method: str = "farkas") -> bool:
    """Whether b satisfies the constraints of the disjunctive program.

    Nonemptiness (p^T b >= 0 on ext(P_0)) and, for every facet, at least one
    extreme point with (p - e_i)^T b <= -sigma_eps(a_i).
    """
    Q = HPolytope(cons.normals, b)
    return bool(is_nonempty(Q, method=method) and np.all(verify_tightness(b, cons) <= tol))


@dataclass
class ReachResult:
    b_star: np.ndarray
    epsilon: float
    margins: np.ndarray
    residuals: np.ndarray
    vertices: np.ndarray
    nonempty: bool
    hausdorff_certificate: Optional[float]
    kappa: float
    assumption2: Assumption2Check
    norm: EllNorm
    error: Optional[ErrorRadius]
    uniqueness_shift: Optional[float]
    lp_iterations: int
    constraints: ConstraintSystem = field(repr=False)
    timings_ms: dict = field(default_factory=dict)

    @property
    def polytope(self) -> HPolytope:
        return HPolytope(self.constraints.normals, self.b_star)

    def certificates(self, tol: float = CERT_TOL) -> dict:
        checks = {
            "nonempty": bool(self.nonempty),
            "invariance": bool(self.margins.size and np.all(self.margins >= -tol)),
            "tightness": bool(np.all(np.abs(self.residuals) <= tol)),
        }
        if self.uniqueness_shift is not None:
            checks["uniqueness"] = bool(self.uniqueness_shift < PROBE_SHIFT_MAX)
        return checks

    @property
    def ok(self) -> bool:
        return all(self.certificates().values())


def solve_limit_set(
    normals: FacetNormals,
    sys: ControlSystem,
    epsilon: float = 0.0,
    *,
    constraints: Optional[ConstraintSystem] = None,
    norm: Optional[EllNorm] = None,
    ell: Optional[float] = None,
    kappa: Optional[float] = None,
    kappa_samples: int = 256,
    seed: int = 0,
    probe: bool = True,
    tol_feas: float = TOL_FEAS,
    tol_gap: float = TOL_GAP,
) -> ReachResult:
    """Solve the dual LP and attach the certificates of the result."""
    timings = {}
    t0 = time.perf_counter()
    cons = constraints if constraints is not None else assemble_omega(normals, sys, epsilon)
    timings["assemble"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    b, sol = solve_dual_lp(cons, tol_feas=tol_feas, tol_gap=tol_gap)
    timings["lp"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    Q = HPolytope(normals, b)
    nonempty = is_nonempty(Q)
    if nonempty:
        margins = verify_invariance(normals, b, sys, cons.epsilon)
        verts = vertices(Q)
    else:
        log.warning("dual LP optimum describes an empty polytope")
        margins = np.full(normals.N, -np.inf)
        verts = np.zeros((0, normals.d))
    residuals = verify_tightness(b, cons)

    shift = None
    if probe:
        rng = np.random.default_rng(seed)
        w = 1.0 + PROBE_SCALE * rng.uniform(-1.0, 1.0, normals.N)
        b_probe, _ = solve_dual_lp(cons, objective=w, tol_feas=tol_feas, tol_gap=tol_gap)
        shift = float(np.abs(b_probe - b).max())
    timings["verify"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    if norm is None:
        norm = auto_norm(sys.C, ell)
    if kappa is None:
        kappa = kappa_estimate(normals, kappa_samples, seed)
    a2 = check_assumption2(norm, kappa)
    err = None
    if a2.holds:
        err = error_radius(norm, kappa, state_bound(norm, sys, cons.epsilon))
    else:
        warnings.warn(
            f"sampled kappa={kappa:.4g} exceeds the Assumption-2 threshold {a2.threshold:.4g}; "
            "Hausdorff certificate withheld",
            stacklevel=2,
        )
    timings["certificate"] = 1e3 * (time.perf_counter() - t0)

    return ReachResult(
        b_star=b,
        epsilon=cons.epsilon,
        margins=margins,
        residuals=residuals,
        vertices=verts,
        nonempty=nonempty,
        hausdorff_certificate=None if err is None else err.final_bound,
        kappa=float(kappa),
        assumption2=a2,
        norm=norm,
        error=err,
        uniqueness_shift=shift,
        lp_iterations=sol.iterations,
        constraints=cons,
        timings_ms=timings,
    )


@dataclass(frozen=True)
class SweepResult:
    eps: tuple
    b_eps: np.ndarray     # (K, N), row j solves the eps[j]-inflated problem
    b0: np.ndarray
    gap: float            # |b*_{eps_min} - b*_0|_inf
    monotone: bool

    def gaps(self) -> np.ndarray:
        return np.abs(self.b_eps - self.b0).max(axis=1)


def epsilon_sweep(
    normals: FacetNormals, sys: ControlSystem, eps_list: Sequence[float], tol: float = CERT_TOL
) -> SweepResult:
    """Solve the inflated problems for decreasing eps and the unperturbed one."""
    eps = tuple(float(e) for e in eps_list)
    if not eps or any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be strictly decreasing positive values")
    rows = [solve_dual_lp(assemble_omega(normals, sys, e))[0] for e in eps]
    b0 = solve_dual_lp(assemble_omega(normals, sys, 0.0))[0]
    B = np.array(rows)
    chain = np.vstack([B, b0])
    monotone = bool(np.all(chain[:-1] >= chain[1:] - tol))
    return SweepResult(eps, B, b0, float(np.abs(B[-1] - b0).max()), monotone)

"""Operations on polytopes Q_{A,b} = {x : Ax <= b} with fixed normals A.

Support values and distances go through the simplex solver; vertices and the
extreme points of {p >= 0 : A^T p = c} are enumerated over the cached square
bases of the normals.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .errors import EmptyExtremeSet, EmptyPolytope, NormalMismatch, UnboundedPolytope
from .lp import INFEASIBLE, UNBOUNDED, LinearProgram, TOL_FEAS, solve_lp
from .normals import FacetNormals

log = logging.getLogger(__name__)

MERGE_RADIUS = 1e-8
EXTREME_MERGE = 1e-9
# tolerance on negative components of basic solutions before clipping
_NEG_TOL = 1e-10


@dataclass(frozen=True)
class HPolytope:
    normals: FacetNormals
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).ravel()
        if b.size != self.normals.N:
            raise ValueError(f"offset vector has {b.size} entries for {self.normals.N} normals")
        if not np.all(np.isfinite(b)):
            raise ValueError("offsets must be finite")
        object.__setattr__(self, "b", b)

    @property
    def A(self) -> np.ndarray:
        return self.normals.A

    @property
    def d(self) -> int:
        return self.normals.d

    def contains(self, x, tol: float = TOL_FEAS) -> bool:
        return bool(np.all(self.A @ np.asarray(x, float) <= self.b + tol))


@dataclass(frozen=True)
class ExtremePointSet:
    """Vertices of {p >= 0 : A^T p = c} (optionally with 1^T p = 1)."""

    c: np.ndarray
    points: np.ndarray     # (K, N), lexicographically sorted
    bases: np.ndarray      # (K, k) first basis that produced each point
    simplex_row: bool = False

    def __len__(self):
        return len(self.points)


def unique_rows(P: np.ndarray, radius: float):
    """Indices of a duplicate-free subset of rows under l-inf distance ``radius``,
    returned in lexicographic order of the kept rows."""
    if len(P) == 0:
        return np.zeros(0, dtype=np.int64)
    # collapse rows equal up to 1e-3 radius, then merge greedily in input order
    _, first = np.unique(np.round(P / (1e-3 * radius)), axis=0, return_index=True)
    first = np.sort(first)
    close = [[] for _ in first]
    for i, j in cKDTree(P[first]).query_pairs(radius, p=np.inf):
        close[max(i, j)].append(min(i, j))
    dropped = np.zeros(len(first), dtype=bool)
    for i, earlier in enumerate(close):
        if any(not dropped[j] for j in earlier):
            dropped[i] = True
    idx = first[~dropped]
    order = np.lexsort(P[idx].T[::-1])
    return idx[order]


def support_polytope(Q: HPolytope, c) -> float:
    """max c^T x over Q, by LP."""
    c = np.asarray(c, dtype=float)
    sol = solve_lp(LinearProgram(c, Q.A, Q.b, ["<="] * Q.normals.N, "max", np.ones(Q.d, bool)))
    if sol.status == INFEASIBLE:
        raise EmptyPolytope("support of an empty polytope")
    if sol.status == UNBOUNDED:
        raise UnboundedPolytope(f"support unbounded in direction {c.tolist()}")
    return sol.objective


def is_nonempty(Q: HPolytope, method: str = "lp", tol: float = TOL_FEAS) -> bool:
    """Decide Q != {} by a phase-1 LP (``"lp"``) or by the sign of p^T b over
    the extreme points of {p >= 0 : A^T p = 0, 1^T p = 1} (``"farkas"``)."""
    if method == "lp":
        d = Q.d
        sol = solve_lp(LinearProgram(np.zeros(d), Q.A, Q.b, ["<="] * Q.normals.N, "max", np.ones(d, bool)))
        return sol.status != INFEASIBLE
    if method == "farkas":
        ext = enumerate_extreme_points(Q.normals, np.zeros(Q.d), with_simplex_row=True)
        if len(ext) == 0:
            return True
        return bool((ext.points @ Q.b).min() >= -tol)
    raise ValueError(f"unknown method {method!r}")


def tighten(Q: HPolytope) -> HPolytope:
    """Tight representation: every offset replaced by the support value in its normal."""
    b = np.array([support_polytope(Q, a) for a in Q.A])
    return HPolytope(Q.normals, np.minimum(b, Q.b))


def vertices(Q: HPolytope, tol: float = TOL_FEAS) -> np.ndarray:
    """All vertices of a bounded Q, sorted lexicographically."""
    subsets, inv = Q.normals.row_bases
    X = np.einsum("sij,sj->si", inv, Q.b[subsets])
    feasible = (X @ Q.A.T - Q.b).max(axis=1) <= tol
    X = X[feasible]
    if len(X) == 0:
        raise EmptyPolytope("polytope has no vertices")
    return X[unique_rows(X, MERGE_RADIUS)]


def enumerate_extreme_points(normals: FacetNormals, c, with_simplex_row: bool = False) -> ExtremePointSet:
    """All vertices of {p in R^N : A^T p = c, p >= 0} (and 1^T p = 1 if requested).

    Every square nonsingular column subset is solved; nonnegative solutions
    are kept and merged.  An empty result means the polyhedron is empty.
    """
    c = np.asarray(c, dtype=float).ravel()
    rhs = np.append(c, 1.0) if with_simplex_row else c
    subsets, inv = normals.column_bases(with_simplex_row)
    sols = np.einsum("sij,j->si", inv, rhs)
    ok = sols.min(axis=1) >= -_NEG_TOL
    sols, subsets = np.clip(sols[ok], 0.0, None), subsets[ok]
    N = normals.N
    P = np.zeros((len(sols), N))
    np.put_along_axis(P, subsets, sols, axis=1)
    keep = unique_rows(P, EXTREME_MERGE)
    return ExtremePointSet(c, P[keep], subsets[keep], with_simplex_row)


def hausdorff_polyhedral(Q1: HPolytope, Q2: HPolytope, norm: str = "inf") -> float:
    """Exact Hausdorff distance in the l-inf or l1 norm.

    The distance from a point to Q is convex, so each one-sided distance is
    attained at a vertex and computed by one LP per vertex.
    """
    if Q1.normals != Q2.normals:
        raise NormalMismatch("polytopes use different facet normals")
    if norm not in ("inf", "1"):
        raise ValueError(f"norm must be 'inf' or '1', got {norm!r}")
    return max(_semi_distance(Q1, Q2, norm), _semi_distance(Q2, Q1, norm))


def euclidean_bracket(value: float, norm: str, d: int):
    """Bounds on the Euclidean Hausdorff distance from a polyhedral one."""
    if norm == "inf":
        return value, np.sqrt(d) * value
    return value / np.sqrt(d), value


def _semi_distance(Q1: HPolytope, Q2: HPolytope, norm: str) -> float:
    V = vertices(Q1)
    A, b = Q2.A, Q2.b
    N, d = A.shape
    I = np.eye(d)
    if norm == "inf":
        # variables (y, t): min t, A y <= b, |v - y|_inf <= t
        obj = np.r_[np.zeros(d), 1.0]
        lhs = np.vstack([np.c_[A, np.zeros(N)], np.c_[I, -np.ones(d)], np.c_[-I, -np.ones(d)]])
        free = np.r_[np.ones(d, bool), False]
    else:
        # variables (y, s): min sum s, A y <= b, |v_j - y_j| <= s_j
        obj = np.r_[np.zeros(d), np.ones(d)]
        lhs = np.vstack([np.c_[A, np.zeros((N, d))], np.c_[I, -I], np.c_[-I, -I]])
        free = np.r_[np.ones(d, bool), np.zeros(d, bool)]
    rel = ["<="] * lhs.shape[0]
    worst = 0.0
    for v in V:
        sol = solve_lp(LinearProgram(obj, lhs, np.r_[b, v, -v], rel, "min", free))
        if sol.status == INFEASIBLE:
            raise EmptyPolytope("second polytope is empty")
        worst = max(worst, sol.objective)
    return worst


def kappa_contribution(normals: FacetNormals, c) -> float:
    """inf over extreme points p of {A^T p = c, p >= 0} of sum_k p_k |a_k - c/|p|_1|_2."""
    ext = enumerate_extreme_points(normals, c)
    if len(ext) == 0:
        raise EmptyExtremeSet(f"no extreme points for direction {np.asarray(c).tolist()}")
    P = ext.points
    l1 = P.sum(axis=1)
    c = np.asarray(c, dtype=float)
    dev = np.linalg.norm(normals.A[None, :, :] - (c[None, None, :] / l1[:, None, None]), axis=2)
    return float((P * dev).sum(axis=1).min())


def sphere_samples(d: int, num: int, seed: int = 0) -> np.ndarray:
    """Deterministic scrambled-Halton points on the unit sphere in R^2 or R^3."""
    if d == 2:
        u = qmc.Halton(d=1, seed=seed).random(num)[:, 0]
        theta = 2.0 * np.pi * u
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if d == 3:
        u = qmc.Halton(d=2, seed=seed).random(num)
        z = 1.0 - 2.0 * u[:, 0]
        phi = 2.0 * np.pi * u[:, 1]
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    # generic fallback: normalized Gaussian samples
    g = np.random.default_rng(seed).standard_normal((num, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def kappa_estimate(normals: FacetNormals, num_samples: int = 256, seed: int = 0) -> float:
    """Sampled lower bound on the fan-quality constant kappa_A.

    Only sampled directions enter the supremum, so the true constant may be
    larger.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    best = 0.0
    for c in sphere_samples(normals.d, num_samples, seed):
        best = max(best, kappa_contribution(normals, c))
    return best

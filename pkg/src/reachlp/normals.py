"""Facet-normal matrices A defining the polytope family {x : Ax <= b}."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import AssumptionOneViolated, TooFewNormals
from .lp import LinearProgram, solve_lp, TOL_FEAS

UNIT_TOL = 1e-12
DISTINCT_TOL = 1e-9
COND_MAX = 1e12


@dataclass(frozen=True)
class Assumption1Report:
    ok: bool
    reason: str = ""
    row: Optional[int] = None
    direction: Optional[np.ndarray] = None

    def as_dict(self):
        return {
            "holds": self.ok,
            "reason": self.reason,
            "row": self.row,
            "direction": None if self.direction is None else self.direction.tolist(),
        }


def check_assumption1(A) -> Assumption1Report:
    """Unit, pairwise distinct rows and ``{x : Ax <= 0} = {0}``.

    The last property is decided with 2d LPs: maximize +-x_j over
    ``Ax <= 0, -1 <= x_j <= 1``; every optimum must vanish.  Failures are
    returned, not raised.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        return Assumption1Report(False, f"expected an N x d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        return Assumption1Report(False, "non-finite entries")
    N, d = A.shape
    norms = np.linalg.norm(A, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
    if bad.size:
        return Assumption1Report(False, f"row {bad[0]} has norm {norms[bad[0]]!r}", row=int(bad[0]))
    for i in range(N):
        gaps = np.linalg.norm(A[i + 1:] - A[i], axis=1)
        close = np.flatnonzero(gaps <= DISTINCT_TOL)
        if close.size:
            return Assumption1Report(False, f"rows {i} and {i + 1 + close[0]} coincide", row=i)
    for j in range(d):
        box = np.zeros((2, d))
        box[0, j], box[1, j] = 1.0, -1.0
        lhs = np.vstack([A, box])
        rhs = np.concatenate([np.zeros(N), [1.0, 1.0]])
        for s in (1.0, -1.0):
            obj = np.zeros(d)
            obj[j] = s
            sol = solve_lp(LinearProgram(obj, lhs, rhs, ["<="] * (N + 2), "max", np.ones(d, bool)))
            if sol.objective > TOL_FEAS:
                return Assumption1Report(
                    False,
                    f"{{Ax <= 0}} contains the nonzero direction {np.round(sol.x, 12).tolist()}",
                    direction=sol.x,
                )
    if N < d + 1:
        return Assumption1Report(False, f"{N} rows cannot positively span R^{d}")
    return Assumption1Report(True)


class FacetNormals:
    """Validated normal matrix with cached basis tables for enumeration.

    The tables depend only on A, so they are built once and shared by every
    vertex or extreme-point enumeration on these normals.
    """

    def __init__(self, A, check: bool = True):
        A = np.array(A, dtype=float)
        if check:
            report = check_assumption1(A)
            if not report.ok:
                raise AssumptionOneViolated(report)
        A.setflags(write=False)
        self.A = A

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    def __len__(self):
        return self.N

    def __eq__(self, other):
        return isinstance(other, FacetNormals) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())

    def __repr__(self):
        return f"FacetNormals(N={self.N}, d={self.d})"

    @cached_property
    def row_bases(self):
        """d-subsets of rows with invertible blocks: (subsets, inverses)."""
        subsets = np.array(list(combinations(range(self.N), self.d)), dtype=np.int64)
        return _invertible(self.A[subsets], subsets)

    def column_bases(self, simplex_row: bool):
        """Square column subsets of A^T (plus a ones row): (subsets, inverses)."""
        key = "_cols_simplex" if simplex_row else "_cols"
        cached = self.__dict__.get(key)
        if cached is None:
            M = self.A.T
            if simplex_row:
                M = np.vstack([M, np.ones(self.N)])
            k = M.shape[0]
            subsets = np.array(list(combinations(range(self.N), k)), dtype=np.int64)
            mats = M[:, subsets].transpose(1, 0, 2)
            cached = _invertible(mats, subsets)
            self.__dict__[key] = cached
        return cached


def _invertible(mats, subsets):
    if len(mats) == 0:
        return subsets, mats
    ok = np.linalg.cond(mats) < COND_MAX
    return subsets[ok], np.linalg.inv(mats[ok])


def axis_normals(d: int) -> FacetNormals:
    """Rows e_1, -e_1, e_2, -e_2, ... (the normals of an axis-aligned box)."""
    rows = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        rows += [e, 0.0 - e]
    return FacetNormals(np.array(rows))


def uniform2d(count: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(count) / count
    A = np.column_stack([np.cos(theta), np.sin(theta)])
    A[np.abs(A) < 1e-15] = 0.0
    return A / np.linalg.norm(A, axis=1, keepdims=True)


_PHI = (1.0 + 5.0 ** 0.5) / 2.0


def icosphere(level: int) -> np.ndarray:
    """Vertices of the icosahedron subdivided ``level`` times, on the unit sphere."""
    verts = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            verts += [(0.0, s1, s2 * _PHI), (s1, s2 * _PHI, 0.0), (s2 * _PHI, 0.0, s1)]
    V = np.array(verts)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    # faces: triples of mutually adjacent vertices (edge = nearest-neighbour distance)
    dist = np.linalg.norm(V[:, None] - V[None], axis=2)
    edge = dist[dist > 1e-9].min()
    adj = np.abs(dist - edge) < 1e-9
    faces = [f for f in combinations(range(12), 3) if adj[f[0], f[1]] and adj[f[1], f[2]] and adj[f[0], f[2]]]

    points = [v for v in V]
    for _ in range(level):
        mid = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in mid:
                p = points[i] + points[j]
                points.append(p / np.linalg.norm(p))
                mid[key] = len(points) - 1
            return mid[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    P = np.array(points)
    P[np.abs(P) < 1e-15] = 0.0
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    order = np.lexsort(np.round(P, 12).T[::-1])
    return P[order]


def make_normals(dim: int, count_or_level: int) -> FacetNormals:
    """Equally spaced normals (2D, ``count`` of them) or icosphere normals (3D, subdivision ``level``)."""
    if dim == 2:
        if count_or_level <= dim:
            raise TooFewNormals(f"{count_or_level} normals cannot positively span R^2")
        return FacetNormals(uniform2d(count_or_level))
    if dim == 3:
        if count_or_level < 0:
            raise TooFewNormals(f"icosphere level must be >= 0, got {count_or_level}")
        return FacetNormals(icosphere(count_or_level))
    raise ValueError(f"normal generators exist for dim 2 and 3, not {dim}")

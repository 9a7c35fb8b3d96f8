"""The control system x_{k+1} = C x_k + D u_k, u_k in U.

The set V = DU is only ever accessed through its support function.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Union

import jsonschema
import numpy as np

from .errors import DimensionMismatch, SchemaError
from .schema import SYSTEM_SCHEMA


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise DimensionMismatch(f"box bounds have lengths {lo.size} and {hi.size}")
        if np.any(lo > hi):
            raise SchemaError("U", "box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def m(self) -> int:
        return self.lo.size

    def support(self, W: np.ndarray) -> np.ndarray:
        return np.maximum(W * self.lo, W * self.hi).sum(axis=-1)

    def vertices(self) -> np.ndarray:
        return np.array([np.where(mask, self.hi, self.lo) for mask in product((False, True), repeat=self.m)])

    def point(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def scaled(self, s: float) -> "Box":
        return Box(s * self.lo, s * self.hi)

    def shifted(self, w) -> "Box":
        return Box(self.lo + w, self.hi + w)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).ravel())
        if not self.radius >= 0:
            raise SchemaError("U.radius", "must be >= 0")

    @property
    def m(self) -> int:
        return self.center.size

    def support(self, W: np.ndarray) -> np.ndarray:
        return W @ self.center + self.radius * np.linalg.norm(W, axis=-1)

    def point(self) -> np.ndarray:
        return self.center

    def scaled(self, s: float) -> "Ball":
        return Ball(s * self.center, s * self.radius)

    def shifted(self, w) -> "Ball":
        return Ball(self.center + w, self.radius)


@dataclass(frozen=True)
class VertexSet:
    """Convex hull of finitely many points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise SchemaError("U.points", "need a nonempty list of points")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def support(self, W: np.ndarray) -> np.ndarray:
        return (W @ self.points.T).max(axis=-1)

    def vertices(self) -> np.ndarray:
        return self.points

    def point(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def scaled(self, s: float) -> "VertexSet":
        return VertexSet(s * self.points)

    def shifted(self, w) -> "VertexSet":
        return VertexSet(self.points + w)


ControlSet = Union[Box, Ball, VertexSet]


@dataclass(frozen=True)
class ControlSystem:
    C: np.ndarray
    D: np.ndarray
    U: ControlSet

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.asarray(self.D, dtype=float)
        if D.ndim == 1:
            D = D[:, None]
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DimensionMismatch(f"C must be square, got {C.shape}")
        if D.ndim != 2 or D.shape[0] != C.shape[0]:
            raise DimensionMismatch(f"D must have {C.shape[0]} rows, got shape {D.shape}")
        if D.shape[1] != self.U.m:
            raise DimensionMismatch(f"D has {D.shape[1]} columns but U lives in R^{self.U.m}")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(D))):
            raise SchemaError("C/D", "entries must be finite")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    def V_vertices(self):
        """Vertices D u of V for polytopic U, None for a ball."""
        if isinstance(self.U, Ball):
            return None
        return self.U.vertices() @ self.D.T

    def V_point(self) -> np.ndarray:
        """Some point of V."""
        return self.D @ self.U.point()

    def V_radius(self) -> float:
        """Euclidean radius max |v| over V."""
        if isinstance(self.U, Ball):
            Dc = self.D @ self.U.center
            return float(np.linalg.norm(Dc) + self.U.radius * np.linalg.norm(self.D, 2))
        return float(np.linalg.norm(self.V_vertices(), axis=1).max())

    def with_U(self, U: ControlSet) -> "ControlSystem":
        return ControlSystem(self.C, self.D, U)


def support_V(sys: ControlSystem, a, epsilon: float = 0.0):
    """Support function of the epsilon-inflated input set B_eps(DU) at a.

    ``a`` may be one direction (d,) or a stack (N, d).
    """
    a = np.asarray(a, dtype=float)
    value = sys.U.support(a @ sys.D)
    if epsilon:
        value = value + epsilon * np.linalg.norm(a, axis=-1)
    return value


def _matrix(doc, key):
    rows = doc[key]
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise SchemaError(key, "rows have different lengths")
    return np.array(rows, dtype=float)


def load_control_set(U: dict) -> ControlSet:
    kind = U["type"]
    if kind == "box":
        return Box(U["lo"], U["hi"])
    if kind == "ball":
        return Ball(U["center"], float(U["radius"]))
    pts = U["points"]
    if len({len(p) for p in pts}) != 1:
        raise SchemaError("U.points", "points have different lengths")
    return VertexSet(pts)


def load_system(document: dict) -> ControlSystem:
    """Validate the C/D/U part of an input document and build the system."""
    try:
        jsonschema.validate(document, SYSTEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path)
        raise SchemaError(path, exc.message) from None
    C = _matrix(document, "C")
    D = _matrix(document, "D")
    U = load_control_set(document["U"])
    if C.shape[0] != C.shape[1]:
        raise DimensionMismatch(f"C must be square, got {C.shape[0]}x{C.shape[1]}")
    return ControlSystem(C, D, U)


def system_to_document(sys: ControlSystem) -> dict:
    doc = {"C": sys.C.tolist(), "D": sys.D.tolist()}
    U = sys.U
    if isinstance(U, Box):
        doc["U"] = {"type": "box", "lo": U.lo.tolist(), "hi": U.hi.tolist()}
    elif isinstance(U, Ball):
        doc["U"] = {"type": "ball", "center": U.center.tolist(), "radius": U.radius}
    else:
        doc["U"] = {"type": "vertices", "points": U.points.tolist()}
    return doc

"""Quadratic contraction norms |x|_ell = sqrt(x^T P x) with |C|_ell <= ell,
and the error-bound quantities built from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import AssumptionTwoViolated, NotContractive
from .system import Ball, ControlSystem

TRACE_TOL = 1e-12
DIVERGE_TRACE = 1e12
EIG_RTOL = 1e-10


@dataclass(frozen=True)
class EllNorm:
    P: np.ndarray
    ell: float
    c_2ell: float   # |x|_ell <= c_2ell |x|_2
    c_ell2: float   # |x|_2 <= c_ell2 |x|_ell
    iterations: int = 0

    @classmethod
    def from_matrix(cls, P, ell: float) -> "EllNorm":
        P = np.asarray(P, dtype=float)
        lo, hi = extreme_eigenvalues(P)
        return cls(P, ell, float(np.sqrt(hi)), float(1.0 / np.sqrt(lo)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self.P, x))

    @property
    def equivalence(self) -> float:
        """c_2ell * c_ell2 = sqrt(cond P)."""
        return self.c_2ell * self.c_ell2

    def certify(self, C, samples: int = 100, seed: int = 0, slack: float = 1e-9) -> bool:
        """Check |Cx|_ell <= (ell + slack) |x|_ell on random unit x."""
        x = np.random.default_rng(seed).standard_normal((samples, self.P.shape[0]))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        return bool(np.all(self(x @ np.asarray(C).T) <= (self.ell + slack) * self(x)))


def _power_max(P, max_iter=100_000):
    d = P.shape[0]
    v = 1.0 / np.sqrt(np.arange(1, d + 1))
    v /= np.linalg.norm(v)
    lam = float(v @ P @ v)
    for _ in range(max_iter):
        w = P @ v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) <= EIG_RTOL * abs(lam):
            break
        v = w / np.linalg.norm(w)
    return lam


def _inverse_min(P, max_iter=100_000):
    d = P.shape[0]
    factor = cho_factor(P)
    v = 1.0 / np.sqrt(np.arange(d, 0, -1))
    v /= np.linalg.norm(v)
    lam = float(v @ P @ v)
    for _ in range(max_iter):
        lam = float(v @ P @ v)
        if np.linalg.norm(P @ v - lam * v) <= EIG_RTOL * abs(lam):
            break
        w = cho_solve(factor, v)
        v = w / np.linalg.norm(w)
    return lam


def extreme_eigenvalues(P):
    """(lambda_min, lambda_max) of an SPD matrix by inverse and power iteration."""
    return _inverse_min(P), _power_max(P)


def build_ell_norm(C, ell: float, max_iter: int = 10_000) -> EllNorm:
    """P = sum_j ell^{-2j} (C^T)^j C^j, the fixed point of P <- I + ell^{-2} C^T P C.

    Iterating from P = I, the increments are exactly the series terms, which
    are accumulated until their trace drops below 1e-12.
    """
    if not 0.0 < ell < 1.0:
        raise ValueError(f"ell must lie in (0, 1), got {ell}")
    C = np.asarray(C, dtype=float)
    d = C.shape[0]
    P = np.eye(d)
    term = np.eye(d)
    Ct = np.ascontiguousarray(C.T)
    scale = ell ** -2
    trace = float(d)
    for k in range(1, max_iter + 1):
        term = scale * (Ct @ term @ C)
        inc = float(term.trace())
        P += term
        trace += inc
        if not np.isfinite(inc) or trace > DIVERGE_TRACE:
            raise NotContractive(f"Lyapunov series diverges for ell={ell}: spectral radius of C >= ell")
        if inc < TRACE_TOL:
            break
    else:
        raise NotContractive(f"Lyapunov series did not converge in {max_iter} steps for ell={ell}")
    P = 0.5 * (P + P.T)
    lo, hi = extreme_eigenvalues(P)
    return EllNorm(P, float(ell), float(np.sqrt(hi)), float(1.0 / np.sqrt(lo)), k)


def _converges(C, ell, max_iter):
    try:
        build_ell_norm(C, ell, max_iter)
        return True
    except NotContractive:
        return False


def select_ell(C, granularity: float = 0.01, offset: float = 0.05, cap: float = 0.99, max_iter: int = 10_000) -> float:
    """Smallest grid value of ell for which the Lyapunov series converges, plus ``offset``."""
    K = int(round(1.0 / granularity))
    lo, hi = 0, K - 1  # grid indices; index k means ell = k * granularity
    if not _converges(C, hi * granularity, max_iter):
        raise NotContractive("no ell < 1 certifies contraction: C is not strictly stable")
    if _converges(C, granularity, max_iter):
        hi = 1
    else:
        lo = 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _converges(C, mid * granularity, max_iter):
                hi = mid
            else:
                lo = mid
    return round(min(hi * granularity + offset, cap), 10)


def auto_norm(C, ell=None) -> EllNorm:
    return build_ell_norm(C, select_ell(C) if ell is None else ell)


def V_norm(norm: EllNorm, sys: ControlSystem) -> float:
    """|V|_ell = max over V of sqrt(v^T P v)."""
    U = sys.U
    if isinstance(U, Ball):
        Dc = sys.D @ U.center
        M = sys.D.T @ norm.P @ sys.D
        lam = float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])
        return float(np.sqrt(Dc @ norm.P @ Dc) + U.radius * np.sqrt(max(lam, 0.0)))
    return float(norm(sys.V_vertices()).max())


def state_bound(norm: EllNorm, sys: ControlSystem, epsilon: float = 0.0) -> float:
    """A-priori bound |X*|_ell <= |V|_ell / (1 - ell); epsilon inflates V by a Euclidean ball."""
    return (V_norm(norm, sys) + epsilon * norm.c_2ell) / (1.0 - norm.ell)


class ErrorRadius(NamedTuple):
    R_A: float
    final_bound: float      # in |.|_ell units
    euclidean_bound: float  # c_ell2 * final_bound


def error_radius(norm: EllNorm, kappa: float, state_norm_bound: float) -> ErrorRadius:
    """Inflation radius R_A and the Hausdorff bound R_A / ell."""
    q = norm.c_2ell * norm.c_ell2 * norm.ell * kappa
    denom = 1.0 - norm.ell - q
    if denom <= 0:
        raise AssumptionTwoViolated(
            f"kappa={kappa:.6g} too large for ell={norm.ell:.6g} (denominator {denom:.3g} <= 0)"
        )
    R = q / denom * state_norm_bound
    final = R / norm.ell
    return ErrorRadius(R, final, norm.c_ell2 * final)


class Assumption2Check(NamedTuple):
    holds: bool
    margin: float
    threshold: float


def check_assumption2(norm: EllNorm, kappa: float) -> Assumption2Check:
    """kappa < (1 - ell) / (c_2ell c_ell2 ell); advisory only."""
    threshold = (1.0 - norm.ell) / (norm.c_2ell * norm.c_ell2 * norm.ell)
    return Assumption2Check(bool(kappa < threshold), threshold - kappa, threshold)

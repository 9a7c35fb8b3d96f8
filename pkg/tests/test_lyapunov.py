import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import solve_discrete_lyapunov

from reachlp.errors import AssumptionTwoViolated, NotContractive
from reachlp.lyapunov import (
    EllNorm,
    auto_norm,
    build_ell_norm,
    check_assumption2,
    error_radius,
    extreme_eigenvalues,
    select_ell,
    state_bound,
)
from reachlp.system import Box, ControlSystem

from _helpers import UNIT_BOX, half_system, random_system


def test_scaled_identity():
    n = build_ell_norm(0.5 * np.eye(2), 0.6)
    np.testing.assert_allclose(n.P, 36 / 11 * np.eye(2), atol=1e-10)
    assert n.c_2ell == pytest.approx(np.sqrt(36 / 11), abs=1e-10)
    assert n.c_ell2 == pytest.approx(np.sqrt(11 / 36), abs=1e-10)
    assert n.equivalence == pytest.approx(1.0, abs=1e-10)


def test_nilpotent():
    C = np.array([[0.0, 1.0], [0.0, 0.0]])
    n = build_ell_norm(C, 0.5)
    np.testing.assert_allclose(n.P, np.diag([1.0, 5.0]), atol=1e-14)
    x = np.random.default_rng(1).standard_normal((50, 2))
    assert np.all(n(x @ C.T) ** 2 <= n(x) ** 2 / 5 + 1e-12)
    assert n.certify(C)


def test_not_contractive():
    with pytest.raises(NotContractive):
        build_ell_norm(0.5 * np.eye(2), 0.4)
    with pytest.raises(NotContractive):
        select_ell(np.eye(2))
    with pytest.raises(ValueError):
        build_ell_norm(0.5 * np.eye(2), 1.0)


def test_select_ell():
    assert select_ell(0.5 * np.eye(2)) == pytest.approx(0.56)
    assert select_ell(np.zeros((2, 2))) == pytest.approx(0.06)
    assert select_ell(0.97 * np.eye(2)) == pytest.approx(0.99)


def test_state_bound_examples():
    zero = ControlSystem(np.zeros((2, 2)), np.eye(2), UNIT_BOX)
    n0 = build_ell_norm(np.zeros((2, 2)), 0.3)
    assert state_bound(n0, zero) == pytest.approx(np.sqrt(2) / 0.7)
    n = build_ell_norm(0.5 * np.eye(2), 0.6)
    assert state_bound(n, half_system()) == pytest.approx(np.sqrt(36 / 11) * np.sqrt(2) / 0.4)
    assert state_bound(n, half_system().with_U(Box([0, 0], [0, 0]))) == 0.0


def test_error_radius_examples():
    unit = EllNorm(np.eye(2), 0.5, 1.0, 1.0)
    assert error_radius(unit, 0.0, 3.0)[:2] == (0.0, 0.0)
    R, final, euc = error_radius(unit, 0.25, 2.0)
    assert R == pytest.approx(2 / 3) and final == pytest.approx(4 / 3) and euc == pytest.approx(4 / 3)
    with pytest.raises(AssumptionTwoViolated):
        error_radius(EllNorm(np.eye(2), 0.6, 1.0, 1.0), 1.0, 1.0)


def test_assumption2_examples():
    chk = check_assumption2(EllNorm(np.eye(2), 0.5, 1.0, 1.0), 0.25)
    assert chk.holds and chk.margin == pytest.approx(0.75)
    assert not check_assumption2(EllNorm(np.eye(2), 0.6, 1.0, 1.0), 1.0).holds
    assert check_assumption2(EllNorm(np.eye(2), 0.6, 1.0, 1.0), 0.0).holds


def test_extreme_eigenvalues_against_eigvalsh():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((4, 4))
    P = M @ M.T + 0.5 * np.eye(4)
    lo, hi = extreme_eigenvalues(P)
    ev = np.linalg.eigvalsh(P)
    assert lo == pytest.approx(ev[0], rel=1e-9) and hi == pytest.approx(ev[-1], rel=1e-9)


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_norm_properties_random(seed, d):
    rng = np.random.default_rng(seed)
    C = random_system(rng, d, rho=(0.05, 0.9)).C
    n = auto_norm(C)
    # the series is the solution of P = I + C^T P C / ell^2
    ref = solve_discrete_lyapunov(C.T / n.ell, np.eye(d))
    np.testing.assert_allclose(n.P, ref, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(n.P, n.P.T, atol=1e-12)
    x = rng.standard_normal((1000, d))
    assert np.all(n(x @ C.T) <= (n.ell + 1e-9) * n(x))
    l2, le = np.linalg.norm(x, axis=1), n(x)
    assert np.all(le / n.c_2ell <= l2 * (1 + 1e-12))
    assert np.all(l2 <= n.c_ell2 * le * (1 + 1e-12))
    assert n.equivalence >= 1 - 1e-12


@given(st.floats(0.0, 0.9), st.floats(0.01, 0.09))
def test_scaled_identity_has_unit_equivalence(lam, offset):
    ell = min(lam + offset, 0.99)
    n = build_ell_norm(lam * np.eye(2), ell)
    assert n.P[0, 1] == 0.0 and n.P[0, 0] == pytest.approx(n.P[1, 1], rel=1e-14)
    assert n.equivalence == pytest.approx(1.0, abs=1e-10)


@given(st.integers(0, 10**6), st.floats(0.1, 10))
def test_state_bound_scales_with_U(seed, s):
    sys_ = random_system(np.random.default_rng(seed))
    n = auto_norm(sys_.C)
    scaled = sys_.with_U(sys_.U.scaled(s))
    assert state_bound(n, scaled) == pytest.approx(s * state_bound(n, sys_), rel=1e-12)

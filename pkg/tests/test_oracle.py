import numpy as np
import pytest
from hypothesis import given, strategies as st

from reachlp.dual import assemble_omega, solve_dual_lp, solve_limit_set
from reachlp.errors import DimensionMismatch, EmptyPolytope, NotConverged
from reachlp.lyapunov import auto_norm, build_ell_norm
from reachlp.normals import axis_normals, make_normals
from reachlp.oracle import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    compare_results,
    default_seed,
    iterate_once,
    projected_iteration,
    support_series,
)
from reachlp.system import Box, ControlSystem

from _helpers import UNIT_BOX, half_system, random_system, rot

AX = axis_normals(2)


def test_series_half_identity():
    value, tail = support_series(half_system(), [1, 0], 1e-9)
    assert abs(value - 2.0) <= 1e-9 and tail <= 1e-9
    assert value <= 2.0 <= value + tail


def test_series_memoryless_is_exact_after_one_term():
    sys_ = ControlSystem(np.zeros((2, 2)), np.eye(2), UNIT_BOX)
    assert support_series(sys_, [0.6, 0.8], 1e-12) == (pytest.approx(1.4, abs=1e-15), 0.0)


def test_series_rotation_brute_force():
    C = 0.5 * rot(np.pi / 2)
    value, tail = support_series(half_system(C), [1, 0], 1e-10)
    brute = sum(np.abs(np.linalg.matrix_power(C.T, j) @ [1, 0]).sum() for j in range(60))
    assert value == pytest.approx(brute, abs=1e-10)
    assert value == pytest.approx(2.0, abs=1e-9)


def test_series_vectorised_and_inflated():
    sys_ = half_system()
    vals, tails = support_series(sys_, AX.A, 1e-10, epsilon=0.1)
    np.testing.assert_allclose(vals, 2.2, atol=1e-9)
    assert tails.shape == (4,)
    with pytest.raises(ValueError):
        support_series(sys_, [1, 0], 0.0)


def test_series_tail_respects_spec_bound():
    sys_ = random_system(np.random.default_rng(1))
    norm = auto_norm(sys_.C)
    a = np.array([0.6, 0.8])
    v1, t1 = support_series(sys_, a, 1e-3, norm)
    v2, _ = support_series(sys_, a, 1e-12, norm)
    assert abs(v2 - v1) <= t1 + 1e-12


def test_iterate_once_examples():
    s = half_system()
    np.testing.assert_allclose(iterate_once(AX, np.zeros(4), s), 1.0)
    np.testing.assert_allclose(iterate_once(AX, np.ones(4), s), 1.5)
    np.testing.assert_allclose(iterate_once(AX, 2 * np.ones(4), s), 2.0)
    np.testing.assert_allclose(iterate_once(AX, np.ones(4), s, method="lp"), 1.5)
    with pytest.raises(EmptyPolytope):
        iterate_once(AX, [-1, 0, 0, 0], s)
    with pytest.raises(EmptyPolytope):
        iterate_once(AX, [-1, 0, 0, 0], s, method="lp")


def test_iteration_closed_form():
    st_ = projected_iteration(AX, half_system(), tol=1e-10, max_iter=5)
    assert not st_.converged
    np.testing.assert_allclose(st_.b, 2 * (1 - 0.5**5), atol=1e-14)
    np.testing.assert_allclose(st_.increments, 0.5 ** np.arange(5), atol=1e-14)
    full = projected_iteration(AX, half_system(), tol=1e-10)
    assert full.converged
    assert np.all(full.b <= 2.0) and np.all(full.b >= 2.0 - 1e-10)


def test_iteration_memoryless_one_step():
    sys_ = ControlSystem(np.zeros((2, 2)), np.eye(2), UNIT_BOX)
    st_ = projected_iteration(AX, sys_)
    assert st_.k == 2 and st_.increments[-1] == 0.0
    np.testing.assert_allclose(st_.b, 1.0)


def test_iteration_max_iter_one():
    st_ = projected_iteration(AX, half_system(), max_iter=1)
    assert not st_.converged and st_.k == 1
    np.testing.assert_allclose(st_.b, 1.0)
    with pytest.raises(NotConverged) as err:
        projected_iteration(AX, half_system(), max_iter=1, strict=True)
    np.testing.assert_allclose(err.value.state.b, 1.0)


def test_default_seed_is_inside_limit_set():
    sys_ = ControlSystem(0.5 * np.eye(2), np.eye(2), Box([1.0, 2.0], [3.0, 4.0]))
    b0 = default_seed(AX, sys_)
    np.testing.assert_allclose(b0, AX.A @ [4.0, 6.0])
    np.testing.assert_allclose(default_seed(AX, half_system()), 0.0)


def test_compare_pass_fail_inconclusive():
    b = 2 * np.ones(4)
    ok = compare_results(b, b - 1e-10, b + 1e-7, tol=1e-6)
    assert ok.containment == [PASS] * 4 and ok.ok and ok.max_gap == pytest.approx(1e-7)
    low = compare_results(b - 0.1, b, b, tol=1e-6)
    assert low.containment == [FAIL] * 4 and not low.ok
    vague = compare_results(b - 0.1, b, b - 0.1, tails=np.full(4, 0.5), tol=1e-6)
    assert vague.containment == [INCONCLUSIVE] * 4 and vague.inconclusive and vague.ok
    with pytest.raises(DimensionMismatch):
        compare_results(b, b[:3], b)


def test_compare_hausdorff_against_bound():
    b = 2 * np.ones(4)
    rep = compare_results(b, b - 0.01, b, tol=1e-6, normals=AX, bound=0.05)
    assert rep.hausdorff == pytest.approx(0.01) and rep.hausdorff_ok
    rep = compare_results(b, b - 0.01, b, tol=1e-6, normals=AX, bound=0.001)
    assert rep.hausdorff_ok is False and not rep.ok


NORMALS = {N: make_normals(2, N) for N in (6, 10)}


@given(st.integers(0, 10**6), st.sampled_from([6, 10]))
def test_operator_is_monotone(seed, N):
    rng = np.random.default_rng(seed)
    normals, sys_ = NORMALS[N], random_system(rng)
    b = rng.uniform(0.0, 2.0, N)
    b2 = b + rng.uniform(0.0, 1.0, N)
    assert np.all(iterate_once(normals, b, sys_) <= iterate_once(normals, b2, sys_) + 1e-9)


@given(st.integers(0, 10**6), st.sampled_from([6, 10]), st.sampled_from([0.0, 0.1]))
def test_fixed_point_and_monotone_iteration(seed, N, eps):
    normals, sys_ = NORMALS[N], random_system(np.random.default_rng(seed))
    b_star = solve_dual_lp(assemble_omega(normals, sys_, eps))[0]
    np.testing.assert_allclose(iterate_once(normals, b_star, sys_, eps), b_star, atol=1e-7)
    st_ = projected_iteration(normals, sys_, eps, tol=1e-9, max_iter=200)
    prev = default_seed(normals, sys_)
    b = prev
    for _ in range(min(st_.k, 40)):
        b = iterate_once(normals, b, sys_, eps)
        assert np.all(b >= prev - 1e-9) and np.all(b <= b_star + 1e-7)
        prev = b


@given(st.integers(0, 10**6))
def test_increments_eventually_decrease(seed):
    normals, sys_ = NORMALS[10], random_system(np.random.default_rng(seed))
    inc = np.array(projected_iteration(normals, sys_, tol=1e-10).increments)
    tail = inc[len(inc) // 2:]
    assert tail[-1] <= tail[0] + 1e-12
    assert inc[-1] < inc.max() or len(inc) <= 2


def test_certified_hausdorff_bound_holds():
    normals = make_normals(2, 32)
    sys_ = ControlSystem(0.2 * rot(0.4), np.eye(2), Box([-1.0, -0.5], [1.0, 0.5]))
    res = solve_limit_set(normals, sys_)
    assert res.assumption2.holds and res.hausdorff_certificate is not None
    series, tails = support_series(sys_, normals.A, 1e-10, res.norm)
    it = projected_iteration(normals, sys_, norm=res.norm)
    rep = compare_results(res.b_star, series, it.b, tails, 1e-6, normals=normals, bound=res.error.euclidean_bound)
    assert rep.ok and rep.hausdorff_ok
    assert rep.hausdorff <= res.error.euclidean_bound

import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reachlp.dual import (
    assemble_omega,
    check_disjunctive,
    epsilon_sweep,
    solve_dual_lp,
    solve_limit_set,
    verify_invariance,
    verify_tightness,
)
from reachlp.errors import DualUnbounded, EmptyExtremeSet, EmptyPolytope
from reachlp.geometry import kappa_estimate
from reachlp.lyapunov import auto_norm
from reachlp.normals import FacetNormals, axis_normals, make_normals
from reachlp.oracle import projected_iteration, support_series
from reachlp.system import Ball, Box, ControlSystem, support_V

from _helpers import UNIT_BOX, half_system, random_system, rot

AX = axis_normals(2)


def quiet_solve(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_limit_set(*args, **kwargs)


def test_assemble_axis_example():
    cons = assemble_omega(AX, half_system())
    np.testing.assert_allclose(cons.facet_points(0), [[0.5, 0, 0, 0]])
    np.testing.assert_allclose(cons.G[cons.facet == 0], [[0.5, 0, 0, 0]])
    np.testing.assert_allclose(cons.h, 1.0)


def test_assemble_memoryless():
    cons = assemble_omega(make_normals(2, 6), ControlSystem(np.zeros((2, 2)), np.eye(2), UNIT_BOX))
    assert len(cons) == 6
    np.testing.assert_allclose(cons.points, 0.0)
    np.testing.assert_allclose(cons.G, np.eye(6))


def test_assemble_epsilon_shifts_rhs():
    n = make_normals(2, 8)
    a, b = assemble_omega(n, half_system(), 0.0), assemble_omega(n, half_system(), 0.5)
    np.testing.assert_allclose(b.h - a.h, 0.5, atol=1e-14)
    np.testing.assert_array_equal(a.points, b.points)


def test_assemble_order_and_dedup():
    sys_ = random_system(np.random.default_rng(2))
    n = make_normals(2, 12)
    cons = assemble_omega(n, sys_)
    assert np.all(np.diff(cons.facet) >= 0)
    for i in range(n.N):
        P = cons.facet_points(i)
        assert len(P) >= 1
        assert len(np.unique(np.round(P, 9), axis=0)) == len(P)
        # lexicographic within a facet
        assert [tuple(r) for r in P] == sorted(tuple(r) for r in P)
        np.testing.assert_allclose(P @ n.A, np.tile(sys_.C.T @ n.A[i], (len(P), 1)), atol=1e-9)


def test_assemble_empty_extreme_set_names_facet():
    # C^T a for the first row is (0, -0.5), is no nonnegative combination of these rows
    bad = FacetNormals(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]), check=False)
    with pytest.raises(EmptyExtremeSet) as err:
        assemble_omega(bad, half_system(0.5 * rot(np.pi / 2)))
    assert err.value.facet == 0 and "facet 0" in str(err.value)


def test_axis_half_identity():
    res = quiet_solve(AX, half_system())
    np.testing.assert_allclose(res.b_star, 2.0, atol=1e-12)
    np.testing.assert_allclose(res.margins, 0.0, atol=1e-9)
    np.testing.assert_allclose(res.residuals, 0.0, atol=1e-12)
    assert res.ok and res.nonempty


def test_axis_half_identity_assumption2_advisory():
    with pytest.warns(UserWarning, match="withheld"):
        res = solve_limit_set(AX, half_system())
    assert not res.assumption2.holds
    assert res.hausdorff_certificate is None and res.ok


def test_memoryless_gives_support_of_V():
    n = make_normals(2, 7)
    sys_ = ControlSystem(np.zeros((2, 2)), [[1.0, 0.3], [0.0, 2.0]], Box([-0.2, -1.0], [1.0, 0.5]))
    res = quiet_solve(n, sys_)
    np.testing.assert_allclose(res.b_star, support_V(sys_, n.A), atol=1e-12)
    np.testing.assert_allclose(res.residuals, 0.0, atol=1e-12)


@pytest.mark.parametrize("eps, expected", [(0.0, 2.0), (0.1, 2.2)])
def test_rotation(eps, expected):
    res = quiet_solve(AX, half_system(0.5 * rot(np.pi / 2)), eps)
    np.testing.assert_allclose(res.b_star, expected, atol=1e-12)
    assert res.ok


def test_margin_examples():
    s = half_system()
    np.testing.assert_allclose(verify_invariance(AX, 3 * np.ones(4), s), 0.5, atol=1e-12)
    np.testing.assert_allclose(verify_invariance(AX, np.ones(4), s), -0.5, atol=1e-12)
    with pytest.raises(EmptyPolytope):
        verify_invariance(AX, [-1, 0, 0, 0], s)


def test_tightness_examples():
    cons = assemble_omega(AX, half_system())
    np.testing.assert_allclose(verify_tightness(2 * np.ones(4), cons), 0.0)
    r = verify_tightness(2 * np.ones(4) + 0.1 * np.eye(4)[0], cons)
    np.testing.assert_allclose(r, [-0.05, 0, 0, 0], atol=1e-14)
    memoryless = assemble_omega(AX, ControlSystem(np.zeros((2, 2)), np.eye(2), UNIT_BOX))
    np.testing.assert_allclose(verify_tightness(np.ones(4), memoryless), 0.0)


def test_disjunctive_check():
    cons = assemble_omega(AX, half_system())
    assert check_disjunctive(2 * np.ones(4), cons)
    # any invariant box satisfies the disjunctive constraints; b* is the smallest
    assert check_disjunctive(3 * np.ones(4), cons)
    assert not check_disjunctive(np.ones(4), cons)
    assert not check_disjunctive([-1, 0, 0, 0], cons)


def test_unstable_system_is_dual_unbounded():
    with pytest.raises(DualUnbounded) as err:
        solve_dual_lp(assemble_omega(AX, half_system(np.eye(2))))
    ray = err.value.ray
    assert ray is not None and np.all(ray >= -1e-12) and ray.sum() > 0


def test_sweep_example():
    sw = epsilon_sweep(AX, half_system(), [0.4, 0.2, 0.1])
    np.testing.assert_allclose(sw.b_eps, [[2.8] * 4, [2.4] * 4, [2.2] * 4], atol=1e-12)
    np.testing.assert_allclose(sw.b0, 2.0, atol=1e-12)
    np.testing.assert_allclose(sw.gaps(), [0.8, 0.4, 0.2], atol=1e-12)
    assert sw.monotone
    direct = quiet_solve(AX, half_system())
    assert sw.b0.tobytes() == direct.b_star.tobytes()
    with pytest.raises(ValueError):
        epsilon_sweep(AX, half_system(), [0.1, 0.2])


def test_sweep_memoryless_linear():
    n = make_normals(2, 6)
    sys_ = ControlSystem(np.zeros((2, 2)), np.eye(2), Ball([0.2, 0.1], 0.5))
    sw = epsilon_sweep(n, sys_, [0.3, 0.1])
    np.testing.assert_allclose(sw.b_eps - sw.b0, [[0.3] * 6, [0.1] * 6], atol=1e-12)


def test_uniqueness_probe_is_deterministic():
    sys_ = random_system(np.random.default_rng(5))
    n = make_normals(2, 10)
    a = quiet_solve(n, sys_, seed=3)
    b = quiet_solve(n, sys_, seed=3)
    assert a.b_star.tobytes() == b.b_star.tobytes()
    assert a.uniqueness_shift == b.uniqueness_shift < 1e-6


NORMALS = {N: make_normals(2, N) for N in (6, 9, 12)}
_seeds = st.integers(0, 10**6)


def _instance(seed, N):
    rng = np.random.default_rng(seed)
    return NORMALS[N], random_system(rng)


@given(_seeds, st.sampled_from(sorted(NORMALS)), st.sampled_from([0.0, 0.05]))
def test_solution_invariants(seed, N, eps):
    normals, sys_ = _instance(seed, N)
    norm = auto_norm(sys_.C)
    res = quiet_solve(normals, sys_, eps, norm=norm, kappa=0.0, probe=False)
    # invariance and tightness certificates
    assert np.all(res.margins >= -1e-7)
    assert np.all(np.abs(res.residuals) <= 1e-7)
    # containment of X*
    series, tail = support_series(sys_, normals.A, 1e-9, norm, eps)
    assert np.all(series <= res.b_star + tail + 1e-7)
    # agreement with the projected iteration
    it = projected_iteration(normals, sys_, eps, 1e-9, norm=norm)
    assert it.converged
    assert np.abs(it.b - res.b_star).max() <= 1e-6


@given(_seeds, st.sampled_from(sorted(NORMALS)))
def test_epsilon_monotone(seed, N):
    normals, sys_ = _instance(seed, N)
    sw = epsilon_sweep(normals, sys_, [0.2, 0.05, 0.01])
    assert sw.monotone


@given(_seeds, st.sampled_from(sorted(NORMALS)), st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_translation_covariance(seed, N, w):
    normals, sys_ = _instance(seed, N)
    w = np.array(w)
    shifted = sys_.with_U(sys_.U.shifted(np.linalg.solve(sys_.D, w)))
    b = solve_dual_lp(assemble_omega(normals, sys_))[0]
    bw = solve_dual_lp(assemble_omega(normals, shifted))[0]
    expected = b + normals.A @ np.linalg.solve(np.eye(2) - sys_.C, w)
    np.testing.assert_allclose(bw, expected, atol=1e-7)


@given(_seeds, st.sampled_from(sorted(NORMALS)), st.floats(0.1, 10))
def test_scaling_covariance(seed, N, s):
    normals, sys_ = _instance(seed, N)
    b = solve_dual_lp(assemble_omega(normals, sys_))[0]
    bs = solve_dual_lp(assemble_omega(normals, sys_.with_U(sys_.U.scaled(s))))[0]
    np.testing.assert_allclose(bs, s * b, atol=1e-9 * max(1.0, s))


@given(_seeds, st.sampled_from([6, 12]))
def test_symmetric_fan_and_set(seed, N):
    rng = np.random.default_rng(seed)
    normals = NORMALS[N]
    sys_ = random_system(rng)
    sym = sys_.with_U(Box(-np.ones(2), np.ones(2)))
    b = solve_dual_lp(assemble_omega(normals, sym))[0]
    A = normals.A
    perm = [int(np.argmin(np.abs(A + a).max(axis=1))) for a in A]
    np.testing.assert_allclose(b[perm], b, atol=1e-9)

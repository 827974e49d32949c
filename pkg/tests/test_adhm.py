import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unitary
from instantons.adhm import (
    ADHMData,
    adhm_connection,
    adhm_curvature,
    adhm_curvature_field,
    adhm_objective,
    adhm_potential,
    adhm_residuals,
    basic_adhm_data,
    complex_coordinates,
    fiber_frame,
    framed_tangent_dimension,
    gauge_transform,
    is_costable,
    is_regular,
    is_stable,
    is_valid,
    min_singular_scan,
    monad_at,
    random_adhm_data,
    regularity_report,
    solve_adhm,
)
from instantons.core import pointwise_norm_sq
from instantons.errors import FrameJumpError, InvalidParameterError, NonConvergenceError, NonRegularDataError
from instantons.fields import GridSpec, asd_relative, curvature_fd, topological_charge
from instantons.moduli import adhm_framed_dim


def zero_data(c=1, r=1):
    return ADHMData(np.zeros((c, c)), np.zeros((c, c)), np.zeros((c, r)), np.zeros((r, c)))


_SOLVED = {}


def solved(c, r, seed=0, scale=2.0):
    key = (c, r, seed, scale)
    if key not in _SOLVED:
        _SOLVED[key] = solve_adhm(random_adhm_data(c, r, np.random.default_rng(seed), scale)).data
    return _SOLVED[key]


def naive_residuals(d):
    B1, B2, i, j = (np.asarray(m).tolist() for m in (d.B1, d.B2, d.i, d.j))

    def mul(a, b):
        return [[sum(a[p][k] * b[k][q] for k in range(len(b))) for q in range(len(b[0]))] for p in range(len(a))]

    def adj(a):
        return [[a[q][p].conjugate() for q in range(len(a))] for p in range(len(a[0]))]

    def add(*terms):
        return [[sum(t[p][q] for t in terms) for q in range(len(terms[0][0]))] for p in range(len(terms[0]))]

    def neg(a):
        return [[-v for v in row] for row in a]

    rc = add(mul(B1, B2), neg(mul(B2, B1)), mul(i, j))
    rr = add(
        mul(B1, adj(B1)), neg(mul(adj(B1), B1)), mul(B2, adj(B2)), neg(mul(adj(B2), B2)),
        mul(i, adj(i)), neg(mul(adj(j), j)),
    )
    return np.array(rc), np.array(rr)


def test_basic_data_shapes_and_residuals():
    d = basic_adhm_data()
    assert (d.c, d.r) == (1, 2)
    rc, rr = adhm_residuals(d)
    assert np.array_equal(rc, np.zeros((1, 1))) and np.array_equal(rr, np.zeros((1, 1)))
    assert is_valid(d) and adhm_objective(d) == 0.0
    assert adhm_objective(zero_data()) == 0.0


@pytest.mark.parametrize("c, r", [(1, 1), (2, 2), (3, 2), (2, 4)])
def test_residuals_match_naive_oracle(rng, c, r):
    d = random_adhm_data(c, r, rng)
    for fast, slow in zip(adhm_residuals(d), naive_residuals(d)):
        assert np.allclose(fast, slow, atol=1e-12)
    assert not is_valid(d)


def test_shape_validation():
    with pytest.raises(InvalidParameterError):
        ADHMData(np.zeros((2, 2)), np.zeros((1, 1)), np.zeros((2, 1)), np.zeros((1, 2)))
    with pytest.raises(InvalidParameterError):
        ADHMData(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 2)), np.zeros((1, 1)))
    with pytest.raises(InvalidParameterError):
        ADHMData(np.zeros(1), np.zeros((1, 1)), np.zeros((1, 2)), np.zeros((2, 1)))


def test_data_is_immutable():
    d = basic_adhm_data()
    with pytest.raises(ValueError):
        d.B1[0, 0] = 1.0


def test_pack_roundtrip(rng):
    d = random_adhm_data(2, 3, rng)
    e = ADHMData.unpack(d.pack(), 2, 3)
    assert all(np.array_equal(getattr(d, n), getattr(e, n)) for n in ("B1", "B2", "i", "j"))


def test_monad_of_basic_data_at_origin():
    m = monad_at(basic_adhm_data(), 0, 0)
    assert np.array_equal(m.alpha, np.array([[0], [0], [0], [1]]))
    assert np.array_equal(m.beta, np.array([[0, 0, 1, 0]]))
    assert np.array_equal(m.D, np.vstack([m.beta, np.conj(m.alpha.T)]))


@pytest.mark.parametrize("c, r", [(1, 2), (2, 2), (3, 2)])
def test_monad_exactness_and_xi_structure(rng, c, r):
    d = basic_adhm_data() if c == 1 else solved(c, r)
    scale = max(1.0, d.norm())
    # the z-dependent terms cancel, leaving the complex equation's residual
    bound = np.linalg.norm(adhm_residuals(d)[0]) + 1e-12 * scale**2
    for z1, z2 in rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2)):
        m = monad_at(d, z1, z2)
        assert np.linalg.norm(m.beta @ m.alpha) <= 1.01 * bound
    for z1, z2 in rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2)):
        m = monad_at(d, z1, z2)
        bb = m.beta @ np.conj(m.beta.T)
        assert np.allclose(m.Xi[:c, c:], 0, atol=1e-10)
        assert np.allclose(m.Xi[:c, :c], bb, atol=1e-12)
        assert np.allclose(m.Xi[c:, c:], bb, atol=1e-9)


def test_regularity_examples():
    assert is_stable(basic_adhm_data()) and is_costable(basic_adhm_data()) and is_regular(basic_adhm_data())
    z = zero_data()
    assert not is_stable(z) and not is_costable(z) and not is_regular(z)
    report = regularity_report(z)
    assert report["regular"] is False and report["stability_margin"] == 0.0


SCAN_AXIS = np.linspace(-2.0, 2.0, 20)


def _scan_points():
    return np.array(list(itertools.product(SCAN_AXIS, repeat=4)))


def _unstable_data():
    # common eigenvector e2 of B1^+, B2^+ killed by i^+, placed on a scan node
    a, b, c_, e = SCAN_AXIS[3], SCAN_AXIS[15], SCAN_AXIS[7], SCAN_AXIS[11]
    z1, z2 = complex_coordinates(np.array([a, b, c_, e]))
    B1 = np.diag([1.0, -z1])
    B2 = np.diag([0.5j, -z2])
    return ADHMData(B1, B2, [[1.0], [0.0]], [[0.3, 0.0]])


def test_singular_value_scan_agrees_with_stability(rng):
    pts = _scan_points()
    unstable = _unstable_data()
    assert not is_stable(unstable)
    assert min_singular_scan(unstable, pts, "beta") < 1e-12
    for d in (basic_adhm_data(), solved(2, 2), random_adhm_data(2, 1, rng)):
        assert is_stable(d)
        assert min_singular_scan(d, pts, "beta") > 1e-6


def test_costability_is_the_dual_condition(rng):
    d = _unstable_data()
    dual = ADHMData(d.B1.T, d.B2.T, d.j.T, d.i.T)  # transpose swaps the roles of i and j
    assert is_stable(dual) == is_costable(d)
    assert is_costable(dual) == is_stable(d)


def test_fiber_frame_of_basic_data_at_origin():
    psi = fiber_frame(basic_adhm_data(), np.zeros(4))
    assert np.allclose(psi[2:], 0, atol=1e-15)
    assert np.allclose(np.conj(psi[:2].T) @ psi[:2], np.eye(2))


@pytest.mark.parametrize("c, r", [(1, 2), (2, 2), (2, 3)])
def test_fiber_frame_is_orthonormal_kernel(rng, c, r):
    from instantons.adhm import _dirac

    d = basic_adhm_data() if c == 1 else solved(c, r)
    x = rng.normal(size=(100, 4))
    psi = fiber_frame(d, x)
    assert psi.shape == (100, 2 * c + r, r)
    assert np.max(np.abs(_dirac(d, x) @ psi)) < 1e-12
    assert np.allclose(np.conj(np.swapaxes(psi, -1, -2)) @ psi, np.eye(r), atol=1e-12)


def test_frame_of_non_regular_data_fails():
    with pytest.raises(NonRegularDataError):
        fiber_frame(zero_data(), np.zeros(4))
    with pytest.raises(NonRegularDataError):
        adhm_connection(zero_data())


def test_basic_curvature_is_asd_and_matches_profile(rng):
    d = basic_adhm_data()
    x = rng.uniform(-3, 3, size=(100, 4))
    F = adhm_curvature(d, x)
    assert np.max(asd_relative(F)) < 1e-10
    n = np.sqrt(pointwise_norm_sq(F))
    n0 = np.sqrt(pointwise_norm_sq(adhm_curvature(d, np.zeros(4))))
    assert np.allclose(n / n0, 1 / (1 + np.sum(x * x, axis=-1)) ** 2, rtol=0, atol=1e-6)


def test_connection_is_antihermitian_to_second_order(rng):
    d = basic_adhm_data()
    x = rng.uniform(-2, 2, size=(20, 4))
    dev1 = adhm_potential(d, x, h=1e-2)[1]
    dev2 = adhm_potential(d, x, h=5e-3)[1]
    assert dev1 < 1e-3 and dev2 < dev1 / 3


@pytest.mark.parametrize("c, r", [(1, 2), (2, 2)])
def test_fd_curvature_of_connection_matches_closed_form(rng, c, r):
    d = basic_adhm_data() if c == 1 else solved(c, r)
    conn = adhm_connection(d)
    x = rng.uniform(-1.5, 1.5, size=(20, 4))
    exact = conn.curvature(x)
    e1, e2 = (np.max(np.abs(curvature_fd(conn, x, h) - exact)) for h in (2e-2, 1e-2))
    assert 3.5 < e1 / e2 < 4.5
    fd = curvature_fd(conn, x, 1e-3)
    assert np.allclose(pointwise_norm_sq(fd), pointwise_norm_sq(exact), rtol=1e-5)


def test_frame_jump_is_reported():
    conn = adhm_connection(basic_adhm_data(), align_tol=0.5)
    with pytest.raises(FrameJumpError) as info:
        conn(np.array([[0.1, 0, 0, 0], [3.0, 0, 0, 0]]))
    assert np.allclose(info.value.location, [3.0, 0, 0, 0], atol=1e-3)


def test_basic_charge_coarse():
    q = topological_charge(adhm_curvature_field(basic_adhm_data()), GridSpec(extent=8.0, spacing=0.5))
    assert q == pytest.approx(1.0, abs=1e-2)


def test_solver_keeps_exact_data():
    sol = solve_adhm(basic_adhm_data())
    assert sol.iterations == 0 and sol.objective == 0.0
    assert np.array_equal(sol.data.i, basic_adhm_data().i)


def test_solver_repairs_perturbed_basic_data(rng):
    d = basic_adhm_data()
    noise = rng.normal(size=d.pack().shape) + 1j * rng.normal(size=d.pack().shape)
    seed = ADHMData.unpack(d.pack() + 1e-2 * noise / np.linalg.norm(noise), 1, 2)
    sol = solve_adhm(seed, max_iters=10_000)
    assert sol.objective < 1e-20 and (sol.data.c, sol.data.r) == (1, 2)
    assert all(b <= a for a, b in zip(sol.history, sol.history[1:]))


def test_solver_non_convergence():
    with pytest.raises(NonConvergenceError) as info:
        solve_adhm(random_adhm_data(2, 2, np.random.default_rng(0)), max_iters=3)
    assert info.value.final_value > 0 and info.value.iterations == 3


@pytest.mark.parametrize("c, r", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_solutions_are_regular_asd_and_have_expected_tangent_dimension(rng, c, r):
    d = solved(c, r)
    assert is_valid(d) and is_regular(d)
    F = adhm_curvature(d, rng.uniform(-3, 3, size=(100, 4)))
    assert np.max(asd_relative(F)) < 1e-10
    assert framed_tangent_dimension(d)[0] == adhm_framed_dim(r, c) == 4 * r * c


def test_tangent_dimension_of_basic_data():
    dim, s = framed_tangent_dimension(basic_adhm_data())
    assert dim == 8
    assert np.sum(s <= 1e-8) == 0 or dim == 8


@given(st.integers(0, 2**32 - 1))
def test_unitary_covariance(seed):
    rng = np.random.default_rng(seed)
    d = solved(2, 2)
    g = random_unitary(rng, 2)
    e = gauge_transform(d, g)
    assert is_valid(e)
    x = rng.uniform(-2, 2, size=(10, 4))
    a = pointwise_norm_sq(adhm_curvature(d, x))
    b = pointwise_norm_sq(adhm_curvature(e, x))
    assert np.allclose(a, b, rtol=1e-10)

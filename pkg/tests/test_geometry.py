import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from singmin.exceptions import EvaluationError, ValidationError
from singmin.geometry import (
    Direction,
    GraphFn,
    cross_product_n,
    fd_gradient,
    first_fundamental,
    mean_curvature,
    second_fundamental,
    shape_operator,
    unit_normal,
)

from conftest import probe_points


def poly_fn(func, n=2):
    """Derivative-free GraphFn (finite-difference provenance)."""
    return GraphFn(func, n)


def nested_fd_mean_curvature(f, x, h=1e-5):
    """Oracle: (1/n) div(grad f / phi) by central differences of the flux."""

    def flux(y):
        g = fd_gradient(f.evaluate, y)
        return g / np.sqrt(1 + g @ g)

    total = 0.0
    for j in range(f.n):
        e = np.zeros(f.n)
        e[j] = h
        total += (flux(x + e)[j] - flux(x - e)[j]) / (2 * h)
    return total / f.n


# -- Direction ----------------------------------------------------------------


def test_direction_normalizes():
    d = Direction(np.array([3.0, 0.0, 4.0]))
    assert abs(np.linalg.norm(d.u) - 1) < 1e-12
    np.testing.assert_allclose(d.u, [0.6, 0.0, 0.8])


def test_direction_rejects_zero():
    with pytest.raises(ValidationError):
        Direction(np.zeros(3))


def test_direction_vertical_horizontal():
    assert Direction.vertical(3).is_vertical()
    assert Direction.horizontal(3).is_horizontal()
    assert not Direction.horizontal(3).is_vertical()


# -- unit normal ----------------------------------------------------------------


def test_unit_normal_constant():
    f = poly_fn(lambda x: 3.0)
    np.testing.assert_allclose(unit_normal(f, [0.0, 0.0]), [0, 0, 1], atol=1e-12)


def test_unit_normal_plane():
    f = poly_fn(lambda x: x[0] + 2.0)
    np.testing.assert_allclose(unit_normal(f, [0.3, -1.2]), np.array([-1, 0, 1]) / np.sqrt(2), atol=1e-9)


def test_unit_normal_paraboloid_fd_oracle():
    f = poly_fn(lambda x: x[0] ** 2 + x[1] ** 2)
    np.testing.assert_allclose(unit_normal(f, [1.0, 0.0]), np.array([-2, 0, 1]) / np.sqrt(5), atol=1e-8)


def test_unit_normal_nonfinite_gradient():
    f = GraphFn(lambda x: 0.0, 2, grad=lambda x: np.array([np.inf, 0.0]), hess=lambda x: np.zeros((2, 2)))
    with pytest.raises(EvaluationError):
        unit_normal(f, [0.0, 0.0])


def test_unit_normal_is_unit_and_upward(analytic_fn):
    for x in probe_points(analytic_fn, 50, radius=0.9):
        nu = unit_normal(analytic_fn, x)
        assert abs(np.linalg.norm(nu) - 1) < 1e-12
        assert nu[-1] > 0


# -- fundamental forms ----------------------------------------------------------


def test_first_fundamental_examples():
    np.testing.assert_allclose(first_fundamental(poly_fn(lambda x: 7.0), [1.0, 2.0]), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(first_fundamental(poly_fn(lambda x: x[0]), [1.0, 2.0]), [[2, 0], [0, 1]], atol=1e-9)
    np.testing.assert_allclose(
        first_fundamental(poly_fn(lambda x: x[0] * x[1]), [1.0, 1.0]), [[2, 1], [1, 2]], atol=1e-8
    )


def test_first_fundamental_positive_definite(analytic_fn):
    for x in probe_points(analytic_fn, 20, radius=0.9):
        assert np.all(np.linalg.eigvalsh(first_fundamental(analytic_fn, x)) >= 1 - 1e-12)


def test_second_fundamental_examples():
    lin = poly_fn(lambda x: 2 * x[0] - x[1] + 1)
    np.testing.assert_allclose(second_fundamental(lin, [0.5, 0.5]), np.zeros((2, 2)), atol=1e-6)
    bowl = GraphFn(lambda x: 0.5 * x @ x, 2, grad=lambda x: x, hess=lambda x: np.eye(2))
    np.testing.assert_allclose(second_fundamental(bowl, [0.0, 0.0]), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(second_fundamental(bowl, [1.0, 0.0]), np.eye(2) / np.sqrt(2), atol=1e-14)


def test_hessian_symmetric(analytic_fn):
    for x in probe_points(analytic_fn, 10, radius=0.9):
        h = GraphFn(analytic_fn.func, analytic_fn.n).hessian(x)
        assert np.max(np.abs(h - h.T)) <= 1e-8 * max(1.0, np.max(np.abs(h)))


# -- shape operator -------------------------------------------------------------


def test_shape_operator_examples():
    lin = GraphFn(lambda x: x[0] - x[1], 2, grad=lambda x: np.array([1.0, -1.0]), hess=lambda x: np.zeros((2, 2)))
    np.testing.assert_array_equal(shape_operator(lin, [0.2, 0.1]), np.zeros((2, 2)))
    bowl = GraphFn(lambda x: 0.5 * x @ x, 2, grad=lambda x: x, hess=lambda x: np.eye(2))
    np.testing.assert_allclose(shape_operator(bowl, [0.0, 0.0]), np.eye(2), atol=1e-15)
    sq = GraphFn(lambda x: x[0] ** 2, 2, grad=lambda x: np.array([2 * x[0], 0.0]),
                 hess=lambda x: np.diag([2.0, 0.0]))
    expected = np.zeros((2, 2))
    expected[0, 0] = 2 / np.sqrt(5) - 8 / 5**1.5
    np.testing.assert_allclose(shape_operator(sq, [1.0, 0.0]), expected, atol=1e-14)


def test_shape_operator_equals_h_ginv(analytic_fn):
    for x in probe_points(analytic_fn, 30, radius=0.9):
        a = shape_operator(analytic_fn, x)
        g = first_fundamental(analytic_fn, x)
        h = second_fundamental(analytic_fn, x)
        np.testing.assert_allclose(a, h @ np.linalg.inv(g), atol=1e-10)
        np.testing.assert_allclose(a @ g, h, atol=1e-9)


# -- mean curvature -------------------------------------------------------------


def test_mean_curvature_plane_is_zero():
    lin = GraphFn(lambda x: 3 * x[0] + x[1], 2, grad=lambda x: np.array([3.0, 1.0]), hess=lambda x: np.zeros((2, 2)))
    assert mean_curvature(lin, [1.0, 1.0]) == 0.0


def test_mean_curvature_hemisphere():
    f = poly_fn(lambda x: np.sqrt(1 - x[0] ** 2 - x[1] ** 2))
    assert mean_curvature(f, [0.0, 0.0]) == pytest.approx(-1.0, abs=1e-5)
    assert nested_fd_mean_curvature(f, np.zeros(2)) == pytest.approx(-1.0, abs=1e-4)


def test_scherk_is_minimal():
    from conftest import ANALYTIC

    f = ANALYTIC["scherk"]()
    assert abs(mean_curvature(f, [0.3, 0.2])) < 1e-9


def test_mean_curvature_trace_identity(analytic_fn):
    for x in probe_points(analytic_fn, 100, seed=7, radius=0.9):
        assert analytic_fn.n * mean_curvature(analytic_fn, x) == pytest.approx(
            np.trace(shape_operator(analytic_fn, x)), abs=1e-9
        )


def test_mean_curvature_matches_nested_fd_oracle(analytic_fn):
    for x in probe_points(analytic_fn, 5, seed=3, radius=0.8):
        assert mean_curvature(analytic_fn, x) == pytest.approx(nested_fd_mean_curvature(analytic_fn, x), abs=2e-5)


def test_analytic_derivatives_self_check(analytic_fn):
    g_err, h_err = analytic_fn.check_derivatives(probe_points(analytic_fn, 10, radius=0.9))
    assert g_err < 1e-6 and h_err < 1e-4


def test_self_check_catches_wrong_gradient():
    bad = GraphFn(lambda x: x @ x, 2, grad=lambda x: x, hess=lambda x: 2 * np.eye(2))
    with pytest.raises(ValidationError):
        bad.check_derivatives([[0.5, 0.5]])


def test_graphfn_arity_checks():
    f = poly_fn(lambda x: x[0])
    with pytest.raises(ValidationError):
        f.evaluate([1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        GraphFn(lambda x: 0.0, 9)
    assert f.provenance == "finite_difference"


# -- cross product --------------------------------------------------------------


def test_cross_product_r3_basis():
    np.testing.assert_array_equal(cross_product_n([[1, 0, 0], [0, 1, 0]]), [0, 0, 1])


def test_cross_product_matches_numpy(rng):
    for _ in range(20):
        a, b = rng.normal(size=(2, 3))
        np.testing.assert_allclose(cross_product_n([a, b]), np.cross(a, b), atol=1e-12)


def test_cross_product_r4_basis():
    # first-row cofactor convention: e1 x e2 x e3 = -e4
    np.testing.assert_allclose(cross_product_n(np.eye(4)[:3]), [0, 0, 0, -1], atol=1e-15)


def test_cross_product_determinant_oracle(rng):
    for n in (2, 3, 4, 5):
        vs = rng.normal(size=(n, n + 1))
        c = cross_product_n(vs)
        for i in range(n + 1):
            e = np.zeros(n + 1)
            e[i] = 1
            assert c[i] == pytest.approx(np.linalg.det(np.vstack([e, vs])), abs=1e-10)


def test_cross_product_repeated_vector_is_zero():
    v = np.array([1.0, 2.0, -1.0, 0.5])
    w = np.array([0.0, 1.0, 3.0, 1.0])
    np.testing.assert_allclose(cross_product_n([v, w, v]), np.zeros(4), atol=1e-12)


def test_cross_product_dimension_mismatch():
    with pytest.raises(ValidationError):
        cross_product_n(np.eye(3))


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 5).flatmap(
        lambda n: arrays(np.float64, (n, n + 1), elements=st.floats(-10, 10, allow_nan=False, width=64))
    )
)
def test_cross_product_orthogonal_with_gram_norm(vs):
    c = cross_product_n(vs)
    scale = max(1.0, np.prod(np.linalg.norm(vs, axis=1)))
    assert np.max(np.abs(vs @ c)) < 1e-10 * scale
    # |c|^2 equals the Gram determinant; compare squares (sqrt amplifies roundoff near 0)
    gram = np.linalg.det(vs @ vs.T)
    assert c @ c == pytest.approx(gram, rel=1e-9, abs=1e-9 * scale**2)

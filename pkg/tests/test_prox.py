import math

import numpy as np
import pytest

from conftest import random_problem
from pdhg_primal.enums.prox_family import ProxFamily
from pdhg_primal.errors import ConfigurationError, DimensionError
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.prox import (BoxIndicator, L1Norm, LinearFunction, NonnegativeIndicator,
                                       PointIndicator, QuadraticFunction, SeparableSum,
                                       StronglyConvexified, ZeroFunction, check_prox_inequality,
                                       make_prox_function)
from pdhg_primal.services.solvers import run


def catalogue(n: int):
    return [
        ZeroFunction(n),
        LinearFunction(np.linspace(-1.0, 1.0, n)),
        QuadraticFunction(n, rho=2.0, center=0.5),
        L1Norm(n, weight=0.3),
        BoxIndicator(n, lower=-1.0, upper=2.0),
        NonnegativeIndicator(n),
        PointIndicator(np.full(n, 0.25)),
        SeparableSum([L1Norm(2), QuadraticFunction(n - 2)]),
        StronglyConvexified(L1Norm(n, weight=0.5), 1.5),
    ]


def test_soft_threshold():
    g = L1Norm(3, weight=1.0)
    np.testing.assert_allclose(g.prox(0.5, np.array([2.0, -0.3, -1.0])), [1.5, 0.0, -0.5])


def test_quadratic_prox_closed_form():
    g = QuadraticFunction(1)
    assert g.prox(1.0, np.array([0.4]))[0] == pytest.approx(0.2)
    assert g.prox(0.1, np.array([0.4]))[0] == pytest.approx(0.4 / 1.1)
    assert g.gamma == 1.0


def test_box_and_nonnegative_project():
    np.testing.assert_allclose(BoxIndicator(3, -1.0, 1.0).prox(7.0, np.array([-3.0, 0.2, 5.0])),
                               [-1.0, 0.2, 1.0])
    np.testing.assert_allclose(NonnegativeIndicator(2).prox(1.0, np.array([-1.0, 2.0])), [0.0, 2.0])
    assert math.isinf(NonnegativeIndicator(2).value(np.array([-1.0, 2.0])))


def test_linear_and_point():
    np.testing.assert_allclose(LinearFunction([1.0, -2.0]).prox(0.5, np.zeros(2)), [-0.5, 1.0])
    g = PointIndicator([3.0, 4.0])
    np.testing.assert_allclose(g.prox(1.0, np.zeros(2)), [3.0, 4.0])
    assert math.isinf(g.gamma)
    assert g.value(np.array([3.0, 4.0])) == 0.0


def test_strongly_convexified_prox_matches_direct_minimiser():
    g = StronglyConvexified(L1Norm(1, weight=1.0), 1.0)
    # argmin |x| + x^2/2 + (x - 3)^2 / 2 = 1
    assert g.prox(1.0, np.array([3.0]))[0] == pytest.approx(1.0)
    assert g.gamma == 1.0


def test_separable_sum_splits_blocks():
    g = SeparableSum([L1Norm(2, weight=1.0), QuadraticFunction(1)])
    np.testing.assert_allclose(g.prox(1.0, np.array([3.0, -0.5, 2.0])), [2.0, 0.0, 1.0])
    assert g.dimension == 3
    assert g.gamma == 0.0
    assert g.value(np.array([1.0, -1.0, 2.0])) == pytest.approx(4.0)


@pytest.mark.parametrize("index", range(9))
def test_prox_inequality_holds_across_catalogue(rng, index):
    n = 5
    g = catalogue(n)[index]
    points = [rng.standard_normal(n) for _ in range(20)] + [g.prox(1.0, rng.standard_normal(n))]
    for tau in (0.1, 1.0, 10.0):
        assert check_prox_inequality(g, tau, 3.0 * rng.standard_normal(n), points)


def test_prox_inequality_detects_wrong_prox(rng):
    class Broken(L1Norm):
        def _prox(self, step, z):
            return z

    points = [rng.standard_normal(3) for _ in range(20)]
    assert not check_prox_inequality(Broken(3), 1.0, np.array([2.0, -2.0, 2.0]), points)


def test_quadratic_forms():
    q, c, const = QuadraticFunction(2, rho=2.0, center=[1.0, -1.0]).quadratic_form()
    np.testing.assert_allclose(q, 2.0 * np.eye(2))
    np.testing.assert_allclose(c, [-2.0, 2.0])
    assert const == pytest.approx(2.0)
    assert L1Norm(2).quadratic_form() is None
    q, c, _ = SeparableSum([QuadraticFunction(1), LinearFunction([3.0])]).quadratic_form()
    np.testing.assert_allclose(q, [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(c, [0.0, 3.0])


def test_make_prox_function():
    g = make_prox_function(ProxFamily.QUADRATIC, 3, {"rho": 2.0, "center": 1.0})
    assert isinstance(g, QuadraticFunction) and g.rho == 2.0
    np.testing.assert_allclose(g.center, np.ones(3))
    inner = L1Norm(3)
    wrapped = make_prox_function(ProxFamily.STRONGLY_CONVEXIFIED, 3, {"inner": inner, "rho": 0.5})
    assert wrapped.gamma == 0.5
    with pytest.raises(DimensionError):
        make_prox_function(ProxFamily.BOX, 3, {"lower": [0.0, 0.0]})


def test_invalid_parameters_are_rejected():
    with pytest.raises(ConfigurationError):
        QuadraticFunction(2, rho=-1.0)
    with pytest.raises(ConfigurationError):
        BoxIndicator(1, lower=2.0, upper=1.0)
    with pytest.raises(ConfigurationError):
        L1Norm(2).prox(0.0, np.zeros(2))
    with pytest.raises(DimensionError):
        L1Norm(2).value(np.zeros(3))


@pytest.mark.parametrize("index", range(9))
def test_prox_is_firmly_nonexpansive(rng, index):
    n = 5
    g = catalogue(n)[index]
    for tau in (0.1, 1.0, 10.0):
        for _ in range(100):
            u, v = 3.0 * rng.standard_normal(n), 3.0 * rng.standard_normal(n)
            diff = g.prox(tau, u) - g.prox(tau, v)
            slack = 1e-12 * (1.0 + float((u - v) @ (u - v)))
            assert float(diff @ diff) <= float(diff @ (u - v)) + slack


def test_strongly_convexified_prox_closed_forms(rng):
    n = 6
    center = rng.standard_normal(n)
    for _ in range(100):
        z = 3.0 * rng.standard_normal(n)
        tau, rho = rng.uniform(0.05, 5.0), rng.uniform(0.1, 3.0)
        scale = 1.0 + tau * rho
        # elastic net: soft threshold, then shrink
        elastic = StronglyConvexified(L1Norm(n, weight=0.4), rho)
        expected = np.sign(z) * np.maximum(np.abs(z) - tau * 0.4, 0.0) / scale
        np.testing.assert_allclose(elastic.prox(tau, z), expected, atol=1e-12)
        # two quadratics merge into one
        merged = StronglyConvexified(QuadraticFunction(n, rho=2.0, center=center), rho)
        np.testing.assert_allclose(merged.prox(tau, z), (z + 2.0 * tau * center) / (scale + 2.0 * tau),
                                   atol=1e-12)
        boxed = StronglyConvexified(BoxIndicator(n, lower=-0.5, upper=0.5), rho)
        np.testing.assert_allclose(boxed.prox(tau, z), np.clip(z / scale, -0.5, 0.5), atol=1e-12)


@pytest.mark.parametrize("variant", ["primal", "pdhg", "dualspace", "tseng"])
def test_point_indicator_pins_every_iterate(variant):
    base = random_problem(4, m=10, n=15)
    point = np.linspace(-1.0, 1.0, 15)
    p = ConstrainedProblem(base.A, base.b, PointIndicator(point))
    trace = run(variant, p, max_iters=20, snapshots=True)
    for record in trace.records[1:]:
        np.testing.assert_array_equal(record.x, point)
        np.testing.assert_allclose(record.s, point, atol=1e-12)
        assert record.g_s == 0.0


@pytest.mark.parametrize("variant", ["accel", "accel-pdhg"])
def test_accelerated_schemes_refuse_point_indicator(variant):
    base = random_problem(4, m=10, n=15)
    p = ConstrainedProblem(base.A, base.b, PointIndicator(np.zeros(15)))
    with pytest.raises(ConfigurationError, match=r"gamma = \+inf"):
        run(variant, p, max_iters=5)

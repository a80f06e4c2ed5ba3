import numpy as np
import pytest

from pdhg_primal.models.step_sizes import StepSizes
from pdhg_primal.services.operators import DenseMap
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.prox import (BoxIndicator, L1Norm, QuadraticFunction,
                                       StronglyConvexified)


def canonical_problem(**kwargs) -> ConstrainedProblem:
    """A = [2], b = 2, g = x^2 / 2: x* = 1, g* = 1/2, f* = 0"""
    return ConstrainedProblem(DenseMap([[2.0]]), [2.0], QuadraticFunction(1), **kwargs)


def infeasible_problem() -> ConstrainedProblem:
    """A = (1, 1)^T, b = (0, 2), g = x^2 / 2: argmin f = {1}, f* = 1"""
    return ConstrainedProblem(DenseMap([[1.0], [1.0]]), [0.0, 2.0], QuadraticFunction(1))


def make_g(family: str, n: int, rng: np.random.Generator):
    if family == "l1":
        return L1Norm(n, weight=0.1)
    if family == "quadratic":
        return QuadraticFunction(n, rho=1.0, center=rng.standard_normal(n))
    if family == "box":
        return BoxIndicator(n, lower=-1.0, upper=1.0)
    if family == "elastic":
        return StronglyConvexified(L1Norm(n, weight=0.1), 1.0)
    raise ValueError(family)


def random_problem(seed: int, m: int = 20, n: int = 30, family: str = "quadratic",
                   consistent: bool = True) -> ConstrainedProblem:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    b = A @ rng.standard_normal(n) if consistent else rng.standard_normal(m)
    return ConstrainedProblem(DenseMap(A), b, make_g(family, n, rng))


def low_rank_problem(seed: int, m: int = 10, n: int = 15, rank: int = 6,
                     family: str = "quadratic") -> ConstrainedProblem:
    """Rank-deficient A with singular values in [0.5, 1] and b outside its range"""
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, rank)))
    v, _ = np.linalg.qr(rng.standard_normal((n, rank)))
    A = u @ np.diag(np.linspace(1.0, 0.5, rank)) @ v.T
    return ConstrainedProblem(DenseMap(A), rng.standard_normal(m), make_g(family, n, rng))


@pytest.fixture
def canonical():
    return canonical_problem()


@pytest.fixture
def canonical_steps():
    return StepSizes(tau=1.0, sigma=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)

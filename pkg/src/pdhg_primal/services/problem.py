"""
The constrained model

    min g(x) + h(x)   s.t.   x in argmin f,   f(x) = 1/2 ||Ax - b||^2

A problem either carries A and b, or only a PSD map G standing for A^T A with
b = 0. The second form lets a scheme built on A = sqrt(L) run on L alone.
"""

import logging
import math
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from pdhg_primal.enums.prox_family import SmoothFamily
from pdhg_primal.errors import ConfigurationError, DimensionError
from pdhg_primal.models.solver_config import SolverConfig
from pdhg_primal.services.operators import LinearMap, operator_norm_estimate
from pdhg_primal.services.oracle import solve_least_squares
from pdhg_primal.services.prox import ProxFunction

logger = logging.getLogger(__name__)


class SmoothTerm:
    """Convex differentiable h with beta-Lipschitz gradient"""

    def __init__(self, value: Callable[[np.ndarray], float],
                 gradient: Callable[[np.ndarray], np.ndarray], beta: float,
                 family: Optional[SmoothFamily] = None):
        if beta < 0:
            raise ConfigurationError(f"smoothness modulus beta must be nonnegative, got {beta}")
        self._value = value
        self._gradient = gradient
        self.beta = float(beta)
        self.family = family

    def value(self, x: np.ndarray) -> float:
        return float(self._value(np.asarray(x, dtype=float)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def zero(cls, dimension: int) -> 'SmoothTerm':
        return cls(lambda x: 0.0, lambda x: np.zeros(dimension), 0.0, SmoothFamily.ZERO)

    @classmethod
    def linear(cls, e) -> 'SmoothTerm':
        """h(x) = <e, x>"""
        e = np.array(e, dtype=float, ndmin=1)
        return cls(lambda x: float(e @ x), lambda x: e.copy(), 0.0, SmoothFamily.LINEAR)

    @classmethod
    def quadratic(cls, dimension: int, rho: float = 1.0, center=0.0) -> 'SmoothTerm':
        """h(x) = (rho/2) ||x - a||^2"""
        center = np.broadcast_to(np.asarray(center, dtype=float), (dimension,)).copy()
        return cls(lambda x: 0.5 * rho * float((x - center) @ (x - center)),
                   lambda x: rho * (x - center), rho, SmoothFamily.QUADRATIC)

    @classmethod
    def quadratic_form(cls, q, c=None, beta: Optional[float] = None) -> 'SmoothTerm':
        """h(x) = 1/2 x^T Q x + c^T x with Q symmetric PSD; beta defaults to lambda_max(Q)"""
        q = np.array(q, dtype=float, ndmin=2)
        if q.shape[0] != q.shape[1]:
            raise DimensionError(f"Q must be square, got {q.shape}")
        c = np.zeros(q.shape[0]) if c is None else np.asarray(c, dtype=float)
        if beta is None:
            beta = max(float(np.linalg.eigvalsh(0.5 * (q + q.T))[-1]), 0.0)
        return cls(lambda x: 0.5 * float(x @ q @ x) + float(c @ x),
                   lambda x: q @ x + c, beta, SmoothFamily.QUADRATIC_FORM)

    def check_descent_inequality(self, pairs: Iterable[Tuple[np.ndarray, np.ndarray]],
                                 tol: float = 1e-9) -> bool:
        """h(u) - h(v) - <grad h(v), u - v> <= beta/2 ||u - v||^2 on every pair"""
        for u, v in pairs:
            u = np.asarray(u, dtype=float)
            v = np.asarray(v, dtype=float)
            gap = self.value(u) - self.value(v) - float(self.gradient(v) @ (u - v))
            if gap > 0.5 * self.beta * float((u - v) @ (u - v)) + tol:
                return False
        return True


class ConstrainedProblem:
    """Bundle (A, b, g, h) with the derived quantities f, grad f, f_* and ||A||"""

    def __init__(self, A: Optional[LinearMap], b, g: ProxFunction, h: Optional[SmoothTerm] = None,
                 fstar: Optional[float] = None, gram: Optional[LinearMap] = None):
        if (A is None) == (gram is None):
            raise ConfigurationError("give exactly one of A and an implicit gram map")
        self.A = A
        self.gram = gram
        if A is not None:
            self.n = A.cols
            self.m = A.rows
            self.b = np.asarray(b, dtype=float).reshape(-1)
            if self.b.shape != (self.m,):
                raise DimensionError(f"b has length {self.b.size}, A has {self.m} rows")
            self._atb = A.apply_adjoint(self.b)
        else:
            if not gram.is_psd or gram.rows != gram.cols:
                raise ConfigurationError("an implicit gram map must be square PSD")
            if b is not None and np.any(np.asarray(b, dtype=float) != 0):
                raise ConfigurationError("problems given by a gram map require b = 0")
            self.n = gram.cols
            self.m = None
            self.b = None
            self._atb = np.zeros(self.n)
        if g.dimension != self.n:
            raise DimensionError(f"g acts on R^{g.dimension}, problem has n={self.n}")
        self.g = g
        self.h = h
        self._fstar = None if fstar is None else float(fstar)
        self._x_ls: Optional[np.ndarray] = None
        self._norm: Optional[float] = None

    @property
    def gamma(self) -> float:
        return self.g.gamma

    @property
    def atb(self) -> np.ndarray:
        """Cached A^T b"""
        return self._atb

    @property
    def has_matrix(self) -> bool:
        return self.A is not None

    def residual(self, x: np.ndarray) -> np.ndarray:
        """A x - b"""
        if self.A is None:
            raise ConfigurationError("this problem has no explicit A; only A^T A is available")
        return self.A.apply(x) - self.b

    def normal_apply(self, x: np.ndarray) -> np.ndarray:
        """A^T A x"""
        if self.gram is not None:
            return self.gram.apply(x)
        return self.A.apply_adjoint(self.A.apply(x))

    def affine_gradient(self, v: np.ndarray, weight: float = 1.0) -> np.ndarray:
        """A^T (A v - weight * b); one application of A and one of A^T"""
        if self.gram is not None:
            return self.gram.apply(v)
        return self.A.apply_adjoint(self.A.apply(v) - weight * self.b)

    def f_value(self, x: np.ndarray) -> float:
        x = self._check(x)
        if self.gram is not None:
            return max(0.5 * float(x @ self.gram.apply(x)), 0.0)
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def f_grad(self, x: np.ndarray) -> np.ndarray:
        return self.affine_gradient(self._check(x), 1.0)

    def residual_norm(self, x: np.ndarray) -> float:
        """||A x - b||; for gram-only problems sqrt(<x, A^T A x>)"""
        if self.gram is not None:
            return math.sqrt(2.0 * self.f_value(x))
        return float(np.linalg.norm(self.residual(self._check(x))))

    def objective(self, x: np.ndarray) -> float:
        """g(x) + h(x)"""
        value = self.g.value(x)
        if self.h is not None and not math.isinf(value):
            value += self.h.value(x)
        return value

    def compute_fstar(self, tol: float = 1e-10, config: Optional[SolverConfig] = None) -> float:
        """Compute and cache f_* = min f with the least-squares oracle"""
        if self._fstar is not None:
            return self._fstar
        if self.gram is not None:
            self._fstar = 0.0
            self._x_ls = np.zeros(self.n)
            return self._fstar
        config = config or SolverConfig()
        x_ls, f_star = solve_least_squares(self.A, self.b, tol, config.oracle)
        if math.sqrt(2.0 * f_star) <= tol:
            # feasibility certificate
            f_star = 0.0
        self._x_ls = x_ls
        self._fstar = f_star
        logger.debug("cached f_* = %.17g", f_star)
        return self._fstar

    @property
    def fstar(self) -> float:
        return self.compute_fstar()

    @property
    def least_squares_point(self) -> np.ndarray:
        if self._x_ls is None:
            if self.gram is not None:
                self._x_ls = np.zeros(self.n)
            elif self._fstar is not None:
                self._x_ls, _ = solve_least_squares(self.A, self.b)
            else:
                self.compute_fstar()
        return self._x_ls

    def operator_norm(self, config: Optional[SolverConfig] = None) -> float:
        """Cached estimate of ||A||; for gram-only problems sqrt(||A^T A||)"""
        if self._norm is None:
            config = config or SolverConfig()
            if self.gram is not None:
                gram_norm = operator_norm_estimate(self.gram, config.norm_tol,
                                                   config.norm_max_iters, config.seed)
                self._norm = math.sqrt(gram_norm)
            else:
                self._norm = operator_norm_estimate(self.A, config.norm_tol,
                                                    config.norm_max_iters, config.seed)
            logger.info("operator norm estimate %.6g", self._norm)
        return self._norm

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a vector of length {self.n}, got shape {x.shape}")
        return x

    def __repr__(self) -> str:
        shape = f"{self.m}x{self.n}" if self.A is not None else f"gram {self.n}x{self.n}"
        return f"ConstrainedProblem({shape}, g={self.g!r}, h={'yes' if self.h else 'no'})"

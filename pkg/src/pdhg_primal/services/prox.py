"""
Catalogue of convex functions g with closed-form proximal operators.

    prox_{tau g}(z) = argmin_x { tau g(x) + 1/2 ||x - z||^2 }

Each function also reports its strong-convexity modulus gamma and, for the
quadratic-type families, the data (Q, c, const) of g(x) = 1/2 x^T Q x + c^T x + const
used by the KKT oracle.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from pdhg_primal.enums.prox_family import ProxFamily
from pdhg_primal.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

QuadraticForm = Tuple[np.ndarray, np.ndarray, float]

PROX_TOL = 1e-9


def _as_vector(value, dimension: int, name: str) -> np.ndarray:
    """Broadcast a scalar or check a vector parameter against the dimension"""
    vector = np.asarray(value, dtype=float)
    if vector.ndim == 0:
        vector = np.full(dimension, float(vector))
    if vector.shape != (dimension,):
        raise DimensionError(f"parameter '{name}' has shape {vector.shape}, expected ({dimension},)")
    vector.setflags(write=False)
    return vector


class ProxFunction(ABC):
    """A proper closed convex function on R^n with an exact prox"""

    family: ProxFamily

    def __init__(self, dimension: int):
        if dimension < 1:
            raise DimensionError(f"dimension must be positive, got {dimension}")
        self._dimension = int(dimension)

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def gamma(self) -> float:
        """Strong-convexity modulus"""
        return 0.0

    def value(self, x: np.ndarray) -> float:
        """g(x), +inf outside the domain"""
        return self._value(self._check(x))

    def prox(self, step: float, z: np.ndarray) -> np.ndarray:
        """prox_{step * g}(z)"""
        if not step > 0:
            raise ConfigurationError(f"prox step must be positive, got {step}")
        return self._prox(float(step), self._check(z))

    def quadratic_form(self) -> Optional[QuadraticForm]:
        """(Q, c, const) when g is quadratic-type, otherwise None"""
        return None

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self._dimension,):
            raise DimensionError(f"expected a vector of length {self._dimension}, got shape {x.shape}")
        return x

    @abstractmethod
    def _value(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def _prox(self, step: float, z: np.ndarray) -> np.ndarray:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self._dimension})"


class ZeroFunction(ProxFunction):
    family = ProxFamily.ZERO

    def _value(self, x):
        return 0.0

    def _prox(self, step, z):
        return z.copy()

    def quadratic_form(self):
        n = self.dimension
        return np.zeros((n, n)), np.zeros(n), 0.0


class LinearFunction(ProxFunction):
    """<c, x>"""

    family = ProxFamily.LINEAR

    def __init__(self, c):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        super().__init__(c.size)
        self.c = _as_vector(c, c.size, "c")

    def _value(self, x):
        return float(self.c @ x)

    def _prox(self, step, z):
        return z - step * self.c

    def quadratic_form(self):
        n = self.dimension
        return np.zeros((n, n)), np.array(self.c), 0.0


class QuadraticFunction(ProxFunction):
    """(rho/2) ||x - a||^2"""

    family = ProxFamily.QUADRATIC

    def __init__(self, dimension: int, rho: float = 1.0, center=0.0):
        super().__init__(dimension)
        if rho < 0:
            raise ConfigurationError(f"quadratic weight rho must be nonnegative, got {rho}")
        self.rho = float(rho)
        self.center = _as_vector(center, dimension, "center")

    @property
    def gamma(self):
        return self.rho

    def _value(self, x):
        diff = x - self.center
        return 0.5 * self.rho * float(diff @ diff)

    def _prox(self, step, z):
        return (z + step * self.rho * self.center) / (1.0 + step * self.rho)

    def quadratic_form(self):
        n = self.dimension
        return (self.rho * np.eye(n), -self.rho * np.array(self.center),
                0.5 * self.rho * float(self.center @ self.center))


class L1Norm(ProxFunction):
    """sum_i w_i |x_i|"""

    family = ProxFamily.L1

    def __init__(self, dimension: int, weight=1.0):
        super().__init__(dimension)
        self.weight = _as_vector(weight, dimension, "weight")
        if np.any(self.weight < 0):
            raise ConfigurationError("l1 weights must be nonnegative")

    def _value(self, x):
        return float(self.weight @ np.abs(x))

    def _prox(self, step, z):
        # soft threshold
        return np.sign(z) * np.maximum(np.abs(z) - step * self.weight, 0.0)


class BoxIndicator(ProxFunction):
    """Indicator of {lower <= x <= upper}"""

    family = ProxFamily.BOX

    def __init__(self, dimension: int, lower=-np.inf, upper=np.inf):
        super().__init__(dimension)
        self.lower = _as_vector(lower, dimension, "lower")
        self.upper = _as_vector(upper, dimension, "upper")
        if np.any(self.lower > self.upper):
            raise ConfigurationError("box lower bound exceeds upper bound")

    def _value(self, x):
        inside = np.all(x >= self.lower) and np.all(x <= self.upper)
        return 0.0 if inside else math.inf

    def _prox(self, step, z):
        return np.clip(z, self.lower, self.upper)


class NonnegativeIndicator(ProxFunction):
    family = ProxFamily.NONNEGATIVE

    def _value(self, x):
        return 0.0 if np.all(x >= 0) else math.inf

    def _prox(self, step, z):
        return np.maximum(z, 0.0)


class PointIndicator(ProxFunction):
    """Indicator of the single point {a}.

    gamma is reported as +inf; the accelerated schemes refuse it.
    """

    family = ProxFamily.POINT

    def __init__(self, point):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        super().__init__(point.size)
        self.point = _as_vector(point, point.size, "point")

    @property
    def gamma(self):
        return math.inf

    def _value(self, x):
        return 0.0 if np.allclose(x, self.point, rtol=0.0, atol=1e-12) else math.inf

    def _prox(self, step, z):
        return np.array(self.point)

    def quadratic_form(self):
        return None


class SeparableSum(ProxFunction):
    """g(x) = sum_i g_i(x_i) over consecutive blocks of x"""

    family = ProxFamily.SEPARABLE_SUM

    def __init__(self, blocks: Iterable[ProxFunction]):
        self.blocks: List[ProxFunction] = list(blocks)
        if not self.blocks:
            raise ConfigurationError("separable sum needs at least one block")
        super().__init__(sum(block.dimension for block in self.blocks))
        self._offsets = np.cumsum([0] + [block.dimension for block in self.blocks])

    @property
    def gamma(self):
        return min(block.gamma for block in self.blocks)

    def split(self, x: np.ndarray) -> List[np.ndarray]:
        return [x[start:stop] for start, stop in zip(self._offsets[:-1], self._offsets[1:])]

    def _value(self, x):
        total = 0.0
        for block, part in zip(self.blocks, self.split(x)):
            total += block.value(part)
            if math.isinf(total):
                return math.inf
        return total

    def _prox(self, step, z):
        return np.concatenate([block.prox(step, part)
                               for block, part in zip(self.blocks, self.split(z))])

    def quadratic_form(self):
        forms = [block.quadratic_form() for block in self.blocks]
        if any(form is None for form in forms):
            return None
        return (scipy.linalg.block_diag(*[q for q, _, _ in forms]),
                np.concatenate([c for _, c, _ in forms]),
                float(sum(const for _, _, const in forms)))


class StronglyConvexified(ProxFunction):
    """g + (rho/2) ||x||^2 for an inner g.

    prox_{tau (g + rho/2 ||.||^2)}(z) = prox_{tau/(1+tau rho) g}(z / (1 + tau rho))
    """

    family = ProxFamily.STRONGLY_CONVEXIFIED

    def __init__(self, inner: ProxFunction, rho: float):
        super().__init__(inner.dimension)
        if rho <= 0:
            raise ConfigurationError(f"strong convexification needs rho > 0, got {rho}")
        self.inner = inner
        self.rho = float(rho)

    @property
    def gamma(self):
        return self.inner.gamma + self.rho

    def _value(self, x):
        inner = self.inner.value(x)
        if math.isinf(inner):
            return math.inf
        return inner + 0.5 * self.rho * float(x @ x)

    def _prox(self, step, z):
        scale = 1.0 + step * self.rho
        return self.inner.prox(step / scale, z / scale)

    def quadratic_form(self):
        form = self.inner.quadratic_form()
        if form is None:
            return None
        q, c, const = form
        return q + self.rho * np.eye(self.dimension), c, const


def make_prox_function(family: ProxFamily, dimension: int, params: Optional[dict] = None) -> ProxFunction:
    """Build a catalogue function from already-parsed parameters.

    Vector parameters may be scalars (broadcast to the dimension). A separable
    sum takes params["blocks"] as built ProxFunctions, the strongly-convexified
    wrapper takes params["inner"] as a built ProxFunction.
    """
    params = params or {}
    if family == ProxFamily.ZERO:
        return ZeroFunction(dimension)
    if family == ProxFamily.LINEAR:
        return LinearFunction(_as_vector(params.get("c", 0.0), dimension, "c"))
    if family == ProxFamily.QUADRATIC:
        return QuadraticFunction(dimension, rho=float(params.get("rho", 1.0)),
                                 center=params.get("center", 0.0))
    if family == ProxFamily.L1:
        return L1Norm(dimension, weight=params.get("weight", 1.0))
    if family == ProxFamily.BOX:
        return BoxIndicator(dimension, lower=params.get("lower", -np.inf),
                            upper=params.get("upper", np.inf))
    if family == ProxFamily.NONNEGATIVE:
        return NonnegativeIndicator(dimension)
    if family == ProxFamily.POINT:
        return PointIndicator(_as_vector(params["point"], dimension, "point"))
    if family == ProxFamily.SEPARABLE_SUM:
        combined = SeparableSum(params["blocks"])
        if combined.dimension != dimension:
            raise DimensionError(f"separable sum has dimension {combined.dimension}, expected {dimension}")
        return combined
    if family == ProxFamily.STRONGLY_CONVEXIFIED:
        inner = params["inner"]
        if inner.dimension != dimension:
            raise DimensionError(f"inner function has dimension {inner.dimension}, expected {dimension}")
        return StronglyConvexified(inner, float(params.get("rho", 1.0)))
    raise ConfigurationError(f"unsupported prox family {family}")


def check_prox_inequality(g: ProxFunction, tau: float, z: np.ndarray, points: Iterable[np.ndarray],
                          tol: float = PROX_TOL) -> bool:
    """
    Verify the (strengthened) prox-inequality at p = prox_{tau g}(z):

        <p - z, x - p> >= tau (g(p) - g(x)) + tau gamma / 2 ||p - x||^2 - tol

    for every point x in dom g. Points outside the domain are skipped; an
    infinite gamma contributes no strengthening term.
    """
    p = g.prox(tau, z)
    g_p = g.value(p)
    strength = 0.0 if math.isinf(g.gamma) else g.gamma
    for x in points:
        x = np.asarray(x, dtype=float)
        g_x = g.value(x)
        if math.isinf(g_x):
            continue
        lhs = float((p - z) @ (x - p))
        rhs = tau * (g_p - g_x) + 0.5 * tau * strength * float((p - x) @ (p - x))
        if lhs < rhs - tol:
            logger.debug("prox inequality violated: lhs=%.3e rhs=%.3e", lhs, rhs)
            return False
    return True

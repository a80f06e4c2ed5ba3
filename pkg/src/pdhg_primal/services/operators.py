"""
Linear maps A, A^T, A^T A and graph Laplacians, plus operator-norm estimation.

Every map is immutable after construction; apply and apply_adjoint only read
their inputs and are safe to call from several threads.
"""

import logging
import math
import warnings
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from pdhg_primal.errors import ConvergenceWarning, DimensionError

logger = logging.getLogger(__name__)


class LinearMap(ABC):
    """A linear map from R^cols to R^rows with its adjoint"""

    # True when the map is symmetric positive semidefinite (Laplacian, gram)
    is_psd: bool = False

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise DimensionError(f"map dimensions must be positive, got {rows}x{cols}")
        self._rows = int(rows)
        self._cols = int(cols)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> Tuple[int, int]:
        return self._rows, self._cols

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return A x"""
        x = np.asarray(x, dtype=float)
        if x.shape != (self._cols,):
            raise DimensionError(f"apply expects a vector of length {self._cols}, got shape {x.shape}")
        return self._matvec(x)

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        """Return A^T y"""
        y = np.asarray(y, dtype=float)
        if y.shape != (self._rows,):
            raise DimensionError(
                f"apply_adjoint expects a vector of length {self._rows}, got shape {y.shape}"
            )
        return self._rmatvec(y)

    def to_dense(self) -> np.ndarray:
        """Materialise the map column by column; meant for desk-scale oracles"""
        eye = np.eye(self._cols)
        return np.column_stack([self._matvec(eye[:, j]) for j in range(self._cols)])

    @abstractmethod
    def _matvec(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _rmatvec(self, y: np.ndarray) -> np.ndarray:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._rows}x{self._cols})"


class DenseMap(LinearMap):
    """Row-major dense matrix"""

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=float, ndmin=2)
        if matrix.ndim != 2:
            raise DimensionError(f"dense map needs a 2-d array, got {matrix.ndim}-d")
        super().__init__(*matrix.shape)
        matrix.setflags(write=False)
        self.matrix = matrix

    def _matvec(self, x):
        return self.matrix @ x

    def _rmatvec(self, y):
        return self.matrix.T @ y

    def to_dense(self):
        return np.array(self.matrix)


class SparseMap(LinearMap):
    """Compressed-sparse-row matrix"""

    def __init__(self, matrix):
        matrix = sp.csr_matrix(matrix, dtype=float)
        super().__init__(*matrix.shape)
        self.matrix = matrix
        self._transpose = matrix.T.tocsr()

    def _matvec(self, x):
        return self.matrix @ x

    def _rmatvec(self, y):
        return self._transpose @ y

    def to_dense(self):
        return self.matrix.toarray()


class LaplacianMap(LinearMap):
    """Graph Laplacian acting blockwise on n x d node-major vectors (L kron I_d)"""

    is_psd = True

    def __init__(self, node_laplacian, block_dim: int = 1):
        node_laplacian = sp.csr_matrix(node_laplacian, dtype=float)
        n, n_cols = node_laplacian.shape
        if n != n_cols:
            raise DimensionError(f"Laplacian must be square, got {n}x{n_cols}")
        if block_dim < 1:
            raise DimensionError(f"block dimension must be positive, got {block_dim}")
        super().__init__(n * block_dim, n * block_dim)
        self.node_laplacian = node_laplacian
        self.node_count = n
        self.block_dim = int(block_dim)

    def _matvec(self, x):
        blocks = x.reshape(self.node_count, self.block_dim)
        return np.asarray(self.node_laplacian @ blocks).ravel()

    def _rmatvec(self, y):
        return self._matvec(y)

    def to_dense(self):
        return np.kron(self.node_laplacian.toarray(), np.eye(self.block_dim))


class GramMap(LinearMap):
    """x -> A^T A x for a wrapped map A"""

    is_psd = True

    def __init__(self, base: LinearMap):
        super().__init__(base.cols, base.cols)
        self.base = base

    def _matvec(self, x):
        return self.base.apply_adjoint(self.base.apply(x))

    def _rmatvec(self, y):
        return self._matvec(y)


class ScaledMap(LinearMap):
    """c * A for a scalar c"""

    def __init__(self, base: LinearMap, scale: float):
        super().__init__(base.rows, base.cols)
        self.base = base
        self.scale = float(scale)
        self.is_psd = base.is_psd and self.scale >= 0

    def _matvec(self, x):
        return self.scale * self.base.apply(x)

    def _rmatvec(self, y):
        return self.scale * self.base.apply_adjoint(y)


def build_gram(linear_map: LinearMap) -> LinearMap:
    """Return the map x -> A^T A x"""
    return GramMap(linear_map)


def operator_norm_estimate(linear_map: LinearMap, tol: float = 1e-6, max_iters: int = 5000,
                           seed: int = 42) -> float:
    """
    Estimate ||A|| by power iteration.

    PSD maps are iterated directly (their norm is the top eigenvalue); any other
    map is iterated through A^T A and the square root is returned. The Rayleigh
    quotient is returned, so the estimate never exceeds the true norm.

    Args:
        linear_map: map to measure
        tol: relative tolerance on the eigen-residual ||Mv - rho v|| <= tol * rho
        max_iters: iteration cap; hitting it emits a ConvergenceWarning
        seed: seed of the pseudo-random start vector

    Returns:
        The norm estimate, 0.0 for the zero map.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    if linear_map.is_psd:
        operator = linear_map.apply
    else:
        def operator(v):
            return linear_map.apply_adjoint(linear_map.apply(v))

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(linear_map.cols)
    v /= np.linalg.norm(v)

    rayleigh = 0.0
    for iteration in range(1, max_iters + 1):
        w = operator(v)
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            return 0.0
        rayleigh = max(rayleigh, float(v @ w))
        if np.linalg.norm(w - (v @ w) * v) <= tol * rayleigh:
            logger.debug("power iteration converged after %d iterations", iteration)
            break
        v = w / w_norm
    else:
        logger.warning("power iteration stopped at max_iters=%d", max_iters)
        warnings.warn(
            f"operator norm estimate did not converge within {max_iters} iterations",
            ConvergenceWarning,
        )

    return math.sqrt(rayleigh) if not linear_map.is_psd else rayleigh


def check_cosine_law(x: np.ndarray, y: np.ndarray, z: np.ndarray, tol: float = 1e-10) -> bool:
    """Self-test of 2<x-y, z-x> = ||y-z||^2 - ||x-y||^2 - ||x-z||^2, relative to the term sizes"""
    lhs = 2.0 * np.dot(x - y, z - x)
    terms = (np.dot(y - z, y - z), np.dot(x - y, x - y), np.dot(x - z, x - z))
    rhs = terms[0] - terms[1] - terms[2]
    return abs(lhs - rhs) <= tol * (1.0 + max(terms))

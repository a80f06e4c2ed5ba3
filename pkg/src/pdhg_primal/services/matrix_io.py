"""Readers for Matrix Market (.mtx) maps, dense text matrices and plain vector files."""

import os

import numpy as np
import scipy.io
import scipy.sparse as sp

from pdhg_primal.errors import ManifestError
from pdhg_primal.services.operators import DenseMap, LinearMap, SparseMap


def load_matrix(path: str, field: str = "A") -> LinearMap:
    """Load a map from .mtx (coordinate or array) or whitespace-separated dense text"""
    if not os.path.exists(path):
        raise ManifestError(f"file not found: {path}", field)
    try:
        if path.lower().endswith(".mtx"):
            data = scipy.io.mmread(path)
            if sp.issparse(data):
                return SparseMap(data)
            return DenseMap(np.asarray(data, dtype=float))
        return DenseMap(np.loadtxt(path, dtype=float, ndmin=2))
    except (ValueError, OSError) as ex:
        raise ManifestError(f"could not read matrix from {path}: {ex}", field) from ex


def load_vector(path: str, field: str = "b") -> np.ndarray:
    """Load a vector written one number per line"""
    if not os.path.exists(path):
        raise ManifestError(f"file not found: {path}", field)
    try:
        return np.loadtxt(path, dtype=float, ndmin=1)
    except ValueError as ex:
        raise ManifestError(f"could not read vector from {path}: {ex}", field) from ex


def save_vector(path: str, vector: np.ndarray) -> None:
    np.savetxt(path, np.asarray(vector, dtype=float), fmt="%.17g")

"""
JSON manifests describing a problem instance.

Constrained problem:

    {
      "A": "A.mtx" | [[...], ...],
      "b": "b.txt" | [...],
      "g": {"family": "quadratic", "params": {"rho": 1.0}},
      "h": {"family": "quadratic_form", "params": {"Q": [[...]]}, "beta": 2.0},
      "fstar": 0.0
    }

Consensus problem:

    {
      "graph": "p5.txt" | {"nodes": 5, "dim": 1, "edges": [[0, 1], ...], "weights": [...]},
      "g_i": [{"family": "quadratic", "params": {"center": 1.0}}, ...]
    }

File paths are resolved against the manifest's directory. Vector parameters
may be scalars (broadcast), inline lists or vector files.
"""

import json
import os
from typing import Any, Dict, Optional, Union

import numpy as np

from pdhg_primal.enums.prox_family import ProxFamily, SmoothFamily
from pdhg_primal.errors import ConfigurationError, DimensionError, ManifestError
from pdhg_primal.models.family_schema import FamilySchema
from pdhg_primal.models.graph import Graph
from pdhg_primal.models.solver_config import ResolverConfig
from pdhg_primal.services.catalog_loader import CatalogLoader
from pdhg_primal.services.distributed import ConsensusProblem, load_graph
from pdhg_primal.services.family_resolver import FamilyResolver
from pdhg_primal.services.matrix_io import load_matrix, load_vector
from pdhg_primal.services.operators import DenseMap, LinearMap
from pdhg_primal.services.problem import ConstrainedProblem, SmoothTerm
from pdhg_primal.services.prox import ProxFunction, make_prox_function

# parameters read as vectors; everything else is a scalar
VECTOR_PARAMETERS = {"c", "e", "center", "weight", "lower", "upper", "point"}

Manifest = Union[ConstrainedProblem, ConsensusProblem]


class ManifestLoader:
    """Turns a manifest file into a ConstrainedProblem or ConsensusProblem"""

    def __init__(self, config: Optional[ResolverConfig] = None,
                 catalog_loader: Optional[CatalogLoader] = None):
        catalog_loader = catalog_loader or CatalogLoader()
        self.prox_resolver = FamilyResolver(catalog_loader.load_prox_families(), config)
        self.smooth_resolver = FamilyResolver(catalog_loader.load_smooth_families(), config)
        self.base_directory = "."

    def load(self, path: str) -> Manifest:
        if not os.path.exists(path):
            raise ManifestError(f"manifest not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as ex:
            raise ManifestError(f"{path} is not valid JSON: {ex}") from ex
        if not isinstance(data, dict):
            raise ManifestError(f"{path} must hold a JSON object")
        self.base_directory = os.path.dirname(os.path.abspath(path))
        return self.from_dict(data)

    def from_dict(self, data: Dict[str, Any]) -> Manifest:
        if "graph" in data or "g_i" in data:
            return self._consensus(data)
        return self._constrained(data)

    def _constrained(self, data: Dict[str, Any]) -> ConstrainedProblem:
        A = self._matrix(self._require(data, "A", "A"), "A")
        b = self._vector(self._require(data, "b", "b"), "b")
        if b.shape != (A.rows,):
            raise ManifestError(f"b has length {b.size}, A has {A.rows} rows", "b")

        g = self._prox(self._require(data, "g", "g"), A.cols, "g")
        h = None
        if data.get("h") is not None:
            h = self._smooth(data["h"], A.cols, "h")

        fstar = data.get("fstar")
        if fstar is not None and not isinstance(fstar, (int, float)):
            raise ManifestError(f"expected a number, got {fstar!r}", "fstar")
        try:
            return ConstrainedProblem(A, b, g, h=h, fstar=fstar)
        except (ConfigurationError, DimensionError) as ex:
            raise ManifestError(str(ex), "g") from ex

    def _consensus(self, data: Dict[str, Any]) -> ConsensusProblem:
        graph = self._graph(self._require(data, "graph", "graph"))
        entries = self._require(data, "g_i", "g_i")
        if not isinstance(entries, list):
            raise ManifestError("expected a list of local functions", "g_i")
        if len(entries) != graph.node_count:
            raise ManifestError(f"{len(entries)} local functions for {graph.node_count} nodes", "g_i")
        local = [self._prox(entry, graph.block_dim, f"g_i[{i}]") for i, entry in enumerate(entries)]
        try:
            return ConsensusProblem(graph, local)
        except ConfigurationError as ex:
            raise ManifestError(str(ex), "g_i") from ex

    def _graph(self, value: Any) -> Graph:
        if isinstance(value, str):
            return load_graph(self._path(value))
        if not isinstance(value, dict):
            raise ManifestError("expected an edge-list path or an inline graph object", "graph")
        try:
            return Graph(node_count=int(self._require(value, "nodes", "graph.nodes")),
                         edges=[tuple(edge) for edge in value.get("edges", [])],
                         weights=value.get("weights"),
                         block_dim=int(value.get("dim", 1)))
        except (ConfigurationError, TypeError, ValueError) as ex:
            raise ManifestError(str(ex), "graph") from ex

    def _prox(self, entry: Any, dimension: int, field: str) -> ProxFunction:
        if not isinstance(entry, dict):
            raise ManifestError("expected an object with 'family' and 'params'", field)
        name = self._require(entry, "family", f"{field}.family")
        family = ProxFamily(self.prox_resolver.resolve_or_raise(str(name), f"{field}.family"))
        raw = entry.get("params") or {}
        if not isinstance(raw, dict):
            raise ManifestError("expected an object", f"{field}.params")
        self._check_parameters(self.prox_resolver.catalog[family.value], raw, f"{field}.params")

        params: Dict[str, Any] = {}
        if family == ProxFamily.SEPARABLE_SUM:
            blocks = self._require(raw, "blocks", f"{field}.params.blocks")
            if not isinstance(blocks, list) or not all(isinstance(block, dict) for block in blocks):
                raise ManifestError("expected a list of block objects", f"{field}.params.blocks")
            params["blocks"] = [self._prox(block, int(block.get("dimension", 1)),
                                           f"{field}.params.blocks[{i}]")
                                for i, block in enumerate(blocks)]
        elif family == ProxFamily.STRONGLY_CONVEXIFIED:
            inner = self._require(raw, "inner", f"{field}.params.inner")
            params["inner"] = self._prox(inner, dimension, f"{field}.params.inner")
            params["rho"] = self._scalar(raw.get("rho", 1.0), f"{field}.params.rho")
        else:
            params = self._parameters(raw, dimension, f"{field}.params")

        try:
            return make_prox_function(family, dimension, params)
        except (ConfigurationError, DimensionError) as ex:
            raise ManifestError(str(ex), field) from ex
        except KeyError as ex:
            raise ManifestError(f"missing parameter {ex}", f"{field}.params") from ex

    def _smooth(self, entry: Any, dimension: int, field: str) -> SmoothTerm:
        if not isinstance(entry, dict):
            raise ManifestError("expected an object with 'family' and 'params'", field)
        name = self._require(entry, "family", f"{field}.family")
        family = SmoothFamily(self.smooth_resolver.resolve_or_raise(str(name), f"{field}.family"))
        raw = entry.get("params") or {}
        if not isinstance(raw, dict):
            raise ManifestError("expected an object", f"{field}.params")
        self._check_parameters(self.smooth_resolver.catalog[family.value], raw, f"{field}.params")
        beta = entry.get("beta", raw.get("beta"))
        beta = None if beta is None else self._scalar(beta, f"{field}.beta")

        try:
            if family == SmoothFamily.ZERO:
                term = SmoothTerm.zero(dimension)
            elif family == SmoothFamily.LINEAR:
                term = SmoothTerm.linear(self._vector(self._require(raw, "e", f"{field}.params.e"),
                                                      f"{field}.params.e", dimension))
            elif family == SmoothFamily.QUADRATIC:
                term = SmoothTerm.quadratic(dimension, rho=self._scalar(raw.get("rho", 1.0),
                                                                        f"{field}.params.rho"),
                                            center=self._vector(raw.get("center", 0.0),
                                                                f"{field}.params.center", dimension))
            else:
                q = self._matrix(self._require(raw, "Q", f"{field}.params.Q"), f"{field}.params.Q")
                c = raw.get("c")
                c = None if c is None else self._vector(c, f"{field}.params.c", dimension)
                term = SmoothTerm.quadratic_form(q.to_dense(), c, beta)
                beta = None
        except (ConfigurationError, DimensionError) as ex:
            raise ManifestError(str(ex), field) from ex

        if beta is not None:
            term = SmoothTerm(term.value, term.gradient, beta, term.family)
        return term

    def _check_parameters(self, schema: FamilySchema, raw: Dict[str, Any], field: str) -> None:
        for name in schema.required_parameters:
            if raw.get(name) is None:
                raise ManifestError(f"'{schema.canonical_name}' requires this parameter",
                                    f"{field}.{name}")
        unknown = sorted(set(raw) - set(schema.parameters))
        if unknown:
            raise ManifestError(f"unknown parameter(s) {', '.join(unknown)} for "
                                f"'{schema.canonical_name}'; accepted: {', '.join(schema.parameters)}",
                                field)

    def _parameters(self, raw: Dict[str, Any], dimension: int, field: str) -> Dict[str, Any]:
        params = {}
        for key, value in raw.items():
            if key in VECTOR_PARAMETERS:
                params[key] = self._vector(value, f"{field}.{key}", dimension)
            else:
                params[key] = self._scalar(value, f"{field}.{key}")
        return params

    def _matrix(self, value: Any, field: str) -> LinearMap:
        if isinstance(value, str):
            return load_matrix(self._path(value), field)
        try:
            return DenseMap(np.array(value, dtype=float))
        except (TypeError, ValueError, DimensionError) as ex:
            raise ManifestError(f"expected a path or a nested list of numbers: {ex}", field) from ex

    def _vector(self, value: Any, field: str, dimension: Optional[int] = None) -> np.ndarray:
        if isinstance(value, str):
            vector = load_vector(self._path(value), field)
        else:
            try:
                vector = np.array(value, dtype=float)
            except (TypeError, ValueError) as ex:
                raise ManifestError(f"expected numbers: {ex}", field) from ex
        if vector.ndim == 0:
            if dimension is None:
                vector = vector.reshape(1)
            else:
                vector = np.full(dimension, float(vector))
        if vector.ndim != 1 or (dimension is not None and vector.shape != (dimension,)):
            expected = f"({dimension},)" if dimension is not None else "a flat list"
            raise ManifestError(f"has shape {vector.shape}, expected {expected}", field)
        return vector

    def _scalar(self, value: Any, field: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ManifestError(f"expected a number, got {value!r}", field)
        return float(value)

    def _path(self, value: str) -> str:
        return value if os.path.isabs(value) else os.path.join(self.base_directory, value)

    def _require(self, data: Dict[str, Any], key: str, field: str) -> Any:
        if key not in data or data[key] is None:
            raise ManifestError("required field is missing", field)
        return data[key]


def parse_manifest(path: str, config: Optional[ResolverConfig] = None) -> Manifest:
    return ManifestLoader(config).load(path)


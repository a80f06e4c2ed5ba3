"""
Decentralized consensus

    min g_1(x_1) + ... + g_n(x_n)   s.t.   x_1 = ... = x_n

written as the constraint sqrt(L) x = 0 for a connected graph with Laplacian L.
The primal scheme only ever needs A^T A = L, so each iteration costs one
application of L (one round of neighbour communication). The PDHG baseline
uses the constraint L x = 0 and needs two rounds.
"""

import logging
import math
import os
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from pdhg_primal.errors import ConfigurationError, ManifestError, OracleError
from pdhg_primal.models.graph import Graph
from pdhg_primal.models.solver_config import SolverConfig
from pdhg_primal.models.trace import Trace
from pdhg_primal.services.operators import LaplacianMap, LinearMap, operator_norm_estimate
from pdhg_primal.services.oracle import solve_qp_kkt
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.prox import ProxFunction, SeparableSum
from pdhg_primal.services.solvers import resolve_step_sizes, run

logger = logging.getLogger(__name__)


class CountingMap(LinearMap):
    """Wraps a map and counts every forward or adjoint application"""

    def __init__(self, base: LinearMap):
        super().__init__(base.rows, base.cols)
        self.base = base
        self.is_psd = base.is_psd
        self.count = 0

    def _matvec(self, x):
        self.count += 1
        return self.base.apply(x)

    def _rmatvec(self, y):
        self.count += 1
        return self.base.apply_adjoint(y)

    def reset(self) -> None:
        self.count = 0


def laplacian(graph: Graph) -> LaplacianMap:
    """Weighted Laplacian of a connected graph, acting blockwise on node-major vectors"""
    if not graph.is_connected():
        raise ConfigurationError(
            "graph is disconnected; L x = 0 would not force consensus across components"
        )
    matrix = nx.laplacian_matrix(graph.to_networkx(), nodelist=range(graph.node_count),
                                 weight="weight")
    return LaplacianMap(matrix, graph.block_dim)


def load_graph(path: str) -> Graph:
    """
    Read an edge list: a header line "n d", then one "i j [w]" line per edge,
    0-indexed. Blank lines and lines starting with '#' are skipped.
    """
    if not os.path.exists(path):
        raise ManifestError(f"file not found: {path}", "graph")
    with open(path, 'r', encoding='utf-8') as f:
        lines = [line.strip() for line in f]
    lines = [line for line in lines if line and not line.startswith('#')]
    if not lines:
        raise ManifestError(f"{path} is empty", "graph")

    try:
        header = lines[0].split()
        node_count = int(header[0])
        block_dim = int(header[1]) if len(header) > 1 else 1
    except (ValueError, IndexError) as ex:
        raise ManifestError(f"bad header line '{lines[0]}', expected 'n d'", "graph") from ex

    edges: List[Tuple[int, int]] = []
    weights: List[float] = []
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ManifestError(f"line {number}: expected 'i j [w]', got '{line}'", "graph")
        try:
            edges.append((int(parts[0]), int(parts[1])))
            weights.append(float(parts[2]) if len(parts) == 3 else 1.0)
        except ValueError as ex:
            raise ManifestError(f"line {number}: {ex}", "graph") from ex

    weighted = any(w != 1.0 for w in weights)
    try:
        return Graph(node_count=node_count, edges=edges,
                     weights=weights if weighted else None, block_dim=block_dim)
    except ConfigurationError as ex:
        raise ManifestError(str(ex), "graph") from ex


class ConsensusProblem:
    """A graph and one prox function g_i on R^d per node"""

    def __init__(self, graph: Graph, local_functions: Sequence[ProxFunction]):
        self.graph = graph
        self.local_functions = list(local_functions)
        if len(self.local_functions) != graph.node_count:
            raise ConfigurationError(
                f"{len(self.local_functions)} local functions for {graph.node_count} nodes"
            )
        for i, g_i in enumerate(self.local_functions):
            if g_i.dimension != graph.block_dim:
                raise ConfigurationError(
                    f"g_{i} acts on R^{g_i.dimension}, nodes carry R^{graph.block_dim}"
                )
        self._laplacian: Optional[LaplacianMap] = None

    @property
    def g(self) -> SeparableSum:
        return SeparableSum(self.local_functions)

    @property
    def laplacian(self) -> LaplacianMap:
        if self._laplacian is None:
            self._laplacian = laplacian(self.graph)
        return self._laplacian

    @property
    def dimension(self) -> int:
        return self.graph.dimension

    def blocks(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(self.graph.node_count, self.graph.block_dim)

    def __repr__(self) -> str:
        return (f"ConsensusProblem(nodes={self.graph.node_count}, edges={len(self.graph.edges)}, "
                f"d={self.graph.block_dim})")


def consensus_gap(cp: ConsensusProblem, x: np.ndarray) -> float:
    """max_i ||x_i - mean(x)||"""
    blocks = cp.blocks(x)
    return float(np.max(np.linalg.norm(blocks - blocks.mean(axis=0), axis=1)))


def _laplacian_norm(cp: ConsensusProblem, config: SolverConfig) -> float:
    return operator_norm_estimate(cp.laplacian, config.norm_tol, config.norm_max_iters, config.seed)


def _metrics(cp: ConsensusProblem):
    return {"consensus_gap": lambda x, s: consensus_gap(cp, x),
            "consensus_gap_s": lambda x, s: consensus_gap(cp, s)}


def run_consensus(cp: ConsensusProblem, lam: Optional[float] = None, tau: Optional[float] = None,
                  max_iters: int = 1000, record_every: int = 1,
                  config: Optional[SolverConfig] = None,
                  x0: Optional[np.ndarray] = None, snapshots: bool = False) -> Tuple[Trace, int]:
    """
    The primal scheme with A = sqrt(L), b = 0, realised through A^T A = L.

    Admissibility is lam ||L|| < 1; the default is lam = safety / ||L||.

    Returns:
        (trace, communications) with exactly one L application per iteration
    """
    config = config or SolverConfig()
    laplacian_norm = _laplacian_norm(cp, config)
    counting = CountingMap(cp.laplacian)
    p = ConstrainedProblem(None, None, cp.g, fstar=0.0, gram=counting)
    counting.reset()
    monitor = ConstrainedProblem(None, None, cp.g, fstar=0.0, gram=cp.laplacian)
    norm = math.sqrt(laplacian_norm)
    ss = resolve_step_sizes("primal", monitor, tau=tau, lam=lam, config=config, norm=norm)

    trace = run("primal", p, ss, x0=x0, max_iters=max_iters, record_every=record_every,
                config=config, snapshots=snapshots, metrics=_metrics(cp), metric_problem=monitor,
                norm=norm)
    trace.metadata["communications_per_iteration"] = 1
    trace.metadata["laplacian_norm"] = laplacian_norm
    logger.info("one-communication consensus: %d iterations, %d communications, gap %.3e",
                max_iters, counting.count, trace.final.get("consensus_gap"))
    return trace, counting.count


def run_consensus_pdhg_baseline(cp: ConsensusProblem, lam: Optional[float] = None,
                                tau: Optional[float] = None, max_iters: int = 1000,
                                record_every: int = 1, config: Optional[SolverConfig] = None,
                                x0: Optional[np.ndarray] = None,
                                snapshots: bool = False) -> Tuple[Trace, int]:
    """
    PDHG with A = L, b = 0: L x_bar and L y cost two communications per iteration.

    Admissibility is lam ||L||^2 < 1; the default is lam = safety / ||L||^2.
    """
    config = config or SolverConfig()
    laplacian_norm = _laplacian_norm(cp, config)
    counting = CountingMap(cp.laplacian)
    zeros = np.zeros(cp.dimension)
    p = ConstrainedProblem(counting, zeros, cp.g, fstar=0.0)
    # A^T b is formed once at construction
    counting.reset()
    monitor = ConstrainedProblem(cp.laplacian, zeros, cp.g, fstar=0.0)
    ss = resolve_step_sizes("pdhg", monitor, tau=tau, lam=lam, config=config, norm=laplacian_norm)

    trace = run("pdhg", p, ss, x0=x0, max_iters=max_iters, record_every=record_every,
                config=config, snapshots=snapshots, metrics=_metrics(cp), metric_problem=monitor,
                norm=laplacian_norm)
    trace.metadata["communications_per_iteration"] = 2
    trace.metadata["laplacian_norm"] = laplacian_norm
    logger.info("PDHG consensus baseline: %d iterations, %d communications, gap %.3e",
                max_iters, counting.count, trace.final.get("consensus_gap"))
    return trace, counting.count


def communications_to_accuracy(trace: Trace, per_iteration: int, tol: float,
                               column: str = "consensus_gap") -> Optional[int]:
    """Communications spent when the column first drops to tol, None if it never does"""
    for record in trace.records:
        if record.get(column) <= tol:
            return record.k * per_iteration
    return None


def consensus_reference(cp: ConsensusProblem) -> np.ndarray:
    """
    Common point minimising sum_i g_i for quadratic-type g_i:
    x = -(sum_i Q_i)^{-1} sum_i c_i.
    """
    forms = [g_i.quadratic_form() for g_i in cp.local_functions]
    if any(form is None for form in forms):
        raise ConfigurationError("consensus reference needs quadratic-type local functions")
    q = sum(form[0] for form in forms)
    c = sum(form[1] for form in forms)
    try:
        return np.linalg.solve(q, -c)
    except np.linalg.LinAlgError as ex:
        raise OracleError("sum of local quadratic forms is singular") from ex


def consensus_dual_norms(cp: ConsensusProblem, tol: float = 1e-8) -> dict:
    """
    D_y for the two constraint forms: ||L u|| for L x = 0 and sqrt(u^T L u)
    for sqrt(L) x = 0. Logged for comparison, not asserted.
    """
    form = cp.g.quadratic_form()
    if form is None:
        raise ConfigurationError("dual norms need quadratic-type local functions")
    q, c, const = form
    zeros = np.zeros(cp.dimension)
    direct = solve_qp_kkt(q, c, cp.laplacian, zeros, const=const, tol=tol)
    implicit = solve_qp_kkt(q, c, None, gram=cp.laplacian, const=const, tol=tol)
    norms = {"laplacian": direct.d_y, "sqrt_laplacian": implicit.d_y}
    logger.warning("consensus D_y: L x = 0 -> %.6g, sqrt(L) x = 0 -> %.6g",
                   norms["laplacian"], norms["sqrt_laplacian"])
    return norms

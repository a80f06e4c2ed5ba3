from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import networkx as nx

from pdhg_primal.errors import ConfigurationError


@dataclass
class Graph:
    """Simple undirected communication graph on nodes 0..node_count-1, block dimension d per node"""
    node_count: int
    edges: List[Tuple[int, int]] = field(default_factory=list)
    weights: Optional[List[float]] = None
    block_dim: int = 1

    def __post_init__(self):
        if self.node_count < 1:
            raise ConfigurationError(f"graph needs at least one node, got {self.node_count}")
        if self.block_dim < 1:
            raise ConfigurationError(f"block dimension must be positive, got {self.block_dim}")
        self.edges = [(int(i), int(j)) for i, j in self.edges]
        if self.weights is not None:
            if len(self.weights) != len(self.edges):
                raise ConfigurationError(
                    f"{len(self.weights)} weights given for {len(self.edges)} edges"
                )
            if any(w <= 0 for w in self.weights):
                raise ConfigurationError("edge weights must be positive")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ConfigurationError(f"self-loop at node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise ConfigurationError(f"edge ({i}, {j}) outside 0..{self.node_count - 1}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ConfigurationError(f"duplicate edge ({i}, {j})")
            seen.add(key)

    @property
    def dimension(self) -> int:
        """Length of the stacked node-major vector"""
        return self.node_count * self.block_dim

    @property
    def max_degree(self) -> int:
        degrees = dict(self.to_networkx().degree())
        return max(degrees.values()) if degrees else 0

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        weights = self.weights or [1.0] * len(self.edges)
        for (i, j), w in zip(self.edges, weights):
            graph.add_edge(i, j, weight=float(w))
        return graph

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    @classmethod
    def from_networkx(cls, graph: nx.Graph, block_dim: int = 1) -> 'Graph':
        nodes = sorted(graph.nodes())
        index = {node: i for i, node in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in graph.edges()]
        weights = [float(data.get("weight", 1.0)) for _, _, data in graph.edges(data=True)]
        weighted = any(w != 1.0 for w in weights)
        return cls(node_count=len(nodes), edges=edges,
                   weights=weights if weighted else None, block_dim=block_dim)

    @classmethod
    def path(cls, n: int, block_dim: int = 1) -> 'Graph':
        return cls.from_networkx(nx.path_graph(n), block_dim)

    @classmethod
    def complete(cls, n: int, block_dim: int = 1) -> 'Graph':
        return cls.from_networkx(nx.complete_graph(n), block_dim)

    @classmethod
    def star(cls, n: int, block_dim: int = 1) -> 'Graph':
        """Star on n nodes in total, node 0 at the centre"""
        return cls.from_networkx(nx.star_graph(n - 1), block_dim)

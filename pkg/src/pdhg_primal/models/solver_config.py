from dataclasses import dataclass
from typing import Tuple


@dataclass
class OracleConfig:
    """Tolerances and caps for the reference computations"""
    lsq_tol: float = 1e-10
    dense_limit: int = 50
    cg_max_iters: int = 10000
    kkt_tol: float = 1e-8
    penalized_tol: float = 1e-10
    penalized_max_iters: int = 10_000_000
    penalized_safety: float = 0.99
    rho_ladder: Tuple[float, ...] = (1e2, 1e4, 1e6, 1e8)


@dataclass
class SolverConfig:
    """Configuration for stepsize selection, norm estimation and trace recording"""
    safety: float = 0.99
    norm_tol: float = 1e-6
    norm_max_iters: int = 5000
    seed: int = 42
    fstar_tol: float = 1e-10
    accel_tau0: float = 1.0
    record_every: int = 1
    oracle: OracleConfig = None

    def __post_init__(self):
        if self.oracle is None:
            self.oracle = OracleConfig()


@dataclass
class ResolverConfig:
    """Thresholds for resolving family names written in manifests"""
    fuzzy_min_threshold: int = 70
    auto_accept_threshold: int = 90

from .certificates import AuditRow, BoundSet, Certificates
from .family_match import FamilyMatch
from .family_schema import FamilySchema
from .graph import Graph
from .solver_config import OracleConfig, ResolverConfig, SolverConfig
from .states import AccelPDHGState, AccelState, DualSpaceState, PDHGState, PrimalState
from .step_sizes import StepSizes
from .trace import Trace, TraceRecord

__all__ = [
    'AuditRow',
    'BoundSet',
    'Certificates',
    'FamilyMatch',
    'FamilySchema',
    'Graph',
    'OracleConfig',
    'ResolverConfig',
    'SolverConfig',
    'AccelPDHGState',
    'AccelState',
    'DualSpaceState',
    'PDHGState',
    'PrimalState',
    'StepSizes',
    'Trace',
    'TraceRecord'
]

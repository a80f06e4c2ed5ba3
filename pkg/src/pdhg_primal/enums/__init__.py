from .family_match_type import FamilyMatchType
from .prox_family import ProxFamily, SmoothFamily
from .resolution_action import ResolutionAction
from .solver_variant import SolverVariant

__all__ = ['FamilyMatchType', 'ProxFamily', 'SmoothFamily', 'ResolutionAction', 'SolverVariant']

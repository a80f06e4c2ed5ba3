from dataclasses import dataclass

from pdhg_primal.enums.family_match_type import FamilyMatchType
from pdhg_primal.enums.resolution_action import ResolutionAction


@dataclass
class FamilyMatch:
    """Represents the result of resolving a manifest family name"""
    requested: str = ""
    canonical_family: str = ""
    confidence: float = 0.0
    match_type: FamilyMatchType = FamilyMatchType.NO_MATCH
    action: ResolutionAction = ResolutionAction.REJECT

    def to_dict(self) -> dict:
        """Convert the match to a dictionary for JSON output"""
        return {
            "requested": self.requested,
            "canonicalFamily": self.canonical_family,
            "confidence": self.confidence,
            "matchType": self.match_type.value,
            "action": self.action.value
        }

from dataclasses import dataclass, field
from typing import List


@dataclass
class FamilySchema:
    """A canonical function family with its parameters and accepted aliases"""
    canonical_name: str = ""
    description: str = ""
    parameters: List[str] = field(default_factory=list)
    required_parameters: List[str] = field(default_factory=list)
    aliases: List[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> 'FamilySchema':
        """Create a FamilySchema from a catalog entry"""
        return cls(
            canonical_name=data.get('canonicalName', ''),
            description=data.get('description', ''),
            parameters=data.get('parameters', []),
            required_parameters=data.get('requiredParameters', []),
            aliases=data.get('aliases', [])
        )

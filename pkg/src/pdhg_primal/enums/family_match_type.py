from enum import Enum


class FamilyMatchType(Enum):
    """Enum representing how a manifest family name was recognised"""
    EXACT_MATCH = "ExactMatch"
    ALIAS_MATCH = "AliasMatch"
    FUZZY_MATCH = "FuzzyMatch"
    NO_MATCH = "NoMatch"

from enum import Enum


class ResolutionAction(Enum):
    """Enum representing what the loader does with a resolved family name"""
    ACCEPT = "Accept"
    SUGGEST = "Suggest"
    REJECT = "Reject"

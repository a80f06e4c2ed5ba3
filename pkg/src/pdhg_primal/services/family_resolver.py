import logging
from typing import Dict, List, Optional

from rapidfuzz import fuzz

from pdhg_primal.enums.family_match_type import FamilyMatchType
from pdhg_primal.enums.resolution_action import ResolutionAction
from pdhg_primal.errors import ManifestError
from pdhg_primal.models.family_match import FamilyMatch
from pdhg_primal.models.family_schema import FamilySchema
from pdhg_primal.models.solver_config import ResolverConfig

logger = logging.getLogger(__name__)


class FamilyResolver:
    """Resolves family names written in manifests to canonical catalogue families"""

    def __init__(self, catalog: Dict[str, FamilySchema], config: Optional[ResolverConfig] = None):
        self.catalog = catalog
        self.config = config if config is not None else ResolverConfig()

    def resolve(self, requested: str) -> FamilyMatch:
        """Exact name, then alias, then fuzzy similarity"""
        normalized = self._normalize(requested)

        for schema in self.catalog.values():
            if self._normalize(schema.canonical_name) == normalized:
                return FamilyMatch(requested=requested, canonical_family=schema.canonical_name,
                                   confidence=1.0, match_type=FamilyMatchType.EXACT_MATCH,
                                   action=ResolutionAction.ACCEPT)

        for schema in self.catalog.values():
            for alias in schema.aliases:
                if self._normalize(alias) == normalized:
                    return FamilyMatch(requested=requested, canonical_family=schema.canonical_name,
                                       confidence=0.95, match_type=FamilyMatchType.ALIAS_MATCH,
                                       action=ResolutionAction.ACCEPT)

        best = self._best_fuzzy_match(requested, normalized)
        if best:
            return best
        return FamilyMatch(requested=requested)

    def resolve_or_raise(self, requested: str, field: str) -> str:
        """Canonical family name; anything short of an accepted match raises with suggestions"""
        match = self.resolve(requested)
        if match.action == ResolutionAction.ACCEPT:
            if match.match_type == FamilyMatchType.FUZZY_MATCH:
                logger.warning("%s: family '%s' read as '%s' (confidence %.2f)", field, requested,
                               match.canonical_family, match.confidence)
            return match.canonical_family

        suggestions = [m.canonical_family for m in self.top_matches(requested)]
        message = f"unknown family '{requested}'"
        if suggestions:
            message += f"; did you mean {', '.join(repr(s) for s in suggestions)}?"
        else:
            message += f"; known families: {', '.join(sorted(self.catalog))}"
        raise ManifestError(message, field)

    def _best_fuzzy_match(self, requested: str, normalized: str) -> Optional[FamilyMatch]:
        candidates = []
        for schema in self.catalog.values():
            candidates.append((schema.canonical_name,
                               fuzz.ratio(normalized, self._normalize(schema.canonical_name))))
            for alias in schema.aliases:
                candidates.append((schema.canonical_name,
                                   fuzz.ratio(normalized, self._normalize(alias))))
        if not candidates:
            return None

        canonical, score = max(candidates, key=lambda x: x[1])
        if score < self.config.fuzzy_min_threshold:
            return None
        return FamilyMatch(requested=requested, canonical_family=canonical,
                           confidence=score / 100.0, match_type=FamilyMatchType.FUZZY_MATCH,
                           action=self._determine_action(score))

    def _determine_action(self, score: float) -> ResolutionAction:
        if score >= self.config.auto_accept_threshold:
            return ResolutionAction.ACCEPT
        if score >= self.config.fuzzy_min_threshold:
            return ResolutionAction.SUGGEST
        return ResolutionAction.REJECT

    def _normalize(self, name: str) -> str:
        if not name:
            return ""
        return " ".join(name.lower().replace("_", " ").replace("-", " ").split())

    def top_matches(self, requested: str, top_n: int = 3) -> List[FamilyMatch]:
        """Best fuzzy candidates above the minimum threshold, one per family"""
        normalized = self._normalize(requested)
        candidates = []
        for schema in self.catalog.values():
            names = [schema.canonical_name] + list(schema.aliases)
            score = max(fuzz.ratio(normalized, self._normalize(name)) for name in names)
            if score >= self.config.fuzzy_min_threshold:
                candidates.append(FamilyMatch(requested=requested,
                                              canonical_family=schema.canonical_name,
                                              confidence=score / 100.0,
                                              match_type=FamilyMatchType.FUZZY_MATCH,
                                              action=self._determine_action(score)))
        return sorted(candidates, key=lambda x: x.confidence, reverse=True)[:top_n]

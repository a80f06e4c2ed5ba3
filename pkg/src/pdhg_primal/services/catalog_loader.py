import json
import os
from typing import Dict

from pdhg_primal.errors import ManifestError
from pdhg_primal.models.family_schema import FamilySchema

CATALOG_DIRECTORY = os.path.join(os.path.dirname(os.path.dirname(__file__)), "catalogs")

PROX_CATALOG = "prox-family-alias.json"
SMOOTH_CATALOG = "smooth-family-alias.json"


class CatalogLoader:
    """Loads the canonical function families from the JSON alias catalogs"""

    def __init__(self, directory: str = CATALOG_DIRECTORY):
        self.directory = directory

    def load_catalog(self, json_file_path: str) -> Dict[str, FamilySchema]:
        """Load the families of a single catalog file"""
        try:
            with open(json_file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as ex:
            raise ManifestError(f"could not read catalog {json_file_path}: {ex}") from ex

        catalog = {}
        for key, value in data.items():
            catalog[key] = FamilySchema.from_dict(value)
        return catalog

    def load_prox_families(self) -> Dict[str, FamilySchema]:
        return self.load_catalog(os.path.join(self.directory, PROX_CATALOG))

    def load_smooth_families(self) -> Dict[str, FamilySchema]:
        return self.load_catalog(os.path.join(self.directory, SMOOTH_CATALOG))

"""Slot canonicalization.

Domain-qualified slot names that refer to the same information are merged into one
canonical slot token (``restaurant-book-time`` and ``taxi-leaveAt`` both become
``[time]``). The mapping is data: ``canonical_slots.json`` shipped with the package.
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from spnet_summarizer.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

TABLE_RESOURCE = "canonical_slots.json"


@dataclass(frozen=True)
class CanonicalizationTable:
    """Versioned mapping from domain-qualified slot names to slot tokens."""

    version: str
    mapping: Tuple[Tuple[str, str], ...]

    @cached_property
    def as_dict(self) -> Dict[str, str]:
        return dict(self.mapping)

    @cached_property
    def inventory(self) -> Tuple[str, ...]:
        """Sorted canonical slot tokens."""
        return tuple(sorted({token for _, token in self.mapping}))

    def canonicalize(self, name: str) -> str:
        """Map a domain-qualified slot name to its canonical token.

        Unknown names pass through in bracketed, domain-qualified form with a warning.
        """
        key = name.strip().lower()
        token = self.as_dict.get(key)
        if token is None:
            logger.warning(f"Unknown slot '{name}' kept domain-qualified")
            return f"[{key}]"
        return token


def load_canonical_table(path: Optional[Union[str, Path]] = None) -> CanonicalizationTable:
    """Load a canonicalization table from ``path`` or the shipped default."""
    if path is None:
        return _default_table()
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read canonicalization table '{path}': {e}") from e
    return _table_from_payload(payload, str(path))


@lru_cache(maxsize=1)
def _default_table() -> CanonicalizationTable:
    text = resources.files("spnet_summarizer.corpus").joinpath(TABLE_RESOURCE).read_text(encoding="utf-8")
    return _table_from_payload(json.loads(text), TABLE_RESOURCE)


def _table_from_payload(payload: Dict[str, object], source: str) -> CanonicalizationTable:
    slots = payload.get("slots")
    version = payload.get("version")
    if not isinstance(slots, dict) or not isinstance(version, str):
        raise ConfigurationError(f"Canonicalization table '{source}' needs 'version' and 'slots'")
    mapping = tuple(sorted((str(k).lower(), str(v)) for k, v in slots.items()))
    return CanonicalizationTable(version=version, mapping=mapping)


def canonicalize_slot(name: str, table: Optional[CanonicalizationTable] = None) -> str:
    """Return the canonical slot token for a domain-qualified slot name."""
    return (table or load_canonical_table()).canonicalize(name)


def slot_inventory(table: Optional[CanonicalizationTable] = None) -> Tuple[str, ...]:
    """Return the canonical slot tokens."""
    return (table or load_canonical_table()).inventory

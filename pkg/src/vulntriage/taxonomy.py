"""Severity ordering and the 10-category vulnerability-type taxonomy.

The severity scale and the taxonomy order are frozen public contracts: index i
always means ``SEVERITY_NAMES[i]`` / ``taxonomy.names[i]`` in every serialized
artifact (datasets, model manifests, metrics, API responses).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnknownSeverityError

SEVERITY_NAMES: tuple[str, ...] = ("Low", "Medium", "High", "Critical")

NUM_SEVERITIES = 4
NUM_TYPES = 10

_SEVERITY_INDEX = {name.upper(): i for i, name in enumerate(SEVERITY_NAMES)}

_DEFAULT_TYPE_NAMES = (
    "Buffer Overflow",
    "RCE",
    "DoS",
    "XSS",
    "SQL Injection",
    "CSRF",
    "Privilege Escalation",
    "Information Disclosure",
    "Directory Traversal",
    "Clickjacking",
)

# CWE family groupings behind each category. Editable via a taxonomy config
# file; this table is a reconstruction, not an authoritative CWE hierarchy.
_DEFAULT_CWE_FAMILIES: dict[str, tuple[int, ...]] = {
    "Buffer Overflow": (119, 120, 121, 122, 125, 787),
    "RCE": (94, 78, 77, 502),
    "DoS": (400, 770, 835),
    "XSS": (79,),
    "SQL Injection": (89,),
    "CSRF": (352,),
    "Privilege Escalation": (269, 264, 266, 274),
    "Information Disclosure": (200, 209, 532),
    "Directory Traversal": (22, 23, 36),
    "Clickjacking": (1021,),
}


def map_severity(label: str) -> int:
    """Map a raw severity string to its index (Low=0 .. Critical=3).

    Case-insensitive. Raises UnknownSeverityError for anything outside the
    four admitted labels.
    """
    index = _SEVERITY_INDEX.get(label.strip().upper())
    if index is None:
        raise UnknownSeverityError(f"not a severity label: {label!r}")
    return index


def severity_name(index: int) -> str:
    """Canonical name for a severity index."""
    if not 0 <= index < NUM_SEVERITIES:
        raise UnknownSeverityError(f"severity index out of range: {index}")
    return SEVERITY_NAMES[index]


@dataclass(frozen=True)
class TypeVector:
    """Multi-hot indicator over the 10 taxonomy categories."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) != NUM_TYPES:
            raise ValueError(f"TypeVector needs {NUM_TYPES} bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("TypeVector bits must be 0 or 1")

    @classmethod
    def from_indices(cls, indices) -> "TypeVector":
        bits = [0] * NUM_TYPES
        for i in indices:
            bits[i] = 1
        return cls(tuple(bits))

    @classmethod
    def zeros(cls) -> "TypeVector":
        return cls((0,) * NUM_TYPES)

    def union(self, other: "TypeVector") -> "TypeVector":
        return TypeVector(tuple(a | b for a, b in zip(self.bits, other.bits)))


@dataclass(frozen=True)
class TypeTaxonomy:
    """The ordered category names plus the CWE-id lookup table."""

    names: tuple[str, ...]
    cwe_map: dict[str, int] = field(hash=False)

    def __post_init__(self) -> None:
        if len(self.names) != NUM_TYPES:
            raise ValueError(f"taxonomy needs exactly {NUM_TYPES} names, got {len(self.names)}")
        if len(set(self.names)) != NUM_TYPES:
            raise ValueError("taxonomy names must be distinct")
        for cwe, idx in self.cwe_map.items():
            if not 0 <= idx < NUM_TYPES:
                raise ValueError(f"cwe_map[{cwe!r}] = {idx} outside [0, {NUM_TYPES - 1}]")

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def default_taxonomy() -> TypeTaxonomy:
    """The built-in 10-category taxonomy with the default CWE lookup table."""
    cwe_map: dict[str, int] = {}
    for name, cwe_numbers in _DEFAULT_CWE_FAMILIES.items():
        idx = _DEFAULT_TYPE_NAMES.index(name)
        for number in cwe_numbers:
            cwe_map[f"CWE-{number}"] = idx
    return TypeTaxonomy(names=_DEFAULT_TYPE_NAMES, cwe_map=cwe_map)


def load_taxonomy(path: str | Path) -> TypeTaxonomy:
    """Load a taxonomy override file: {"names": [...10...], "cwe_map": {"CWE-79": 3}}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return TypeTaxonomy(names=tuple(raw["names"]), cwe_map=dict(raw["cwe_map"]))


def map_cwes_to_types(
    cwe_ids, taxonomy: TypeTaxonomy
) -> tuple[TypeVector, tuple[str, ...]]:
    """Fold CWE ids into a multi-hot TypeVector via the taxonomy lookup table.

    Bit j is set iff any input id maps to category j; repeated ids are
    idempotent. Ids absent from the table are skipped and returned as the
    unmapped diagnostics tuple (order preserved, first occurrence only).
    """
    bits = [0] * NUM_TYPES
    unmapped: list[str] = []
    seen_unmapped: set[str] = set()
    for cwe in cwe_ids:
        idx = taxonomy.cwe_map.get(cwe)
        if idx is None:
            if cwe not in seen_unmapped:
                seen_unmapped.add(cwe)
                unmapped.append(cwe)
        else:
            bits[idx] = 1
    return TypeVector(tuple(bits)), tuple(unmapped)

"""Acquisition and parsing of NVD JSON 1.1 feed files.

Feed items become CveRecord values only when they carry everything supervised
training needs: an English description with technical content, a CVSS v3 base
severity, and a well-formed CVE id. Everything else is dropped and counted.
"""
from __future__ import annotations

import gzip
import json
import re
import shutil
import urllib.error
import urllib.parse
import urllib.request
import zlib
from dataclasses import dataclass, asdict
from pathlib import Path

from .errors import DecompressError, JsonError, NetworkError, SchemaError
from .taxonomy import _SEVERITY_INDEX

CVE_ID_PATTERN = re.compile(r"^CVE-\d{4}-\d{4,}$")
CWE_ID_PATTERN = re.compile(r"^CWE-\d+$")

# NVD placeholder prefixes carrying no technical content.
_PLACEHOLDER_PREFIXES = ("** REJECT **", "** RESERVED **")


@dataclass(frozen=True)
class FeedSource:
    """Where a feed comes from: an http(s)/file URI or a local path."""

    location: str
    compressed: bool = False

    def __post_init__(self) -> None:
        if not self.location:
            raise ValueError("feed source location is empty")
        scheme = urllib.parse.urlparse(self.location).scheme
        if scheme and scheme not in ("http", "https", "file"):
            raise ValueError(f"unsupported feed URI scheme: {scheme!r}")

    @property
    def is_remote(self) -> bool:
        return urllib.parse.urlparse(self.location).scheme in ("http", "https")

    @classmethod
    def from_location(cls, location: str) -> "FeedSource":
        """Infer compression from the .gz suffix."""
        return cls(location=location, compressed=location.endswith(".gz"))


@dataclass(frozen=True)
class CveRecord:
    """One usable NVD entry."""

    cve_id: str
    description: str
    severity_raw: str
    cwe_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not CVE_ID_PATTERN.match(self.cve_id):
            raise ValueError(f"malformed CVE id: {self.cve_id!r}")
        if not self.description.strip():
            raise ValueError(f"{self.cve_id}: empty description")
        if self.severity_raw not in _SEVERITY_INDEX:
            raise ValueError(f"{self.cve_id}: bad severity {self.severity_raw!r}")
        for cwe in self.cwe_ids:
            if not CWE_ID_PATTERN.match(cwe):
                raise ValueError(f"{self.cve_id}: malformed CWE id {cwe!r}")


@dataclass
class IngestStats:
    """Per-parse bookkeeping; kept + all dropped_* always equals total."""

    total: int = 0
    kept: int = 0
    dropped_missing_severity: int = 0
    dropped_missing_description: int = 0
    dropped_rejected: int = 0
    dropped_duplicate: int = 0
    dropped_invalid_id: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def fetch_feed(source: FeedSource, dest: str | Path) -> Path:
    """Download (or copy) a feed to dest, gunzipping when compressed.

    Returns the path to the decompressed JSON file. For a compressed source
    the raw .gz bytes land at dest (given a .gz suffix) and the decompressed
    feed next to it. Raises NetworkError for unreachable URIs, DecompressError
    for corrupt gzip, OSError for an unwritable destination.
    """
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)

    if source.is_remote:
        raw_path = dest if not source.compressed else _gz_path(dest)
        try:
            with urllib.request.urlopen(source.location, timeout=60) as resp, open(
                raw_path, "wb"
            ) as out:
                shutil.copyfileobj(resp, out)
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            raise NetworkError(f"cannot fetch {source.location}: {exc}") from exc
    else:
        location = source.location
        if location.startswith("file://"):
            location = urllib.request.url2pathname(urllib.parse.urlparse(location).path)
        raw_path = Path(location)
        if not raw_path.exists():
            raise NetworkError(f"feed file not found: {raw_path}")
        if not source.compressed:
            if raw_path.resolve() != dest.resolve():
                shutil.copyfile(raw_path, dest)
            return dest

    if not source.compressed:
        return dest

    plain_dest = dest.with_suffix("") if dest.suffix == ".gz" else dest
    try:
        with gzip.open(raw_path, "rb") as zipped, open(plain_dest, "wb") as out:
            shutil.copyfileobj(zipped, out)
    except (gzip.BadGzipFile, EOFError, zlib.error) as exc:
        raise DecompressError(f"corrupt gzip feed at {raw_path}: {exc}") from exc
    return plain_dest


def _gz_path(dest: Path) -> Path:
    return dest if dest.suffix == ".gz" else dest.with_suffix(dest.suffix + ".gz")


def parse_feed(path: str | Path) -> tuple[list[CveRecord], IngestStats]:
    """Parse an NVD JSON 1.1 feed into CveRecord values plus drop statistics.

    Records preserve feed order. Raises JsonError for malformed JSON and
    SchemaError when the top-level CVE_Items key is missing or not a list.
    """
    with open(path, "rb") as fh:
        try:
            feed = json.load(fh)
        except json.JSONDecodeError as exc:
            raise JsonError(f"{path}: not valid JSON: {exc}") from exc

    if not isinstance(feed, dict) or "CVE_Items" not in feed:
        raise SchemaError(f"{path}: missing top-level CVE_Items")
    items = feed["CVE_Items"]
    if not isinstance(items, list):
        raise SchemaError(f"{path}: CVE_Items is not a list")

    stats = IngestStats(total=len(items))
    records: list[CveRecord] = []
    seen_ids: set[str] = set()

    for item in items:
        cve = item.get("cve", {}) if isinstance(item, dict) else {}
        cve_id = (cve.get("CVE_data_meta") or {}).get("ID", "")
        if not isinstance(cve_id, str) or not CVE_ID_PATTERN.match(cve_id):
            stats.dropped_invalid_id += 1
            continue
        if cve_id in seen_ids:
            stats.dropped_duplicate += 1
            continue

        description = _english_description(cve)
        if not description or not description.strip():
            stats.dropped_missing_description += 1
            continue
        if description.startswith(_PLACEHOLDER_PREFIXES):
            stats.dropped_rejected += 1
            continue

        severity = _base_severity(item)
        if severity is None:
            stats.dropped_missing_severity += 1
            continue

        records.append(
            CveRecord(
                cve_id=cve_id,
                description=description,
                severity_raw=severity,
                cwe_ids=_cwe_ids(cve),
            )
        )
        seen_ids.add(cve_id)
        stats.kept += 1

    return records, stats


def _english_description(cve: dict) -> str | None:
    data = ((cve.get("description") or {}).get("description_data")) or []
    for entry in data:
        if isinstance(entry, dict) and entry.get("lang") == "en":
            value = entry.get("value")
            if isinstance(value, str):
                return value
    return None


def _base_severity(item: dict) -> str | None:
    cvss = ((item.get("impact") or {}).get("baseMetricV3") or {}).get("cvssV3") or {}
    severity = cvss.get("baseSeverity")
    if isinstance(severity, str) and severity.upper() in _SEVERITY_INDEX:
        return severity.upper()
    return None


def _cwe_ids(cve: dict) -> tuple[str, ...]:
    ids: list[str] = []
    for group in ((cve.get("problemtype") or {}).get("problemtype_data")) or []:
        for entry in (group.get("description") or []) if isinstance(group, dict) else []:
            value = entry.get("value") if isinstance(entry, dict) else None
            if isinstance(value, str) and CWE_ID_PATTERN.match(value):
                ids.append(value)
    return tuple(ids)

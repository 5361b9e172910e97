"""Tokenization, label attachment, stratified splitting, and persistence.

Processed data round-trips through data/processed/{train,validation}.jsonl
plus manifest.json; downstream stages (training, evaluation) consume only
these files, never in-memory state.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .encoder_assets import load_tokenizer
from .errors import DegenerateSplitError, EmptyTextError, VulnTriageError
from .ingest import CveRecord
from .taxonomy import TypeTaxonomy, TypeVector, default_taxonomy, map_cwes_to_types, map_severity

DEFAULT_MAX_LEN = 128


@dataclass(frozen=True)
class TokenizedInput:
    """Fixed-length encoder input: ids, mask, and segment ids."""

    input_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    segment_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.input_ids)
        if len(self.attention_mask) != n or len(self.segment_ids) != n:
            raise ValueError("tokenized sequences differ in length")
        if any(m not in (0, 1) for m in self.attention_mask):
            raise ValueError("attention_mask must be 0/1")
        if any(a < b for a, b in zip(self.attention_mask, self.attention_mask[1:])):
            raise ValueError("attention_mask must be monotone non-increasing")


@dataclass(frozen=True)
class LabeledExample:
    cve_id: str
    tokens: TokenizedInput
    severity: int
    types: TypeVector
    description: str

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise ValueError(f"{self.cve_id}: empty description")
        if not 0 <= self.severity <= 3:
            raise ValueError(f"{self.cve_id}: severity index {self.severity} out of range")


@dataclass(frozen=True)
class SplitDataset:
    train: tuple[LabeledExample, ...]
    validation: tuple[LabeledExample, ...]
    seed: int


@lru_cache(maxsize=4)
def _cached_tokenizer(assets: str):
    return load_tokenizer(assets)


def tokenize(
    description: str, max_len: int = DEFAULT_MAX_LEN, tokenizer_assets: str | Path = "bert-base-uncased"
) -> TokenizedInput:
    """Tokenize one description to exactly max_len ids/mask/segments.

    The sequence starts with the encoder's start token and, when truncated,
    still ends with the separator; the remainder is padding.
    """
    if not description.strip():
        raise EmptyTextError("description is empty")
    if max_len < 2:
        raise ValueError(f"max_len must be >= 2, got {max_len}")
    tokenizer = _cached_tokenizer(str(tokenizer_assets))
    enc = tokenizer(
        description,
        padding="max_length",
        truncation=True,
        max_length=max_len,
        return_token_type_ids=True,
    )
    return TokenizedInput(
        input_ids=tuple(enc["input_ids"]),
        attention_mask=tuple(enc["attention_mask"]),
        segment_ids=tuple(enc["token_type_ids"]),
    )


def build_examples(
    records: list[CveRecord],
    taxonomy: TypeTaxonomy,
    max_len: int = DEFAULT_MAX_LEN,
    tokenizer_assets: str | Path = "bert-base-uncased",
) -> list[LabeledExample]:
    """Compose tokenize + severity mapping + CWE mapping, preserving order."""
    examples: list[LabeledExample] = []
    for record in records:
        try:
            types, _unmapped = map_cwes_to_types(record.cwe_ids, taxonomy)
            examples.append(
                LabeledExample(
                    cve_id=record.cve_id,
                    tokens=tokenize(record.description, max_len, tokenizer_assets),
                    severity=map_severity(record.severity_raw),
                    types=types,
                    description=record.description,
                )
            )
        except VulnTriageError as exc:
            raise type(exc)(f"{record.cve_id}: {exc}") from exc
    return examples


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(
    examples: list[LabeledExample], train_fraction: float, seed: int
) -> SplitDataset:
    """Severity-stratified split with seeded shuffles inside each class.

    Each class contributes round((1 - train_fraction) * n_c) examples to
    validation (half-up); deterministic per seed.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0,1), got {train_fraction}")

    by_class: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        by_class.setdefault(ex.severity, []).append(i)

    val_fraction = 1.0 - train_fraction
    rng = random.Random(seed)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for severity in sorted(by_class):
        indices = list(by_class[severity])
        n = len(indices)
        n_val = _round_half_up(val_fraction * n)
        if n >= 2 and (n_val == 0 or n_val == n):
            raise DegenerateSplitError(
                f"class {severity}: {n} examples split {n - n_val}/{n_val} leaves a side empty"
            )
        rng.shuffle(indices)
        val_idx.extend(indices[:n_val])
        train_idx.extend(indices[n_val:])

    train_idx.sort()
    val_idx.sort()
    return SplitDataset(
        train=tuple(examples[i] for i in train_idx),
        validation=tuple(examples[i] for i in val_idx),
        seed=seed,
    )


def _example_to_json(ex: LabeledExample) -> dict:
    return {
        "cve_id": ex.cve_id,
        "tokens": {
            "input_ids": list(ex.tokens.input_ids),
            "attention_mask": list(ex.tokens.attention_mask),
            "segment_ids": list(ex.tokens.segment_ids),
        },
        "severity": ex.severity,
        "types": list(ex.types.bits),
        "description": ex.description,
    }


def _example_from_json(row: dict) -> LabeledExample:
    return LabeledExample(
        cve_id=row["cve_id"],
        tokens=TokenizedInput(
            input_ids=tuple(row["tokens"]["input_ids"]),
            attention_mask=tuple(row["tokens"]["attention_mask"]),
            segment_ids=tuple(row["tokens"]["segment_ids"]),
        ),
        severity=row["severity"],
        types=TypeVector(tuple(row["types"])),
        description=row["description"],
    )


def _severity_histogram(examples) -> list[int]:
    hist = [0, 0, 0, 0]
    for ex in examples:
        hist[ex.severity] += 1
    return hist


def persist(dataset: SplitDataset, out_dir: str | Path, taxonomy: TypeTaxonomy | None = None,
            max_len: int | None = None) -> Path:
    """Write train.jsonl, validation.jsonl, and manifest.json under out_dir."""
    if taxonomy is None:
        taxonomy = default_taxonomy()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for name, rows in (("train", dataset.train), ("validation", dataset.validation)):
        with open(out_dir / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            for ex in rows:
                fh.write(json.dumps(_example_to_json(ex), ensure_ascii=False) + "\n")

    if max_len is None:
        any_ex = (dataset.train or dataset.validation)
        max_len = len(any_ex[0].tokens.input_ids) if any_ex else DEFAULT_MAX_LEN
    manifest = {
        "counts": {"train": len(dataset.train), "validation": len(dataset.validation)},
        "seed": dataset.seed,
        "max_len": max_len,
        "taxonomy_names": list(taxonomy.names),
        "severity_histogram": {
            "train": _severity_histogram(dataset.train),
            "validation": _severity_histogram(dataset.validation),
        },
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest_path


def load(data_dir: str | Path) -> SplitDataset:
    """Load a persisted SplitDataset; inverse of persist."""
    data_dir = Path(data_dir)
    with open(data_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)

    def read_rows(name: str) -> tuple[LabeledExample, ...]:
        rows = []
        with open(data_dir / f"{name}.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(_example_from_json(json.loads(line)))
        return tuple(rows)

    return SplitDataset(
        train=read_rows("train"),
        validation=read_rows("validation"),
        seed=manifest["seed"],
    )

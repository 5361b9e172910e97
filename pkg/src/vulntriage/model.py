"""Dual-head classifier: shared encoder, one projection split 4/14.

The head is a single affine map hidden_size -> 14 whose output is split
into 4 severity logits (softmax) and 10 type logits (per-label sigmoid).
Loss components are means over the batch so magnitude is batch-size
independent.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

from .encoder_assets import load_encoder, load_tokenizer
from .errors import (
    DimensionError,
    LengthMismatchError,
    ShapeError,
    VersionError,
)
from .dataset import TokenizedInput
from .taxonomy import (
    NUM_SEVERITIES,
    NUM_TYPES,
    TypeTaxonomy,
    TypeVector,
    default_taxonomy,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    encoder_name: str = "bert-base-uncased"
    hidden_size: int = 768
    num_severity: int = NUM_SEVERITIES
    num_types: int = NUM_TYPES
    type_threshold: float = 0.5
    head_seed: int = 42
    max_len: int = 128

    def __post_init__(self) -> None:
        if self.num_severity != NUM_SEVERITIES or self.num_types != NUM_TYPES:
            raise ValueError("num_severity=4 and num_types=10 are frozen")
        if not 0.0 < self.type_threshold < 1.0:
            raise ValueError(f"type_threshold must be in (0,1), got {self.type_threshold}")
        if self.hidden_size < 1 or self.max_len < 2:
            raise ValueError("hidden_size and max_len must be positive")


@dataclass(frozen=True)
class DualLogits:
    severity_logits: tuple[float, float, float, float]
    type_logits: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.severity_logits) != NUM_SEVERITIES or len(self.type_logits) != NUM_TYPES:
            raise ValueError("logits must split 4/10")
        if not all(math.isfinite(v) for v in (*self.severity_logits, *self.type_logits)):
            raise ValueError("logits must be finite")


@dataclass(frozen=True)
class LossBreakdown:
    severity_loss: float
    type_loss: float
    total: float


@dataclass(frozen=True)
class Prediction:
    severity: int
    severity_probs: tuple[float, float, float, float]
    type_probs: tuple[float, ...]
    types: TypeVector

    def __post_init__(self) -> None:
        if not 0 <= self.severity < NUM_SEVERITIES:
            raise ValueError(f"severity index {self.severity} out of range")
        if len(self.severity_probs) != NUM_SEVERITIES or len(self.type_probs) != NUM_TYPES:
            raise ValueError("probability vectors must split 4/10")


class DualHeadModel(nn.Module):
    """Encoder plus a single linear projection to 14 logits."""

    def __init__(
        self,
        encoder: nn.Module,
        head: nn.Linear,
        config: ModelConfig,
        taxonomy: TypeTaxonomy,
        tokenizer_source: str,
    ) -> None:
        super().__init__()
        self.encoder = encoder
        self.head = head
        self.config = config
        self.taxonomy = taxonomy
        self.tokenizer_source = tokenizer_source
        self._version: str | None = None

    def forward(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        token_type_ids: torch.Tensor,
    ) -> torch.Tensor:
        out = self.encoder(
            input_ids=input_ids,
            attention_mask=attention_mask,
            token_type_ids=token_type_ids,
        )
        summary = out.last_hidden_state[:, 0]
        return self.head(summary)

    @property
    def version(self) -> str:
        if self._version is None:
            self._version = _weights_digest(self)
        return self._version


def _weights_digest(model: DualHeadModel) -> str:
    digest = hashlib.sha256()
    cfg = asdict(model.config)
    digest.update(json.dumps(cfg, sort_keys=True).encode())
    digest.update(json.dumps(list(model.taxonomy.names)).encode())
    for name, tensor in sorted(model.state_dict().items()):
        digest.update(name.encode())
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()[:12]


def build_model(
    config: ModelConfig,
    assets: str | Path | None = None,
    taxonomy: TypeTaxonomy | None = None,
) -> DualHeadModel:
    """Load the encoder and attach a freshly seeded dual-head projection."""
    if assets is None:
        assets = config.encoder_name
    if taxonomy is None:
        taxonomy = default_taxonomy()
    encoder = load_encoder(assets)
    encoder_hidden = encoder.config.hidden_size
    if encoder_hidden != config.hidden_size:
        raise DimensionError(
            f"config hidden_size {config.hidden_size} != encoder hidden_size {encoder_hidden}"
        )

    head = nn.Linear(config.hidden_size, config.num_severity + config.num_types)
    # Reproduce the default Linear init (uniform +-1/sqrt(fan_in)) under a
    # recorded seed so two builds agree parameter for parameter.
    gen = torch.Generator().manual_seed(config.head_seed)
    bound = 1.0 / math.sqrt(config.hidden_size)
    with torch.no_grad():
        head.weight.uniform_(-bound, bound, generator=gen)
        head.bias.uniform_(-bound, bound, generator=gen)
    return DualHeadModel(encoder, head, config, taxonomy, str(assets))


def _batch_tensors(batch: list[TokenizedInput]) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    if not batch:
        raise ShapeError("batch is empty")
    lengths = {len(item.input_ids) for item in batch}
    if len(lengths) != 1:
        raise ShapeError(f"batch mixes sequence lengths {sorted(lengths)}")
    ids = torch.tensor([item.input_ids for item in batch], dtype=torch.long)
    mask = torch.tensor([item.attention_mask for item in batch], dtype=torch.long)
    segments = torch.tensor([item.segment_ids for item in batch], dtype=torch.long)
    return ids, mask, segments


def forward(model: DualHeadModel, batch: list[TokenizedInput]) -> list[DualLogits]:
    """Inference-mode forward over a homogeneous batch."""
    ids, mask, segments = _batch_tensors(batch)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            logits = model(ids, mask, segments)
    finally:
        if was_training:
            model.train()
    n_sev = model.config.num_severity
    return [
        DualLogits(
            severity_logits=tuple(float(v) for v in row[:n_sev]),
            type_logits=tuple(float(v) for v in row[n_sev:]),
        )
        for row in logits
    ]


def combined_loss_tensors(
    logits: torch.Tensor, severities: torch.Tensor, types: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Differentiable (total, severity, type) losses from a (B,14) logit tensor.

    severity: mean batch cross-entropy over softmax of the first 4 columns;
    type: mean over batch of (1/10) * summed per-label binary cross-entropy
    on the last 10 columns, in log-sum-exp form.
    """
    severity_loss = F.cross_entropy(logits[:, :NUM_SEVERITIES], severities)
    type_loss = F.binary_cross_entropy_with_logits(logits[:, NUM_SEVERITIES:], types)
    return severity_loss + type_loss, severity_loss, type_loss


def combined_loss(
    logits: list[DualLogits], severities: list[int], types: list[TypeVector]
) -> LossBreakdown:
    """Batch loss over decoded logits, accumulated in 64-bit."""
    if not (len(logits) == len(severities) == len(types)) or not logits:
        raise LengthMismatchError(
            f"need equal non-empty lists, got {len(logits)}/{len(severities)}/{len(types)}"
        )
    logit_rows = torch.tensor(
        [[*dl.severity_logits, *dl.type_logits] for dl in logits], dtype=torch.float64
    )
    severity_t = torch.tensor(severities, dtype=torch.long)
    type_t = torch.tensor([tv.bits for tv in types], dtype=torch.float64)
    _, sev, typ = combined_loss_tensors(logit_rows, severity_t, type_t)
    severity_loss = float(sev)
    type_loss = float(typ)
    return LossBreakdown(
        severity_loss=severity_loss,
        type_loss=type_loss,
        total=severity_loss + type_loss,
    )


def _stable_softmax(values: tuple[float, ...]) -> tuple[float, ...]:
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return tuple(e / total for e in exps)


def _stable_sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def decode(logits: DualLogits, threshold: float = 0.5) -> Prediction:
    """Turn one logit pair into probabilities and hard decisions.

    Severity argmax ties break toward the lower index; type bit j fires
    iff its probability is >= threshold.
    """
    severity_probs = _stable_softmax(logits.severity_logits)
    severity = max(range(NUM_SEVERITIES), key=lambda i: (severity_probs[i], -i))
    type_probs = tuple(_stable_sigmoid(v) for v in logits.type_logits)
    bits = tuple(1 if p >= threshold else 0 for p in type_probs)
    return Prediction(
        severity=severity,
        severity_probs=severity_probs,
        type_probs=type_probs,
        types=TypeVector(bits),
    )


def save_model(model: DualHeadModel, out_dir: str | Path) -> Path:
    """Write encoder, tokenizer assets, head weights, and config.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.encoder.save_pretrained(out_dir / "encoder")
    load_tokenizer(model.tokenizer_source).save_pretrained(out_dir / "tokenizer")
    torch.save(model.head.state_dict(), out_dir / "head.pt")

    model._version = None
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "model_version": model.version,
        **asdict(model.config),
        "taxonomy_names": list(model.taxonomy.names),
        "taxonomy_cwe_map": {cwe: idx for cwe, idx in sorted(model.taxonomy.cwe_map.items())},
    }
    manifest_path = out_dir / "config.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest_path


def load_model(model_dir: str | Path) -> DualHeadModel:
    """Reconstruct a saved model; forward agrees with the original to 1e-6."""
    model_dir = Path(model_dir)
    with open(model_dir / "config.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise VersionError(
            f"unsupported model schema {manifest.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )

    config = ModelConfig(
        encoder_name=manifest["encoder_name"],
        hidden_size=manifest["hidden_size"],
        num_severity=manifest["num_severity"],
        num_types=manifest["num_types"],
        type_threshold=manifest["type_threshold"],
        head_seed=manifest["head_seed"],
        max_len=manifest["max_len"],
    )
    taxonomy = TypeTaxonomy(
        names=tuple(manifest["taxonomy_names"]),
        cwe_map={k: v for k, v in manifest["taxonomy_cwe_map"].items()},
    )
    encoder = load_encoder(model_dir / "encoder")
    head = nn.Linear(config.hidden_size, config.num_severity + config.num_types)
    head.load_state_dict(torch.load(model_dir / "head.pt", weights_only=True))
    model = DualHeadModel(encoder, head, config, taxonomy, str(model_dir / "tokenizer"))
    model._version = manifest["model_version"]
    return model

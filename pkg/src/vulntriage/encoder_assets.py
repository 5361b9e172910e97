"""Loading of pre-trained encoder/tokenizer assets, plus a miniature builder.

The classifier consumes a pre-trained bidirectional transformer encoder (the
default is bert-base-uncased). ``build_miniature_encoder`` creates a tiny
randomly initialized encoder with a corpus-derived WordPiece vocabulary so the
whole pipeline can run on machines with no model hub access; it is what the
test suite and the offline quickstart use.
"""
from __future__ import annotations

import re
from collections import Counter
from pathlib import Path
from typing import Iterable

import torch
from transformers.utils import logging as _hf_logging

from .errors import AssetError

# Checkpoint load/save progress bars are noise for a CLI/service process.
_hf_logging.disable_progress_bar()

_WORD_RE = re.compile(r"[a-z0-9]+")
_SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")


def load_tokenizer(assets: str | Path):
    """Load WordPiece tokenizer assets from a local directory or hub name."""
    from transformers import AutoTokenizer

    try:
        return AutoTokenizer.from_pretrained(str(assets))
    except Exception as exc:
        raise AssetError(f"cannot load tokenizer assets from {assets}: {exc}") from exc


def load_encoder(assets: str | Path):
    """Load encoder weights from a local directory or hub name."""
    from transformers import AutoModel

    try:
        return AutoModel.from_pretrained(str(assets))
    except Exception as exc:
        raise AssetError(f"cannot load encoder assets from {assets}: {exc}") from exc


def build_vocab(texts: Iterable[str], max_words: int = 4000) -> list[str]:
    """Corpus-frequency WordPiece vocabulary: specials, characters, top words.

    Single characters (and their ## continuations) keep out-of-vocabulary
    words decomposable instead of collapsing to [UNK].
    """
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(_WORD_RE.findall(text.lower()))
    chars = "abcdefghijklmnopqrstuvwxyz0123456789"
    vocab = list(_SPECIAL_TOKENS)
    vocab.extend(chars)
    vocab.extend("##" + c for c in chars)
    for word, _ in counts.most_common(max_words):
        if word not in chars:
            vocab.append(word)
    return vocab


def build_miniature_encoder(
    out_dir: str | Path,
    corpus: Iterable[str],
    hidden_size: int = 128,
    num_layers: int = 2,
    num_heads: int = 2,
    max_words: int = 4000,
    seed: int = 0,
) -> Path:
    """Write tokenizer + randomly initialized encoder assets under out_dir.

    The directory is loadable by load_tokenizer/load_encoder and by
    ``vulntriage train --encoder``.
    """
    from transformers import BertConfig, BertModel, BertTokenizer

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    vocab = build_vocab(corpus, max_words=max_words)
    tokenizer = BertTokenizer(vocab={tok: i for i, tok in enumerate(vocab)})
    tokenizer.save_pretrained(out_dir)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=512,
    )
    torch.manual_seed(seed)
    encoder = BertModel(config)
    encoder.save_pretrained(out_dir)
    return out_dir

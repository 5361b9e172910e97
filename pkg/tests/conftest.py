"""Shared fixtures: miniature encoder assets, small corpora, desk-scale run.

Everything runs offline. Encoder assets are built locally from the corpus
vocabulary; no hub access happens anywhere in the suite. Set
VULNTRIAGE_NVD_FEED to a real feed file to run the desk-scale training
criteria against real records instead of generated ones.
"""
import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import json
import time
from pathlib import Path
from types import SimpleNamespace

import pytest

from vulntriage.dataset import build_examples, persist, stratified_split
from vulntriage.encoder_assets import build_miniature_encoder
from vulntriage.ingest import parse_feed
from vulntriage.model import ModelConfig, build_model, save_model
from vulntriage.synthetic import FEED_ENV_VAR, write_feed
from vulntriage.taxonomy import default_taxonomy
from vulntriage.training import TrainConfig, train


@pytest.fixture(scope="session")
def assets_root(tmp_path_factory):
    return tmp_path_factory.mktemp("assets")


@pytest.fixture(scope="session")
def small_records(assets_root):
    feed = write_feed(assets_root / "small_feed.json", 160, seed=11)
    records, _ = parse_feed(feed)
    return records


@pytest.fixture(scope="session")
def mini_encoder_dir(assets_root, small_records):
    return build_miniature_encoder(
        assets_root / "mini_encoder",
        [r.description for r in small_records],
        hidden_size=64,
        num_layers=2,
        num_heads=2,
        seed=5,
    )


@pytest.fixture(scope="session")
def small_examples(small_records, mini_encoder_dir):
    return build_examples(small_records, default_taxonomy(), 48, mini_encoder_dir)


@pytest.fixture(scope="session")
def small_split(small_examples):
    return stratified_split(small_examples, 0.8, 42)


def make_mini_model(mini_encoder_dir, head_seed: int = 7):
    config = ModelConfig(
        encoder_name=str(mini_encoder_dir), hidden_size=64, max_len=48, head_seed=head_seed
    )
    return build_model(config, mini_encoder_dir)


@pytest.fixture(scope="session")
def mini_model(mini_encoder_dir):
    # Shared read-only instance; tests that train must build their own.
    return make_mini_model(mini_encoder_dir)


@pytest.fixture(scope="session")
def saved_model_dir(assets_root, mini_model):
    out = assets_root / "saved_model"
    save_model(mini_model, out)
    return out


GOLDEN_KEPT = (
    (
        "CVE-2025-0001",
        "A heap-based buffer overflow in Acme Router firmware allows remote "
        "attackers to execute arbitrary code via a crafted packet.",
        "HIGH",
        ("CWE-119", "CWE-787"),
    ),
    (
        "CVE-2025-0002",
        "Stored cross-site scripting in OpenWidget CMS lets authenticated "
        "users inject script into the comment field.",
        "MEDIUM",
        ("CWE-79",),
    ),
    (
        "CVE-2025-0005",
        "Quartz Database Engine exposes session identifiers in verbose "
        "error messages.",
        "LOW",
        (),
    ),
)


def _feed_item(cve_id, description, severity=None, cwes=(), lang="en"):
    item = {
        "cve": {
            "data_type": "CVE",
            "CVE_data_meta": {"ID": cve_id, "ASSIGNER": "cve@example.org"},
            "problemtype": {
                "problemtype_data": [
                    {"description": [{"lang": "en", "value": c} for c in cwes]}
                ]
            },
            "description": {
                "description_data": [{"lang": lang, "value": description}]
            },
        }
    }
    if severity is not None:
        item["impact"] = {
            "baseMetricV3": {"cvssV3": {"version": "3.1", "baseSeverity": severity}}
        }
    else:
        item["impact"] = {}
    return item


@pytest.fixture
def golden_feed(tmp_path):
    """Five hand-built records: three usable, one rejected, one unscored."""
    items = [
        _feed_item(*GOLDEN_KEPT[0]),
        _feed_item(*GOLDEN_KEPT[1]),
        _feed_item(
            "CVE-2025-0003",
            "** REJECT ** DO NOT USE THIS CANDIDATE NUMBER. Withdrawn by its CNA.",
            "HIGH",
        ),
        _feed_item(
            "CVE-2025-0004",
            "Falcon VPN Client crashes when parsing malformed certificates.",
            None,
            ("CWE-400",),
        ),
        _feed_item(*GOLDEN_KEPT[2]),
    ]
    payload = {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": "5",
        "CVE_data_timestamp": "2025-03-15T00:00Z",
        "CVE_Items": items,
    }
    path = tmp_path / "golden_feed.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def desk_run(assets_root):
    """Shared 3-epoch training run on >= 1,000 records with a mini encoder."""
    env_feed = os.environ.get(FEED_ENV_VAR)
    if env_feed:
        feed_path = Path(env_feed)
    else:
        feed_path = write_feed(assets_root / "desk_feed.json", 2500, seed=42)
    records, _ = parse_feed(feed_path)
    records = records[:2500]

    taxonomy = default_taxonomy()
    encoder_dir = build_miniature_encoder(
        assets_root / "desk_encoder",
        [r.description for r in records],
        hidden_size=128,
        num_layers=2,
        num_heads=2,
        seed=3,
    )
    examples = build_examples(records, taxonomy, 64, encoder_dir)
    split = stratified_split(examples, 0.8, 42)
    data_dir = assets_root / "desk_data"
    persist(split, data_dir, taxonomy, 64)

    config = ModelConfig(
        encoder_name=str(encoder_dir), hidden_size=128, max_len=64, head_seed=42
    )
    model = build_model(config, encoder_dir)
    train_config = TrainConfig(
        batch_size=8, learning_rate=1e-3, epochs=3, seed=42, max_len=64
    )
    model_dir = assets_root / "desk_model"
    started = time.perf_counter()
    model, logs = train(model, split, train_config, model_dir)
    wall_seconds = time.perf_counter() - started

    return SimpleNamespace(
        model=model,
        logs=logs,
        split=split,
        examples=examples,
        model_dir=model_dir,
        data_dir=data_dir,
        encoder_dir=encoder_dir,
        wall_seconds=wall_seconds,
    )

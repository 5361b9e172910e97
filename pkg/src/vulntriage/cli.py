"""Command-line entry point orchestrating the pipeline stage by stage.

Each subcommand consumes only the previous stage's persisted artifacts.
Exit codes: 0 success, 1 domain error, 2 usage error. stdout carries JSON
only for `classify`; diagnostics go to stderr.
"""
from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click

from . import dataset as dataset_mod
from . import evaluation, ingest, service, synthetic, training
from .errors import VulnTriageError
from .model import ModelConfig, build_model, load_model
from .taxonomy import default_taxonomy, load_taxonomy

DEFAULT_FEED_URL = "https://nvd.nist.gov/feeds/json/cve/1.1/nvdcve-1.1-2025.json.gz"
DEFAULT_RAW = "data/raw/nvdcve-1.1-2025.json.gz"
DEFAULT_PROCESSED = "data/processed"
DEFAULT_MODEL_DIR = "models/bert_classifier"
DEFAULT_REPORTS = "reports"


def _fail(exc: Exception) -> None:
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Vulnerability triage pipeline: fetch, preprocess, train, evaluate, serve."""


@main.command()
@click.option("--url", default=DEFAULT_FEED_URL, show_default=True, help="Feed URL or local path.")
@click.option("--out", default=DEFAULT_RAW, show_default=True, help="Download destination.")
@click.option("--synthetic", "synthetic_n", type=int, default=None,
              help="Generate a synthetic feed with N records instead of downloading.")
@click.option("--seed", default=42, show_default=True, help="Seed for --synthetic.")
def fetch(url: str, out: str, synthetic_n: int | None, seed: int) -> None:
    """Download (and decompress) a feed, or generate a synthetic one."""
    try:
        if synthetic_n is not None:
            path = synthetic.write_feed(out, synthetic_n, seed)
        else:
            path = ingest.fetch_feed(ingest.FeedSource.from_location(url), out)
    except (VulnTriageError, OSError) as exc:
        _fail(exc)
    click.echo(f"feed ready at {path}", err=True)


@main.command()
@click.option("--input", "input_path", required=True, help="Feed JSON file to parse.")
@click.option("--out-dir", default=DEFAULT_PROCESSED, show_default=True)
@click.option("--tokenizer", default="bert-base-uncased", show_default=True,
              help="Tokenizer assets: model directory or hub name.")
@click.option("--max-len", default=128, show_default=True)
@click.option("--train-fraction", default=0.8, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--taxonomy", "taxonomy_path", default=None, help="JSON taxonomy override.")
def preprocess(input_path: str, out_dir: str, tokenizer: str, max_len: int,
               train_fraction: float, seed: int, taxonomy_path: str | None) -> None:
    """Parse a feed, tokenize, split, and persist the processed dataset."""
    try:
        taxonomy = load_taxonomy(taxonomy_path) if taxonomy_path else default_taxonomy()
        records, stats = ingest.parse_feed(input_path)
        examples = dataset_mod.build_examples(records, taxonomy, max_len, tokenizer)
        split = dataset_mod.stratified_split(examples, train_fraction, seed)
        manifest = dataset_mod.persist(split, out_dir, taxonomy, max_len)
    except (VulnTriageError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(stats.to_json(), err=True)
    click.echo(f"processed dataset at {manifest.parent}", err=True)


@main.command()
@click.option("--data-dir", default=DEFAULT_PROCESSED, show_default=True)
@click.option("--out-dir", default=DEFAULT_MODEL_DIR, show_default=True)
@click.option("--reports-dir", default=DEFAULT_REPORTS, show_default=True)
@click.option("--encoder", default="bert-base-uncased", show_default=True,
              help="Encoder assets: model directory or hub name.")
@click.option("--hidden-size", default=768, show_default=True)
@click.option("--epochs", default=3, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--lr", default=2e-5, show_default=True)
@click.option("--weight-decay", default=0.01, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--device", default="cpu", show_default=True)
@click.option("--lr-schedule", type=click.Choice(["constant", "linear"]),
              default="constant", show_default=True)
def train(data_dir: str, out_dir: str, reports_dir: str, encoder: str, hidden_size: int,
          epochs: int, batch_size: int, lr: float, weight_decay: float, seed: int,
          threshold: float, device: str, lr_schedule: str) -> None:
    """Fine-tune the dual-head model on a processed dataset."""
    try:
        split = dataset_mod.load(data_dir)
        with open(Path(data_dir) / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        config = ModelConfig(
            encoder_name=encoder,
            hidden_size=hidden_size,
            type_threshold=threshold,
            head_seed=seed,
            max_len=manifest["max_len"],
        )
        model = build_model(config, encoder)
        train_config = training.TrainConfig(
            batch_size=batch_size, learning_rate=lr, epochs=epochs,
            weight_decay=weight_decay, seed=seed, max_len=manifest["max_len"],
            device=device, lr_schedule=lr_schedule,
        )
        model, logs = training.train(model, split, train_config, out_dir)
        training.export_learning_curve(logs, reports_dir)
        with open(Path(out_dir) / "train_log.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "config": dataclasses.asdict(train_config),
                    "epochs": [dataclasses.asdict(log) for log in logs],
                },
                fh,
                indent=2,
            )
    except (VulnTriageError, OSError, ValueError) as exc:
        _fail(exc)
    for log in logs:
        click.echo(
            f"epoch {log.epoch}: train_loss={log.train_loss:.4f} "
            f"eval_loss={log.eval_loss:.4f} ({log.wall_seconds:.1f}s)",
            err=True,
        )
    click.echo(f"model saved to {out_dir}", err=True)


@main.command()
@click.option("--model", "model_dir", default=DEFAULT_MODEL_DIR, show_default=True)
@click.option("--data-dir", default=DEFAULT_PROCESSED, show_default=True)
@click.option("--split", "split_name", type=click.Choice(["validation", "full"]),
              default="validation", show_default=True)
@click.option("--out-dir", default=DEFAULT_REPORTS, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--threshold", type=float, default=None, help="Type decision threshold override.")
def evaluate(model_dir: str, data_dir: str, split_name: str, out_dir: str,
             batch_size: int, threshold: float | None) -> None:
    """Compute all metrics and report artifacts over a dataset partition."""
    try:
        model = load_model(model_dir)
        split = dataset_mod.load(data_dir)
        examples = list(split.validation)
        if split_name == "full":
            examples = list(split.train) + examples
        severity, types, words = evaluation.evaluate_model(
            model, examples, batch_size=batch_size, threshold=threshold
        )
        written = evaluation.render_artifacts(
            severity, types, words, out_dir, model.taxonomy.names
        )
    except (VulnTriageError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(
        f"severity accuracy {severity.accuracy:.4f}, macro F1 {severity.macro_f1:.4f}, "
        f"hamming {types.hamming_loss:.4f}, exact match {types.exact_match_accuracy:.4f}",
        err=True,
    )
    click.echo(f"wrote {len(written)} artifacts to {out_dir}", err=True)


@main.command()
@click.option("--model", "model_dir", default=None, help="Model directory (env MODEL_DIR).")
@click.option("--bind", default=None, help="host:port to listen on (env BIND_ADDR).")
@click.option("--threshold", type=float, default=None, help="Type threshold (env TYPE_THRESHOLD).")
@click.option("--origins", default=None, help="Comma-separated CORS origins (env ALLOWED_ORIGINS).")
def serve(model_dir: str | None, bind: str | None, threshold: float | None,
          origins: str | None) -> None:
    """Run the HTTP classification service until interrupted."""
    model_dir = model_dir or os.environ.get(service.MODEL_DIR_ENV) or DEFAULT_MODEL_DIR
    bind = bind or os.environ.get(service.BIND_ADDR_ENV) or service.DEFAULT_BIND
    if threshold is None:
        env_threshold = os.environ.get(service.TYPE_THRESHOLD_ENV)
        threshold = float(env_threshold) if env_threshold else None
    origins = origins or os.environ.get(service.ALLOWED_ORIGINS_ENV)
    origin_list = [o.strip() for o in origins.split(",") if o.strip()] if origins else None
    try:
        service.start(model_dir, bind, threshold, origin_list)
    except (VulnTriageError, OSError, ValueError) as exc:
        _fail(exc)


@main.command()
@click.option("--model", "model_dir", default=DEFAULT_MODEL_DIR, show_default=True)
@click.option("--text", required=True, help="Description text to classify.")
@click.option("--threshold", type=float, default=None)
def classify(model_dir: str, text: str, threshold: float | None) -> None:
    """Classify one description and print the JSON response to stdout."""
    try:
        model = load_model(model_dir)
        payload = service.classify_text(model, text, threshold)
    except (VulnTriageError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(json.dumps(payload))


if __name__ == "__main__":
    main()

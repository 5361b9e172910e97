"""Fine-tuning loop: AdamW on the combined loss, per-epoch logs and checkpoints.

Stages communicate only through persisted artifacts: train() reads a
SplitDataset and writes checkpoints plus the final model directory;
export_learning_curve() turns the epoch logs into CSV and PNG.
"""
from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass
from pathlib import Path

import torch
from matplotlib.figure import Figure

from .dataset import LabeledExample, SplitDataset
from .errors import DataError, NumericError
from .model import DualHeadModel, combined_loss_tensors, save_model


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 2e-5
    epochs: int = 3
    weight_decay: float = 0.01
    seed: int = 42
    max_len: int = 128
    device: str = "cpu"
    lr_schedule: str = "constant"

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {self.max_len}")
        if self.lr_schedule not in ("constant", "linear"):
            raise ValueError(f"lr_schedule must be constant or linear, got {self.lr_schedule!r}")


def scheduled_lr(base_lr: float, schedule: str, completed_steps: int, total_steps: int) -> float:
    """Learning rate for the next optimizer step.

    Linear decays from base_lr toward zero over the run; the last step uses
    base_lr/total_steps, never exactly zero.
    """
    if schedule == "constant":
        return base_lr
    return base_lr * (1 - completed_steps / total_steps)


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train_loss: float
    eval_loss: float
    wall_seconds: float

    def __post_init__(self) -> None:
        if self.epoch < 1:
            raise ValueError(f"epoch must be >= 1, got {self.epoch}")
        if not (math.isfinite(self.train_loss) and math.isfinite(self.eval_loss)):
            raise ValueError("losses must be finite")


def _batch_label_tensors(examples: list[LabeledExample], device: torch.device):
    ids = torch.tensor([e.tokens.input_ids for e in examples], dtype=torch.long, device=device)
    mask = torch.tensor([e.tokens.attention_mask for e in examples], dtype=torch.long, device=device)
    segments = torch.tensor([e.tokens.segment_ids for e in examples], dtype=torch.long, device=device)
    severities = torch.tensor([e.severity for e in examples], dtype=torch.long, device=device)
    types = torch.tensor([e.types.bits for e in examples], dtype=torch.float32, device=device)
    return ids, mask, segments, severities, types


def evaluation_loss(model: DualHeadModel, examples: tuple[LabeledExample, ...] | list[LabeledExample],
                    batch_size: int = 16) -> float:
    """Exact per-sample mean of the combined loss over a partition."""
    if not examples:
        raise DataError("cannot evaluate loss on an empty partition")
    device = next(model.parameters()).device
    was_training = model.training
    model.eval()
    total = 0.0
    try:
        with torch.no_grad():
            for start in range(0, len(examples), batch_size):
                batch = list(examples[start:start + batch_size])
                ids, mask, segments, severities, types = _batch_label_tensors(batch, device)
                loss, _, _ = combined_loss_tensors(model(ids, mask, segments), severities, types)
                total += float(loss) * len(batch)
    finally:
        if was_training:
            model.train()
    return total / len(examples)


def train(
    model: DualHeadModel,
    dataset: SplitDataset,
    config: TrainConfig,
    out_dir: str | Path = "models/bert_classifier",
) -> tuple[DualHeadModel, list[EpochLog]]:
    """Run the fine-tuning loop and save per-epoch checkpoints plus the final model.

    Raises NumericError on a non-finite loss; checkpoints from completed
    epochs are left on disk in that case.
    """
    if not dataset.train or not dataset.validation:
        raise DataError(
            f"both partitions must be non-empty, got {len(dataset.train)}/{len(dataset.validation)}"
        )
    out_dir = Path(out_dir)
    device = torch.device(config.device)
    model.to(device)
    torch.manual_seed(config.seed)
    shuffle_rng = random.Random(config.seed)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )

    steps_per_epoch = math.ceil(len(dataset.train) / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    completed_steps = 0

    logs: list[EpochLog] = []
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = list(range(len(dataset.train)))
        shuffle_rng.shuffle(order)
        model.train()
        step_losses: list[float] = []
        for start in range(0, len(order), config.batch_size):
            batch = [dataset.train[i] for i in order[start:start + config.batch_size]]
            ids, mask, segments, severities, types = _batch_label_tensors(batch, device)
            loss, _, _ = combined_loss_tensors(model(ids, mask, segments), severities, types)
            if not torch.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch} step {len(step_losses) + 1}; "
                    f"last good checkpoint is epoch {epoch - 1}"
                )
            lr = scheduled_lr(
                config.learning_rate, config.lr_schedule, completed_steps, total_steps
            )
            for group in optimizer.param_groups:
                group["lr"] = lr
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            completed_steps += 1
            step_losses.append(loss.item())

        eval_loss = evaluation_loss(model, dataset.validation, config.batch_size)
        logs.append(
            EpochLog(
                epoch=epoch,
                train_loss=sum(step_losses) / len(step_losses),
                eval_loss=eval_loss,
                wall_seconds=time.perf_counter() - started,
            )
        )
        save_model(model, out_dir / f"checkpoint-epoch{epoch}")

    save_model(model, out_dir)
    return model, logs


def export_learning_curve(logs: list[EpochLog], out_dir: str | Path) -> Path:
    """Write learning_curve.csv and learning_curve.png; returns the CSV path."""
    if not logs:
        raise DataError("need at least one epoch log")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = out_dir / "learning_curve.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "eval_loss", "wall_seconds"])
        for log in logs:
            writer.writerow([log.epoch, log.train_loss, log.eval_loss, log.wall_seconds])

    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    epochs = [log.epoch for log in logs]
    ax.plot(epochs, [log.train_loss for log in logs], marker="o", label="train")
    ax.plot(epochs, [log.eval_loss for log in logs], marker="o", label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("Learning curve")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "learning_curve.png", dpi=120)
    return csv_path

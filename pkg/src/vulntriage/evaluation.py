"""Metrics and report artifacts: confusion, F1s, Hamming, ROC/PR, co-occurrence.

Every metric is a pure function over prediction lists. render_artifacts
writes the plot PNGs alongside CSVs holding the exact plotted numbers and
a versioned metrics.json that round-trips through load_metrics.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path

from matplotlib.figure import Figure

from .dataset import LabeledExample
from .errors import DegenerateCurveError, LengthMismatchError
from .model import DualHeadModel, Prediction, decode, forward
from .taxonomy import NUM_SEVERITIES, NUM_TYPES, SEVERITY_NAMES, TypeVector, default_taxonomy

METRICS_SCHEMA_VERSION = 1

# Function words excluded from the misclassified-description frequency table.
STOP_WORDS = frozenset(
    """a about above after again against all also am an and any are as at be
    because been before being below between both but by can could did do does
    doing down during each few for from further had has have having he her
    here hers herself him himself his how i if in into is it its itself just
    may me might more most my myself no nor not now of off on once only or
    other our ours ourselves out over own same she should so some such than
    that the their theirs them themselves then there these they this those
    through to too under until up via was we were what when where which while
    who whom why will with would you your yours yourself yourselves""".split()
)

_WORD_SPLIT = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class SeverityReport:
    confusion: tuple[tuple[int, ...], ...]
    accuracy: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    zero_division: tuple[str, ...] = ()


@dataclass(frozen=True)
class Curve:
    points: tuple[tuple[float, float], ...]
    auc: float | None


@dataclass(frozen=True)
class TypeReport:
    micro_precision: float
    micro_recall: float
    micro_f1: float
    hamming_loss: float
    exact_match_accuracy: float
    per_type_f1: tuple[float, ...]
    roc: tuple[Curve, ...]
    pr: tuple[Curve, ...]
    cooccurrence: tuple[tuple[int, ...], ...]
    degenerate_types: tuple[int, ...] = ()
    zero_division: tuple[str, ...] = ()


@dataclass(frozen=True)
class WordFrequencyTable:
    entries: tuple[tuple[str, int], ...]


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def severity_metrics(true: list[int], pred: list[int]) -> SeverityReport:
    """Confusion matrix (rows=true, cols=predicted) and macro P/R/F1."""
    if len(true) != len(pred) or not true:
        raise LengthMismatchError(
            f"need equal non-empty lists, got {len(true)}/{len(pred)}"
        )
    confusion = [[0] * NUM_SEVERITIES for _ in range(NUM_SEVERITIES)]
    for t, p in zip(true, pred):
        confusion[t][p] += 1

    flags: list[str] = []
    precisions, recalls, f1s = [], [], []
    for c in range(NUM_SEVERITIES):
        col = sum(confusion[r][c] for r in range(NUM_SEVERITIES))
        row = sum(confusion[c])
        if col == 0:
            flags.append(f"precision[{c}]")
        if row == 0:
            flags.append(f"recall[{c}]")
        precision = confusion[c][c] / col if col else 0.0
        recall = confusion[c][c] / row if row else 0.0
        if precision + recall == 0:
            flags.append(f"f1[{c}]")
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(_f1(precision, recall))

    trace = sum(confusion[c][c] for c in range(NUM_SEVERITIES))
    return SeverityReport(
        confusion=tuple(tuple(row) for row in confusion),
        accuracy=trace / len(true),
        per_class_precision=tuple(precisions),
        per_class_recall=tuple(recalls),
        per_class_f1=tuple(f1s),
        macro_precision=sum(precisions) / NUM_SEVERITIES,
        macro_recall=sum(recalls) / NUM_SEVERITIES,
        macro_f1=sum(f1s) / NUM_SEVERITIES,
        zero_division=tuple(flags),
    )


def _trapezoid(points: list[tuple[float, float]]) -> float:
    area = 0.0
    for (x1, y1), (x2, y2) in zip(points, points[1:]):
        area += (x2 - x1) * (y1 + y2) / 2.0
    return area


def roc_points(scores: list[float], labels: list[int]) -> tuple[tuple[tuple[float, float], ...], float]:
    """ROC curve over all distinct score thresholds plus trapezoidal AUC.

    Grouping ties into one sweep step yields diagonal segments, so the
    trapezoid area equals the Mann-Whitney pair statistic with ties at 1/2.
    """
    if len(scores) != len(labels):
        raise LengthMismatchError(f"need equal lists, got {len(scores)}/{len(labels)}")
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateCurveError(
            f"need both classes, got {n_pos} positives / {n_neg} negatives"
        )
    by_score: dict[float, list[int]] = {}
    for s, y in zip(scores, labels):
        by_score.setdefault(s, []).append(y)

    points = [(0.0, 0.0)]
    tp = fp = 0
    for score in sorted(by_score, reverse=True):
        group = by_score[score]
        tp += sum(group)
        fp += len(group) - sum(group)
        points.append((fp / n_neg, tp / n_pos))
    return tuple(points), _trapezoid(points)


def pr_points(scores: list[float], labels: list[int]) -> tuple[tuple[tuple[float, float], ...], float]:
    """Precision-recall curve over all distinct thresholds plus trapezoidal AUC.

    Anchored at (recall 0, precision 1); AUC integrates precision over recall.
    """
    if len(scores) != len(labels):
        raise LengthMismatchError(f"need equal lists, got {len(scores)}/{len(labels)}")
    n_pos = sum(labels)
    if n_pos == 0:
        raise DegenerateCurveError("need at least one positive label")
    by_score: dict[float, list[int]] = {}
    for s, y in zip(scores, labels):
        by_score.setdefault(s, []).append(y)

    points = [(0.0, 1.0)]
    tp = fp = 0
    for score in sorted(by_score, reverse=True):
        group = by_score[score]
        tp += sum(group)
        fp += len(group) - sum(group)
        points.append((tp / n_pos, tp / (tp + fp)))
    return tuple(points), _trapezoid(points)


def type_metrics(
    true: list[TypeVector],
    pred_bits: list[TypeVector],
    pred_probs: list[tuple[float, ...]],
) -> TypeReport:
    """Micro P/R/F1, Hamming, exact match, per-type curves, co-occurrence."""
    if not (len(true) == len(pred_bits) == len(pred_probs)) or not true:
        raise LengthMismatchError(
            f"need equal non-empty lists, got {len(true)}/{len(pred_bits)}/{len(pred_probs)}"
        )
    n = len(true)
    flags: list[str] = []

    tp = fp = fn = mismatches = exact = 0
    for t, p in zip(true, pred_bits):
        if t.bits == p.bits:
            exact += 1
        for tb, pb in zip(t.bits, p.bits):
            if tb and pb:
                tp += 1
            elif pb:
                fp += 1
            elif tb:
                fn += 1
            if tb != pb:
                mismatches += 1

    if tp + fp == 0:
        flags.append("micro_precision")
    if tp + fn == 0:
        flags.append("micro_recall")
    micro_precision = tp / (tp + fp) if tp + fp else 0.0
    micro_recall = tp / (tp + fn) if tp + fn else 0.0

    per_type_f1 = []
    for j in range(NUM_TYPES):
        tpj = sum(1 for t, p in zip(true, pred_bits) if t.bits[j] and p.bits[j])
        fpj = sum(1 for t, p in zip(true, pred_bits) if not t.bits[j] and p.bits[j])
        fnj = sum(1 for t, p in zip(true, pred_bits) if t.bits[j] and not p.bits[j])
        precision = tpj / (tpj + fpj) if tpj + fpj else 0.0
        recall = tpj / (tpj + fnj) if tpj + fnj else 0.0
        if (tpj + fpj == 0) or (tpj + fnj == 0) or (precision + recall == 0):
            flags.append(f"per_type_f1[{j}]")
        per_type_f1.append(_f1(precision, recall))

    roc_curves: list[Curve] = []
    pr_curves: list[Curve] = []
    degenerate: list[int] = []
    for j in range(NUM_TYPES):
        labels = [t.bits[j] for t in true]
        scores = [probs[j] for probs in pred_probs]
        n_pos = sum(labels)
        if n_pos == 0 or n_pos == n:
            degenerate.append(j)
            roc_curves.append(Curve(points=(), auc=None))
        else:
            points, auc = roc_points(scores, labels)
            roc_curves.append(Curve(points=points, auc=auc))
        if n_pos == 0:
            pr_curves.append(Curve(points=(), auc=None))
        else:
            points, auc = pr_points(scores, labels)
            pr_curves.append(Curve(points=points, auc=auc))

    cooccurrence = [[0] * NUM_TYPES for _ in range(NUM_TYPES)]
    for p in pred_bits:
        fired = [j for j in range(NUM_TYPES) if p.bits[j]]
        for i in fired:
            for j in fired:
                cooccurrence[i][j] += 1

    return TypeReport(
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=_f1(micro_precision, micro_recall),
        hamming_loss=mismatches / (n * NUM_TYPES),
        exact_match_accuracy=exact / n,
        per_type_f1=tuple(per_type_f1),
        roc=tuple(roc_curves),
        pr=tuple(pr_curves),
        cooccurrence=tuple(tuple(row) for row in cooccurrence),
        degenerate_types=tuple(degenerate),
        zero_division=tuple(flags),
    )


def misclassified_word_frequencies(
    examples: list[LabeledExample], predictions: list[Prediction], top_k: int = 50
) -> WordFrequencyTable:
    """Word counts over descriptions the model got wrong in either head."""
    if len(examples) != len(predictions):
        raise LengthMismatchError(
            f"need equal lists, got {len(examples)}/{len(predictions)}"
        )
    counts: dict[str, int] = {}
    for example, prediction in zip(examples, predictions):
        wrong = (
            example.severity != prediction.severity
            or example.types.bits != prediction.types.bits
        )
        if not wrong:
            continue
        for token in _WORD_SPLIT.split(example.description.lower()):
            if len(token) >= 3 and token not in STOP_WORDS:
                counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return WordFrequencyTable(entries=tuple(ranked[:top_k]))


def predict_examples(
    model: DualHeadModel,
    examples: list[LabeledExample] | tuple[LabeledExample, ...],
    batch_size: int = 16,
    threshold: float | None = None,
) -> list[Prediction]:
    """Run inference over a partition and decode every output."""
    if threshold is None:
        threshold = model.config.type_threshold
    predictions: list[Prediction] = []
    for start in range(0, len(examples), batch_size):
        batch = [e.tokens for e in examples[start:start + batch_size]]
        for logits in forward(model, batch):
            predictions.append(decode(logits, threshold))
    return predictions


def evaluate_model(
    model: DualHeadModel,
    examples: list[LabeledExample] | tuple[LabeledExample, ...],
    batch_size: int = 16,
    threshold: float | None = None,
    top_k: int = 50,
) -> tuple[SeverityReport, TypeReport, WordFrequencyTable]:
    """Predict a partition and compute every report over it."""
    examples = list(examples)
    predictions = predict_examples(model, examples, batch_size, threshold)
    severity = severity_metrics(
        [e.severity for e in examples], [p.severity for p in predictions]
    )
    types = type_metrics(
        [e.types for e in examples],
        [p.types for p in predictions],
        [p.type_probs for p in predictions],
    )
    words = misclassified_word_frequencies(examples, predictions, top_k)
    return severity, types, words


def _report_to_json(severity: SeverityReport, types: TypeReport, words: WordFrequencyTable) -> dict:
    return {
        "schema_version": METRICS_SCHEMA_VERSION,
        "severity": {
            "confusion": [list(row) for row in severity.confusion],
            "accuracy": severity.accuracy,
            "per_class_precision": list(severity.per_class_precision),
            "per_class_recall": list(severity.per_class_recall),
            "per_class_f1": list(severity.per_class_f1),
            "macro_precision": severity.macro_precision,
            "macro_recall": severity.macro_recall,
            "macro_f1": severity.macro_f1,
            "zero_division": list(severity.zero_division),
        },
        "types": {
            "micro_precision": types.micro_precision,
            "micro_recall": types.micro_recall,
            "micro_f1": types.micro_f1,
            "hamming_loss": types.hamming_loss,
            "exact_match_accuracy": types.exact_match_accuracy,
            "per_type_f1": list(types.per_type_f1),
            "roc": [
                {"points": [list(p) for p in curve.points], "auc": curve.auc}
                for curve in types.roc
            ],
            "pr": [
                {"points": [list(p) for p in curve.points], "auc": curve.auc}
                for curve in types.pr
            ],
            "cooccurrence": [list(row) for row in types.cooccurrence],
            "degenerate_types": list(types.degenerate_types),
            "zero_division": list(types.zero_division),
        },
        "word_frequencies": [[token, count] for token, count in words.entries],
    }


def load_metrics(path: str | Path) -> tuple[SeverityReport, TypeReport, WordFrequencyTable]:
    """Inverse of the metrics.json serialization in render_artifacts."""
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("schema_version") != METRICS_SCHEMA_VERSION:
        raise ValueError(f"unsupported metrics schema {blob.get('schema_version')!r}")
    s = blob["severity"]
    severity = SeverityReport(
        confusion=tuple(tuple(row) for row in s["confusion"]),
        accuracy=s["accuracy"],
        per_class_precision=tuple(s["per_class_precision"]),
        per_class_recall=tuple(s["per_class_recall"]),
        per_class_f1=tuple(s["per_class_f1"]),
        macro_precision=s["macro_precision"],
        macro_recall=s["macro_recall"],
        macro_f1=s["macro_f1"],
        zero_division=tuple(s["zero_division"]),
    )
    t = blob["types"]
    types = TypeReport(
        micro_precision=t["micro_precision"],
        micro_recall=t["micro_recall"],
        micro_f1=t["micro_f1"],
        hamming_loss=t["hamming_loss"],
        exact_match_accuracy=t["exact_match_accuracy"],
        per_type_f1=tuple(t["per_type_f1"]),
        roc=tuple(
            Curve(points=tuple(tuple(p) for p in c["points"]), auc=c["auc"]) for c in t["roc"]
        ),
        pr=tuple(
            Curve(points=tuple(tuple(p) for p in c["points"]), auc=c["auc"]) for c in t["pr"]
        ),
        cooccurrence=tuple(tuple(row) for row in t["cooccurrence"]),
        degenerate_types=tuple(t["degenerate_types"]),
        zero_division=tuple(t["zero_division"]),
    )
    words = WordFrequencyTable(
        entries=tuple((token, count) for token, count in blob["word_frequencies"])
    )
    return severity, types, words


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _heatmap(path: Path, matrix, row_labels, col_labels, title: str, xlabel: str, ylabel: str) -> None:
    fig = Figure(figsize=(7, 6))
    ax = fig.subplots()
    image = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(col_labels)), col_labels, rotation=45, ha="right")
    ax.set_yticks(range(len(row_labels)), row_labels)
    peak = max((max(row) for row in matrix), default=0)
    for i, row in enumerate(matrix):
        for j, value in enumerate(row):
            color = "white" if peak and value > peak / 2 else "black"
            ax.text(j, i, str(value), ha="center", va="center", color=color)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)


def _bar_chart(path: Path, labels, values, title: str, ylabel: str) -> None:
    fig = Figure(figsize=(8, 4.5))
    ax = fig.subplots()
    ax.bar(range(len(labels)), values, color="#3b6ea5")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)


def _curve_chart(path: Path, curves: tuple[Curve, ...], names, title: str,
                 xlabel: str, ylabel: str, diagonal: bool) -> None:
    fig = Figure(figsize=(7, 6))
    ax = fig.subplots()
    for name, curve in zip(names, curves):
        if curve.auc is None:
            continue
        xs = [p[0] for p in curve.points]
        ys = [p[1] for p in curve.points]
        ax.plot(xs, ys, label=f"{name} (AUC {curve.auc:.2f})", linewidth=1.2)
    if diagonal:
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=7, loc="lower right" if diagonal else "lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)


def _wordcloud_chart(path: Path, words: WordFrequencyTable) -> None:
    fig = Figure(figsize=(8, 6))
    ax = fig.subplots()
    ax.set_axis_off()
    entries = words.entries[:40]
    if entries:
        peak = entries[0][1]
        columns = 4
        for k, (token, count) in enumerate(entries):
            row, col = divmod(k, columns)
            size = 8 + 16 * (count / peak)
            ax.text(
                (col + 0.5) / columns,
                1.0 - (row + 0.5) / ((len(entries) + columns - 1) // columns),
                token,
                ha="center",
                va="center",
                fontsize=size,
                transform=ax.transAxes,
            )
    else:
        ax.text(0.5, 0.5, "no misclassifications", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_title("Misclassified description vocabulary")
    fig.savefig(path, dpi=120)


def render_artifacts(
    severity: SeverityReport,
    types: TypeReport,
    words: WordFrequencyTable,
    out_dir: str | Path,
    type_names: tuple[str, ...] | None = None,
) -> list[Path]:
    """Write the 7 report PNGs, their CSV twins, and metrics.json."""
    if type_names is None:
        type_names = default_taxonomy().names
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str) -> Path:
        path = out_dir / name
        written.append(path)
        return path

    _heatmap(
        emit("severity_confusion_matrix.png"),
        [list(row) for row in severity.confusion],
        SEVERITY_NAMES,
        SEVERITY_NAMES,
        "Severity confusion matrix",
        "predicted",
        "true",
    )
    _write_csv(
        emit("severity_confusion_matrix.csv"),
        ["true\\pred", *SEVERITY_NAMES],
        [[SEVERITY_NAMES[i], *severity.confusion[i]] for i in range(NUM_SEVERITIES)],
    )

    _bar_chart(
        emit("severity_f1_bar.png"), SEVERITY_NAMES, severity.per_class_f1,
        "Severity F1 by class", "F1",
    )
    _write_csv(
        emit("severity_f1_bar.csv"), ["class", "f1"],
        [[SEVERITY_NAMES[i], severity.per_class_f1[i]] for i in range(NUM_SEVERITIES)],
    )

    _bar_chart(
        emit("type_f1_bar.png"), type_names, types.per_type_f1,
        "Type F1 by category", "F1",
    )
    _write_csv(
        emit("type_f1_bar.csv"), ["type", "f1"],
        [[type_names[j], types.per_type_f1[j]] for j in range(NUM_TYPES)],
    )

    _curve_chart(
        emit("type_roc.png"), types.roc, type_names,
        "Per-type ROC", "false positive rate", "true positive rate", diagonal=True,
    )
    _write_csv(
        emit("type_roc.csv"), ["type", "fpr", "tpr"],
        [
            [type_names[j], x, y]
            for j in range(NUM_TYPES)
            for x, y in types.roc[j].points
        ],
    )

    _curve_chart(
        emit("type_pr.png"), types.pr, type_names,
        "Per-type precision-recall", "recall", "precision", diagonal=False,
    )
    _write_csv(
        emit("type_pr.csv"), ["type", "recall", "precision"],
        [
            [type_names[j], x, y]
            for j in range(NUM_TYPES)
            for x, y in types.pr[j].points
        ],
    )

    _heatmap(
        emit("type_cooccurrence.png"),
        [list(row) for row in types.cooccurrence],
        type_names,
        type_names,
        "Predicted type co-occurrence",
        "type",
        "type",
    )
    _write_csv(
        emit("type_cooccurrence.csv"),
        ["type", *type_names],
        [[type_names[i], *types.cooccurrence[i]] for i in range(NUM_TYPES)],
    )

    _wordcloud_chart(emit("misclassified_wordcloud.png"), words)
    _write_csv(
        emit("misclassified_wordcloud.csv"), ["token", "count"],
        [[token, count] for token, count in words.entries],
    )

    metrics_path = emit("metrics.json")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(_report_to_json(severity, types, words), fh, indent=2)
    return written

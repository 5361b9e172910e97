"""Estimator facade over the training core: fit/predict on raw text.

X is a sequence of description strings; y is an (n, 11) integer array whose
first column is the severity index 0-3 and whose remaining 10 columns are
the multi-hot type bits in taxonomy order.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .dataset import LabeledExample, stratified_split, tokenize
from .evaluation import predict_examples
from .model import ModelConfig, build_model, load_model, save_model
from .taxonomy import NUM_TYPES, TypeVector, default_taxonomy
from .training import TrainConfig, train


def _check_inputs(X, y=None):
    texts = list(X)
    if not texts:
        raise ValueError("X must contain at least one description")
    for i, text in enumerate(texts):
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"X[{i}] must be a non-empty string")
    if y is None:
        return texts, None
    labels = np.asarray(y)
    if labels.ndim != 2 or labels.shape != (len(texts), 1 + NUM_TYPES):
        raise ValueError(
            f"y must have shape (n_samples, {1 + NUM_TYPES}), got {labels.shape}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("y must be integer-valued")
    if labels[:, 0].min() < 0 or labels[:, 0].max() > 3:
        raise ValueError("y[:, 0] must be severity indices in 0..3")
    if not np.isin(labels[:, 1:], (0, 1)).all():
        raise ValueError("y[:, 1:] must be 0/1 type bits")
    return texts, labels


class VulnerabilityReportClassifier(BaseEstimator, ClassifierMixin):
    """Dual-output text classifier: severity class plus multi-hot types."""

    def __init__(
        self,
        encoder_assets: str = "bert-base-uncased",
        hidden_size: int = 768,
        max_len: int = 128,
        batch_size: int = 16,
        learning_rate: float = 2e-5,
        epochs: int = 3,
        weight_decay: float = 0.01,
        type_threshold: float = 0.5,
        validation_fraction: float = 0.2,
        seed: int = 42,
        device: str = "cpu",
        work_dir: str | None = None,
    ) -> None:
        self.encoder_assets = encoder_assets
        self.hidden_size = hidden_size
        self.max_len = max_len
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weight_decay = weight_decay
        self.type_threshold = type_threshold
        self.validation_fraction = validation_fraction
        self.seed = seed
        self.device = device
        self.work_dir = work_dir

    def _build_examples(self, texts: list[str], labels: np.ndarray) -> list[LabeledExample]:
        return [
            LabeledExample(
                cve_id=f"CVE-0000-{10000 + i}",
                tokens=tokenize(text, self.max_len, self.encoder_assets),
                severity=int(row[0]),
                types=TypeVector(tuple(int(b) for b in row[1:])),
                description=text,
            )
            for i, (text, row) in enumerate(zip(texts, labels))
        ]

    def fit(self, X, y) -> "VulnerabilityReportClassifier":
        texts, labels = _check_inputs(X, y)
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must be in (0,1)")
        examples = self._build_examples(texts, labels)
        split = stratified_split(examples, 1.0 - self.validation_fraction, self.seed)

        config = ModelConfig(
            encoder_name=str(self.encoder_assets),
            hidden_size=self.hidden_size,
            type_threshold=self.type_threshold,
            head_seed=self.seed,
            max_len=self.max_len,
        )
        model = build_model(config, self.encoder_assets)
        train_config = TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            weight_decay=self.weight_decay,
            seed=self.seed,
            max_len=self.max_len,
            device=self.device,
        )
        if self.work_dir is not None:
            model, logs = train(model, split, train_config, self.work_dir)
        else:
            with tempfile.TemporaryDirectory(prefix="vulntriage-fit-") as tmp:
                model, logs = train(model, split, train_config, tmp)

        self.model_ = model
        self.epoch_logs_ = logs
        self.type_names_ = default_taxonomy().names
        self.classes_ = np.arange(4)
        return self

    def _examples_for_inference(self, texts: list[str]) -> list[LabeledExample]:
        source = self.model_.tokenizer_source
        max_len = self.model_.config.max_len
        return [
            LabeledExample(
                cve_id=f"CVE-0000-{10000 + i}",
                tokens=tokenize(text, max_len, source),
                severity=0,
                types=TypeVector.zeros(),
                description=text,
            )
            for i, text in enumerate(texts)
        ]

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        texts, _ = _check_inputs(X)
        examples = self._examples_for_inference(texts)
        predictions = predict_examples(
            self.model_, examples, self.batch_size, self.model_.config.type_threshold
        )
        return np.array(
            [[p.severity, *p.types.bits] for p in predictions], dtype=np.int64
        )

    def predict_proba(self, X) -> np.ndarray:
        """(n, 14) array: 4 severity softmax columns then 10 type sigmoids."""
        self._check_fitted()
        texts, _ = _check_inputs(X)
        examples = self._examples_for_inference(texts)
        predictions = predict_examples(
            self.model_, examples, self.batch_size, self.model_.config.type_threshold
        )
        return np.array(
            [[*p.severity_probs, *p.type_probs] for p in predictions], dtype=np.float64
        )

    def score(self, X, y, sample_weight=None) -> float:
        """Severity accuracy over X."""
        _, labels = _check_inputs(X, y)
        predicted = self.predict(X)
        return float(np.mean(predicted[:, 0] == labels[:, 0]))

    def save(self, out_dir: str | Path) -> Path:
        self._check_fitted()
        return save_model(self.model_, out_dir)

    @classmethod
    def from_saved(cls, model_dir: str | Path) -> "VulnerabilityReportClassifier":
        model = load_model(model_dir)
        est = cls(
            encoder_assets=model.config.encoder_name,
            hidden_size=model.config.hidden_size,
            max_len=model.config.max_len,
            type_threshold=model.config.type_threshold,
            seed=model.config.head_seed,
        )
        est.model_ = model
        est.epoch_logs_ = []
        est.type_names_ = model.taxonomy.names
        est.classes_ = np.arange(4)
        return est

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise RuntimeError("estimator is not fitted; call fit() or from_saved()")


__all__ = ["VulnerabilityReportClassifier"]

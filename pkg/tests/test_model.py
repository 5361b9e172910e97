"""Dual-head model: construction, forward, loss, decoding, persistence."""
import json
import math
import random

import pytest
import torch

from tests.conftest import make_mini_model
from vulntriage.dataset import tokenize
from vulntriage.errors import (
    DimensionError,
    LengthMismatchError,
    ShapeError,
    VersionError,
)
from vulntriage.model import (
    DualLogits,
    ModelConfig,
    build_model,
    combined_loss,
    decode,
    forward,
    load_model,
    save_model,
)
from vulntriage.taxonomy import TypeVector


def direct_loss_oracle(rows, severities, type_bits):
    """Unstabilized textbook formulas, one sample at a time, then batch means."""
    sev_terms, type_terms = [], []
    for (sev_logits, typ_logits), true_class, bits in zip(rows, severities, type_bits):
        exps = [math.exp(v) for v in sev_logits]
        total = sum(exps)
        probs = [e / total for e in exps]
        sev_terms.append(-math.log(probs[true_class]))
        bce = 0.0
        for logit, y in zip(typ_logits, bits):
            sig = 1.0 / (1.0 + math.exp(-logit))
            bce += -(y * math.log(sig) + (1 - y) * math.log(1 - sig))
        type_terms.append(bce / 10.0)
    severity_loss = sum(sev_terms) / len(sev_terms)
    type_loss = sum(type_terms) / len(type_terms)
    return severity_loss, type_loss, severity_loss + type_loss


def random_batch(rng, size):
    logits, severities, types = [], [], []
    for _ in range(size):
        sev = tuple(rng.uniform(-6, 6) for _ in range(4))
        typ = tuple(rng.uniform(-6, 6) for _ in range(10))
        logits.append(DualLogits(sev, typ))
        severities.append(rng.randrange(4))
        types.append(TypeVector(tuple(rng.randint(0, 1) for _ in range(10))))
    return logits, severities, types


class TestBuildModel:
    def test_emits_14_logits(self, mini_model, mini_encoder_dir):
        tokens = tokenize("buffer overflow", 48, mini_encoder_dir)
        out = forward(mini_model, [tokens])
        assert len(out) == 1
        assert len(out[0].severity_logits) + len(out[0].type_logits) == 14

    def test_hidden_size_mismatch(self, mini_encoder_dir):
        config = ModelConfig(encoder_name=str(mini_encoder_dir), hidden_size=768)
        with pytest.raises(DimensionError):
            build_model(config, mini_encoder_dir)

    def test_same_seed_same_head(self, mini_encoder_dir):
        a = make_mini_model(mini_encoder_dir, head_seed=11)
        b = make_mini_model(mini_encoder_dir, head_seed=11)
        assert torch.equal(a.head.weight, b.head.weight)
        assert torch.equal(a.head.bias, b.head.bias)

    def test_different_seed_different_head(self, mini_encoder_dir):
        a = make_mini_model(mini_encoder_dir, head_seed=11)
        b = make_mini_model(mini_encoder_dir, head_seed=12)
        assert not torch.equal(a.head.weight, b.head.weight)

    def test_threshold_domain(self):
        with pytest.raises(ValueError):
            ModelConfig(type_threshold=0.0)
        with pytest.raises(ValueError):
            ModelConfig(type_threshold=1.0)

    def test_frozen_head_widths(self):
        with pytest.raises(ValueError):
            ModelConfig(num_severity=5)
        with pytest.raises(ValueError):
            ModelConfig(num_types=9)


class TestForward:
    def test_batch_of_16(self, mini_model, mini_encoder_dir):
        tokens = [
            tokenize(f"denial of service number {i}", 48, mini_encoder_dir)
            for i in range(16)
        ]
        out = forward(mini_model, tokens)
        assert len(out) == 16

    def test_batch_independence(self, mini_model, mini_encoder_dir):
        texts = [f"privilege escalation case {i}" for i in range(16)]
        tokens = [tokenize(t, 48, mini_encoder_dir) for t in texts]
        batched = forward(mini_model, tokens)
        single = forward(mini_model, [tokens[7]])[0]
        for a, b in zip(
            (*single.severity_logits, *single.type_logits),
            (*batched[7].severity_logits, *batched[7].type_logits),
        ):
            assert abs(a - b) < 1e-5

    def test_empty_batch(self, mini_model):
        with pytest.raises(ShapeError):
            forward(mini_model, [])

    def test_mixed_lengths(self, mini_model, mini_encoder_dir):
        a = tokenize("one", 16, mini_encoder_dir)
        b = tokenize("two", 32, mini_encoder_dir)
        with pytest.raises(ShapeError):
            forward(mini_model, [a, b])

    def test_deterministic_in_inference(self, mini_model, mini_encoder_dir):
        tokens = tokenize("clickjacking on the payment page", 48, mini_encoder_dir)
        assert forward(mini_model, [tokens]) == forward(mini_model, [tokens])


class TestCombinedLoss:
    def test_uniform_softmax_gives_ln4(self):
        logits = [DualLogits((0.5, 0.5, 0.5, 0.5), (0.0,) * 10)]
        out = combined_loss(logits, [2], [TypeVector.zeros()])
        assert out.severity_loss == pytest.approx(math.log(4), abs=1e-12)

    def test_zero_logits_all_zero_bits_gives_ln2(self):
        logits = [DualLogits((0.0, 1.0, 2.0, 3.0), (0.0,) * 10)]
        out = combined_loss(logits, [3], [TypeVector.zeros()])
        assert out.type_loss == pytest.approx(math.log(2), abs=1e-12)

    def test_total_is_exact_sum(self):
        rng = random.Random(5)
        logits, severities, types = random_batch(rng, 6)
        out = combined_loss(logits, severities, types)
        assert out.total == out.severity_loss + out.type_loss

    def test_matches_direct_oracle(self):
        rng = random.Random(17)
        for _ in range(25):
            size = rng.randint(1, 16)
            logits, severities, types = random_batch(rng, size)
            out = combined_loss(logits, severities, types)
            rows = [(dl.severity_logits, dl.type_logits) for dl in logits]
            bits = [tv.bits for tv in types]
            sev, typ, total = direct_loss_oracle(rows, severities, bits)
            assert out.severity_loss == pytest.approx(sev, abs=1e-6)
            assert out.type_loss == pytest.approx(typ, abs=1e-6)
            assert out.total == pytest.approx(total, abs=1e-6)

    def test_length_mismatch(self):
        logits, severities, types = random_batch(random.Random(1), 4)
        with pytest.raises(LengthMismatchError):
            combined_loss(logits, severities[:3], types)
        with pytest.raises(LengthMismatchError):
            combined_loss([], [], [])

    def test_type_loss_invariant_under_label_permutation(self):
        rng = random.Random(23)
        logits, severities, types = random_batch(rng, 8)
        perm = list(range(10))
        rng.shuffle(perm)
        permuted_logits = [
            DualLogits(dl.severity_logits, tuple(dl.type_logits[p] for p in perm))
            for dl in logits
        ]
        permuted_types = [
            TypeVector(tuple(tv.bits[p] for p in perm)) for tv in types
        ]
        a = combined_loss(logits, severities, types)
        b = combined_loss(permuted_logits, severities, permuted_types)
        assert a.type_loss == pytest.approx(b.type_loss, abs=1e-12)

    def test_non_negative(self):
        rng = random.Random(31)
        for _ in range(10):
            logits, severities, types = random_batch(rng, rng.randint(1, 8))
            out = combined_loss(logits, severities, types)
            assert out.severity_loss >= 0
            assert out.type_loss >= 0


class TestDecode:
    def test_dominant_logit(self):
        pred = decode(DualLogits((0.0, 0.0, 0.0, 10.0), (0.0,) * 10))
        assert pred.severity == 3
        assert pred.severity_probs[3] > 0.999

    def test_all_negative_types_fire_nothing(self):
        pred = decode(DualLogits((1.0, 0.0, 0.0, 0.0), (-10.0,) * 10), 0.5)
        assert pred.types == TypeVector.zeros()

    def test_tie_breaks_low(self):
        pred = decode(DualLogits((0.3, 0.3, 0.3, 0.3), (0.0,) * 10))
        assert pred.severity == 0
        for p in pred.severity_probs:
            assert p == pytest.approx(0.25, abs=1e-12)

    def test_softmax_sums_to_one(self):
        rng = random.Random(3)
        for _ in range(50):
            sev = tuple(rng.uniform(-30, 30) for _ in range(4))
            pred = decode(DualLogits(sev, (0.0,) * 10))
            assert sum(pred.severity_probs) == pytest.approx(1.0, abs=1e-6)

    def test_shift_invariance(self):
        base = (1.0, -2.0, 0.5, 3.0)
        shifted = tuple(v + 100.0 for v in base)
        a = decode(DualLogits(base, (0.0,) * 10))
        b = decode(DualLogits(shifted, (0.0,) * 10))
        assert a.severity == b.severity

    def test_extreme_logits_stay_finite(self):
        pred = decode(DualLogits((800.0, -800.0, 0.0, 0.0), (750.0, -750.0) + (0.0,) * 8))
        assert sum(pred.severity_probs) == pytest.approx(1.0, abs=1e-6)
        assert pred.type_probs[0] == pytest.approx(1.0, abs=1e-9)
        assert pred.type_probs[1] == pytest.approx(0.0, abs=1e-9)

    def test_threshold_boundary_inclusive(self):
        # sigmoid(0) = 0.5 exactly; the bit fires at threshold 0.5.
        pred = decode(DualLogits((1.0, 0.0, 0.0, 0.0), (0.0,) * 10), 0.5)
        assert pred.types.bits == (1,) * 10

    def test_threshold_respected(self):
        rng = random.Random(9)
        for _ in range(50):
            typ = tuple(rng.uniform(-4, 4) for _ in range(10))
            threshold = rng.uniform(0.05, 0.95)
            pred = decode(DualLogits((0.0, 0.0, 0.0, 0.0), typ), threshold)
            for bit, prob in zip(pred.types.bits, pred.type_probs):
                assert bit == (1 if prob >= threshold else 0)


class TestSaveLoad:
    def test_round_trip_logits(self, tmp_path, mini_model, mini_encoder_dir):
        tokens = [
            tokenize(f"information disclosure case {i}", 48, mini_encoder_dir)
            for i in range(4)
        ]
        before = forward(mini_model, tokens)
        save_model(mini_model, tmp_path / "model")
        loaded = load_model(tmp_path / "model")
        after = forward(loaded, tokens)
        for a, b in zip(before, after):
            for x, y in zip(
                (*a.severity_logits, *a.type_logits), (*b.severity_logits, *b.type_logits)
            ):
                assert abs(x - y) < 1e-6

    def test_manifest_lists_ten_names(self, saved_model_dir):
        manifest = json.loads((saved_model_dir / "config.json").read_text())
        assert len(manifest["taxonomy_names"]) == 10
        assert manifest["schema_version"] == 1
        assert manifest["model_version"]

    def test_load_empty_dir(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "nothing-here")

    def test_schema_mismatch(self, tmp_path, mini_model):
        save_model(mini_model, tmp_path / "model")
        config_path = tmp_path / "model" / "config.json"
        manifest = json.loads(config_path.read_text())
        manifest["schema_version"] = 99
        config_path.write_text(json.dumps(manifest))
        with pytest.raises(VersionError):
            load_model(tmp_path / "model")

    def test_version_survives_round_trip(self, saved_model_dir, mini_model):
        loaded = load_model(saved_model_dir)
        assert loaded.version == mini_model.version

"""Transformer encoder, scenario losses, metrics, and checkpointing."""

import math

import numpy as np
import pytest

from sketchrec.core import Parameter, Tensor, backward
from sketchrec.core.gradcheck import check_gradients
from sketchrec.data import LabelSpace, Sketch, Stroke
from sketchrec.metrics import acc_at_1, c_metric
from sketchrec.model import DIMS_PRESETS, ModelDims, SketchRecognizer, ScenarioConfig
from sketchrec.synthetic import SynthSpec, synthesize_dataset
from sketchrec.transformer import PRESETS, TransformerParams, encode


@pytest.fixture
def tparams(rng):
    return TransformerParams(d=8, n_layers=2, n_heads=2, max_tokens=10, rng=rng)


class TestEncode:
    def test_output_shapes(self, tparams, rng):
        class_out, token_outs = encode(Tensor(rng.normal(size=(5, 8))), None, tparams)
        assert class_out.shape == (8,)
        assert token_outs.shape == (5, 8)

    def test_too_many_tokens_rejected(self, tparams, rng):
        with pytest.raises(ValueError, match="tokens"):
            encode(Tensor(rng.normal(size=(11, 8))), None, tparams)

    def test_masked_padding_changes_nothing(self, tparams, rng):
        tokens = rng.normal(size=(4, 8))
        base_class, base_tokens = encode(Tensor(tokens), None, tparams)
        padded = np.concatenate([tokens, rng.normal(size=(3, 8))], axis=0)
        mask = np.array([True] * 4 + [False] * 3)
        pad_class, pad_tokens = encode(Tensor(padded), mask, tparams)
        np.testing.assert_allclose(pad_class.data, base_class.data, atol=1e-9)
        np.testing.assert_allclose(pad_tokens.data[:4], base_tokens.data, atol=1e-9)

    def test_fully_masked_equals_empty_run(self, tparams, rng):
        # with every token masked the class output must match a run with
        # no tokens at all: only the class-token path remains
        empty_class, _ = encode(Tensor(np.zeros((0, 8))), np.zeros(0, bool), tparams)
        masked_class, _ = encode(
            Tensor(rng.normal(size=(6, 8))), np.zeros(6, bool), tparams
        )
        np.testing.assert_allclose(masked_class.data, empty_class.data, atol=1e-9)

    def test_vit_base_preset_dims(self):
        assert PRESETS["full"].d == 768
        assert PRESETS["full"].n_layers == 12
        assert PRESETS["full"].n_heads == 12
        assert DIMS_PRESETS["full"].d == 768

    def test_gradcheck(self, rng):
        tp = TransformerParams(d=4, n_layers=1, n_heads=2, max_tokens=5, rng=rng)
        x = Parameter(rng.normal(size=(3, 4)), "x")

        def f():
            class_out, token_outs = encode(x, None, tp)
            return (class_out ** 2).sum() + (token_outs ** 2).mean()

        assert check_gradients(f, [x] + list(tp.parameters())) <= 1e-4


def _desk_model(scenario="labels_full", **kwargs) -> SketchRecognizer:
    spec = SynthSpec(n_categories=3, n_components=6, samples_per_category=2)
    train, _ = synthesize_dataset(spec, seed=1)
    dims = ModelDims(d=16, n_layers=1, n_heads=2, memory_heads=2)
    model = SketchRecognizer(train.label_space, dims,
                     ScenarioConfig(scenario, **kwargs), seed=5)
    return model, train


class TestScenarioLosses:
    def test_uniform_logits_hand_values(self):
        model, train = _desk_model()
        # zero heads give uniform logits: L4 = ln(n_categories), L5 = ln(K)
        model.cat_w.data[:] = 0.0
        model.cat_b.data[:] = 0.0
        model.seg_w.data[:] = 0.0
        model.seg_b.data[:] = 0.0
        sk = train.samples[0]
        parts = model.sketch_losses(sk, model.forward(sk))
        assert parts["L4"].item() == pytest.approx(math.log(3), abs=1e-12)
        assert parts["L5"].item() == pytest.approx(math.log(6), abs=1e-12)

    def test_toy_hand_computed_ce_sum(self, rng):
        # 2 categories, 2 components, single-stroke sketch with pinned
        # logits: L4 + lambda_s * L5 with hand-computed CE values
        from sketchrec.core import cross_entropy

        cat_logits = Tensor(np.array([[1.0, -1.0]]))
        seg_logits = Tensor(np.array([[0.5, 0.0]]))
        l4 = cross_entropy(cat_logits, [0]).item()
        l5 = cross_entropy(seg_logits, [1]).item()
        assert l4 == pytest.approx(math.log(1 + math.exp(-2.0)), abs=1e-12)
        assert l5 == pytest.approx(math.log(1 + math.exp(0.5)), abs=1e-12)
        assert l4 + 10.0 * l5 == pytest.approx(
            math.log(1 + math.exp(-2.0)) + 10 * math.log(1 + math.exp(0.5)), abs=1e-12
        )

    def test_labels_full_requires_stroke_components(self):
        model, train = _desk_model()
        sk = train.samples[0]
        bare = Sketch(sk.strokes, sk.category, None)
        with pytest.raises(ValueError, match="stroke_components"):
            model.sketch_losses(bare, model.forward(bare))

    def test_prior_info_parts(self):
        model, train = _desk_model(scenario="prior_info")
        sk = train.samples[0]
        parts = model.sketch_losses(sk, model.forward(sk))
        assert set(parts) == {"L4", "L6"}

    def test_balanced_bce_hand_value(self):
        # y_e = [1,1,0,0] with logits [2,2,-2,-2]: every term is
        # ln(sigmoid(2)) weighted 0.5 -> loss = -0.5 ln(sigmoid(2))
        from sketchrec.core import balanced_binary_ce

        probs = Tensor(np.array([2.0, 2.0, -2.0, -2.0])).sigmoid()
        y = np.array([1.0, 1.0, 0.0, 0.0])
        expected = -0.5 * math.log(1.0 / (1.0 + math.exp(-2.0)))
        assert balanced_binary_ce(probs, y).item() == pytest.approx(expected, abs=1e-12)

    def test_balanced_bce_all_ones_degenerates_to_plain(self):
        from sketchrec.core import balanced_binary_ce

        probs = Tensor(np.array([0.9, 0.8]))
        y = np.ones(2)
        expected = -(math.log(0.9) + math.log(0.8)) / 2.0
        assert balanced_binary_ce(probs, y).item() == pytest.approx(expected, abs=1e-12)

    def test_perfect_predictions_drive_l6_to_zero(self):
        from sketchrec.core import balanced_binary_ce

        probs = Tensor(np.array([50.0, -50.0, 50.0])).sigmoid()
        y = np.array([1.0, 0.0, 1.0])
        assert balanced_binary_ce(probs, y).item() < 1e-9

    def test_category_only_drops_all_but_l1_l4(self):
        model, train = _desk_model(scenario="category_only")
        sk = train.samples[0]
        parts = model.sketch_losses(sk, model.forward(sk))
        assert set(parts) == {"L4"}
        parts["L1"] = model.key_loss()
        total = model.total_loss(parts)
        assert total.item() == pytest.approx(
            parts["L1"].item() + parts["L4"].item(), abs=1e-12
        )

    def test_total_loss_weighting(self):
        model, _ = _desk_model()
        parts = {
            "L1": Tensor(1.0), "L2": Tensor(1.0), "L4": Tensor(1.0), "L5": Tensor(1.0)
        }
        # unit parts, labels_full: 1*1 + 20*1 + (1 + 10*1) = 32
        assert model.total_loss(parts).item() == pytest.approx(32.0, abs=1e-12)

    def test_scenario_path_constraints(self):
        ls = LabelSpace(["a"], ["x"], np.array([[1]]))
        with pytest.raises(ValueError):
            ScenarioConfig("labels_full", token_path="component")
        with pytest.raises(ValueError):
            ScenarioConfig("prior_info", token_path="stroke")
        with pytest.raises(ValueError):
            ScenarioConfig("mystery")
        _ = ls


class TestMetrics:
    def test_all_correct(self):
        assert acc_at_1([1, 0, 2], [1, 0, 2]) == 1.0

    def test_three_of_four(self):
        assert acc_at_1([1, 0, 2, 2], [1, 0, 2, 1]) == 0.75

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            acc_at_1([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            acc_at_1([1], [1, 2])
        with pytest.raises(ValueError):
            c_metric([[1, 2]], [[1]])

    def test_c_metric_all_correct(self):
        assert c_metric([[0, 1], [2]], [[0, 1], [2]]) == 1.0

    def test_c_metric_nine_of_ten(self):
        preds = [[0, 1, 2, 3, 4], [5, 6, 7, 8, 0]]
        labels = [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]
        assert c_metric(preds, labels) == 0.9

    def test_argmax_shift_invariance(self, rng):
        logits = rng.normal(size=7)
        assert np.argmax(logits) == np.argmax(logits + 42.0)


class TestCheckpoint:
    def test_round_trip_bit_identical_predictions(self, tmp_path):
        model, train = _desk_model()
        path = tmp_path / "m.ckpt"
        model.save(path)
        clone = SketchRecognizer.load(path)
        for sk in train.samples[:3]:
            a = model.forward(sk)
            b = clone.forward(sk)
            np.testing.assert_array_equal(
                a.category_logits.data, b.category_logits.data
            )
            np.testing.assert_array_equal(a.assignment.C.data, b.assignment.C.data)

    def test_config_echo_and_label_space(self, tmp_path):
        model, _ = _desk_model(scenario="prior_info")
        path = tmp_path / "m.ckpt"
        model.save(path)
        clone = SketchRecognizer.load(path)
        assert clone.scenario.scenario == "prior_info"
        assert clone.dims.d == model.dims.d
        assert clone.label_space.to_dict() == model.label_space.to_dict()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(ValueError, match="not a checkpoint"):
            SketchRecognizer.load(path)


class TestPredict:
    def test_prediction_fields_labels_full(self):
        model, train = _desk_model()
        pred = model.predict(train.samples[0])
        assert {"categories", "assignment", "stroke_components", "explanation"} <= set(pred)
        probs = [c["p"] for c in pred["categories"]]
        assert all(0.0 <= p <= 1.0 for p in probs)
        assert len(pred["stroke_components"]) == len(train.samples[0])
        rows = np.array(pred["assignment"])
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-9)

    def test_prediction_fields_prior_info(self):
        model, train = _desk_model(scenario="prior_info")
        pred = model.predict(train.samples[0])
        assert "existence" in pred
        assert "stroke_components" not in pred
        assert len(pred["existence"]) == model.label_space.n_components

    def test_category_probabilities_sum_to_one(self):
        model, train = _desk_model(scenario="category_only")
        pred = model.predict(train.samples[0], top_k=model.label_space.n_categories)
        assert sum(c["p"] for c in pred["categories"]) == pytest.approx(1.0, abs=1e-6)

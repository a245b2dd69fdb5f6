"""HTTP recognition service contract."""

import json
import urllib.error
import urllib.request

import numpy as np
import pytest

from sketchrec.service import parse_recognize_request, start_background, BadRequest
from sketchrec.synthetic import SynthSpec, synthesize_dataset
from sketchrec.training import RunConfig, train


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    spec = SynthSpec(n_categories=3, n_components=6, samples_per_category=4,
                     test_samples_per_category=2)
    tr, te = synthesize_dataset(spec, seed=21)
    cfg = RunConfig(epochs=2, batch_size=6, out_dir=str(tmp))
    res = train(cfg, train_set=tr, test_set=te, quiet=True)
    server, base = start_background(res.checkpoint_path)
    yield base, tr
    server.shutdown()


def _post(base, payload: dict) -> dict:
    body = json.dumps(payload).encode()
    req = urllib.request.Request(
        base + "/recognize", data=body,
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def _sketch_payload(sketch, scale=1.0):
    return {"strokes": [(s.points * scale).tolist() for s in sketch.strokes]}


class TestEndpoints:
    def test_healthz(self, served):
        base, _ = served
        with urllib.request.urlopen(base + "/healthz") as resp:
            assert json.loads(resp.read()) == {"status": "ok"}

    def test_model_info(self, served):
        base, tr = served
        with urllib.request.urlopen(base + "/model") as resp:
            info = json.loads(resp.read())
        assert info["scenario"] == "labels_full"
        assert info["label_space"]["categories"] == tr.label_space.category_names
        assert len(info["checkpoint_sha256"]) == 64
        assert info["dims"]["d"] == 64

    def test_recognize_schema(self, served):
        base, tr = served
        out = _post(base, _sketch_payload(tr.samples[0]))
        assert set(out) >= {"categories", "assignment", "explanation",
                            "stroke_components"}
        assert len(out["stroke_components"]) == len(tr.samples[0])
        probs = [c["p"] for c in out["categories"]]
        assert all(0.0 <= p <= 1.0 for p in probs)
        assert sum(probs) == pytest.approx(1.0, abs=1e-6)
        assert probs == sorted(probs, reverse=True)
        rows = np.array(out["assignment"])
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-6)

    def test_single_stroke_single_component_entry(self, served):
        base, _ = served
        out = _post(base, {"strokes": [[[0, 0], [10, 10], [20, 5]]]})
        assert len(out["stroke_components"]) == 1

    def test_repeated_calls_identical(self, served):
        base, tr = served
        payload = _sketch_payload(tr.samples[1])
        assert _post(base, payload) == _post(base, payload)

    def test_scale_invariance(self, served):
        base, tr = served
        a = _post(base, _sketch_payload(tr.samples[2], scale=1.0))
        b = _post(base, _sketch_payload(tr.samples[2], scale=1000.0))
        assert a == b


class TestErrors:
    def _expect_status(self, base, body: bytes, status: int):
        req = urllib.request.Request(base + "/recognize", data=body)
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(req)
        assert err.value.code == status

    def test_malformed_body_400(self, served):
        base, _ = served
        self._expect_status(base, b"this is not json", 400)

    def test_empty_strokes_422(self, served):
        base, _ = served
        self._expect_status(base, b'{"strokes": []}', 422)

    def test_too_many_strokes_422(self, served):
        base, _ = served
        strokes = [[[0, 0], [1, 1]]] * 65  # max_strokes = 64
        self._expect_status(base, json.dumps({"strokes": strokes}).encode(), 422)

    def test_bad_stroke_shape_422(self, served):
        base, _ = served
        self._expect_status(base, b'{"strokes": [[[0, 1, 2]]]}', 422)

    def test_unknown_route_404(self, served):
        base, _ = served
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(base + "/nope")
        assert err.value.code == 404


def test_parse_request_unit():
    sk = parse_recognize_request(
        json.dumps({"strokes": [[[0, 0], [2, 3]]]}).encode(), max_strokes=4
    )
    assert len(sk) == 1
    with pytest.raises(BadRequest) as err:
        parse_recognize_request(b'{"nope": 1}', max_strokes=4)
    assert err.value.status == 400

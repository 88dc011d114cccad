import json

import numpy as np
import pytest

from ordinal_clm.bundle import ModelBundle
from ordinal_clm.exceptions import DomainError, UnsupportedRuleError
from ordinal_clm.trainer import TrainingConfig, build_model


@pytest.mark.parametrize("link", ["logit", "probit", "cloglog", "nominal"])
def test_round_trip_bit_exact(link, rng, tmp_path):
    model = build_model(TrainingConfig(link=link, hidden=(6, 5)), 4, 5, rng)
    for a in model.backbone.arrays():
        a[...] = rng.normal(size=a.shape) * 10.0 ** rng.integers(-8, 8, a.shape)
    if model.clm is not None:
        model.clm.b1 = 0.1
        model.clm.alpha = rng.normal(size=3)
        model.clm.tau = 1 / 3
    model.save(tmp_path / "m.json")
    back = ModelBundle.load(tmp_path / "m.json")
    for a, b in zip(model.backbone.arrays(), back.backbone.arrays()):
        assert a.tobytes() == b.tobytes()
    if model.clm is not None:
        assert back.clm.b1 == 0.1 and back.clm.tau == 1 / 3
        assert back.clm.alpha.tobytes() == model.clm.alpha.tobytes()
    assert back.dumps() == model.dumps()
    x = rng.normal(size=(7, 4))
    assert back.predict_proba(x).tobytes() == model.predict_proba(x).tobytes()


def test_document_schema(rng):
    doc = json.loads(build_model(TrainingConfig(hidden=(2,)), 3, 3, rng).dumps())
    assert doc["format_version"] == 1
    assert doc["link"] == "logit"
    assert set(doc["clm"]) == {"b1", "alpha", "tau"}
    assert doc["clm"]["tau"] == (1.0).hex()


def test_rejects_unknown_version(rng):
    doc = build_model(TrainingConfig(hidden=(2,)), 3, 3, rng).to_dict()
    doc["format_version"] = 99
    with pytest.raises(DomainError):
        ModelBundle.from_dict(doc)


def test_prediction_rules(rng):
    clm = build_model(TrainingConfig(hidden=(4,)), 2, 3, rng)
    x = rng.normal(size=(10, 2))
    probs = clm.predict_proba(x)
    np.testing.assert_allclose(probs.sum(axis=1), 1, atol=1e-12)
    np.testing.assert_array_equal(clm.predict(x, "argmax"), np.argmax(probs, axis=1))
    assert clm.predict(x, "interval").shape == (10,)
    nominal = build_model(TrainingConfig(link="nominal", hidden=(4,)), 2, 3, rng)
    with pytest.raises(UnsupportedRuleError):
        nominal.predict(x, "interval")
    with pytest.raises(DomainError):
        clm.predict(np.zeros((1, 3)))

"""The serializable model: backbone + head + link + config snapshot.

Real parameters are written as hexadecimal float strings so that
save -> load -> save is byte-identical.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .backbone import BackboneParams, BackboneSpec, backbone_forward
from .clm_head import ClmParameters, LinkFunction, clm_forward, predict_interval
from .exceptions import DomainError, UnsupportedRuleError
from .losses import softmax

FORMAT_VERSION = 1
NOMINAL = "nominal"


def _encode_array(a):
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "hex": [float(v).hex() for v in a.ravel()]}


def _decode_array(obj):
    vals = np.array([float.fromhex(h) for h in obj["hex"]], dtype=float)
    return vals.reshape(obj["shape"])


def parse_link(value):
    """``"nominal"`` or a :class:`LinkFunction`."""
    if str(value).lower() == NOMINAL:
        return NOMINAL
    return LinkFunction.parse(value)


@dataclass
class ModelBundle:
    q_classes: int
    link: object  # LinkFunction or "nominal"
    backbone_spec: BackboneSpec
    backbone: BackboneParams
    clm: ClmParameters = None
    config: dict = field(default_factory=dict)
    seed: int = 0
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.link = parse_link(self.link)
        if self.nominal:
            if self.backbone_spec.output_dim != self.q_classes:
                raise DomainError("nominal backbone must output one logit per class")
        else:
            if self.clm is None or self.clm.q_classes != self.q_classes:
                raise DomainError("ordinal model needs CLM parameters for q_classes")
            if self.backbone_spec.output_dim != 1:
                raise DomainError("ordinal backbone must output a single projection")

    @property
    def nominal(self):
        return self.link == NOMINAL

    @property
    def link_name(self):
        return NOMINAL if self.nominal else self.link.value

    def copy(self):
        return ModelBundle(self.q_classes, self.link, self.backbone_spec, self.backbone.copy(),
                           None if self.clm is None else self.clm.copy(), dict(self.config),
                           self.seed, dict(self.metadata), self.format_version)

    def _check_input(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.backbone_spec.input_dim:
            raise DomainError(f"model expects {self.backbone_spec.input_dim} features, got {x.shape[1]}")
        return x

    def latent(self, x):
        """Latent projections ``l(x)``, shape ``(N,)`` (ordinal models only)."""
        if self.nominal:
            raise UnsupportedRuleError("nominal models have no latent projection")
        out, _ = backbone_forward(self.backbone, self._check_input(x))
        return out[:, 0]

    def predict_proba(self, x):
        x = self._check_input(x)
        out, _ = backbone_forward(self.backbone, x)
        if self.nominal:
            return softmax(out)
        return clm_forward(self.clm, self.link, out[:, 0]).probs

    def predict(self, x, decision="interval"):
        if decision == "interval":
            if self.nominal:
                raise UnsupportedRuleError("the interval rule needs an ordinal (CLM) model")
            return np.atleast_1d(predict_interval(self.clm, self.latent(x)))
        if decision == "argmax":
            return np.argmax(self.predict_proba(x), axis=1)
        raise DomainError(f"unknown decision rule {decision!r}")

    def default_decision(self):
        return "argmax" if self.nominal else "interval"

    def to_dict(self):
        doc = {
            "format_version": self.format_version,
            "q_classes": self.q_classes,
            "link": self.link_name,
            "backbone": {
                "spec": self.backbone_spec.to_dict(),
                "weights": [_encode_array(W) for W in self.backbone.weights],
                "biases": [_encode_array(b) for b in self.backbone.biases],
            },
            "clm": None,
            "config": self.config,
            "seed": self.seed,
            "metadata": self.metadata,
        }
        if self.clm is not None:
            doc["clm"] = {"b1": self.clm.b1.hex(), "alpha": _encode_array(self.clm.alpha),
                          "tau": self.clm.tau.hex()}
        return doc

    @classmethod
    def from_dict(cls, doc):
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise DomainError(f"unsupported model format_version {version!r}")
        bb = doc["backbone"]
        spec = BackboneSpec(**bb["spec"])
        params = BackboneParams([_decode_array(w) for w in bb["weights"]],
                                [_decode_array(b) for b in bb["biases"]])
        clm = None
        if doc.get("clm") is not None:
            c = doc["clm"]
            clm = ClmParameters(float.fromhex(c["b1"]), _decode_array(c["alpha"]),
                                float.fromhex(c["tau"]))
        return cls(doc["q_classes"], doc["link"], spec, params, clm, doc.get("config", {}),
                   doc.get("seed", 0), doc.get("metadata", {}), version)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def default_metadata():
    return {"library": "ordinal_clm", "version": __version__}

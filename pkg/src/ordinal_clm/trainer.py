"""Mini-batch training loop with validation-QWK checkpointing."""

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .backbone import BackboneSpec, backbone_backward, backbone_forward, init_backbone
from .bundle import NOMINAL, ModelBundle, default_metadata, parse_link
from .clm_head import TAU_MIN, ClmParameters, clm_forward, clm_gradients
from .data import balance_oversample
from .exceptions import ConfigError, DivergenceError, DomainError
from .losses import qwk_c_gradient, qwk_c_loss, softmax_cross_entropy
from .metrics import evaluate_all
from .optimizer import AdamState, LrSchedule, adam_step, lr_at

log = logging.getLogger(__name__)


@dataclass
class TrainingConfig:
    link: str = "logit"
    eta0: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 100
    seed: int = 0
    balance: bool = False
    hidden: tuple = (32, 32)

    def __post_init__(self):
        link = parse_link(self.link)
        self.link = link if link == NOMINAL else link.value
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if not self.eta0 > 0:
            raise ConfigError("eta0 must be positive")
        if self.link != NOMINAL and self.batch_size == 1:
            raise ConfigError("the QWK_c loss is batch-global; batch_size must be >= 2 for CLM models")

    @property
    def nominal(self):
        return self.link == NOMINAL

    def to_dict(self):
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)
    best_epoch: int = -1
    diverged: bool = False
    total_steps: int = 0

    def best_record(self):
        return self.records[self.best_epoch] if self.best_epoch >= 0 else None

    def to_jsonl(self, include_timing=False):
        """One JSON object per epoch plus a closing summary line.

        Wall-clock times are left out unless requested so that identical
        runs give identical files.
        """
        lines = []
        for rec in self.records:
            rec = dict(rec)
            if not include_timing:
                rec.pop("wall_time", None)
            for k, v in rec.items():
                if isinstance(v, float) and not math.isfinite(v):
                    rec[k] = None
            lines.append(json.dumps({"event": "epoch", **rec}, sort_keys=True))
        lines.append(json.dumps({"event": "summary", "best_epoch": self.best_epoch,
                                 "diverged": self.diverged, "total_steps": self.total_steps},
                                sort_keys=True))
        return "\n".join(lines) + "\n"

    def save(self, path, include_timing=False):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl(include_timing))


def build_model(config, n_features, q_classes, rng):
    out_dim = q_classes if config.nominal else 1
    spec = BackboneSpec(n_features, config.hidden, out_dim)
    backbone = init_backbone(spec, rng)
    clm = None if config.nominal else ClmParameters.initial(q_classes)
    return ModelBundle(q_classes, config.link, spec, backbone, clm, config.to_dict(),
                       config.seed, default_metadata())


def parameter_arrays(model):
    arrays = model.backbone.arrays()
    if not model.nominal:
        arrays += [np.array([model.clm.b1]), model.clm.alpha, np.array([model.clm.tau])]
    return arrays


def flatten_parameters(model):
    return np.concatenate([a.ravel() for a in parameter_arrays(model)])


def assign_parameters(model, flat):
    """Write a flat vector back into ``model`` in :func:`parameter_arrays` order."""
    if flat.size != sum(a.size for a in parameter_arrays(model)):
        raise DomainError("flat parameter vector has the wrong length")
    pos = 0
    bb = model.backbone
    for i in range(len(bb.weights)):
        for arr in (bb.weights[i], bb.biases[i]):
            arr[...] = flat[pos:pos + arr.size].reshape(arr.shape)
            pos += arr.size
    if not model.nominal:
        n_alpha = model.clm.alpha.size
        model.clm.b1 = float(flat[pos])
        model.clm.alpha = flat[pos + 1:pos + 1 + n_alpha].copy()
        model.clm.tau = float(flat[pos + 1 + n_alpha])


def batch_loss_and_gradient(model, x, y):
    """Loss of one mini-batch and its gradient as a flat vector.

    Ordinal models use the QWK_c loss over the whole batch; nominal models
    use mean softmax cross-entropy.
    """
    out, cache = backbone_forward(model.backbone, x)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("network output overflowed")
    if model.nominal:
        loss, d_out = softmax_cross_entropy(out, y)
        head = []
    else:
        latent = out[:, 0]
        probs = clm_forward(model.clm, model.link, latent).probs
        loss = qwk_c_loss(probs, y)
        g_probs = qwk_c_gradient(probs, y)
        g = clm_gradients(model.clm, model.link, latent, g_probs)
        d_out = g.d_latent[:, None]
        head = [np.array([g.d_b1]), g.d_alpha, np.array([g.d_tau])]
    grads = backbone_backward(model.backbone, cache, d_out)
    parts = []
    for d_w, d_b in zip(grads["weights"], grads["biases"]):
        parts.extend((d_w.ravel(), d_b))
    return loss, np.concatenate(parts + head)


def evaluate(model, dataset, decision_rule=None):
    """Full metric report of ``model`` on ``dataset``."""
    if dataset.n_features != model.backbone_spec.input_dim:
        raise DomainError(f"model expects {model.backbone_spec.input_dim} features, dataset has {dataset.n_features}")
    if dataset.q_classes > model.q_classes:
        raise DomainError(f"dataset has {dataset.q_classes} classes, model {model.q_classes}")
    decision = decision_rule or model.default_decision()
    preds = model.predict(dataset.features, decision)
    probs = model.predict_proba(dataset.features)
    if decision == "interval":
        return evaluate_all(probs, dataset.labels, "interval", model.clm, model.latent(dataset.features))
    assert np.array_equal(preds, np.argmax(probs, axis=1))
    return evaluate_all(probs, dataset.labels, "argmax")


def train(config, train_set, val_set):
    """Train a model and return ``(best_model, history)``.

    The best model is the parameter snapshot with the highest validation
    QWK over completed epochs. A non-finite loss or gradient stops the
    run; the history is flagged and the best snapshot so far is returned.
    """
    q = max(train_set.q_classes, val_set.q_classes)
    if train_set.n_features != val_set.n_features:
        raise DomainError("train and validation sets differ in feature count")
    rng = np.random.default_rng(config.seed)
    if config.balance:
        train_set = balance_oversample(train_set, seed=int(rng.integers(2 ** 32)))
    model = build_model(config, train_set.n_features, q, rng)
    decision = model.default_decision()
    flat = flatten_parameters(model)
    state = AdamState.zeros(flat.size)
    schedule = LrSchedule(config.eta0)
    history = TrainingHistory()
    best_model, best_qwk = model.copy(), -math.inf
    n = len(train_set)
    x_all, y_all = train_set.features, train_set.labels
    tau_index = flat.size - 1

    for epoch in range(config.max_epochs):
        start = time.perf_counter()
        lr = lr_at(schedule, epoch)
        order = rng.permutation(n)
        batch_losses = []
        try:
            for lo in range(0, n, config.batch_size):
                idx = order[lo:lo + config.batch_size]
                loss, grad = batch_loss_and_gradient(model, x_all[idx], y_all[idx])
                if not math.isfinite(loss):
                    raise DivergenceError(f"non-finite loss at epoch {epoch}")
                flat, state = adam_step(state, flat, grad, lr)
                if not model.nominal:
                    flat[tau_index] = max(flat[tau_index], TAU_MIN)
                if not np.all(np.isfinite(flat)):
                    raise DivergenceError(f"non-finite parameters at epoch {epoch}")
                assign_parameters(model, flat)
                history.total_steps += 1
                batch_losses.append(loss)
        except DivergenceError as exc:
            log.warning("training diverged: %s", exc)
            history.diverged = True
            break
        report = evaluate(model, val_set, decision)
        history.records.append({
            "epoch": epoch,
            "lr": lr,
            "train_loss": float(np.mean(batch_losses)),
            "val_qwk": report.qwk,
            "val_mae": report.mae,
            "wall_time": time.perf_counter() - start,
        })
        score = report.qwk if report.qwk_defined else -math.inf
        if score > best_qwk or history.best_epoch < 0:
            best_qwk = score
            history.best_epoch = epoch
            best_model = model.copy()
        log.debug("epoch %d lr=%.3g loss=%.5f val_qwk=%.4f", epoch, lr,
                  history.records[-1]["train_loss"], report.qwk)
    return best_model, history

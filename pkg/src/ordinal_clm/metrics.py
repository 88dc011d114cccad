"""Evaluation metrics for ordinal classifiers.

Hard-label metrics take a confusion matrix ``O`` (rows = true class,
columns = predicted class). Top-k accuracy needs the probability rows.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .clm_head import predict_interval
from .exceptions import DomainError, UndefinedMetricError
from .losses import qwk_metric

REPORT_FIELDS = ("qwk", "ms", "mae", "ccr", "top2", "top3", "one_off", "confusion")


def confusion_from_predictions(labels, predictions, q_classes):
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape or labels.ndim != 1:
        raise DomainError("labels and predictions must be 1-D with equal length")
    for name, v in (("labels", labels), ("predictions", predictions)):
        if v.size and (v.min() < 0 or v.max() >= q_classes):
            raise DomainError(f"{name} out of range [0, {q_classes - 1}]")
    O = np.zeros((q_classes, q_classes), dtype=np.int64)
    np.add.at(O, (labels.astype(np.int64), predictions.astype(np.int64)), 1)
    return O


def _as_counts(confusion):
    O = np.asarray(confusion)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise DomainError("confusion matrix must be square")
    if np.any(O < 0):
        raise DomainError("confusion counts must be nonnegative")
    if O.sum() <= 0:
        raise DomainError("confusion matrix is empty")
    return O


def minimum_sensitivity(confusion):
    """Lowest per-class recall; classes absent from the truth are skipped."""
    O = _as_counts(confusion)
    support = O.sum(axis=1)
    present = support > 0
    return float(np.min(np.diag(O)[present] / support[present]))


def mean_absolute_error(confusion):
    O = _as_counts(confusion)
    idx = np.arange(O.shape[0])
    dist = np.abs(idx[:, None] - idx[None, :])
    return float(np.sum(dist * O) / O.sum())


def ccr(confusion):
    O = _as_counts(confusion)
    return float(np.trace(O) / O.sum())


def one_off_accuracy(confusion):
    O = _as_counts(confusion)
    idx = np.arange(O.shape[0])
    near = np.abs(idx[:, None] - idx[None, :]) <= 1
    return float(O[near].sum() / O.sum())


def top_k_ccr(probs, labels, k):
    """Fraction of samples whose label is among the ``k`` most probable
    classes. Equal probabilities rank the lower class index first."""
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    q = probs.shape[1]
    if not 1 <= k <= q:
        raise DomainError(f"k must lie in [1, {q}], got {k}")
    # stable sort on -p keeps lower indices first among ties
    order = np.argsort(-probs, axis=1, kind="stable")[:, :k]
    return float(np.mean(np.any(order == labels[:, None], axis=1)))


@dataclass
class EvaluationReport:
    qwk: float
    ms: float
    mae: float
    ccr: float
    top2: float
    top3: float
    one_off: float
    confusion: np.ndarray = field(repr=False)
    qwk_defined: bool = True

    def to_record(self):
        """Flat mapping with the confusion matrix encoded as JSON text.

        An undefined QWK is written as the string ``"undefined"``.
        """
        rec = {}
        for name in REPORT_FIELDS[:-1]:
            rec[name] = getattr(self, name)
        if not self.qwk_defined:
            rec["qwk"] = "undefined"
        rec["confusion"] = json.dumps(np.asarray(self.confusion).tolist(), separators=(",", ":"))
        return rec


def evaluate_all(probs, labels, decision="argmax", params=None, latent=None):
    """Full metric suite.

    ``decision`` selects the rule producing hard labels: ``"argmax"`` uses
    ``probs``; ``"interval"`` needs the head ``params`` and the ``latent``
    projections. Top-k always uses ``probs``. For ``Q < 3`` the top-3
    rate is 1 by convention (every class is within the top three).
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    q = probs.shape[1]
    if decision == "argmax":
        preds = np.argmax(probs, axis=1)
    elif decision == "interval":
        if params is None or latent is None:
            raise DomainError("interval decision needs params and latent projections")
        preds = np.atleast_1d(predict_interval(params, latent))
    else:
        raise DomainError(f"unknown decision rule {decision!r}")
    O = confusion_from_predictions(labels, preds, q)
    try:
        qwk, defined = qwk_metric(O), True
    except UndefinedMetricError:
        qwk, defined = float("nan"), False
    return EvaluationReport(
        qwk=qwk,
        ms=minimum_sensitivity(O),
        mae=mean_absolute_error(O),
        ccr=ccr(O),
        top2=top_k_ccr(probs, labels, min(2, q)),
        top3=top_k_ccr(probs, labels, min(3, q)),
        one_off=one_off_accuracy(O),
        confusion=O,
        qwk_defined=defined,
    )

"""Quadratic weighted kappa, its continuous loss form, and the nominal
softmax/cross-entropy baseline."""

import numpy as np
from scipy.special import logsumexp

from .exceptions import DomainError, UndefinedMetricError


def qwk_weights(q_classes):
    """Quadratic penalization matrix ``w[i, j] = (i - j)^2 / (Q - 1)^2``."""
    q_classes = int(q_classes)
    if q_classes < 2:
        raise DomainError(f"need at least two classes, got {q_classes}")
    idx = np.arange(q_classes, dtype=float)
    return (idx[:, None] - idx[None, :]) ** 2 / (q_classes - 1) ** 2


def qwk_metric(confusion, weights=None):
    """Quadratic weighted kappa of a confusion matrix.

    Rows are true classes, columns predicted classes. Raises
    :class:`UndefinedMetricError` when the chance-agreement term is zero,
    which happens when both raters put every sample in the same class.
    """
    O = np.asarray(confusion, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise DomainError("confusion matrix must be square")
    n = O.sum()
    if n <= 0:
        raise DomainError("confusion matrix is empty")
    w = qwk_weights(O.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    E = np.outer(O.sum(axis=1), O.sum(axis=0)) / n
    denom = np.sum(w * E)
    if denom == 0:
        raise UndefinedMetricError("QWK undefined: expected disagreement is zero")
    return float(1.0 - np.sum(w * O) / denom)


def _check_batch(probs, labels, weights):
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    if probs.ndim != 2 or labels.shape != (probs.shape[0],):
        raise DomainError("probs must be (N, Q) and labels (N,)")
    if probs.shape[0] == 0:
        raise DomainError("empty batch")
    q = probs.shape[1]
    if not np.issubdtype(labels.dtype, np.integer):
        raise DomainError("labels must be integers")
    if labels.min() < 0 or labels.max() >= q:
        raise DomainError(f"labels must lie in [0, {q - 1}]")
    w = qwk_weights(q) if weights is None else np.asarray(weights, dtype=float)
    return probs, labels, w


def _qwk_c_parts(probs, labels, w):
    n, q = probs.shape
    class_share = np.bincount(labels, minlength=q) / n
    numer = np.sum(w[labels] * probs)
    # h[j] = sum_i (N_i / N) w[i, j]
    h = class_share @ w
    denom = np.dot(h, probs.sum(axis=0))
    if denom == 0:
        raise UndefinedMetricError("QWK_c undefined: zero denominator")
    return numer, denom, h


def qwk_c_loss(probs, labels, weights=None):
    """Continuous QWK loss of a batch of probability rows, in [0, 2].

    Equals ``1 - QWK`` when every row is one-hot.
    """
    probs, labels, w = _check_batch(probs, labels, weights)
    numer, denom, _ = _qwk_c_parts(probs, labels, w)
    return float(numer / denom)


def qwk_c_gradient(probs, labels, weights=None):
    """Gradient of :func:`qwk_c_loss` with respect to every probability."""
    probs, labels, w = _check_batch(probs, labels, weights)
    numer, denom, h = _qwk_c_parts(probs, labels, w)
    return (w[labels] - (numer / denom) * h[None, :]) / denom


def softmax(logits):
    logits = np.asarray(logits, dtype=float)
    return np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))


def softmax_cross_entropy(logits, label):
    """Cross-entropy of softmax(logits) against an integer label.

    With 1-D ``logits`` returns ``(loss, grad)`` for one sample. With
    ``(N, Q)`` logits and ``(N,)`` labels returns the batch-mean loss and
    its gradient.
    """
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise DomainError("logits must be finite")
    single = logits.ndim == 1
    z = np.atleast_2d(logits)
    y = np.atleast_1d(np.asarray(label))
    n, q = z.shape
    if y.shape != (n,) or np.any(y < 0) or np.any(y >= q):
        raise DomainError(f"label out of range for {q} classes")
    lse = logsumexp(z, axis=1)
    rows = np.arange(n)
    losses = lse - z[rows, y]
    grad = np.exp(z - lse[:, None])
    grad[rows, y] -= 1.0
    if single:
        return float(losses[0]), grad[0]
    return float(losses.mean()), grad / n

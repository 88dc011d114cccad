"""Datasets: latent-variable synthetic generator, CSV I/O, stratified
splits and oversampling."""

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .clm_head import LinkFunction
from .exceptions import DomainError, GenerationError, ParseError


class SplitWarning(UserWarning):
    """A split received no samples of some class."""


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    q_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise DomainError("features must be (N, d) and labels (N,)")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.q_classes):
            raise DomainError(f"labels must lie in [0, {self.q_classes - 1}]")

    def __len__(self):
        return self.labels.size

    @property
    def n_features(self):
        return self.features.shape[1]

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.q_classes)

    def subset(self, idx):
        return Dataset(self.features[idx], self.labels[idx], self.q_classes)


@dataclass
class SyntheticSpec:
    n_samples: int
    true_weights: np.ndarray
    true_thresholds: np.ndarray
    link: LinkFunction = LinkFunction.LOGIT
    seed: int = 0

    def __post_init__(self):
        self.true_weights = np.asarray(self.true_weights, dtype=float).reshape(-1)
        self.true_thresholds = np.asarray(self.true_thresholds, dtype=float).reshape(-1)
        self.link = LinkFunction.parse(self.link)
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        if self.true_thresholds.size < 1:
            raise DomainError("need at least one threshold (two classes)")
        if np.any(np.diff(self.true_thresholds) <= 0):
            raise DomainError("thresholds must be strictly increasing")

    @property
    def n_features(self):
        return self.true_weights.size

    @property
    def q_classes(self):
        return self.true_thresholds.size + 1

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "true_weights": self.true_weights.tolist(),
            "true_thresholds": self.true_thresholds.tolist(),
            "link": self.link.value,
            "seed": self.seed,
        }


def sample_noise(link, rng, size):
    """Noise whose cdf is the link's cdf: logistic, normal or min-Gumbel."""
    link = LinkFunction.parse(link)
    if link is LinkFunction.LOGIT:
        return rng.logistic(size=size)
    if link is LinkFunction.PROBIT:
        return rng.standard_normal(size)
    # P(log(-log U) <= t) = 1 - exp(-e^t)
    u = rng.uniform(size=size)
    return np.log(-np.log(u))


def generate_synthetic(spec):
    """Draw ``x ~ N(0, I)``, ``y* = w.x + eps`` and cut ``y*`` at the
    thresholds. Returns ``(dataset, ground_truth_dict)``."""
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal((spec.n_samples, spec.n_features))
    latent = x @ spec.true_weights
    y_star = latent + sample_noise(spec.link, rng, spec.n_samples)
    labels = np.searchsorted(spec.true_thresholds, y_star, side="left")
    counts = np.bincount(labels, minlength=spec.q_classes)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise GenerationError(f"classes {empty} received no samples; widen the thresholds or add samples")
    return Dataset(x, labels, spec.q_classes), spec.to_dict()


def default_synthetic_spec(n_samples, n_features, q_classes, link="logit", seed=0,
                           signal=10.0, class_shares=None):
    """Build a :class:`SyntheticSpec` with random unit-direction weights scaled to ``signal``
    and thresholds at the quantiles of ``y*`` given by ``class_shares``
    (balanced when omitted). Quantiles come from a 10^5-draw pilot sample
    seeded independently of the data draw."""
    if q_classes < 2:
        raise DomainError("need at least two classes")
    if n_features < 1:
        raise DomainError("need at least one feature")
    rng = np.random.default_rng([seed, 1])
    w = rng.standard_normal(n_features)
    w *= signal / np.linalg.norm(w)
    pilot = rng.standard_normal(100_000) * signal + sample_noise(link, rng, 100_000)
    if class_shares is None:
        class_shares = np.full(q_classes, 1.0 / q_classes)
    class_shares = np.asarray(class_shares, dtype=float)
    if class_shares.size != q_classes or np.any(class_shares <= 0):
        raise DomainError("class_shares must hold one positive share per class")
    cuts = np.cumsum(class_shares / class_shares.sum())[:-1]
    thresholds = np.quantile(pilot, cuts)
    return SyntheticSpec(n_samples, w, thresholds, link, seed)


def benchmark_spec(seed=0, n_samples=4000):
    """The imbalanced five-class benchmark (majority class first, long tail)."""
    return default_synthetic_spec(n_samples, 8, 5, "logit", seed, signal=4.0,
                                  class_shares=[0.55, 0.2, 0.13, 0.07, 0.05])


def save_csv(dataset, path):
    """Write ``f0,...,f{d-1},label`` with round-trip exact float text."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{i}" for i in range(dataset.n_features)] + ["label"])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_csv(path, q_classes=None):
    """Read a dataset written by :func:`save_csv`.

    ``q_classes`` defaults to ``max(label) + 1``; when given, labels outside
    ``[0, q_classes)`` are rejected with the offending line number.
    """
    features, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", line=1) from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ParseError("missing 'label' column", line=1)
        li = header.index("label")
        d = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            try:
                vals = [float(c) for i, c in enumerate(row) if i != li]
            except ValueError:
                raise ParseError("non-numeric feature value", line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite feature value", line=lineno)
            try:
                label = int(row[li])
            except ValueError:
                raise ParseError(f"label {row[li]!r} is not an integer", line=lineno) from None
            if label < 0 or (q_classes is not None and label >= q_classes):
                raise ParseError(f"label {label} out of range", line=lineno)
            features.append(vals)
            labels.append(label)
    if not labels:
        raise ParseError("no data rows", line=2)
    q = q_classes if q_classes is not None else max(labels) + 1
    return Dataset(np.array(features, dtype=float).reshape(len(labels), d), np.array(labels), q)


def save_ground_truth(record, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ground_truth(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def split(dataset, fractions=(0.8, 0.1, 0.1), seed=0):
    """Stratified shuffled partition into ``len(fractions)`` datasets.

    Within each class the validation/test shares are rounded and the
    first part (train) takes the remainder.
    """
    fractions = np.asarray(fractions, dtype=float)
    if np.any(fractions < 0) or fractions[0] <= 0 or not math.isclose(fractions.sum(), 1.0):
        raise DomainError(f"fractions must be nonnegative, with positive train share, summing to 1: {fractions}")
    rng = np.random.default_rng(seed)
    parts = [[] for _ in fractions]
    for c in range(dataset.q_classes):
        idx = np.flatnonzero(dataset.labels == c)
        idx = idx[rng.permutation(idx.size)]
        sizes = [int(round(idx.size * f)) for f in fractions[1:]]
        while sum(sizes) > idx.size:
            sizes[int(np.argmax(sizes))] -= 1
        start = idx.size - sum(sizes)
        parts[0].append(idx[:start])
        for k, s in enumerate(sizes, start=1):
            parts[k].append(idx[start:start + s])
            start += s
    out = []
    for k, chunks in enumerate(parts):
        idx = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        idx = idx[rng.permutation(idx.size)]
        sub = dataset.subset(idx)
        present = dataset.class_counts() > 0
        missing = np.flatnonzero(present & (sub.class_counts() == 0))
        if fractions[k] > 0 and missing.size:
            warnings.warn(f"split {k} has no samples of classes {missing.tolist()}", SplitWarning)
        out.append(sub)
    return tuple(out)


def balance_oversample(dataset, seed=0):
    """Duplicate random samples of minority classes (with replacement)
    until every class matches the majority count."""
    counts = dataset.class_counts()
    if np.any(counts == 0):
        raise DomainError(f"classes {np.flatnonzero(counts == 0).tolist()} have no samples")
    rng = np.random.default_rng(seed)
    target = counts.max()
    extra = []
    for c in range(dataset.q_classes):
        need = target - counts[c]
        if need:
            extra.append(rng.choice(np.flatnonzero(dataset.labels == c), size=need, replace=True))
    idx = np.concatenate([np.arange(len(dataset))] + extra)
    return dataset.subset(idx)

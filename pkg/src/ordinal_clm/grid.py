"""Factor-grid runner: link x learning rate x batch size, repeated seeded
runs, mean/SD summary tables."""

import csv
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .bundle import NOMINAL, parse_link
from .data import split
from .exceptions import ConfigError
from .trainer import TrainingConfig, evaluate, train

METRICS = ("qwk", "ms", "mae", "ccr", "top2", "top3", "one_off")
RAW_HEADER = ("link", "lr", "batch_size", "run", "seed", "diverged", "best_epoch") + METRICS
THREADS_ENV = "ORDINAL_CLM_THREADS"


@dataclass
class GridSpec:
    links: tuple = ("logit", "probit", "cloglog")
    etas: tuple = (1e-4, 1e-3, 1e-2)
    batch_sizes: tuple = (32,)
    runs_per_cell: int = 5
    base_seed: int = 0
    max_epochs: int = 100
    hidden: tuple = (32, 32)
    balance: bool = False
    fractions: tuple = (0.8, 0.1, 0.1)

    def __post_init__(self):
        links = []
        for l in self.links:
            link = parse_link(l)
            links.append(link if link == NOMINAL else link.value)
        self.links = tuple(links)
        self.etas = tuple(float(e) for e in self.etas)
        self.batch_sizes = tuple(int(b) for b in self.batch_sizes)
        if not (self.links and self.etas and self.batch_sizes):
            raise ConfigError("every factor needs at least one level")
        if self.runs_per_cell < 1:
            raise ConfigError("runs_per_cell must be >= 1")
        if len(self.fractions) != 3:
            raise ConfigError("fractions must be (train, val, test)")

    def cells(self):
        """Factor combinations in lexicographic order."""
        return sorted(product(set(self.links), set(self.etas), set(self.batch_sizes)))


def _run_one(args):
    spec, (link, eta, bs), run, splits = args
    seed = spec.base_seed + run
    config = TrainingConfig(link=link, eta0=eta, batch_size=bs, max_epochs=spec.max_epochs,
                            seed=seed, balance=spec.balance, hidden=spec.hidden)
    train_set, val_set, test_set = splits
    model, history = train(config, train_set, val_set)
    report = evaluate(model, test_set)
    rec = {"link": link, "lr": eta, "batch_size": bs, "run": run, "seed": seed,
           "diverged": history.diverged, "best_epoch": history.best_epoch}
    for m in METRICS:
        rec[m] = getattr(report, m)
    return rec


def run_grid(spec, dataset, workers=None):
    """Train every cell ``runs_per_cell`` times and return the raw records.

    The data split is fixed by ``base_seed``; run ``i`` of each cell uses
    training seed ``base_seed + i``.
    """
    if workers is None:
        workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
    splits = split(dataset, spec.fractions, seed=spec.base_seed)
    jobs = [(spec, cell, run, splits) for cell in spec.cells() for run in range(spec.runs_per_cell)]
    if workers == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def summarize(records, spec):
    """One summary row per cell; diverged runs are excluded from the
    statistics and counted separately."""
    rows = []
    for link, eta, bs in spec.cells():
        runs = [r for r in records if (r["link"], r["lr"], r["batch_size"]) == (link, eta, bs)]
        ok = [r for r in runs if not r["diverged"]]
        row = {"link": link, "lr": eta, "batch_size": bs, "runs": len(runs),
               "diverged": len(runs) - len(ok)}
        flags = []
        if not ok:
            flags.append("all_diverged")
        elif len(ok) == 1:
            flags.append("single_run_sd")
        for m in METRICS:
            vals = [r[m] for r in ok]
            if not vals:
                row[f"{m}_mean"] = row[f"{m}_sd"] = math.nan
            else:
                row[f"{m}_mean"] = statistics.fmean(vals)
                row[f"{m}_sd"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
        row["flags"] = ";".join(flags)
        rows.append(row)
    return rows


def fmt(value):
    """Six significant digits, the format of every human-facing table."""
    return f"{value:.6g}"


def mean_sd(mean, sd):
    return f"{fmt(mean)}_{fmt(sd)}"


def write_raw(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for r in records:
            w.writerow([r["link"], repr(r["lr"]), r["batch_size"], r["run"], r["seed"],
                        int(r["diverged"]), r["best_epoch"]] + [repr(float(r[m])) for m in METRICS])


def read_raw(path):
    with open(path, newline="", encoding="utf-8") as fh:
        out = []
        for r in csv.DictReader(fh):
            rec = {"link": r["link"], "lr": float(r["lr"]), "batch_size": int(r["batch_size"]),
                   "run": int(r["run"]), "seed": int(r["seed"]), "diverged": r["diverged"] == "1",
                   "best_epoch": int(r["best_epoch"])}
            rec.update({m: float(r[m]) for m in METRICS})
            out.append(rec)
        return out


def summary_header():
    cols = ["link", "lr", "batch_size", "runs", "diverged"]
    for m in METRICS:
        cols += [f"{m}_mean", f"{m}_sd"]
    return cols + ["flags"]


def write_summary(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(summary_header())
        for r in rows:
            vals = [r["link"], fmt(r["lr"]), r["batch_size"], r["runs"], r["diverged"]]
            for m in METRICS:
                vals += [fmt(r[f"{m}_mean"]), fmt(r[f"{m}_sd"])]
            w.writerow(vals + [r["flags"]])


def write_table(rows, path):
    """Results table with every metric as ``Mean_SD``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["link", "lr", "batch_size", "QWK", "MS", "MAE", "CCR", "Top-2", "Top-3", "1-off", "flags"])
        for r in rows:
            w.writerow([r["link"], fmt(r["lr"]), r["batch_size"]]
                       + [mean_sd(r[f"{m}_mean"], r[f"{m}_sd"]) for m in METRICS] + [r["flags"]])


def best_row(rows, metric="qwk"):
    valid = [r for r in rows if not math.isnan(r[f"{metric}_mean"])]
    return max(valid, key=lambda r: r[f"{metric}_mean"]) if valid else None

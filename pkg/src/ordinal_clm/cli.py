"""Train, evaluate and compare cumulative link ordinal models.

Exit status: 0 success, 2 usage error, 3 data/model error, 4 divergence.
"""

import argparse
import csv
import logging
import sys
from pathlib import Path

from .bundle import ModelBundle
from .data import (
    default_synthetic_spec,
    generate_synthetic,
    load_csv,
    save_csv,
    save_ground_truth,
    split,
)
from .exceptions import DivergenceError, OrdinalError
from .grid import GridSpec, best_row, run_grid, summarize, write_raw, write_summary, write_table
from .metrics import REPORT_FIELDS
from .trainer import TrainingConfig, evaluate, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4
LINK_CHOICES = ("logit", "probit", "cloglog", "nominal")

log = logging.getLogger("ordinal_clm")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _fraction(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return v


def cmd_generate(args):
    if args.classes < 2:
        raise UsageError("--classes must be at least 2")
    spec = default_synthetic_spec(args.samples, args.features, args.classes, args.link,
                                  args.seed, signal=args.signal, class_shares=args.class_shares)
    dataset, truth = generate_synthetic(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(dataset, out / "data.csv")
    save_ground_truth(truth, out / "ground_truth.json")
    print(f"wrote {len(dataset)} rows to {out / 'data.csv'}")
    return EXIT_OK


def _print_report(report, stream=sys.stdout):
    rec = report.to_record()
    for k in REPORT_FIELDS:
        v = rec[k]
        print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}", file=stream)


def cmd_train(args):
    dataset = load_csv(args.data)
    train_set, val_set = split(dataset, (1 - args.val_fraction, args.val_fraction), seed=args.seed)
    config = TrainingConfig(link=args.link, eta0=args.lr, batch_size=args.batch_size,
                            max_epochs=args.epochs, seed=args.seed, balance=args.balance,
                            hidden=tuple(args.hidden))
    model, history = train(config, train_set, val_set)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.json")
    history.save(out / "history.jsonl", include_timing=args.timing)
    print(f"best epoch {history.best_epoch}; validation report:")
    _print_report(evaluate(model, val_set))
    if history.diverged:
        print("training diverged; best model so far was written", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def write_report(report, path):
    rec = report.to_record()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        w.writerow([rec[k] if isinstance(rec[k], str) else f"{rec[k]:.6g}" for k in REPORT_FIELDS])


def cmd_evaluate(args):
    model = ModelBundle.load(args.model)
    dataset = load_csv(args.data, q_classes=model.q_classes)
    report = evaluate(model, dataset, args.decision)
    write_report(report, args.out)
    _print_report(report)
    return EXIT_OK


def cmd_predict(args):
    model = ModelBundle.load(args.model)
    dataset = load_csv(args.data, q_classes=model.q_classes)
    probs = model.predict_proba(dataset.features)
    argmax = model.predict(dataset.features, "argmax")
    interval = None if model.nominal else model.predict(dataset.features, "interval")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"p{q}" for q in range(model.q_classes)] + ["interval", "argmax"])
        for i, row in enumerate(probs):
            w.writerow([repr(float(p)) for p in row]
                       + ["NA" if interval is None else int(interval[i]), int(argmax[i])])
    print(f"wrote {len(dataset)} predictions to {args.out}")
    return EXIT_OK


def cmd_grid(args):
    dataset = load_csv(args.data)
    spec = GridSpec(links=args.links, etas=args.lrs, batch_sizes=args.batch_sizes,
                    runs_per_cell=args.runs, base_seed=args.base_seed, max_epochs=args.epochs,
                    hidden=tuple(args.hidden), balance=args.balance, fractions=tuple(args.fractions))
    records = run_grid(spec, dataset)
    rows = summarize(records, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_raw(records, out / "runs.csv")
    write_summary(rows, out / "summary.csv")
    write_table(rows, out / "table.csv")
    for r in rows:
        if r["diverged"]:
            print(f"{r['link']} lr={r['lr']:g} bs={r['batch_size']}: {r['diverged']}/{r['runs']} runs diverged")
    best = best_row(rows)
    if best is not None:
        print(f"best QWK: {best['link']} lr={best['lr']:g} bs={best['batch_size']} "
              f"{best['qwk_mean']:.6g}_{best['qwk_sd']:.6g}")
    return EXIT_OK


class UsageError(Exception):
    pass


def build_parser():
    parser = argparse.ArgumentParser(prog="ordinal-clm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per epoch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic latent-variable ordinal dataset")
    p.add_argument("--samples", type=_positive_int, required=True, help="number of rows")
    p.add_argument("--features", type=_positive_int, required=True, help="input dimension")
    p.add_argument("--classes", type=int, required=True, help="number of ordered classes (>= 2)")
    p.add_argument("--link", choices=LINK_CHOICES[:3], default="logit", help="noise family / link")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--signal", type=float, default=10.0, help="norm of the true weight vector")
    p.add_argument("--class-shares", type=_csv_list(float), default=None,
                   help="comma-separated target class proportions (default: balanced)")
    p.add_argument("--out", required=True, help="output directory (data.csv, ground_truth.json)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a CLM or nominal model")
    p.add_argument("--data", required=True, help="training CSV (f0,...,label)")
    p.add_argument("--link", choices=LINK_CHOICES, default="logit", help="output head")
    p.add_argument("--lr", type=float, default=1e-3, help="initial learning rate")
    p.add_argument("--batch-size", type=_positive_int, default=32, help="mini-batch size")
    p.add_argument("--epochs", type=_positive_int, default=100, help="number of epochs")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--balance", action="store_true", help="oversample the training split")
    p.add_argument("--val-fraction", type=_fraction, default=0.1, help="validation share")
    p.add_argument("--hidden", type=_csv_list(int), default=[32, 32], help="hidden widths, e.g. 32,32")
    p.add_argument("--timing", action="store_true", help="include wall times in history.jsonl")
    p.add_argument("--out", required=True, help="output directory (model.json, history.jsonl)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="compute the metric report of a model on a dataset")
    p.add_argument("--model", required=True, help="model.json from train")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--decision", choices=("interval", "argmax"), default=None,
                   help="hard-label rule (default: interval for CLM, argmax for nominal)")
    p.add_argument("--out", required=True, help="report CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="write per-sample probabilities and predictions")
    p.add_argument("--model", required=True, help="model.json from train")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--out", required=True, help="predictions CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="run the link x lr x batch-size factor grid")
    p.add_argument("--data", required=True, help="dataset CSV, split into train/val/test")
    p.add_argument("--links", type=_csv_list(str), default=["logit", "probit", "cloglog"],
                   help="comma-separated heads (logit,probit,cloglog,nominal)")
    p.add_argument("--lrs", type=_csv_list(float), default=[1e-4, 1e-3, 1e-2], help="initial learning rates")
    p.add_argument("--batch-sizes", type=_csv_list(int), default=[32], help="batch sizes")
    p.add_argument("--runs", type=_positive_int, default=5, help="runs per cell")
    p.add_argument("--base-seed", type=int, default=0, help="seed of run 0; run i uses base+i")
    p.add_argument("--epochs", type=_positive_int, default=100, help="epochs per run")
    p.add_argument("--hidden", type=_csv_list(int), default=[32, 32], help="hidden widths")
    p.add_argument("--balance", action="store_true", help="oversample training splits")
    p.add_argument("--fractions", type=_csv_list(float), default=[0.8, 0.1, 0.1],
                   help="train,val,test shares")
    p.add_argument("--out", required=True, help="output directory (runs.csv, summary.csv, table.csv)")
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (OrdinalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

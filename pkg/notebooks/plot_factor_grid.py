"""
A small factor grid
===================

Every link crossed with a few learning rates, repeated with different
seeds on a fixed split. Results are reported as Mean_SD strings. Set
ORDINAL_CLM_THREADS to run cells in parallel.
"""

import numpy as np

from ordinal_clm.data import benchmark_spec, generate_synthetic
from ordinal_clm.grid import GridSpec, best_row, mean_sd, run_grid, summarize

data, _ = generate_synthetic(benchmark_spec(seed=0, n_samples=1500))
print("class counts", data.class_counts())

spec = GridSpec(links=("logit", "probit", "cloglog", "nominal"), etas=(1e-3, 1e-2),
                batch_sizes=(32,), runs_per_cell=2, max_epochs=15)
rows = summarize(run_grid(spec, data), spec)

# %%
print(f"{'link':8s} {'lr':>6s} {'QWK':>18s} {'MAE':>18s}")
for r in rows:
    print(f"{r['link']:8s} {r['lr']:6g} {mean_sd(r['qwk_mean'], r['qwk_sd']):>18s} "
          f"{mean_sd(r['mae_mean'], r['mae_sd']):>18s}")

best = best_row(rows)
print("best by QWK:", best["link"], best["lr"])

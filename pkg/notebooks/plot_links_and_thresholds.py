"""
Link functions and threshold parametrisation
============================================

The cumulative link head turns one projection per sample into Q class
probabilities. This script looks at the three links and at how the
unconstrained (b1, alpha) pair becomes an ordered threshold vector.
"""

import numpy as np

from ordinal_clm import ClmParameters, build_thresholds, clm_forward, link_cdf

# %%
# The three cdfs at a few points. logit and probit are symmetric about 0,
# cloglog is not.
z = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
for link in ("logit", "probit", "cloglog"):
    print(f"{link:8s}", np.round(link_cdf(link, z), 4))

# %%
# Thresholds: b1 followed by squared increments, so any alpha gives an
# ordered vector.
params = ClmParameters(b1=-1.0, alpha=np.array([0.8, -1.1, 0.3]), tau=1.0)
print("thresholds", build_thresholds(params))

# %%
# Class probabilities move to higher classes as the projection grows.
latent = np.linspace(-3, 4, 8)
rec = clm_forward(params, "logit", latent)
for f, p in zip(latent, rec.probs):
    print(f"f={f:+.1f}", np.round(p, 3))

# %%
# tau scales the projection: small tau sharpens the distribution.
for tau in (0.25, 1.0, 4.0):
    p = clm_forward(ClmParameters(-1.0, params.alpha, tau), "logit", np.array([0.5])).probs[0]
    print(f"tau={tau:<5}", np.round(p, 3))

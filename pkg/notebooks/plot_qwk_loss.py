"""
The continuous QWK loss
=======================

QWK is a ratio of weighted disagreements. Replacing hard predictions by
class probabilities gives a differentiable loss that equals 1 - QWK on
one-hot inputs and penalises far-off mass more than near misses.
"""

import numpy as np

from ordinal_clm import confusion_from_predictions, qwk_c_gradient, qwk_c_loss, qwk_metric

labels = np.array([0, 1, 2, 2, 1, 0, 2, 1])
preds = np.array([0, 1, 2, 1, 1, 0, 2, 2])
q = 3

# %%
# One-hot predictions: the loss is exactly 1 - QWK.
qwk = qwk_metric(confusion_from_predictions(labels, preds, q))
print("QWK", qwk, "loss", qwk_c_loss(np.eye(q)[preds], labels))

# %%
# Same mass off the true class, placed one step away versus two steps.
near = np.array([[0.6, 0.4, 0.0], [0.2, 0.6, 0.2], [0.0, 0.4, 0.6]])
far = np.array([[0.6, 0.0, 0.4], [0.2, 0.6, 0.2], [0.4, 0.0, 0.6]])
y = np.array([0, 1, 2])
print("near misses", round(qwk_c_loss(near, y), 4))
print("far misses ", round(qwk_c_loss(far, y), 4))

# %%
# The gradient w.r.t. the probabilities: larger for classes further from
# the label.
print(np.round(qwk_c_gradient(near, y), 3))

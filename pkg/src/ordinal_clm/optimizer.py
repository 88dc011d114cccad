"""Adam with bias correction and an exponential per-epoch learning-rate
decay."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DivergenceError, DomainError

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8
DECAY_RATE = 0.025


@dataclass(frozen=True)
class LrSchedule:
    eta0: float
    decay_rate: float = DECAY_RATE

    def __post_init__(self):
        if not self.eta0 > 0:
            raise DomainError(f"eta0 must be positive, got {self.eta0}")


def lr_at(schedule, epoch):
    """``eta0 * exp(-decay_rate * epoch)``; constant within an epoch."""
    if epoch < 0:
        raise DomainError(f"epoch must be >= 0, got {epoch}")
    return schedule.eta0 * math.exp(-schedule.decay_rate * epoch)


@dataclass
class AdamState:
    step_count: int
    m: np.ndarray
    v: np.ndarray
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = ADAM_EPS

    @classmethod
    def zeros(cls, n):
        return cls(0, np.zeros(n), np.zeros(n))


def adam_step(state, params, grads, lr):
    """One Adam update on flat vectors.

    Returns ``(new_params, new_state)``; inputs are not modified.
    """
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise DomainError("params, grads and optimizer state differ in length")
    if not lr > 0:
        raise DomainError(f"learning rate must be positive, got {lr}")
    bad = np.flatnonzero(~np.isfinite(grads))
    if bad.size:
        raise DivergenceError(f"non-finite gradient at parameter {bad[0]}", index=int(bad[0]))
    t = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new = params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new, AdamState(t, m, v, state.beta1, state.beta2, state.eps)

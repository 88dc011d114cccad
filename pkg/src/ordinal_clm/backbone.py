"""Fully-connected ELU network producing the latent projection (one
output) or nominal logits (``Q`` outputs), with manual backprop."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

MAX_HIDDEN_LAYERS = 8


def elu(z):
    z = np.asarray(z, dtype=float)
    out = np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))
    return float(out) if out.ndim == 0 else out


def elu_prime(z):
    z = np.asarray(z, dtype=float)
    out = np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BackboneSpec:
    input_dim: int
    hidden: tuple = (32, 32)
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        dims = (self.input_dim, *self.hidden, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise DomainError(f"all layer widths must be >= 1, got {dims}")
        if len(self.hidden) > MAX_HIDDEN_LAYERS:
            raise DomainError(f"at most {MAX_HIDDEN_LAYERS} hidden layers")

    @property
    def layer_dims(self):
        return (self.input_dim, *self.hidden, self.output_dim)

    def to_dict(self):
        return {"input_dim": self.input_dim, "hidden": list(self.hidden),
                "output_dim": self.output_dim}


@dataclass
class BackboneParams:
    """``weights[i]`` has shape ``(fan_in, fan_out)``; layers compute
    ``x @ W + b``."""

    weights: list
    biases: list

    def arrays(self):
        """All parameter arrays in a fixed order (W0, b0, W1, b1, ...)."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def copy(self):
        return BackboneParams([W.copy() for W in self.weights],
                              [b.copy() for b in self.biases])


def init_backbone(spec, rng):
    """Glorot-uniform weights and zero biases."""
    dims = spec.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return BackboneParams(weights, biases)


@dataclass
class ForwardCache:
    inputs: np.ndarray
    # pre-activations of the hidden layers
    pre: list = field(default_factory=list)
    # inputs to every affine layer (x, then hidden activations)
    acts: list = field(default_factory=list)
    shapes: tuple = ()


def backbone_forward(params, x):
    """Run the network on ``x`` of shape ``(d,)`` or ``(N, d)``.

    Returns ``(output, cache)``; ``output`` has the same leading shape as
    ``x`` with the last axis replaced by ``output_dim``.
    """
    x = np.asarray(x, dtype=float)
    d = params.weights[0].shape[0]
    if x.shape[-1:] != (d,) or x.ndim > 2:
        raise DomainError(f"expected input with last dimension {d}, got shape {x.shape}")
    h = np.atleast_2d(x)
    cache = ForwardCache(inputs=x, shapes=tuple(W.shape for W in params.weights))
    n_layers = len(params.weights)
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        cache.acts.append(h)
        z = h @ W + b
        if i < n_layers - 1:
            cache.pre.append(z)
            h = elu(z)
        else:
            h = z
    return (h[0] if x.ndim == 1 else h), cache


def backbone_backward(params, cache, upstream):
    """Reverse-mode gradients given ``upstream = dLoss/doutput``.

    Returns a dict with lists ``weights`` and ``biases`` (matching
    ``params``) and the array ``input``.
    """
    if cache.shapes != tuple(W.shape for W in params.weights):
        raise DomainError("cache does not match these parameters")
    g = np.atleast_2d(np.asarray(upstream, dtype=float))
    n = cache.acts[0].shape[0]
    if g.shape != (n, params.weights[-1].shape[1]):
        raise DomainError(f"upstream shape {np.shape(upstream)} does not match network output")
    n_layers = len(params.weights)
    d_w = [None] * n_layers
    d_b = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        if i < n_layers - 1:
            g = g * elu_prime(cache.pre[i])
        d_w[i] = cache.acts[i].T @ g
        d_b[i] = g.sum(axis=0)
        g = g @ params.weights[i].T
    d_x = g[0] if np.ndim(cache.inputs) == 1 else g
    return {"weights": d_w, "biases": d_b, "input": d_x}

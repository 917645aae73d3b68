"""Dense networks with hand-written reverse-mode gradients.

Everything runs in float64 numpy: the experiments are small and the
algebraic identity tests need tight tolerances. A network is a list of
(weight, bias) pairs with rectifier hidden units and a configurable
output activation; gradients are exact reverse-mode derivatives of a
scalarized loss supplied as an adjoint at the outputs.
"""
from __future__ import annotations

import numpy as np


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def one_hot(indices, width: int) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    out = np.zeros((idx.shape[0], width))
    out[np.arange(idx.shape[0]), idx] = 1.0
    return out


class DenseNet:
    """Feed-forward net: linear layers, rectifier hidden activations and
    a linear/tanh/softmax output."""

    OUTPUTS = ("linear", "tanh", "softmax")

    def __init__(self, sizes, out_activation: str = "linear", *, rng: np.random.Generator):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if out_activation not in self.OUTPUTS:
            raise ValueError(f"unknown output activation {out_activation!r}")
        self.sizes = tuple(int(s) for s in sizes)
        self.out_activation = out_activation
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def params(self) -> list[np.ndarray]:
        """Flat parameter list, weights and biases interleaved per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def set_params(self, params: list[np.ndarray]) -> None:
        if len(params) != 2 * self.n_layers:
            raise ValueError("parameter count mismatch")
        for i in range(self.n_layers):
            self.weights[i][...] = params[2 * i]
            self.biases[i][...] = params[2 * i + 1]

    def clone(self) -> "DenseNet":
        twin = DenseNet.__new__(DenseNet)
        twin.sizes = self.sizes
        twin.out_activation = self.out_activation
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin

    def _as_batch(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return x[None, :], True
        return x, False

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, squeeze = self._apply(x)
        return y[0] if squeeze else y

    def _apply(self, x):
        h, squeeze = self._as_batch(x)
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {h.shape[1]} != expected {self.sizes[0]}")
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        if self.out_activation == "tanh":
            h = np.tanh(h)
        elif self.out_activation == "softmax":
            h = softmax(h, axis=1)
        return h, squeeze

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping intermediate activations for backward."""
        h, squeeze = self._as_batch(x)
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {h.shape[1]} != expected {self.sizes[0]}")
        inputs = [h]  # post-activation input of each layer
        pre = []
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = inputs[-1] @ w + b
            pre.append(z)
            if i < last:
                inputs.append(np.maximum(z, 0.0))
        z_out = pre[-1]
        if self.out_activation == "tanh":
            y = np.tanh(z_out)
        elif self.out_activation == "softmax":
            y = softmax(z_out, axis=1)
        else:
            y = z_out
        cache = (inputs, pre, y, squeeze)
        return (y[0] if squeeze else y), cache

    def backward(self, cache, dout: np.ndarray):
        """Exact gradients for the scalar loss whose output adjoint is
        ``dout``; returns (param gradients, input gradient)."""
        inputs, pre, y, squeeze = cache
        d = np.asarray(dout, dtype=float)
        if d.ndim == 1:
            d = d[None, :] if squeeze else d[:, None]
        if self.out_activation == "tanh":
            d = d * (1.0 - y * y)
        elif self.out_activation == "softmax":
            d = y * (d - np.sum(d * y, axis=1, keepdims=True))
        grads: list[np.ndarray] = [None] * (2 * self.n_layers)
        for i in range(self.n_layers - 1, -1, -1):
            if i < self.n_layers - 1:
                d = d * (pre[i] > 0.0)
            grads[2 * i] = inputs[i].T @ d
            grads[2 * i + 1] = d.sum(axis=0)
            d = d @ self.weights[i].T
        dx = d[0] if squeeze else d
        return grads, dx


class AdamState:
    """Adam moment accumulators for one parameter list."""

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]


def adam_update(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]):
    """Standard bias-corrected Adam step, applied in place."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("parameter/gradient shape mismatch")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


def soft_update(target_params: list[np.ndarray], online_params: list[np.ndarray], tau: float) -> None:
    """Polyak tracking: target <- (1-tau)*target + tau*online."""
    for tp, op in zip(target_params, online_params):
        tp *= 1.0 - tau
        tp += tau * op


class Normalizer:
    """Running per-dimension standardizer with two-stage clipping.

    Inputs are clipped to ``[-raw_clip, raw_clip]`` first, standardized
    by the running statistics, then clipped to ``[-norm_clip, norm_clip]``.
    The std has a small positive floor.
    """

    def __init__(self, dim: int, raw_clip: float = 200.0, norm_clip: float = 5.0,
                 std_floor: float = 1e-2):
        self.dim = int(dim)
        self.raw_clip = raw_clip
        self.norm_clip = norm_clip
        self.std_floor = std_floor
        self.count = 0.0
        self.total = np.zeros(self.dim)
        self.total_sq = np.zeros(self.dim)

    @property
    def mean(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(self.dim)
        return self.total / self.count

    @property
    def std(self) -> np.ndarray:
        if self.count == 0:
            return np.ones(self.dim)
        var = self.total_sq / self.count - self.mean ** 2
        return np.sqrt(np.maximum(var, self.std_floor ** 2))

    def update(self, batch: np.ndarray) -> None:
        b = np.asarray(batch, dtype=float).reshape(-1, self.dim)
        b = np.clip(b, -self.raw_clip, self.raw_clip)
        self.count += b.shape[0]
        self.total += b.sum(axis=0)
        self.total_sq += (b * b).sum(axis=0)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        arr = np.clip(np.asarray(x, dtype=float), -self.raw_clip, self.raw_clip)
        out = (arr - self.mean) / self.std
        return np.clip(out, -self.norm_clip, self.norm_clip)


def gumbel_softmax_sample(logits: np.ndarray, temperature: float, rng: np.random.Generator):
    """Sample a one-hot action via the Gumbel-max trick, plus the soft
    probabilities used for straight-through gradient flow."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(logits, dtype=float)
    noisy = (z + rng.gumbel(size=z.shape)) / temperature
    soft = softmax(noisy, axis=-1)
    hard = np.zeros_like(soft)
    hard[np.argmax(noisy)] = 1.0
    return hard, soft

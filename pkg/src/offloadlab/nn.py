"""Minimal dense network with hand-written backprop, numpy only."""

from __future__ import annotations

import numpy as np


class MLP:
    """Fully connected stack. ReLU on hidden layers; the output layer is
    linear unless ``out_relu`` is set (used for embedding sub-networks)."""

    def __init__(self, sizes, rng: np.random.Generator, out_relu: bool = False):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if any(int(s) < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")
        self.sizes = tuple(int(s) for s in sizes)
        self.out_relu = out_relu
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, (fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    def _apply_relu(self, layer: int) -> bool:
        return layer < len(self.weights) - 1 or self.out_relu

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = x
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if self._apply_relu(layer):
                h = np.maximum(h, 0.0)
        return h

    def forward_cache(self, x: np.ndarray):
        """Forward pass keeping the per-layer inputs and pre-activations."""
        inputs = []
        pre = []
        h = x
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            z = h @ w.T + b
            pre.append(z)
            h = np.maximum(z, 0.0) if self._apply_relu(layer) else z
        return h, (inputs, pre)

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients for every weight/bias plus the gradient w.r.t. the input.

        ``grad_out`` is dLoss/dOutput for the batch passed to forward_cache.
        Returns (grad_weights, grad_biases, grad_input).
        """
        inputs, pre = cache
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.biases)
        g = grad_out
        for layer in range(len(self.weights) - 1, -1, -1):
            if self._apply_relu(layer):
                g = g * (pre[layer] > 0.0)
            grad_w[layer] = g.T @ inputs[layer]
            grad_b[layer] = g.sum(axis=0)
            g = g @ self.weights[layer]
        return grad_w, grad_b, g

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy_from(self, other: "MLP") -> None:
        if self.sizes != other.sizes or self.out_relu != other.out_relu:
            raise ValueError("architecture mismatch")
        for dst, src in zip(self.parameters(), other.parameters()):
            dst[...] = src


class Adam:
    """Adam updates over a fixed parameter list. State is positional, so the
    same optimizer instance must always see the same list."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("lr must be positive")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(params) != len(self._m):
            raise ValueError("parameter list changed size")
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


def sgd_step(params: list[np.ndarray], grads: list[np.ndarray], lr: float) -> None:
    for p, g in zip(params, grads):
        p -= lr * g


def numerical_gradients(loss_fn, params: list[np.ndarray], eps: float = 1e-5) -> list[np.ndarray]:
    """Central finite differences of ``loss_fn()`` w.r.t. every entry of params."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + eps
            hi = loss_fn()
            flat[idx] = keep - eps
            lo = loss_fn()
            flat[idx] = keep
            gflat[idx] = (hi - lo) / (2.0 * eps)
        grads.append(g)
    return grads

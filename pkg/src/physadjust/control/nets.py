"""Small fully connected networks with hand-written backpropagation."""

from __future__ import annotations

import numpy as np


class MLP:
    """ReLU hidden layers and a linear output layer.

    Parameters live in ``self.params`` as [W1, b1, W2, b2, ...] so optimizers
    and Polyak averaging can treat them as a flat list.
    """

    def __init__(self, sizes, rng):
        self.sizes = tuple(int(s) for s in sizes)
        self.params = []
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = np.sqrt(6.0 / (n_in + n_out))
            self.params.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.params.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.params) // 2

    def forward(self, X):
        """Output and the cache needed by :meth:`backward`."""
        h = np.asarray(X, dtype=float)
        cache = [h]
        for i in range(self.n_layers):
            z = h @ self.params[2 * i] + self.params[2 * i + 1]
            h = np.maximum(z, 0.0) if i < self.n_layers - 1 else z
            cache.append(h)
        return h, cache

    def __call__(self, X):
        return self.forward(X)[0]

    def backward(self, cache, d_out):
        """Gradients of a scalar loss w.r.t. params and inputs, given ∂loss/∂output."""
        grads = [None] * len(self.params)
        g = d_out
        for i in reversed(range(self.n_layers)):
            h_in = cache[i]
            grads[2 * i] = h_in.T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.params[2 * i].T
            if i > 0:
                g = g * (cache[i] > 0.0)
        return grads, g

    def copy(self) -> "MLP":
        other = MLP.__new__(MLP)
        other.sizes = self.sizes
        other.params = [p.copy() for p in self.params]
        return other

    def polyak_update(self, source: "MLP", tau: float):
        """self ← (1 - τ) self + τ source."""
        if not 0.0 < tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        for p, q in zip(self.params, source.params):
            p *= 1.0 - tau
            p += tau * q


class Adam:
    def __init__(self, params, lr: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

"""Small dense networks over a flat parameter vector, with hand-coded backprop.

The approximators here are deliberately plain: fully connected layers with a
fixed tanh nonlinearity on the hidden layers and a linear output. Parameters
live in one flat float64 vector, which keeps checkpointing, soft target
updates, and finite-difference gradient verification trivial.
"""

import numpy as np


def glorot_init(widths, rng):
    """Flat parameter vector with uniform Glorot fan-in/fan-out scaling."""
    chunks = []
    for n_in, n_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (n_in + n_out))
        chunks.append(rng.uniform(-limit, limit, size=n_in * n_out))
        chunks.append(np.zeros(n_out))
    return np.concatenate(chunks)


def param_count(widths):
    return sum(n_in * n_out + n_out for n_in, n_out in zip(widths[:-1], widths[1:]))


class Mlp:
    """Multi-layer perceptron y = W_L h_{L-1} + b_L, h_l = tanh(W_l h_{l-1} + b_l).

    ``forward`` caches activations; ``backward`` consumes the cache and
    returns the gradient with respect to the flat parameter vector and to
    the input batch.
    """

    def __init__(self, widths, rng=None, params=None):
        self.widths = tuple(int(w) for w in widths)
        n = param_count(self.widths)
        if params is not None:
            params = np.asarray(params, dtype=float)
            if params.shape != (n,):
                raise ValueError(f"expected {n} parameters for widths {self.widths}")
            self.params = params.copy()
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            self.params = glorot_init(self.widths, rng)
        self._cache = None

    def _views(self, params):
        out = []
        ofs = 0
        for n_in, n_out in zip(self.widths[:-1], self.widths[1:]):
            W = params[ofs:ofs + n_in * n_out].reshape(n_in, n_out)
            ofs += n_in * n_out
            b = params[ofs:ofs + n_out]
            ofs += n_out
            out.append((W, b))
        return out

    @property
    def n_params(self):
        return param_count(self.widths)

    def forward(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [x]
        layers = self._views(self.params)
        h = x
        for i, (W, b) in enumerate(layers):
            z = h @ W + b
            h = z if i == len(layers) - 1 else np.tanh(z)
            acts.append(h)
        self._cache = acts
        return h

    def __call__(self, x):
        return self.forward(x)

    def backward(self, grad_out):
        """Backprop ``dL/dy`` through the cached forward pass.

        Returns (grad_params, grad_input). Hidden activations are tanh, so
        dz = dh * (1 - h^2) reuses the cached outputs directly.
        """
        if self._cache is None:
            raise RuntimeError("backward() called before forward()")
        acts = self._cache
        layers = self._views(self.params)
        grad_params = np.zeros_like(self.params)
        views = self._views(grad_params)
        g = np.atleast_2d(np.asarray(grad_out, dtype=float))
        for i in reversed(range(len(layers))):
            W, _ = layers[i]
            gW, gb = views[i]
            h_prev = acts[i]
            if i != len(layers) - 1:
                g = g * (1.0 - acts[i + 1] ** 2)
            gW += h_prev.T @ g
            gb += g.sum(axis=0)
            g = g @ W.T
        return grad_params, g

    def copy(self):
        return Mlp(self.widths, params=self.params)


class Adam:
    """Adam optimizer over a flat parameter vector (in-place step)."""

    def __init__(self, n_params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grads
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grads * grads
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def squash(u):
    """Map unbounded pre-activations into the unit action box [0, 1]."""
    return 0.5 * (np.tanh(u) + 1.0)


def squash_grad(u):
    """Elementwise derivative of ``squash``."""
    t = np.tanh(u)
    return 0.5 * (1.0 - t * t)

"""Neural network layers with exact forward/backward passes in float64.

Data layout is (batch, channels, height, width) for convolutional layers
and (batch, features) for dense ones.  Every layer caches what its
backward pass needs and accumulates parameter gradients in place, so a
training step is: zero_grads -> forward -> backward -> optimizer step.
Double precision keeps the analytic gradients comparable with central
finite differences at tight tolerance.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Param",
    "Conv2d",
    "BatchNorm",
    "Elu",
    "MaxPool2d",
    "MaxPool3x3Same",
    "Upsample2x",
    "ResizeNearest",
    "Dense",
    "Dropout",
    "softmax",
]


class Param:
    """A learnable array with its gradient accumulator."""

    __slots__ = ("value", "grad", "decay", "name")

    def __init__(self, value: np.ndarray, name: str, decay: bool):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.decay = decay  # participates in L2 regularization
        self.name = name


def _he_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(2.0 / max(fan_in, 1))


class Conv2d:
    """2D convolution, stride 1, zero 'same' padding."""

    def __init__(self, in_ch: int, out_ch: int, ksize: int, rng: np.random.Generator, name: str):
        self.in_ch, self.out_ch, self.ksize = in_ch, out_ch, ksize
        fan_in = in_ch * ksize * ksize
        self.weight = Param(_he_init(rng, (out_ch, in_ch, ksize, ksize), fan_in), f"{name}.W", True)
        self.bias = Param(np.zeros(out_ch), f"{name}.b", False)
        self._cache = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray) -> np.ndarray:
        k = self.ksize
        b, c, h, w = x.shape
        if k == 1:
            xmat = x.transpose(1, 0, 2, 3).reshape(c, -1)
            self._cache = (x.shape, xmat)
            out = (self.weight.value[:, :, 0, 0] @ xmat).reshape(self.out_ch, b, h, w)
            return out.transpose(1, 0, 2, 3) + self.bias.value[None, :, None, None]
        pad = k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        # channel-major im2col: one BLAS product instead of k*k small ones
        cols = np.empty((c * k * k, b * h * w))
        row = 0
        for ci in range(c):
            for i in range(k):
                for j in range(k):
                    cols[row] = xp[:, ci, i : i + h, j : j + w].reshape(-1)
                    row += 1
        self._cache = (x.shape, cols)
        wmat = self.weight.value.reshape(self.out_ch, c * k * k)
        out = (wmat @ cols).reshape(self.out_ch, b, h, w)
        return out.transpose(1, 0, 2, 3) + self.bias.value[None, :, None, None]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        shape, cached = self._cache
        b, c, h, w = shape
        k = self.ksize
        self.bias.grad += dy.sum(axis=(0, 2, 3))
        dymat = dy.transpose(1, 0, 2, 3).reshape(self.out_ch, -1)
        if k == 1:
            xmat = cached
            self.weight.grad[:, :, 0, 0] += dymat @ xmat.T
            dx = (self.weight.value[:, :, 0, 0].T @ dymat).reshape(c, b, h, w)
            return dx.transpose(1, 0, 2, 3)
        pad = k // 2
        cols = cached
        self.weight.grad += (dymat @ cols.T).reshape(self.weight.value.shape)
        wmat = self.weight.value.reshape(self.out_ch, c * k * k)
        dcols = wmat.T @ dymat  # (c*k*k, b*h*w)
        dxp = np.zeros((b, c, h + 2 * pad, w + 2 * pad))
        row = 0
        for ci in range(c):
            for i in range(k):
                for j in range(k):
                    dxp[:, ci, i : i + h, j : j + w] += dcols[row].reshape(b, h, w)
                    row += 1
        return dxp[:, :, pad : pad + h, pad : pad + w]


class BatchNorm:
    """Batch normalization over 2D features or 4D feature maps.

    Training mode normalizes with batch statistics and backpropagates
    through them; evaluation mode uses the running estimates, making
    inference independent of batch composition.
    """

    def __init__(self, n_features: int, name: str, momentum: float = 0.1, eps: float = 1e-5):
        self.gamma = Param(np.ones(n_features), f"{name}.gamma", False)
        self.beta = Param(np.zeros(n_features), f"{name}.beta", False)
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)
        self.momentum = momentum
        self.eps = eps
        self.name = name
        self._cache = None

    def params(self):
        return [self.gamma, self.beta]

    def _shape(self, x):
        if x.ndim == 2:
            return (0,), (1, -1)
        return (0, 2, 3), (1, -1, 1, 1)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        axes, bshape = self._shape(x)
        gamma = self.gamma.value.reshape(bshape)
        beta = self.beta.value.reshape(bshape)
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            n = x.size // x.shape[1]
            unbiased = var * n / max(n - 1, 1)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * unbiased
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean.reshape(bshape)) * inv_std.reshape(bshape)
            self._cache = ("train", xhat, inv_std, axes, bshape, n)
            return gamma * xhat + beta
        inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
        xhat = (x - self.running_mean.reshape(bshape)) * inv_std.reshape(bshape)
        self._cache = ("eval", xhat, inv_std, axes, bshape, 0)
        return gamma * xhat + beta

    def backward(self, dy: np.ndarray) -> np.ndarray:
        mode, xhat, inv_std, axes, bshape, n = self._cache
        self.gamma.grad += (dy * xhat).sum(axis=axes)
        self.beta.grad += dy.sum(axis=axes)
        gamma = self.gamma.value.reshape(bshape)
        if mode == "eval":
            return dy * gamma * inv_std.reshape(bshape)
        dxhat = dy * gamma
        sum_dxhat = dxhat.sum(axis=axes).reshape(bshape)
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes).reshape(bshape)
        return (inv_std.reshape(bshape) / n) * (n * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)


class Elu:
    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        y = np.where(x > 0, x, np.expm1(x))
        self._cache = (x > 0, y)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        pos, y = self._cache
        return dy * np.where(pos, 1.0, y + 1.0)


class MaxPool2d:
    """2x2 max pooling with stride 2.

    Odd trailing rows/columns are dropped, except that a dimension already
    down to one element is passed through unpooled, so repeated pooling
    never empties an axis.
    """

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    @staticmethod
    def out_hw(h: int, w: int) -> tuple[int, int]:
        return max(1, h // 2), max(1, w // 2)

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        ph, pw = (2 if h > 1 else 1), (2 if w > 1 else 1)
        ho, wo = h // ph, w // pw
        xc = x[:, :, : ho * ph, : wo * pw]
        patches = (
            xc.reshape(b, c, ho, ph, wo, pw).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho, wo, ph * pw)
        )
        idx = patches.argmax(axis=-1)
        out = np.take_along_axis(patches, idx[..., None], axis=-1)[..., 0]
        self._cache = (x.shape, (ph, pw), idx)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        (b, c, h, w), (ph, pw), idx = self._cache
        ho, wo = h // ph, w // pw
        dpatches = np.zeros((b, c, ho, wo, ph * pw))
        np.put_along_axis(dpatches, idx[..., None], dy[..., None], axis=-1)
        dx = np.zeros((b, c, h, w))
        dx[:, :, : ho * ph, : wo * pw] = (
            dpatches.reshape(b, c, ho, wo, ph, pw).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho * ph, wo * pw)
        )
        return dx


class MaxPool3x3Same:
    """3x3 max pooling, stride 1, same output size (edges padded with -inf)."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)), constant_values=-np.inf)
        windows = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(2, 3))
        flat = windows.reshape(b, c, h, w, 9)
        idx = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        self._cache = (x.shape, idx)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        (b, c, h, w), idx = self._cache
        dxp = np.zeros((b, c, h + 2, w + 2))
        di, dj = np.divmod(idx, 3)
        rows = di + np.arange(h)[None, None, :, None]
        cols = dj + np.arange(w)[None, None, None, :]
        bi = np.arange(b)[:, None, None, None]
        ci = np.arange(c)[None, :, None, None]
        np.add.at(dxp, (bi, ci, rows, cols), dy)
        return dxp[:, :, 1 : 1 + h, 1 : 1 + w]


class Upsample2x:
    """Nearest-neighbor 2x upsampling."""

    def __init__(self):
        self._shape = None

    def params(self):
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._shape = x.shape
        return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        b, c, h, w = self._shape
        return dy.reshape(b, c, h, 2, w, 2).sum(axis=(3, 5))


class ResizeNearest:
    """Fixed (non-learned) nearest-neighbor resize to a target height/width."""

    def __init__(self, out_hw: tuple[int, int]):
        self.out_hw = out_hw
        self._cache = None

    def params(self):
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        ho, wo = self.out_hw
        rows = np.minimum((np.arange(ho) * h) // ho, h - 1)
        cols = np.minimum((np.arange(wo) * w) // wo, w - 1)
        self._cache = (x.shape, rows, cols)
        return x[:, :, rows][:, :, :, cols]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        (b, c, h, w), rows, cols = self._cache
        tmp = np.zeros((b, c, h, len(cols)))
        np.add.at(tmp, (slice(None), slice(None), rows), dy)
        dx = np.zeros((b, c, h, w))
        np.add.at(dx.transpose(0, 1, 3, 2), (slice(None), slice(None), cols), tmp.transpose(0, 1, 3, 2))
        return dx


class Dense:
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, name: str):
        self.weight = Param(_he_init(rng, (in_features, out_features), in_features), f"{name}.W", True)
        self.bias = Param(np.zeros(out_features), f"{name}.b", False)
        self._cache = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._cache = x
        return x @ self.weight.value + self.bias.value

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._cache
        self.weight.grad += x.T @ dy
        self.bias.grad += dy.sum(axis=0)
        return dy @ self.weight.value.T


class Dropout:
    """Inverted dropout; identity in evaluation mode."""

    def __init__(self, p: float):
        if not 0 <= p < 1:
            raise ValueError("dropout probability must be in [0, 1)")
        self.p = p
        self._mask = None

    def params(self):
        return []

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None) -> np.ndarray:
        if not train or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs a random generator")
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return dy
        return dy * self._mask


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)

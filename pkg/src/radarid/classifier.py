"""Convolutional gait classifier with a reconstruction branch.

The encoder stacks four inception blocks (parallel 1x1, reduced 3x3,
reduced 5x5 and max-pool branches, channel-concatenated, with an additive
1x1-projected skip connection per block), each followed by 2x2 max
pooling, which makes the decoder's four 2x2 upsampling steps mirror the
encoder geometry.
The flattened encoder output is the code; a fully connected head with
dropout and softmax produces class probabilities, and a four-layer
upsampling decoder reconstructs the input as a training-time regularizer.
Batch normalization and ELU activations run through the encoder and the
FC head; the decoder uses plain convolutions with a sigmoid output.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .fileio import FileFormatError, expect_magic, read_exact, read_struct
from .layers import (
    BatchNorm,
    Conv2d,
    Dense,
    Dropout,
    Elu,
    MaxPool2d,
    MaxPool3x3Same,
    Param,
    ResizeNearest,
    Upsample2x,
    softmax,
)

__all__ = ["ModelConfig", "InceptionBlock", "GaitClassifier", "loss_terms", "total_loss"]

PROB_EPS = 1e-7  # cross-entropy clamp; the losses are undefined at exactly 0/1
CHECKPOINT_MAGIC = b"IDN1"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters.

    ``scale`` shrinks every feature-map count (and the FC hidden width)
    for desk-scale runs; 1.0 reproduces the full-width network.
    """

    n_classes: int
    n_doppler_bins: int = 200
    window_frames: int = 30
    ib_maps: tuple[int, ...] = (16, 32, 64, 16)
    fc_hidden: int = 128
    decoder_maps: tuple[int, ...] = (32, 32, 16, 1)
    dropout_p: float = 0.5
    scale: float = 1.0

    def __post_init__(self):
        if len(self.ib_maps) != 4:
            raise ValueError("the encoder uses exactly four inception blocks")
        if self.decoder_maps[-1] != 1:
            raise ValueError("the decoder must end in a single feature map")
        if self.n_classes < 2:
            raise ValueError("need at least two classes")

    def scaled_ib_maps(self) -> tuple[int, ...]:
        return tuple(max(1, round(m * self.scale)) for m in self.ib_maps)

    def scaled_fc_hidden(self) -> int:
        return max(2, round(self.fc_hidden * self.scale))

    def scaled_decoder_maps(self) -> tuple[int, ...]:
        inner = tuple(max(1, round(m * self.scale)) for m in self.decoder_maps[:-1])
        return inner + (1,)

    def to_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "n_doppler_bins": self.n_doppler_bins,
            "window_frames": self.window_frames,
            "ib_maps": list(self.ib_maps),
            "fc_hidden": self.fc_hidden,
            "decoder_maps": list(self.decoder_maps),
            "dropout_p": self.dropout_p,
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            n_classes=int(d["n_classes"]),
            n_doppler_bins=int(d["n_doppler_bins"]),
            window_frames=int(d["window_frames"]),
            ib_maps=tuple(d["ib_maps"]),
            fc_hidden=int(d["fc_hidden"]),
            decoder_maps=tuple(d["decoder_maps"]),
            dropout_p=float(d["dropout_p"]),
            scale=float(d["scale"]),
        )


def branch_widths(out_maps: int) -> dict[str, int]:
    """Split a block's output maps across the four branches.

    Even split with the remainder on the 3x3 branch; every branch keeps at
    least one map, so blocks narrower than four maps emit slightly more
    channels than nominal.
    """
    base, rem = divmod(out_maps, 4)
    return {
        "one": max(1, base),
        "three": max(1, base + rem),
        "five": max(1, base),
        "pool": max(1, base),
    }


class InceptionBlock:
    """Multi-scale convolution block with a projected residual connection."""

    def __init__(self, in_ch: int, out_maps: int, rng: np.random.Generator, name: str):
        widths = branch_widths(out_maps)
        self.widths = widths
        self.out_ch = sum(widths.values())
        red3 = max(1, widths["three"] // 2)
        red5 = max(1, widths["five"] // 2)

        self.conv1 = Conv2d(in_ch, widths["one"], 1, rng, f"{name}.b1.conv")
        self.bn1 = BatchNorm(widths["one"], f"{name}.b1.bn")
        self.act1 = Elu()

        self.red3 = Conv2d(in_ch, red3, 1, rng, f"{name}.b3.red")
        self.bn3r = BatchNorm(red3, f"{name}.b3.red_bn")
        self.act3r = Elu()
        self.conv3 = Conv2d(red3, widths["three"], 3, rng, f"{name}.b3.conv")
        self.bn3 = BatchNorm(widths["three"], f"{name}.b3.bn")
        self.act3 = Elu()

        self.red5 = Conv2d(in_ch, red5, 1, rng, f"{name}.b5.red")
        self.bn5r = BatchNorm(red5, f"{name}.b5.red_bn")
        self.act5r = Elu()
        self.conv5 = Conv2d(red5, widths["five"], 5, rng, f"{name}.b5.conv")
        self.bn5 = BatchNorm(widths["five"], f"{name}.b5.bn")
        self.act5 = Elu()

        self.pool = MaxPool3x3Same()
        self.proj = Conv2d(in_ch, widths["pool"], 1, rng, f"{name}.bp.proj")
        self.bnp = BatchNorm(widths["pool"], f"{name}.bp.bn")
        self.actp = Elu()

        self.skip = Conv2d(in_ch, self.out_ch, 1, rng, f"{name}.skip")

    def layers(self):
        return [
            self.conv1, self.bn1, self.red3, self.bn3r, self.conv3, self.bn3,
            self.red5, self.bn5r, self.conv5, self.bn5, self.proj, self.bnp, self.skip,
        ]

    def params(self):
        out = []
        for layer in self.layers():
            out.extend(layer.params())
        return out

    def batchnorms(self):
        return [self.bn1, self.bn3r, self.bn3, self.bn5r, self.bn5, self.bnp]

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        b1 = self.act1.forward(self.bn1.forward(self.conv1.forward(x), train))
        b3 = self.act3r.forward(self.bn3r.forward(self.red3.forward(x), train))
        b3 = self.act3.forward(self.bn3.forward(self.conv3.forward(b3), train))
        b5 = self.act5r.forward(self.bn5r.forward(self.red5.forward(x), train))
        b5 = self.act5.forward(self.bn5.forward(self.conv5.forward(b5), train))
        bp = self.actp.forward(self.bnp.forward(self.proj.forward(self.pool.forward(x)), train))
        concat = np.concatenate([b1, b3, b5, bp], axis=1)
        self._splits = np.cumsum([b1.shape[1], b3.shape[1], b5.shape[1]])
        return concat + self.skip.forward(x)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        dx = self.skip.backward(dy)
        d1, d3, d5, dp = np.split(dy, self._splits, axis=1)
        dx += self.conv1.backward(self.bn1.backward(self.act1.backward(d1)))
        g3 = self.conv3.backward(self.bn3.backward(self.act3.backward(d3)))
        dx += self.red3.backward(self.bn3r.backward(self.act3r.backward(g3)))
        g5 = self.conv5.backward(self.bn5.backward(self.act5.backward(d5)))
        dx += self.red5.backward(self.bn5r.backward(self.act5r.backward(g5)))
        gp = self.proj.backward(self.bnp.backward(self.actp.backward(dp)))
        dx += self.pool.backward(gp)
        return dx


class GaitClassifier:
    """Encoder + FC classification head + reconstruction decoder."""

    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        h, w = config.n_doppler_bins, config.window_frames

        self.blocks = []
        self.pools = []
        in_ch = 1
        for i, maps in enumerate(config.scaled_ib_maps()):
            block = InceptionBlock(in_ch, maps, rng, f"enc.ib{i}")
            self.blocks.append(block)
            in_ch = block.out_ch
            self.pools.append(MaxPool2d())
            h, w = MaxPool2d.out_hw(h, w)
        self.code_shape = (in_ch, h, w)
        code_len = in_ch * h * w

        hidden = config.scaled_fc_hidden()
        self.fc1 = Dense(code_len, hidden, rng, "fc.hidden")
        self.fc_bn = BatchNorm(hidden, "fc.bn")
        self.fc_act = Elu()
        self.fc_drop = Dropout(config.dropout_p)
        self.fc2 = Dense(hidden, config.n_classes, rng, "fc.out")

        dec_maps = config.scaled_decoder_maps()
        self.dec_ups = [Upsample2x() for _ in dec_maps]
        self.dec_convs = []
        self.dec_acts = [Elu() for _ in dec_maps[:-1]]
        ch = in_ch
        for i, maps in enumerate(dec_maps):
            self.dec_convs.append(Conv2d(ch, maps, 3, rng, f"dec.conv{i}"))
            ch = maps
        self.dec_resize = ResizeNearest((config.n_doppler_bins, config.window_frames))
        self._cache = None

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[Param]:
        out = []
        for block in self.blocks:
            out.extend(block.params())
        out.extend(self.fc1.params())
        out.extend(self.fc_bn.params())
        out.extend(self.fc2.params())
        for conv in self.dec_convs:
            out.extend(conv.params())
        return out

    def batchnorms(self) -> list[BatchNorm]:
        out = []
        for block in self.blocks:
            out.extend(block.batchnorms())
        out.append(self.fc_bn)
        return out

    def zero_grads(self):
        for p in self.parameters():
            p.grad[...] = 0.0

    def parameter_count(self) -> int:
        return int(sum(p.value.size for p in self.parameters()))

    # -- forward / backward --------------------------------------------------

    def forward(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None):
        """Run windows through the network.

        ``x`` is (batch, n_doppler_bins, window_frames) with values in
        [0, 1].  Returns (class probabilities, reconstruction, code).
        """
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[None]
        b = x.shape[0]
        expected = (self.config.n_doppler_bins, self.config.window_frames)
        if x.shape[1:] != expected:
            raise ValueError(f"window shape {x.shape[1:]} does not match config {expected}")
        h = x[:, None, :, :]
        for block, pool in zip(self.blocks, self.pools):
            h = pool.forward(block.forward(h, train))
        code = h.reshape(b, -1)

        z = self.fc1.forward(code)
        z = self.fc_bn.forward(z, train)
        z = self.fc_act.forward(z)
        z = self.fc_drop.forward(z, train, rng)
        logits = self.fc2.forward(z)
        proba = softmax(logits)

        d = h
        for i, conv in enumerate(self.dec_convs):
            d = self.dec_ups[i].forward(d)
            d = conv.forward(d)
            if i < len(self.dec_convs) - 1:
                d = self.dec_acts[i].forward(d)
        recon_pre = self.dec_resize.forward(d)[:, 0]
        recon = 1.0 / (1.0 + np.exp(-recon_pre))

        self._cache = (proba, recon, b)
        return proba, recon, code

    def backward(self, y_onehot: np.ndarray, target: np.ndarray, alpha_rec: float):
        """Accumulate gradients of the weighted loss for the last forward pass."""
        proba, recon, b = self._cache
        n_pixels = self.config.n_doppler_bins * self.config.window_frames

        dlogits = (1.0 - alpha_rec) * (proba - y_onehot) / b
        dz = self.fc2.backward(dlogits)
        dz = self.fc_drop.backward(dz)
        dz = self.fc_act.backward(dz)
        dz = self.fc_bn.backward(dz)
        dcode = self.fc1.backward(dz)

        drecon_pre = alpha_rec * (recon - target) / (b * n_pixels)
        dd = self.dec_resize.backward(drecon_pre[:, None, :, :])
        for i in reversed(range(len(self.dec_convs))):
            if i < len(self.dec_convs) - 1:
                dd = self.dec_acts[i].backward(dd)
            dd = self.dec_convs[i].backward(dd)
            dd = self.dec_ups[i].backward(dd)

        dh = dcode.reshape((-1,) + self.code_shape) + dd
        for i in reversed(range(len(self.blocks))):
            dh = self.pools[i].backward(dh)
            dh = self.blocks[i].backward(dh)

    def predict_proba(self, windows: np.ndarray) -> np.ndarray:
        """Class probabilities for a batch of windows, one forward pass."""
        proba, _, _ = self.forward(windows, train=False)
        return proba

    # -- checkpoints ---------------------------------------------------------

    def _state_arrays(self):
        arrays = [(p.name, p.value) for p in self.parameters()]
        for bn in self.batchnorms():
            arrays.append((f"{bn.name}.running_mean", bn.running_mean))
            arrays.append((f"{bn.name}.running_var", bn.running_var))
        return arrays

    def save(self, path):
        arrays = self._state_arrays()
        header = {
            "config": self.config.to_dict(),
            "arrays": [{"name": n, "shape": list(a.shape)} for n, a in arrays],
        }
        blob = json.dumps(header).encode()
        with open(path, "wb") as f:
            f.write(CHECKPOINT_MAGIC)
            f.write(struct.pack("<II", CHECKPOINT_VERSION, len(blob)))
            f.write(blob)
            for _, a in arrays:
                f.write(a.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "GaitClassifier":
        with open(path, "rb") as f:
            expect_magic(f, CHECKPOINT_MAGIC)
            version, blob_len = read_struct(f, "<II")
            if version != CHECKPOINT_VERSION:
                raise FileFormatError(f"unsupported checkpoint version {version}")
            header = json.loads(read_exact(f, blob_len))
            model = cls(ModelConfig.from_dict(header["config"]))
            arrays = dict(model._state_arrays())
            for spec in header["arrays"]:
                name, shape = spec["name"], tuple(spec["shape"])
                if name not in arrays:
                    raise FileFormatError(f"checkpoint array {name!r} not in model")
                if arrays[name].shape != shape:
                    raise FileFormatError(f"shape mismatch for {name!r}")
                data = np.frombuffer(read_exact(f, arrays[name].size * 8), dtype="<f8")
                arrays[name][...] = data.reshape(shape)
        return model


def loss_terms(proba, recon, y_onehot, target) -> tuple[float, float]:
    """Mean classification cross-entropy and mean per-pixel reconstruction BCE."""
    proba = np.clip(proba, PROB_EPS, 1.0)
    cls = float(-(y_onehot * np.log(proba)).sum(axis=1).mean())
    rec_p = np.clip(recon, PROB_EPS, 1.0 - PROB_EPS)
    bce = -(target * np.log(rec_p) + (1.0 - target) * np.log(1.0 - rec_p))
    rec = float(bce.reshape(bce.shape[0], -1).mean(axis=1).mean())
    return cls, rec


def total_loss(proba, recon, y_onehot, target, alpha_rec: float) -> float:
    """Weighted sum of the classification and reconstruction terms."""
    cls, rec = loss_terms(proba, recon, y_onehot, target)
    return (1.0 - alpha_rec) * cls + alpha_rec * rec

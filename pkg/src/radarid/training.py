"""Classifier training: augmentations, Nesterov SGD and the epoch loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import GaitClassifier, ModelConfig, loss_terms

__all__ = ["TrainConfig", "NesterovSGD", "augment", "train", "one_hot"]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-3
    momentum: float = 0.95
    l2: float = 3e-3
    lr_factor: float = 0.5
    patience: int = 5  # lr halves once stagnation exceeds this many epochs
    val_fraction: float = 0.1
    alpha_rec: float = 0.6
    batch_size: int = 32
    max_epochs: int = 60
    seed: int = 0
    augment_data: bool = True

    def __post_init__(self):
        if not 0 <= self.alpha_rec <= 1:
            raise ValueError("alpha_rec must lie in [0, 1]")
        if not 0 < self.val_fraction < 1:
            raise ValueError("val_fraction must lie in (0, 1)")


class NesterovSGD:
    """SGD with Nesterov momentum and L2 weight decay on the conv/dense weights.

    The decay implements a lambda * sum(w^2) penalty, so its gradient
    contribution is 2 * lambda * w.
    """

    def __init__(self, params, learning_rate: float, momentum: float, l2: float):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.l2 = l2
        self._velocity = [np.zeros_like(p.value) for p in self.params]

    def penalty(self) -> float:
        return self.l2 * sum(float(np.sum(p.value**2)) for p in self.params if p.decay)

    def step(self):
        for p, vel in zip(self.params, self._velocity):
            grad = p.grad
            if not np.all(np.isfinite(grad)):
                raise FloatingPointError(f"non-finite gradient in {p.name}")
            if p.decay and self.l2 > 0:
                grad = grad + 2.0 * self.l2 * p.value
            vel *= self.momentum
            vel += grad
            p.value -= self.learning_rate * (grad + self.momentum * vel)


def augment(window: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Four corrupted variants of one training window.

    Gaussian noise (variance 0.05, clamped back to [0, 1]), random pixel
    corruption (zeroed with probability 0.3), time masking (8 adjacent
    columns zeroed) and frequency masking (20 adjacent rows zeroed).  The
    reconstruction target for every variant stays the original window.
    """
    h, w = window.shape
    noisy = np.clip(window + rng.normal(0.0, np.sqrt(0.05), window.shape), 0.0, 1.0)
    corrupted = window * (rng.random(window.shape) >= 0.3)
    t_mask = window.copy()
    span_t = min(8, w)
    start = int(rng.integers(0, w - span_t + 1))
    t_mask[:, start : start + span_t] = 0.0
    f_mask = window.copy()
    span_f = min(20, h)
    start = int(rng.integers(0, h - span_f + 1))
    f_mask[start : start + span_f, :] = 0.0
    return [noisy, corrupted, t_mask, f_mask]


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class PlateauSchedule:
    """Halve the learning rate once stagnation exceeds the patience.

    An epoch counts as stagnant when the validation loss fails to improve
    on the best seen so far; more than ``patience`` consecutive stagnant
    epochs trigger one decay, after which the counter restarts.
    """

    def __init__(self, learning_rate: float, factor: float = 0.5, patience: int = 5):
        self.learning_rate = learning_rate
        self.factor = factor
        self.patience = patience
        self.best = np.inf
        self.stagnant = 0

    def update(self, val_loss: float) -> bool:
        """Record one epoch's validation loss; True if this epoch improved."""
        if val_loss < self.best - 1e-9:
            self.best = val_loss
            self.stagnant = 0
            return True
        self.stagnant += 1
        if self.stagnant > self.patience:
            self.learning_rate *= self.factor
            self.stagnant = 0
        return False


@dataclass
class TrainHistory:
    rows: list[dict] = field(default_factory=list)

    def append(self, **kw):
        self.rows.append(kw)

    def to_csv(self, path):
        keys = ["epoch", "learning_rate", "train_loss", "val_loss", "val_accuracy"]
        with open(path, "w") as f:
            f.write(",".join(keys) + "\n")
            for row in self.rows:
                f.write(",".join(f"{row[k]:.6g}" if k != "epoch" else str(row[k]) for k in keys) + "\n")


def _batched_eval(model, windows, labels_1h, alpha_rec, batch_size=64):
    total = 0.0
    correct = 0
    for s in range(0, len(windows), batch_size):
        xb = windows[s : s + batch_size]
        yb = labels_1h[s : s + batch_size]
        proba, recon, _ = model.forward(xb, train=False)
        cls, rec = loss_terms(proba, recon, yb, xb)
        total += ((1 - alpha_rec) * cls + alpha_rec * rec) * len(xb)
        correct += int((proba.argmax(axis=1) == yb.argmax(axis=1)).sum())
    return total / len(windows), correct / len(windows)


def train(
    windows: np.ndarray,
    labels: np.ndarray,
    model_cfg: ModelConfig,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[GaitClassifier, TrainHistory]:
    """Train a classifier on labeled windows; returns the best-validation model.

    The data is split 90/10 into training and validation; the training
    split is enlarged with the four augmentations (reconstruction targets
    stay the originals).  The learning rate halves whenever the validation
    loss stagnates for more than ``patience`` consecutive epochs.
    """
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("training needs at least two classes")
    if model_cfg.n_classes <= int(labels.max()):
        raise ValueError("model has fewer classes than the labels require")

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(windows))
    n_val = max(1, int(round(cfg.val_fraction * len(windows))))
    val_idx, train_idx = order[:n_val], order[n_val:]
    val_x, val_y = windows[val_idx], labels[val_idx]

    inputs, targets, ys = [], [], []
    for i in train_idx:
        inputs.append(windows[i])
        targets.append(windows[i])
        ys.append(labels[i])
        if cfg.augment_data:
            for variant in augment(windows[i], rng):
                inputs.append(variant)
                targets.append(windows[i])
                ys.append(labels[i])
    inputs = np.stack(inputs)
    targets = np.stack(targets)
    ys_1h = one_hot(np.asarray(ys), model_cfg.n_classes)
    val_y1h = one_hot(val_y, model_cfg.n_classes)

    model = GaitClassifier(model_cfg, seed=cfg.seed)
    opt = NesterovSGD(model.parameters(), cfg.learning_rate, cfg.momentum, cfg.l2)
    schedule = PlateauSchedule(cfg.learning_rate, cfg.lr_factor, cfg.patience)
    history = TrainHistory()

    best_params = None
    for epoch in range(cfg.max_epochs):
        perm = rng.permutation(len(inputs))
        epoch_loss = 0.0
        for s in range(0, len(perm), cfg.batch_size):
            idx = perm[s : s + cfg.batch_size]
            xb, tb, yb = inputs[idx], targets[idx], ys_1h[idx]
            model.zero_grads()
            proba, recon, _ = model.forward(xb, train=True, rng=rng)
            cls, rec = loss_terms(proba, recon, yb, tb)
            loss = (1 - cfg.alpha_rec) * cls + cfg.alpha_rec * rec
            if not np.isfinite(loss):
                raise FloatingPointError(f"non-finite training loss at epoch {epoch}")
            model.backward(yb, tb, cfg.alpha_rec)
            opt.step()
            epoch_loss += loss * len(idx)
        epoch_loss /= len(inputs)

        val_loss, val_acc = _batched_eval(model, val_x, val_y1h, cfg.alpha_rec)
        history.append(
            epoch=epoch,
            learning_rate=opt.learning_rate,
            train_loss=epoch_loss,
            val_loss=val_loss,
            val_accuracy=val_acc,
        )
        if schedule.update(val_loss):
            best_params = [p.value.copy() for p in model.parameters()]
            best_running = [(bn.running_mean.copy(), bn.running_var.copy()) for bn in model.batchnorms()]
        opt.learning_rate = schedule.learning_rate

    if best_params is not None:
        for p, value in zip(model.parameters(), best_params):
            p.value[...] = value
        for bn, (mean, var) in zip(model.batchnorms(), best_running):
            bn.running_mean[...] = mean
            bn.running_var[...] = var
    return model, history

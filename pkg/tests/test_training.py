"""Augmentations, the optimizer and the training loop."""

import numpy as np
import pytest

from radarid.classifier import GaitClassifier, ModelConfig, total_loss
from radarid.training import NesterovSGD, TrainConfig, augment, one_hot, train

TINY = ModelConfig(
    n_classes=2,
    n_doppler_bins=24,
    window_frames=10,
    ib_maps=(2, 2, 2, 2),
    fc_hidden=8,
    decoder_maps=(4, 4, 2, 1),
    dropout_p=0.3,
)


def test_augment_produces_four_variants():
    rng = np.random.default_rng(0)
    x = rng.random((200, 30))
    variants = augment(x, rng)
    assert len(variants) == 4
    for v in variants:
        assert v.shape == x.shape
        assert v.min() >= 0.0 and v.max() <= 1.0


def test_augment_time_mask_exact_columns():
    rng = np.random.default_rng(1)
    x = np.ones((200, 30))
    _, _, t_mask, _ = augment(x, rng)
    zero_cols = np.flatnonzero((t_mask == 0).all(axis=0))
    assert len(zero_cols) == 8
    assert np.all(np.diff(zero_cols) == 1)  # adjacent


def test_augment_freq_mask_exact_rows():
    rng = np.random.default_rng(2)
    x = np.ones((200, 30))
    _, _, _, f_mask = augment(x, rng)
    zero_rows = np.flatnonzero((f_mask == 0).all(axis=1))
    assert len(zero_rows) == 20
    assert np.all(np.diff(zero_rows) == 1)


def test_augment_corruption_rate():
    x = np.ones((200, 30))
    rates = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        _, corrupted, _, _ = augment(x, rng)
        rates.append((corrupted == 0).mean())
    assert all(0.27 <= r <= 0.33 for r in rates)


def test_augment_noise_statistics():
    rng = np.random.default_rng(3)
    x = np.full((200, 30), 0.5)
    noisy, _, _, _ = augment(x, rng)
    delta = noisy - x
    assert abs(float(delta.var()) - 0.05) < 0.01
    assert abs(float(delta.mean())) < 0.02


def test_optimizer_zero_learning_rate_is_identity():
    model = GaitClassifier(TINY, seed=0)
    before = [p.value.copy() for p in model.parameters()]
    opt = NesterovSGD(model.parameters(), learning_rate=0.0, momentum=0.95, l2=3e-3)
    rng = np.random.default_rng(4)
    x = rng.random((4, 24, 10))
    y = one_hot(rng.integers(0, 2, 4), 2)
    model.zero_grads()
    model.forward(x, train=True, rng=rng)
    model.backward(y, x, 0.6)
    opt.step()
    for p, b in zip(model.parameters(), before):
        np.testing.assert_array_equal(p.value, b)


def test_single_example_loss_decreases():
    rng = np.random.default_rng(5)
    x = rng.random((1, 24, 10))
    y = one_hot(np.array([1]), 2)
    decreased = 0
    for seed in range(5):
        model = GaitClassifier(TINY, seed=seed)
        opt = NesterovSGD(model.parameters(), learning_rate=1e-3, momentum=0.0, l2=0.0)
        proba, recon, _ = model.forward(x, train=False)
        before = total_loss(proba, recon, y, x, 0.6)
        model.zero_grads()
        model.forward(x, train=True, rng=np.random.default_rng(0))
        model.backward(y, x, 0.6)
        opt.step()
        proba, recon, _ = model.forward(x, train=False)
        after = total_loss(proba, recon, y, x, 0.6)
        if after < before:
            decreased += 1
    assert decreased >= 4


def test_optimizer_flags_non_finite_gradient():
    model = GaitClassifier(TINY, seed=0)
    opt = NesterovSGD(model.parameters(), 1e-3, 0.9, 0.0)
    model.parameters()[0].grad[...] = np.nan
    with pytest.raises(FloatingPointError, match="non-finite"):
        opt.step()


def separable_dataset(n_per_class=40, seed=0):
    """Two synthetic stripe patterns of different periods."""
    rng = np.random.default_rng(seed)
    windows, labels = [], []
    for label, period in ((0, 4), (1, 9)):
        for _ in range(n_per_class):
            t = np.arange(10)
            row = np.arange(24)[:, None]
            phase = rng.uniform(0, 2 * np.pi)
            img = 0.5 + 0.5 * np.sin(2 * np.pi * (t[None, :] / period) + phase) * np.exp(
                -0.5 * ((row - 12) / 6.0) ** 2
            )
            img += rng.normal(0, 0.05, img.shape)
            windows.append(np.clip(img, 0, 1))
            labels.append(label)
    return np.stack(windows), np.array(labels)


def test_training_learns_separable_classes():
    windows, labels = separable_dataset()
    cfg = TrainConfig(max_epochs=18, batch_size=16, seed=1)
    model, history = train(windows, labels, TINY, cfg)
    assert history.rows[-1]["val_accuracy"] >= 0.95
    proba = model.predict_proba(windows[:10])
    assert (proba.argmax(axis=1) == labels[:10]).mean() >= 0.9


def test_training_is_seed_deterministic():
    windows, labels = separable_dataset(n_per_class=12)
    cfg = TrainConfig(max_epochs=3, batch_size=8, seed=7)
    _, h1 = train(windows, labels, TINY, cfg)
    _, h2 = train(windows, labels, TINY, cfg)
    assert h1.rows == h2.rows


def test_training_rejects_single_class():
    windows = np.random.default_rng(0).random((10, 24, 10))
    labels = np.zeros(10, dtype=int)
    with pytest.raises(ValueError, match="two classes"):
        train(windows, labels, TINY, TrainConfig())


def test_lr_halves_after_six_stagnant_epochs():
    from radarid.training import PlateauSchedule

    schedule = PlateauSchedule(learning_rate=1.0, factor=0.5, patience=5)
    schedule.update(0.5)  # becomes the best epoch
    for _ in range(5):
        schedule.update(0.5)  # five stagnant epochs: no decay yet
        assert schedule.learning_rate == 1.0
    schedule.update(0.5)  # the sixth stagnant epoch halves once
    assert schedule.learning_rate == 0.5
    schedule.update(0.5)
    assert schedule.learning_rate == 0.5  # counter restarted
    # an improvement resets everything
    schedule.update(0.4)
    for _ in range(5):
        schedule.update(0.4)
    assert schedule.learning_rate == 0.5
    schedule.update(0.4)
    assert schedule.learning_rate == 0.25


def test_history_csv(tmp_path):
    windows, labels = separable_dataset(n_per_class=10, seed=4)
    cfg = TrainConfig(max_epochs=2, batch_size=8, seed=0)
    _, history = train(windows, labels, TINY, cfg)
    path = tmp_path / "history.csv"
    history.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,learning_rate,train_loss,val_loss,val_accuracy"
    assert len(lines) == 3

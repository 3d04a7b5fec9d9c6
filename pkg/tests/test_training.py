import numpy as np
import pytest

from vggsvm.nn.training import TrainConfig, TrainingDivergedError, evaluate_network, train_network
from vggsvm.nn.vgg import VggConfig, build_vgg


def _tiny_net(seed=0):
    config = VggConfig.from_variant("vgg11", input_side=32, channel_scale=1 / 16, fc_widths=(32, 16, 2))
    return build_vgg(config, seed=seed)


@pytest.fixture
def one_sample(rng):
    X = rng.random((1, 3, 32, 32)).astype(np.float32)
    return X, np.array([1])


def test_zero_learning_rate_is_null_update(blob_arrays):
    X, y = blob_arrays
    net = _tiny_net(seed=6)
    before = [p.copy() for p in net.parameters()]
    train_network(net, X[:16], y[:16], TrainConfig(learning_rate=0.0, epochs=2, batch_size=4, seed=0))
    for b, p in zip(before, net.parameters()):
        assert np.array_equal(b, p)


def test_single_sample_loss_strictly_decreases(one_sample):
    X, y = one_sample
    net = _tiny_net(seed=0)
    losses = []
    for step in range(10):
        h = train_network(net, X, y, TrainConfig(learning_rate=0.05, epochs=1, batch_size=1, momentum=0.0, seed=0))
        losses.append(h.records[-1].train_loss)
    assert all(a > b for a, b in zip(losses, losses[1:])), losses


def test_blob_training_reaches_95_percent(blob_arrays):
    X, y = blob_arrays
    # deterministic stratified halves: even rows train, odd rows test
    tr, te = np.arange(0, len(X), 2), np.arange(1, len(X), 2)
    config = VggConfig.from_variant("vgg11", input_side=32, channel_scale=1 / 8)
    net = build_vgg(config, seed=1)
    tc = TrainConfig(learning_rate=0.001, epochs=15, batch_size=8, seed=3)
    history = train_network(net, X[tr], y[tr], tc, eval_set=(X[te], y[te]))
    assert history.records[-1].test_accuracy >= 0.95


def test_history_shape_and_losses(blob_arrays):
    X, y = blob_arrays
    net = _tiny_net(seed=2)
    history = train_network(
        net, X[:20], y[:20], TrainConfig(epochs=3, batch_size=8, seed=0), eval_set=(X[20:30], y[20:30])
    )
    assert len(history) == 3
    for i, rec in enumerate(history):
        assert rec.epoch == i
        assert rec.train_loss >= 0.0
        assert rec.test_loss >= 0.0
        assert 0.0 <= rec.train_accuracy <= 1.0


def test_history_csv_format(tmp_path, blob_arrays):
    X, y = blob_arrays
    net = _tiny_net(seed=2)
    history = train_network(
        net, X[:8], y[:8], TrainConfig(epochs=2, batch_size=4, seed=0), eval_set=(X[8:12], y[8:12])
    )
    path = tmp_path / "train_log.csv"
    history.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,train_acc,train_loss,test_acc,test_loss"
    assert len(lines) == 3
    assert lines[1].startswith("0,")
    assert len(lines[1].split(",")) == 5


def test_seeded_training_reproducible(blob_arrays):
    X, y = blob_arrays
    final = []
    for _ in range(2):
        net = _tiny_net(seed=7)
        train_network(net, X[:24], y[:24], TrainConfig(epochs=2, batch_size=8, seed=11))
        final.append([p.copy() for p in net.parameters()])
    for a, b in zip(*final):
        assert np.array_equal(a, b)


def test_divergence_guard(one_sample):
    X, y = one_sample
    X4 = np.repeat(X, 4, axis=0)
    y4 = np.array([1, 0, 1, 0])
    net = _tiny_net(seed=0)
    with np.errstate(all="ignore"), pytest.raises(TrainingDivergedError) as err:
        train_network(net, X4, y4, TrainConfig(learning_rate=1e18, epochs=50, batch_size=2, seed=0))
    assert err.value.epoch >= 0


def test_evaluate_network_counts(blob_arrays):
    X, y = blob_arrays
    net = _tiny_net(seed=0)
    acc, loss = evaluate_network(net, X[:10], y[:10], batch_size=4)
    assert 0.0 <= acc <= 1.0
    assert loss >= 0.0


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)

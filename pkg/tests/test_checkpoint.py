import numpy as np
import pytest

from vggsvm.nn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from vggsvm.nn.vgg import VggConfig, build_vgg


@pytest.fixture
def net(rng):
    config = VggConfig.from_variant("vgg13", input_side=32, channel_scale=1 / 32, fc_widths=(16, 8, 2))
    net = build_vgg(config, seed=21)
    for p in net.parameters():  # make weights distinctive, not just init
        p += rng.standard_normal(p.shape).astype(np.float32) * 0.01
    return net


def test_roundtrip_restores_weights_and_meta(tmp_path, net):
    path = tmp_path / "model.hvgg"
    save_checkpoint(net, path, extra={"split_seed": 5, "class_names": ["a", "b"]})
    loaded, extra = load_checkpoint(path)
    assert extra == {"split_seed": 5, "class_names": ["a", "b"]}
    assert loaded.config == net.config
    for a, b in zip(net.parameters(), loaded.parameters()):
        assert np.array_equal(a, b)


def test_save_load_save_is_byte_identical(tmp_path, net):
    p1, p2 = tmp_path / "m1.hvgg", tmp_path / "m2.hvgg"
    save_checkpoint(net, p1, extra={"split_seed": 1})
    loaded, extra = load_checkpoint(p1)
    save_checkpoint(loaded, p2, extra=extra)
    assert p1.read_bytes() == p2.read_bytes()


def test_wrong_magic(tmp_path):
    path = tmp_path / "bad.hvgg"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        load_checkpoint(path)


def test_single_byte_tamper_detected(tmp_path, net):
    path = tmp_path / "model.hvgg"
    save_checkpoint(net, path, extra={"split_seed": 0})
    raw = bytearray(path.read_bytes())
    for pos in (20, len(raw) // 2, len(raw) - 10):
        tampered = bytearray(raw)
        tampered[pos] ^= 0xFF
        path.write_bytes(bytes(tampered))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)


def test_truncation_detected(tmp_path, net):
    path = tmp_path / "model.hvgg"
    save_checkpoint(net, path, extra={})
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_forward_identical_after_reload(tmp_path, net, rng):
    path = tmp_path / "model.hvgg"
    save_checkpoint(net, path, extra={})
    loaded, _ = load_checkpoint(path)
    x = rng.random((2, 3, 32, 32)).astype(np.float32)
    assert np.array_equal(net.forward(x), loaded.forward(x))

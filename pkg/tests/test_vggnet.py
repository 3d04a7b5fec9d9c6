import numpy as np
import pytest

from vggsvm.nn.vgg import CONV_PLANS, VggConfig, build_vgg

from oracles import naive_conv3x3

# Closed-form counts summed by hand from the canonical plans (conv:
# out*(in*9+1); fc: out*(in+1) with a 7*7*512 flatten at side 224).
HAND_COUNTS = {
    "vgg11": 132_863_336,
    "vgg13": 133_047_848,
    "vgg16": 138_357_544,
    "vgg19": 143_667_240,
}


def _hand_count(variant, fc=(4096, 4096, 1000), side=224, scale=1.0):
    def scaled(c):
        return max(1, int(round(c * scale)))

    total = 0
    in_ch = 3
    for tok in CONV_PLANS[variant]:
        if tok == "M":
            continue
        out_ch = scaled(tok)
        total += out_ch * (in_ch * 9 + 1)
        in_ch = out_ch
    in_dim = in_ch * (side // 32) ** 2
    for width in fc:
        total += width * (in_dim + 1)
        in_dim = width
    return total


def test_parameter_count_formulas_match_hand_sums():
    for variant, expected in HAND_COUNTS.items():
        config = VggConfig.from_variant(variant, fc_widths=(4096, 4096, 1000))
        assert config.parameter_count() == expected
        assert _hand_count(variant) == expected


def test_scaled_config_counts_match_closed_form():
    config = VggConfig.from_variant("vgg11", input_side=32, channel_scale=1 / 64, fc_widths=(64, 64, 2))
    net = build_vgg(config, seed=0)
    expected = _hand_count("vgg11", fc=(64, 64, 2), side=32, scale=1 / 64)
    assert net.parameter_count() == expected
    assert config.parameter_count() == expected


def test_invalid_input_side_rejected():
    with pytest.raises(ValueError, match="divisible"):
        VggConfig.from_variant("vgg16", input_side=30)


def test_conv_plan_must_match_variant():
    with pytest.raises(ValueError, match="canonical"):
        VggConfig(variant="vgg11", conv_plan=(64, "M"), fc_widths=(64, 64, 2), input_side=32)


def test_unknown_variant_rejected():
    with pytest.raises(ValueError, match="unknown variant"):
        VggConfig.from_variant("vgg7")


def test_fc_widths_validated():
    with pytest.raises(ValueError, match="3 entries"):
        VggConfig.from_variant("vgg11", input_side=32, fc_widths=(64, 2))
    with pytest.raises(ValueError, match="class count"):
        VggConfig.from_variant("vgg11", input_side=32, fc_widths=(64, 64, 1))


def _tiny_net(seed=0, dtype=np.float64):
    config = VggConfig.from_variant("vgg11", input_side=32, channel_scale=1 / 16, fc_widths=(32, 16, 2))
    return build_vgg(config, seed=seed, dtype=dtype)


def test_build_deterministic_for_seed():
    n1, n2 = _tiny_net(seed=9), _tiny_net(seed=9)
    for a, b in zip(n1.parameters(), n2.parameters()):
        assert np.array_equal(a, b)
    n3 = _tiny_net(seed=10)
    assert any(not np.array_equal(a, b) for a, b in zip(n1.parameters(), n3.parameters()))


def test_zero_weights_give_zero_logits(rng):
    net = _tiny_net()
    for p in net.parameters():
        p[...] = 0.0
    logits = net.forward(rng.random((3, 3, 32, 32)))
    assert np.array_equal(logits, np.zeros((3, 2)))
    feat = net.features(rng.random((3, 32, 32)))
    assert np.array_equal(feat, np.zeros(32))


def test_batch_independence(rng):
    net = _tiny_net(seed=4)
    batch = rng.random((8, 3, 32, 32))
    full = net.forward(batch)
    single = net.forward(batch[3:4])
    assert np.allclose(full[3], single[0], atol=1e-12)


def test_feature_tap_length_and_determinism(rng):
    for variant in CONV_PLANS:
        config = VggConfig.from_variant(variant, input_side=32, channel_scale=1 / 32, fc_widths=(24, 12, 2))
        net = build_vgg(config, seed=1)
        sample = rng.random((3, 32, 32)).astype(np.float32)
        f1 = net.features(sample)
        f2 = net.features(sample)
        assert f1.shape == (24,)
        assert np.array_equal(f1, f2)
        assert f1.min() >= 0.0  # post-ReLU tap


def test_feature_tap_is_first_fc_activation(rng):
    net = _tiny_net(seed=2)
    sample = rng.random((3, 32, 32))
    feat = net.features(sample)
    # Walk the graph manually: everything up to flatten, then fc1 + relu.
    x = sample[None]
    for layer in net.layers:
        x = layer(x)
        if type(layer).__name__ == "Flatten":
            break
    fc1 = net.layers[net.feature_index - 1]
    manual = np.maximum(x @ fc1.weight.T + fc1.bias, 0.0)
    assert np.allclose(feat, manual[0], atol=1e-12)


def test_default_feature_dim_is_4096():
    config = VggConfig.from_variant("vgg19")
    assert config.feature_dim == 4096
    assert config.fc_widths == (4096, 4096, 2)


def test_forward_matches_oracle_on_one_conv_layer(rng):
    # The first conv block of a built net against the naive oracle.
    net = _tiny_net(seed=3)
    conv = net.layers[0]
    x = rng.random((1, 3, 4, 4))
    assert np.allclose(conv.forward(x), naive_conv3x3(x, conv.weight, conv.bias), atol=1e-10)


def test_translation_locality(rng):
    net = _tiny_net(seed=5)
    conv = net.layers[0]
    side = 16
    background = np.full((1, 3, side, side), 0.5)
    a = background.copy()
    b = background.copy()
    a[:, :, 4:6, 4:6] = 1.0
    b[:, :, 6:8, 4:6] = 1.0  # shifted 2 px down
    out_a = conv.forward(a)
    out_b = conv.forward(b)
    diff = np.abs(out_a - out_b).max(axis=(0, 1))
    affected = np.zeros((side, side), dtype=bool)
    affected[3:9, 3:7] = True  # union of patch sites dilated by the kernel radius
    assert np.all(diff[~affected] < 1e-12)
    assert diff[affected].max() > 1e-3


def test_forward_shape_validation(rng):
    net = _tiny_net()
    with pytest.raises(ValueError, match="shape"):
        net.forward(rng.random((1, 3, 64, 64)))
    with pytest.raises(ValueError, match="one sample"):
        net.features(rng.random((1, 3, 32, 32)))

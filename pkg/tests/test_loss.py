import numpy as np
import pytest

from vggsvm.nn.loss import softmax, softmax_cross_entropy

from oracles import gradcheck_rel_error, numerical_gradient


def test_uniform_logits_give_ln2():
    logits = np.zeros((4, 2))
    loss, _ = softmax_cross_entropy(logits, np.array([0, 1, 0, 1]))
    assert loss == pytest.approx(np.log(2.0), abs=1e-12)


def test_saturated_logits_near_zero_loss():
    logits = np.array([[30.0, -30.0]])
    loss, _ = softmax_cross_entropy(logits, np.array([0]))
    assert loss < 1e-12


def test_saturated_logits_do_not_overflow():
    logits = np.array([[1e4, -1e4], [-1e4, 1e4]])
    loss, grad = softmax_cross_entropy(logits, np.array([1, 1]))
    assert np.isfinite(loss)
    assert np.all(np.isfinite(grad))


def test_softmax_rows_sum_to_one(rng):
    probs = softmax(rng.standard_normal((50, 7)) * 10)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert probs.min() >= 0


def test_gradient_matches_finite_differences(rng):
    logits = rng.standard_normal((3, 2))
    labels = np.array([0, 1, 1])
    _, grad = softmax_cross_entropy(logits, labels)

    num = numerical_gradient(lambda z: softmax_cross_entropy(z, labels)[0], logits.copy())
    assert gradcheck_rel_error(grad, num) < 1e-6


def test_label_bounds_checked():
    with pytest.raises(ValueError):
        softmax_cross_entropy(np.zeros((2, 2)), np.array([0, 2]))
    with pytest.raises(ValueError):
        softmax_cross_entropy(np.zeros((2, 2)), np.array([0]))

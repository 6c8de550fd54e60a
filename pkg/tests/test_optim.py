import numpy as np
import pytest

from signgen import tensor as T
from signgen.optim import AdamW, GradientError
from signgen.rng import Rng
from signgen.tensor import Tensor, backward


def test_zero_gradient_zero_decay_leaves_params():
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
    opt = AdamW([("p", p)], lr=0.1, weight_decay=0.0)
    p.grad = np.zeros(2)
    opt.step()
    np.testing.assert_array_equal(p.data, [1.0, -2.0])
    assert opt.step_count == 1


def test_single_step_matches_hand_recurrence():
    # g=1, m0=v0=0, betas=(0.9, 0.999), lr=0.1, wd=0:
    # m1=0.1, v1=0.001, mhat=1, vhat=1 -> update = -0.1 * 1/(1+eps)
    p = Tensor(np.array([0.5]), requires_grad=True)
    eps = 1e-8
    opt = AdamW([("p", p)], lr=0.1, betas=(0.9, 0.999), eps=eps, weight_decay=0.0)
    p.grad = np.array([1.0])
    opt.step()
    expected = 0.5 - 0.1 * (1.0 / (1.0 + eps))
    np.testing.assert_allclose(p.data, [expected], rtol=0, atol=1e-16)


def test_pure_decoupled_weight_decay():
    p = Tensor(np.array([2.0]), requires_grad=True)
    opt = AdamW([("p", p)], lr=0.1, weight_decay=0.01)
    p.grad = np.array([0.0])
    opt.step()
    np.testing.assert_allclose(p.data, [2.0 * (1 - 0.001)], rtol=0, atol=1e-16)


def test_nan_grad_refuses_step_and_leaves_params():
    p = Tensor(np.array([1.0]), requires_grad=True)
    q = Tensor(np.array([1.0]), requires_grad=True)
    opt = AdamW([("p", p), ("q", q)], lr=0.1)
    p.grad = np.array([1.0])
    q.grad = np.array([np.nan])
    with pytest.raises(GradientError, match="q"):
        opt.step()
    np.testing.assert_array_equal(p.data, [1.0])
    assert opt.step_count == 0


def test_training_bitwise_reproducible():
    def run():
        rng = Rng(42)
        w = Tensor(rng.normal((4, 4)), requires_grad=True)
        opt = AdamW([("w", w)], lr=1e-2, weight_decay=0.01)
        data_rng = rng.child("data")
        for _ in range(25):
            x = Tensor(data_rng.normal((8, 4)))
            loss = T.tmean((x @ w) * (x @ w))
            opt.zero_grad()
            backward(loss)
            opt.step()
        return w.data.tobytes()

    assert run() == run()

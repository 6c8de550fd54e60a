import numpy as np
import pytest

from signgen import tensor as T
from signgen.gradcheck import finite_diff_check
from signgen.rng import Rng
from signgen.tensor import Tensor, backward


def test_matmul_identity():
    rng = Rng(0)
    a = np.eye(3)
    b = rng.normal((3, 5))
    out = T.matmul(Tensor(a), Tensor(b))
    np.testing.assert_array_equal(out.data, b)


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(T.ShapeError) as exc:
        T.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 2))))
    assert "(2, 3)" in str(exc.value) and "(4, 2)" in str(exc.value)


def test_softmax_uniform_logits():
    out = T.softmax(Tensor([0.0, 0.0, 0.0, 0.0]), axis=-1)
    np.testing.assert_allclose(out.data, [0.25, 0.25, 0.25, 0.25], rtol=0, atol=0)


def test_softmax_sums_to_one():
    rng = Rng(1)
    x = rng.normal((7, 11)) * 8
    out = T.softmax(Tensor(x), axis=-1)
    assert np.all(out.data >= 0)
    np.testing.assert_allclose(out.data.sum(axis=-1), 1.0, atol=1e-12)


def test_layernorm_constant_vector_is_zero_before_affine():
    from signgen.nn import LayerNorm

    ln = LayerNorm(6)
    out = ln(Tensor(np.full((2, 6), 3.7)))
    np.testing.assert_allclose(out.data, 0.0, atol=1e-12)


def test_nonfinite_forward_flagged():
    x = Tensor([1.0, 0.0])
    with pytest.raises(T.NonFiniteError) as exc:
        T.log(x)
    assert "log" in str(exc.value)


def test_backward_of_sum_is_ones():
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    backward(T.tsum(x))
    np.testing.assert_array_equal(x.grad, np.ones((2, 3)))


def test_backward_of_squared_norm_is_2x():
    x = Tensor(np.array([1.0, -2.0, 0.5]), requires_grad=True)
    backward(T.tsum(x * x))
    np.testing.assert_allclose(x.grad, 2 * x.data, atol=1e-15)


def test_backward_rejects_nonscalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(T.ShapeError):
        backward(x * 2)


def test_backward_twice_rejected_until_rebuilt():
    x = Tensor(np.ones(3), requires_grad=True)
    loss = T.tsum(x * x)
    backward(loss)
    with pytest.raises(RuntimeError):
        backward(loss)


def test_gradient_linearity_exact():
    rng = Rng(2)
    xval = rng.normal((4, 3))
    a = Tensor(xval, requires_grad=True)
    backward(T.tsum(a * a) + T.tsum(T.exp(a) * 0.1))
    combined = a.grad.copy()

    b = Tensor(xval, requires_grad=True)
    backward(T.tsum(b * b))
    backward(T.tsum(T.exp(b) * 0.1))
    np.testing.assert_allclose(b.grad, combined, atol=1e-12, rtol=0)


def test_composite_chain_matches_finite_differences():
    rng = Rng(3)
    w = rng.normal((5, 4))

    def f(x):
        h = T.tanh(x @ Tensor(w))
        s = T.softmax(h, axis=-1)
        return T.tmean(T.log(s + 1.0) * s) + T.tsum(T.relu(x)) * 0.01

    x = Tensor(rng.normal((3, 5)))
    assert finite_diff_check(f, x, h=1e-5) < 1e-7


def test_take_gather_scatter_roundtrip_grad():
    x = Tensor(np.arange(12.0).reshape(4, 3), requires_grad=True)
    picked = T.take(x, np.array([0, 2, 2]), axis=0)
    backward(T.tsum(picked * picked))
    expected = np.zeros((4, 3))
    expected[0] = 2 * x.data[0]
    expected[2] = 2 * (2 * x.data[2])
    np.testing.assert_allclose(x.grad, expected)


def test_take_2d_indices_embedding_style():
    w = Tensor(np.arange(10.0).reshape(5, 2), requires_grad=True)
    ids = np.array([[0, 1], [1, 4]])
    out = T.take(w, ids, axis=0)
    assert out.shape == (2, 2, 2)
    backward(T.tsum(out))
    expected = np.zeros((5, 2))
    expected[0] += 1
    expected[1] += 2
    expected[4] += 1
    np.testing.assert_array_equal(w.grad, expected)


def test_concat_and_pad_grads():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((3, 2)), requires_grad=True)
    joined = T.concat([a, b], axis=0)
    padded = T.pad_axis(joined, 0, 1, 2)
    assert padded.shape == (8, 2)
    backward(T.tsum(padded * padded))
    np.testing.assert_allclose(a.grad, 2 * np.ones((2, 2)))
    np.testing.assert_allclose(b.grad, 2 * np.ones((3, 2)))


def test_broadcast_add_grad_reduces():
    x = Tensor(np.ones((4, 3)), requires_grad=True)
    bias = Tensor(np.ones(3), requires_grad=True)
    backward(T.tsum((x + bias) * 2.0))
    np.testing.assert_array_equal(bias.grad, np.full(3, 8.0))
    np.testing.assert_array_equal(x.grad, np.full((4, 3), 2.0))


def test_no_grad_drops_graph():
    x = Tensor(np.ones(3), requires_grad=True)
    with T.no_grad():
        y = x * 2
    assert not y.requires_grad and y._parents == ()

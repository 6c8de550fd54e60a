"""Neural building blocks on top of the tensor engine.

Layers are channels-last throughout. Convolutions are expressed as
gather-then-matmul over explicit index tables, so the same machinery serves
temporal windows and graph neighborhoods.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .rng import Rng
from .tensor import Tensor


class Module:
    """Minimal container: trainable Tensors are parameters, registered numpy
    arrays are buffers (e.g. batch-norm running statistics)."""

    def __init__(self):
        self._buffers: dict[str, np.ndarray] = {}
        self.training = True

    def register_buffer(self, name: str, value: np.ndarray):
        self._buffers[name] = np.asarray(value, dtype=np.float64)

    def _children(self):
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{i}", item

    def named_parameters(self, prefix: str = ""):
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield prefix + name, value
        for name, child in self._children():
            yield from child.named_parameters(prefix + name + ".")

    def parameters(self):
        for _, p in self.named_parameters():
            yield p

    def named_buffers(self, prefix: str = ""):
        for name, value in self._buffers.items():
            yield prefix + name, value
        for name, child in self._children():
            yield from child.named_buffers(prefix + name + ".")

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def set_training(self, flag: bool):
        self.training = flag
        for _, child in self._children():
            child.set_training(flag)
        return self

    def freeze(self):
        """Drop requires_grad on all parameters; eval mode. Frozen modules are
        safe to share: nothing downstream can write to them."""
        for p in list(self.parameters()):
            p.requires_grad = False
        self.set_training(False)
        return self

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data for name, p in self.named_parameters()}
        for name, buf in self.named_buffers():
            state[name] = buf
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]):
        params = dict(self.named_parameters())
        expected = set(params) | {name for name, _ in self.named_buffers()}
        missing = expected - set(state)
        extra = set(state) - expected
        if missing or extra:
            raise KeyError(f"state mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        for name, p in params.items():
            if p.data.shape != state[name].shape:
                raise T.ShapeError(
                    f"parameter {name}: checkpoint shape {state[name].shape} vs model {p.data.shape}"
                )
            p.data = np.array(state[name], dtype=np.float64)
        self._load_buffers("", state)

    def _load_buffers(self, prefix: str, state: dict):
        for name in self._buffers:
            self._buffers[name] = np.array(state[prefix + name], dtype=np.float64)
        for name, child in self._children():
            child._load_buffers(prefix + name + ".", state)

    def n_params(self) -> int:
        return sum(p.data.size for p in self.parameters())


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: Rng, bias: bool = True):
        super().__init__()
        std = math.sqrt(2.0 / (d_in + d_out))
        self.weight = Tensor(rng.normal((d_in, d_out), std=std), requires_grad=True)
        self.bias = Tensor(np.zeros(d_out), requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x @ self.weight
        return y + self.bias if self.bias is not None else y


class Embedding(Module):
    def __init__(self, n: int, dim: int, rng: Rng):
        super().__init__()
        self.weight = Tensor(rng.normal((n, dim), std=0.02), requires_grad=True)

    def __call__(self, ids: np.ndarray) -> Tensor:
        return T.take(self.weight, np.asarray(ids, dtype=np.intp), axis=0)


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        self.gamma = Tensor(np.ones(dim), requires_grad=True)
        self.beta = Tensor(np.zeros(dim), requires_grad=True)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        normed = centered / T.sqrt(var + self.eps)
        return normed * self.gamma + self.beta


class BatchNorm(Module):
    """Channels-last batch norm over all leading axes. Training uses batch
    statistics and updates the running estimates; eval uses the frozen
    running statistics."""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.gamma = Tensor(np.ones(channels), requires_grad=True)
        self.beta = Tensor(np.zeros(channels), requires_grad=True)
        self.register_buffer("running_mean", np.zeros(channels))
        self.register_buffer("running_var", np.ones(channels))
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        axes = tuple(range(x.ndim - 1))
        if self.training:
            mu = x.mean(axis=axes, keepdims=True)
            centered = x - mu
            var = (centered * centered).mean(axis=axes, keepdims=True)
            m = self.momentum
            self._buffers["running_mean"] = (
                (1 - m) * self._buffers["running_mean"] + m * mu.data.reshape(-1)
            )
            self._buffers["running_var"] = (
                (1 - m) * self._buffers["running_var"] + m * var.data.reshape(-1)
            )
            return centered / T.sqrt(var + self.eps) * self.gamma + self.beta
        mu = self._buffers["running_mean"]
        var = self._buffers["running_var"]
        return (x - mu) / np.sqrt(var + self.eps) * self.gamma + self.beta


class Dropout(Module):
    """Inverted dropout drawing from a dedicated child stream, so training
    remains bitwise reproducible for a fixed seed and call order."""

    def __init__(self, p: float, rng: Rng):
        super().__init__()
        self.p = float(p)
        self._rng = rng

    def __call__(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = (self._rng.uniform(x.shape) >= self.p) / (1.0 - self.p)
        return x * keep


def sinusoidal_positions(n: int, dim: int) -> np.ndarray:
    pos = np.arange(n)[:, None].astype(np.float64)
    i = np.arange(dim)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, 2 * (i // 2) / dim)
    enc = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return enc


class MultiHeadAttention(Module):
    def __init__(self, dim: int, heads: int, rng: Rng):
        super().__init__()
        if dim % heads != 0:
            raise T.ShapeError(f"hidden dim {dim} not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.dk = dim // heads
        self.wq = Linear(dim, dim, rng.child("q"))
        self.wk = Linear(dim, dim, rng.child("k"))
        self.wv = Linear(dim, dim, rng.child("v"))
        self.wo = Linear(dim, dim, rng.child("o"))

    def _split(self, x: Tensor, n: int, length: int) -> Tensor:
        x = x.reshape(n, length, self.heads, self.dk)
        return x.transpose(0, 2, 1, 3)  # (B, H, S, dk)

    def __call__(self, q: Tensor, k: Tensor, v: Tensor, mask: np.ndarray | None = None) -> Tensor:
        nb, sq = q.shape[0], q.shape[1]
        sk = k.shape[1]
        qh = self._split(self.wq(q), nb, sq)
        kh = self._split(self.wk(k), nb, sk)
        vh = self._split(self.wv(v), nb, sk)
        scores = qh @ kh.transpose(0, 1, 3, 2) * (1.0 / math.sqrt(self.dk))
        if mask is not None:
            # mask: additive, -inf-like at disallowed positions, broadcastable
            # to (B, H, Sq, Sk); kept out of the graph (constant)
            scores = scores + mask
        attn = T.softmax(scores, axis=-1)
        ctx = attn @ vh  # (B, H, Sq, dk)
        ctx = ctx.transpose(0, 2, 1, 3).reshape(nb, sq, self.dim)
        return self.wo(ctx)


NEG_INF = -1e30


def causal_mask(length: int) -> np.ndarray:
    """Additive mask: position i may attend to positions <= i."""
    m = np.triu(np.full((length, length), NEG_INF), k=1)
    return m[None, None, :, :]


def padding_mask(lengths: np.ndarray, max_len: int) -> np.ndarray:
    """Additive mask over key positions beyond each sequence's length."""
    cols = np.arange(max_len)[None, :]
    blocked = cols >= np.asarray(lengths)[:, None]
    return np.where(blocked, NEG_INF, 0.0)[:, None, None, :]


class FeedForward(Module):
    def __init__(self, dim: int, hidden: int, rng: Rng):
        super().__init__()
        self.w1 = Linear(dim, hidden, rng.child("w1"))
        self.w2 = Linear(hidden, dim, rng.child("w2"))

    def __call__(self, x: Tensor) -> Tensor:
        return self.w2(T.relu(self.w1(x)))


class EncoderLayer(Module):
    """Pre-norm transformer encoder layer."""

    def __init__(self, dim: int, heads: int, ff: int, dropout: float, rng: Rng):
        super().__init__()
        self.attn = MultiHeadAttention(dim, heads, rng.child("attn"))
        self.ffn = FeedForward(dim, ff, rng.child("ffn"))
        self.ln1 = LayerNorm(dim)
        self.ln2 = LayerNorm(dim)
        self.drop = Dropout(dropout, rng.child("drop"))

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        h = self.ln1(x)
        x = x + self.drop(self.attn(h, h, h, mask))
        x = x + self.drop(self.ffn(self.ln2(x)))
        return x


class DecoderLayer(Module):
    """Pre-norm decoder layer: causal self-attention then cross-attention."""

    def __init__(self, dim: int, heads: int, ff: int, dropout: float, rng: Rng):
        super().__init__()
        self.self_attn = MultiHeadAttention(dim, heads, rng.child("self"))
        self.cross_attn = MultiHeadAttention(dim, heads, rng.child("cross"))
        self.ffn = FeedForward(dim, ff, rng.child("ffn"))
        self.ln1 = LayerNorm(dim)
        self.ln2 = LayerNorm(dim)
        self.ln3 = LayerNorm(dim)
        self.drop = Dropout(dropout, rng.child("drop"))

    def __call__(
        self,
        x: Tensor,
        memory: Tensor,
        self_mask: np.ndarray | None,
        cross_mask: np.ndarray | None,
    ) -> Tensor:
        h = self.ln1(x)
        x = x + self.drop(self.self_attn(h, h, h, self_mask))
        h = self.ln2(x)
        x = x + self.drop(self.cross_attn(h, memory, memory, cross_mask))
        x = x + self.drop(self.ffn(self.ln3(x)))
        return x

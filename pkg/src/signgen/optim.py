"""AdamW with decoupled weight decay."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class GradientError(RuntimeError):
    pass


class AdamW:
    """Decoupled-weight-decay Adam: the Adam update uses bias-corrected
    moments; decay multiplies parameters by (1 - lr * wd) afterwards."""

    def __init__(
        self,
        params,
        lr: float = 1e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params: list[tuple[str, Tensor]] = [
            p if isinstance(p, tuple) else (f"param{i}", p) for i, p in enumerate(params)
        ]
        if lr <= 0:
            raise ValueError(f"lr must be positive, got {lr}")
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params}

    def zero_grad(self):
        for _, p in self.params:
            p.grad = None

    def step(self):
        # validate every gradient before touching any parameter, so a refused
        # step leaves the model untouched
        for name, p in self.params:
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise GradientError(f"non-finite gradient for parameter '{name}'; step refused")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for name, p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            v = self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * (g * g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.data = p.data - self.lr * update
            if self.weight_decay:
                p.data = p.data * (1.0 - self.lr * self.weight_decay)

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {"step": np.array([float(self.step_count)])}
        for name, _ in self.params:
            out[f"m.{name}"] = self.m[name]
            out[f"v.{name}"] = self.v[name]
        return out

    def load_state_dict(self, state: dict[str, np.ndarray]):
        self.step_count = int(state["step"][0])
        for name, _ in self.params:
            self.m[name] = np.array(state[f"m.{name}"])
            self.v[name] = np.array(state[f"v.{name}"])

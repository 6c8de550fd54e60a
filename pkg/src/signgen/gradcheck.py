"""Gradient verification against central finite differences.

The analytic gradient of f at x is compared coordinate-by-coordinate with
(f(x + h e_i) - f(x - h e_i)) / 2h. The reported figure is the max over
coordinates of |analytic - numeric| / max(1, |analytic|).
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .rng import Rng
from .tensor import Tensor, backward, no_grad


class NonDeterministicError(RuntimeError):
    pass


def _pick_coords(n: int, max_coords: int | None, rng: Rng | None) -> np.ndarray:
    if max_coords is None or max_coords >= n:
        return np.arange(n)
    picker = rng if rng is not None else Rng(0, ("gradcheck",))
    return np.sort(picker.permutation(n)[:max_coords])


def finite_diff_check(
    f,
    x: Tensor,
    h: float = 1e-5,
    max_coords: int | None = None,
    rng: Rng | None = None,
) -> float:
    """Max relative error between the analytic gradient of scalar f(x) and
    central differences.

    f must be deterministic: it is evaluated twice on equal inputs and
    rejected if the values differ. When max_coords is given, a seeded subset
    of coordinates is probed instead of all of them.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")

    with no_grad():
        v1 = f(Tensor(x.data)).item()
        v2 = f(Tensor(x.data)).item()
    if v1 != v2:
        raise NonDeterministicError(
            f"f gave different values on equal inputs ({v1!r} vs {v2!r}); fix its seeds"
        )

    probe = Tensor(np.array(x.data), requires_grad=True)
    loss = f(probe)
    if loss.data.shape != ():
        raise T.ShapeError(f"f must return a scalar, got shape {loss.data.shape}")
    backward(loss)
    analytic = probe.grad if probe.grad is not None else np.zeros_like(x.data)

    flat = x.data.reshape(-1)
    analytic_flat = analytic.reshape(-1)
    worst = 0.0
    for i in _pick_coords(flat.size, max_coords, rng):
        bumped = flat.copy()
        bumped[i] = flat[i] + h
        with no_grad():
            up = f(Tensor(bumped.reshape(x.data.shape))).item()
        bumped[i] = flat[i] - h
        with no_grad():
            down = f(Tensor(bumped.reshape(x.data.shape))).item()
        numeric = (up - down) / (2.0 * h)
        err = abs(analytic_flat[i] - numeric) / max(1.0, abs(analytic_flat[i]))
        worst = max(worst, err)
    return worst


def check_model_gradients(
    loss_fn,
    named_params,
    h: float = 1e-5,
    max_coords: int | None = None,
    rng: Rng | None = None,
) -> dict[str, float]:
    """Per-parameter finite-difference check of a multi-parameter scalar loss.

    loss_fn takes no arguments and reads the live parameter tensors; numeric
    probes perturb each parameter's array in place and restore it exactly.
    Any sampling inside loss_fn must be frozen (pre-drawn noise), or the
    determinism gate trips.
    """
    named_params = list(named_params)
    with no_grad():
        v1 = loss_fn().item()
        v2 = loss_fn().item()
    if v1 != v2:
        raise NonDeterministicError(
            f"loss_fn gave different values on equal inputs ({v1!r} vs {v2!r}); fix its seeds"
        )

    for _, p in named_params:
        p.grad = None
    loss = loss_fn()
    if loss.data.shape != ():
        raise T.ShapeError(f"loss_fn must return a scalar, got shape {loss.data.shape}")
    backward(loss)

    results: dict[str, float] = {}
    for name, p in named_params:
        analytic = (p.grad if p.grad is not None else np.zeros_like(p.data)).reshape(-1)
        p.data = np.ascontiguousarray(p.data)
        flat = p.data.reshape(-1)  # view: in-place bumps reach the model
        worst = 0.0
        for i in _pick_coords(flat.size, max_coords, rng.child(name) if rng else None):
            saved = flat[i]
            flat[i] = saved + h
            with no_grad():
                up = loss_fn().item()
            flat[i] = saved - h
            with no_grad():
                down = loss_fn().item()
            flat[i] = saved
            numeric = (up - down) / (2.0 * h)
            err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]))
            worst = max(worst, err)
        results[name] = worst
    return results

"""Deterministic, splittable random streams.

Every stochastic component draws from its own child stream derived from the
root seed plus a string path, so results never depend on the order in which
unrelated components consume randomness. Streams are counter-based (Philox),
which makes them cheap to derive and bitwise reproducible across runs.
"""

from __future__ import annotations

import hashlib

import numpy as np

GUMBEL_EPS = 1e-10


class Rng:
    """A named Philox stream. `child(tag)` derives an independent stream."""

    def __init__(self, seed: int, path: tuple[str, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(str(p) for p in path)
        digest = hashlib.sha256("/".join([str(self.seed), *self.path]).encode()).digest()
        key = np.frombuffer(digest[:16], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, tag) -> "Rng":
        return Rng(self.seed, self.path + (str(tag),))

    def uniform(self, shape=None, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def normal(self, shape=None, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        return self._gen.normal(mean, std, size=shape)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def gumbel(self, shape=None) -> np.ndarray:
        # g = -log(-log(u)); u clamped away from {0, 1} so the double log
        # can never produce an infinity.
        u = self._gen.uniform(0.0, 1.0, size=shape)
        u = np.clip(u, GUMBEL_EPS, 1.0 - GUMBEL_EPS)
        return -np.log(-np.log(u))

    # Checkpointable stream state -------------------------------------------

    def get_state(self) -> dict:
        st = self._gen.bit_generator.state
        return {
            "seed": self.seed,
            "path": list(self.path),
            "counter": [int(x) for x in st["state"]["counter"]],
            "key": [int(x) for x in st["state"]["key"]],
            "buffer": [int(x) for x in st["buffer"]],
            "buffer_pos": int(st["buffer_pos"]),
            "has_uint32": int(st["has_uint32"]),
            "uinteger": int(st["uinteger"]),
        }

    @staticmethod
    def from_state(state: dict) -> "Rng":
        rng = Rng(state["seed"], tuple(state["path"]))
        st = rng._gen.bit_generator.state
        st["state"]["counter"] = np.array(state["counter"], dtype=np.uint64)
        st["state"]["key"] = np.array(state["key"], dtype=np.uint64)
        st["buffer"] = np.array(state["buffer"], dtype=np.uint64)
        st["buffer_pos"] = state["buffer_pos"]
        st["has_uint32"] = state["has_uint32"]
        st["uinteger"] = state["uinteger"]
        rng._gen.bit_generator.state = st
        return rng

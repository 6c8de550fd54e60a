"""Synthetic compositional corpus: words map to deterministic motion
primitives, sentences concatenate them, and a seeded hash of the id assigns
the 80/10/10 split.

Primitive durations are multiples of the segment window so that token
boundaries line up with word boundaries. Every primitive starts and ends at
the rest pose, which keeps word joins smooth, and shoulder joints are never
jittered: they anchor the normalization, and keeping them clean makes the
preprocessing pipeline idempotent on its own output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .pose import PoseSequence
from .rng import Rng
from .skeleton import SkeletonSpec, upper_body_13

# rest pose for the 13-joint upper-body skeleton, shoulder-midpoint at origin,
# shoulders exactly 1 apart
REST_POSE_13 = np.array(
    [
        [0.00, 0.45],   # nose
        [0.00, 0.10],   # neck
        [-0.50, 0.00],  # r_shoulder
        [-0.62, -0.45], # r_elbow
        [-0.55, -0.85], # r_wrist
        [0.50, 0.00],   # l_shoulder
        [0.62, -0.45],  # l_elbow
        [0.55, -0.85],  # l_wrist
        [-0.52, -0.98], # r_hand
        [0.52, -0.98],  # l_hand
        [0.00, 0.70],   # head_top
        [-0.25, -1.10], # r_hip
        [0.25, -1.10],  # l_hip
    ]
)

RIGHT_ARM = [3, 4, 8]
LEFT_ARM = [6, 7, 9]
JOINT_GAIN = {3: 0.55, 4: 1.0, 8: 1.2, 6: 0.55, 7: 1.0, 9: 1.2}

MIN_SEPARATION = 0.05


@dataclass
class SynthRule:
    word: str
    duration: int          # frames, multiple of the window size
    joints: list[int]
    amplitude: float
    freq_x: int            # cycles over the duration
    freq_y: int
    phase_x: float
    phase_y: float

    def trajectory(self, rest: np.ndarray) -> np.ndarray:
        """(duration, V, C) frames; equals rest at the first and last frame."""
        t = np.arange(self.duration, dtype=np.float64)
        env = np.sin(np.pi * t / (self.duration - 1)) ** 2
        frames = np.repeat(rest[None, :, :], self.duration, axis=0)
        dx = np.sin(2 * np.pi * self.freq_x * t / self.duration + self.phase_x)
        dy = np.sin(2 * np.pi * self.freq_y * t / self.duration + self.phase_y)
        for j in self.joints:
            gain = self.amplitude * JOINT_GAIN[j]
            frames[:, j, 0] += gain * env * dx
            frames[:, j, 1] += gain * env * dy
        return frames


def _mean_frame_distance(a: np.ndarray, b: np.ndarray) -> float:
    n = min(a.shape[0], b.shape[0])
    return float(np.linalg.norm(a[:n] - b[:n], axis=-1).mean())


def build_rules(
    words: list[str],
    window: int,
    rng: Rng,
    rest: np.ndarray | None = None,
    duration_mults: tuple[int, ...] = (1, 2),
) -> list[SynthRule]:
    if len(set(words)) != len(words):
        raise ValueError("duplicate words in rule set")
    if len(words) < 2:
        raise ValueError("need at least 2 rules for a learnable corpus")
    rest = REST_POSE_13 if rest is None else rest
    sides = [RIGHT_ARM, LEFT_ARM, RIGHT_ARM + LEFT_ARM]
    # unique (freq_x, freq_y) pair per word keeps trajectories structurally apart
    freq_pairs = [(1 + a, 1 + b) for a in range(4) for b in range(4)]
    rules = []
    for i, word in enumerate(words):
        wr = rng.child(f"rule:{word}")
        fx, fy = freq_pairs[i % len(freq_pairs)]
        rules.append(
            SynthRule(
                word=word,
                duration=window * duration_mults[i % len(duration_mults)],
                joints=sides[i % 3],
                amplitude=0.5 + 0.25 * float(wr.uniform()),
                freq_x=fx,
                freq_y=fy,
                phase_x=float(wr.uniform(high=2 * np.pi)),
                phase_y=float(wr.uniform(high=2 * np.pi)),
            )
        )
    for i, a in enumerate(rules):
        ta = a.trajectory(rest)
        for b in rules[i + 1 :]:
            sep = _mean_frame_distance(ta, b.trajectory(rest))
            if sep <= MIN_SEPARATION:
                raise ValueError(
                    f"primitives for {a.word!r} and {b.word!r} separated by only {sep:.4f}"
                )
    return rules


DEFAULT_WORDS = [
    "rain", "sun", "wind", "snow", "cloud", "storm", "warm", "cold",
    "night", "morning", "coast", "valley",
]


def split_of(seq_id: str, seed: int) -> str:
    digest = hashlib.sha256(f"{seed}:{seq_id}".encode()).digest()
    u = int.from_bytes(digest[:8], "big") / 2**64
    if u < 0.8:
        return "train"
    return "valid" if u < 0.9 else "test"


def synth_corpus(
    rules: list[SynthRule],
    n_sentences: int,
    max_words: int,
    rng: Rng,
    jitter: float = 0.01,
    fps: float = 25.0,
    rest: np.ndarray | None = None,
    skeleton: SkeletonSpec | None = None,
) -> list[tuple[str, str, PoseSequence]]:
    """Returns (id, text, pose) triples. Sentence lengths are uniform over
    [1, max_words]; each sequence gets jitter from its own child stream."""
    if not rules:
        raise ValueError("empty rule set")
    if max_words < 1:
        raise ValueError(f"max_words must be >= 1, got {max_words}")
    rest = REST_POSE_13 if rest is None else rest
    skeleton = upper_body_13() if skeleton is None else skeleton
    shoulders = [skeleton.left_shoulder, skeleton.right_shoulder]
    by_word = {r.word: r for r in rules}
    words = sorted(by_word)
    out = []
    for s in range(n_sentences):
        sr = rng.child(f"sentence:{s}")
        n_words = int(sr.integers(1, max_words + 1))
        picked = [words[int(k)] for k in sr.integers(0, len(words), size=n_words)]
        frames = np.concatenate([by_word[w].trajectory(rest) for w in picked], axis=0)
        if jitter > 0:
            noise = sr.child("jitter").normal(frames.shape, std=jitter)
            noise[:, shoulders, :] = 0.0
            frames = frames + noise
        seq_id = f"synth-{s:06d}"
        out.append((seq_id, " ".join(picked), PoseSequence(frames, fps, seq_id)))
    return out


# JSONL corpus I/O ---------------------------------------------------------------

REQUIRED_FIELDS = ("id", "text", "fps", "frames")


def write_jsonl(path, examples: list[tuple[str, str, PoseSequence]]):
    with open(path, "w", encoding="utf-8") as fh:
        for seq_id, text, pose in examples:
            record = {
                "id": seq_id,
                "text": text,
                "fps": pose.fps,
                "frames": pose.frames.tolist(),
            }
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")


def read_jsonl(path) -> list[tuple[str, str, PoseSequence]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            for key in REQUIRED_FIELDS:
                if key not in record:
                    raise ValueError(f"{path}:{lineno}: record missing field '{key}'")
            try:
                frames = np.asarray(record["frames"], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: field 'frames' is ragged: {exc}") from exc
            if frames.ndim != 3:
                raise ValueError(
                    f"{path}:{lineno}: field 'frames' must be T x V x C, got shape {frames.shape}"
                )
            out.append(
                (
                    record["id"],
                    record["text"],
                    PoseSequence(frames, float(record["fps"]), record["id"]),
                )
            )
    return out

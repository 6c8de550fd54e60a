"""Pose sequences and the preprocessing pipeline.

Pipeline order: shoulder centering/scaling, noise-frame removal, then min-max
scaling of the survivors into [-1, 1]. Noise removal is a single pass: frame
diffs are not recomputed after splicing. Frames whose shoulders coincide are
flagged during centering and removed together with the noisy frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .skeleton import SkeletonSpec

DEGENERATE_SHOULDER_DIST = 1e-6


@dataclass
class PoseSequence:
    frames: np.ndarray  # (T, V, C) float64
    fps: float
    id: str

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3:
            raise ValueError(f"frames must be (T, V, C), got shape {self.frames.shape}")

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def V(self) -> int:
        return self.frames.shape[1]

    @property
    def C(self) -> int:
        return self.frames.shape[2]


@dataclass
class DiffStats:
    x_diff: np.ndarray  # (T-1, V, C)
    d: np.ndarray       # (T-1, V) per-joint distances
    d_bar: np.ndarray   # (T-1,) per-transition means


@dataclass
class SignSegment:
    data: np.ndarray  # (L, V, C)
    source_id: str
    segment_index: int


@dataclass
class ScaleRecord:
    """Per-axis min/max of the sequence before [-1, 1] scaling; enough to
    undo it. Axes with zero range were mapped to 0."""

    mins: np.ndarray  # (C,)
    maxs: np.ndarray  # (C,)


@dataclass
class PreprocessResult:
    seq: PoseSequence
    removed: list[int] = field(default_factory=list)     # original frame indices
    degenerate: list[int] = field(default_factory=list)  # subset of removed
    theta: float = 0.0
    scale: ScaleRecord | None = None


def center_and_scale(seq: PoseSequence, skeleton: SkeletonSpec) -> tuple[PoseSequence, np.ndarray]:
    """Per frame: translate the shoulder midpoint to the origin and scale
    uniformly so the inter-shoulder distance is exactly 1.

    Frames with degenerate (near-coincident) shoulders cannot be scaled; they
    are returned centered with a clamped scale and flagged in the mask for
    the removal policy to drop.
    """
    ls, rs = skeleton.left_shoulder, skeleton.right_shoulder
    frames = seq.frames
    mid = 0.5 * (frames[:, ls, :] + frames[:, rs, :])  # (T, C)
    dist = np.linalg.norm(frames[:, ls, :] - frames[:, rs, :], axis=-1)  # (T,)
    degenerate = dist <= DEGENERATE_SHOULDER_DIST
    safe = np.maximum(dist, DEGENERATE_SHOULDER_DIST)
    out = (frames - mid[:, None, :]) / safe[:, None, None]
    return PoseSequence(out, seq.fps, seq.id), degenerate


def diff_stats(seq: PoseSequence) -> DiffStats:
    x_diff = seq.frames[1:] - seq.frames[:-1]
    d = np.linalg.norm(x_diff, axis=-1)
    return DiffStats(x_diff=x_diff, d=d, d_bar=d.mean(axis=-1) if d.size else np.zeros(0))


def default_theta(stats: DiffStats) -> float:
    """5x the median per-transition displacement; a perfectly still sequence
    has no usable scale, so nothing is treated as noise."""
    if stats.d_bar.size == 0:
        return np.inf
    med = float(np.median(stats.d_bar))
    return 5.0 * med if med > 0 else np.inf


def noise_mask(stats: DiffStats, theta: float) -> np.ndarray:
    """Frame t+1 is noisy iff the mean joint displacement entering it exceeds
    theta. Frame 0 is never marked. Mask length is T."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    t_minus_1 = stats.d_bar.shape[0]
    mask = np.zeros(t_minus_1 + 1, dtype=bool)
    if t_minus_1:
        mask[1:] = stats.d_bar > theta
    return mask


def minmax_normalize(seq: PoseSequence) -> tuple[PoseSequence, ScaleRecord]:
    """Map each coordinate axis affinely so its min lands on -1 and its max
    on +1 over the whole sequence; constant axes map to 0."""
    if seq.T < 1:
        raise ValueError("cannot normalize an empty sequence")
    mins = seq.frames.min(axis=(0, 1))
    maxs = seq.frames.max(axis=(0, 1))
    span = maxs - mins
    out = np.zeros_like(seq.frames)
    nz = span > 0
    out[..., nz] = 2.0 * (seq.frames[..., nz] - mins[nz]) / span[nz] - 1.0
    return PoseSequence(out, seq.fps, seq.id), ScaleRecord(mins=mins, maxs=maxs)


def denormalize(seq: PoseSequence, record: ScaleRecord) -> PoseSequence:
    span = record.maxs - record.mins
    out = np.array(seq.frames)
    nz = span > 0
    out[..., nz] = (seq.frames[..., nz] + 1.0) * span[nz] / 2.0 + record.mins[nz]
    out[..., ~nz] = record.mins[~nz]
    return PoseSequence(out, seq.fps, seq.id)


def preprocess(
    seq: PoseSequence, skeleton: SkeletonSpec, theta: float | None = None
) -> PreprocessResult:
    if seq.T < 1:
        raise ValueError(f"sequence {seq.id!r} is empty")
    centered, degenerate = center_and_scale(seq, skeleton)
    stats = diff_stats(centered)
    if theta is None:
        theta = default_theta(stats)
    mask = noise_mask(stats, theta) if centered.T >= 2 else np.zeros(1, dtype=bool)
    drop = mask | degenerate
    if drop.all():
        raise ValueError(f"sequence {seq.id!r}: removal policy would drop all {seq.T} frames")
    kept = centered.frames[~drop]
    normalized, record = minmax_normalize(PoseSequence(kept, seq.fps, seq.id))
    return PreprocessResult(
        seq=normalized,
        removed=[int(i) for i in np.nonzero(drop)[0]],
        degenerate=[int(i) for i in np.nonzero(degenerate)[0]],
        theta=float(theta),
        scale=record,
    )


def segment(seq: PoseSequence, window: int) -> list[SignSegment]:
    """Split into consecutive fixed-length windows from frame 0; the trailing
    remainder is discarded. T < window yields an empty list."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    m = seq.T // window
    return [
        SignSegment(
            data=np.array(seq.frames[i * window : (i + 1) * window]),
            source_id=seq.id,
            segment_index=i,
        )
        for i in range(m)
    ]

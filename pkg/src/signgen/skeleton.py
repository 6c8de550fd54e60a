"""Skeleton topology: joints, edges, shoulder anchors, and the pyramid
pooling partitions the encoder/decoder follow when down/up-sampling vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class SkeletonSpec:
    V: int
    edges: list[tuple[int, int]]
    left_shoulder: int
    right_shoulder: int
    # pooling_levels[k] partitions the vertex set of level k into the groups
    # that become level k+1's vertices
    pooling_levels: list[list[list[int]]] = field(default_factory=list)

    def __post_init__(self):
        self.edges = [tuple(e) for e in self.edges]
        self.validate()

    def validate(self):
        for a, b in self.edges:
            if not (0 <= a < self.V and 0 <= b < self.V):
                raise ValueError(f"edge ({a},{b}) references a vertex outside 0..{self.V - 1}")
        for name, v in (("left_shoulder", self.left_shoulder), ("right_shoulder", self.right_shoulder)):
            if not 0 <= v < self.V:
                raise ValueError(f"{name}={v} outside 0..{self.V - 1}")
        if self.left_shoulder == self.right_shoulder:
            raise ValueError("left and right shoulder must be distinct vertices")
        # connectivity
        adj = {v: set() for v in range(self.V)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if len(seen) != self.V:
            raise ValueError(f"skeleton graph not connected: reached {len(seen)} of {self.V} vertices")
        # each level must partition the previous level's vertex set exactly
        prev = self.V
        for k, level in enumerate(self.pooling_levels):
            members = [v for group in level for v in group]
            if sorted(members) != list(range(prev)):
                raise ValueError(
                    f"pooling level {k} is not a partition of the {prev} vertices of level {k}"
                )
            prev = len(level)

    def vertex_counts(self) -> list[int]:
        counts = [self.V]
        for level in self.pooling_levels:
            counts.append(len(level))
        return counts

    def to_dict(self) -> dict:
        return {
            "V": self.V,
            "edges": [list(e) for e in self.edges],
            "left_shoulder": self.left_shoulder,
            "right_shoulder": self.right_shoulder,
            "pooling_levels": self.pooling_levels,
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @staticmethod
    def load(path) -> "SkeletonSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        for key in ("V", "edges", "left_shoulder", "right_shoulder", "pooling_levels"):
            if key not in raw:
                raise ValueError(f"skeleton file {path} missing field '{key}'")
        return SkeletonSpec(
            V=raw["V"],
            edges=[tuple(e) for e in raw["edges"]],
            left_shoulder=raw["left_shoulder"],
            right_shoulder=raw["right_shoulder"],
            pooling_levels=raw["pooling_levels"],
        )


# Joint ids of the stock 13-joint upper-body skeleton:
# 0 nose, 1 neck, 2 r_shoulder, 3 r_elbow, 4 r_wrist, 5 l_shoulder,
# 6 l_elbow, 7 l_wrist, 8 r_hand, 9 l_hand, 10 head_top, 11 r_hip, 12 l_hip
UPPER_BODY_13_EDGES = [
    (0, 1), (10, 0),
    (1, 2), (2, 3), (3, 4), (4, 8),
    (1, 5), (5, 6), (6, 7), (7, 9),
    (1, 11), (1, 12),
]

# pyramid 13 -> 5 -> 2 -> 1 -> 1 (one partition per encoder block)
UPPER_BODY_13_POOLING = [
    [[0, 10], [1], [2, 3, 4, 8], [5, 6, 7, 9], [11, 12]],  # head, neck, arms, hips
    [[0, 1, 4], [2, 3]],                                   # trunk, both arms
    [[0, 1]],
    [[0]],
]


def upper_body_13() -> SkeletonSpec:
    return SkeletonSpec(
        V=13,
        edges=list(UPPER_BODY_13_EDGES),
        left_shoulder=5,
        right_shoulder=2,
        pooling_levels=[[list(g) for g in level] for level in UPPER_BODY_13_POOLING],
    )

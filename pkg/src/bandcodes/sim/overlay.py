"""Overlay topologies: full mesh or a connected random graph."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from ..errors import ParameterError

MAX_ATTEMPTS = 1000


@dataclass
class Overlay:
    adjacency: dict[int, list[int]]

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, nbrs in self.adjacency.items() for b in nbrs if a < b]

    def mean_degree(self) -> float:
        return sum(len(v) for v in self.adjacency.values()) / self.node_count

    def is_connected(self) -> bool:
        if not self.adjacency:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            for nxt in self.adjacency[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return len(seen) == self.node_count


def build_overlay(
    node_count: int,
    rng: random.Random,
    full_mesh: bool = True,
    degree: float = 8.0,
) -> Overlay:
    """Full mesh, or G(n, p) with ``p = degree / (n - 1)`` resampled until connected."""
    if node_count < 2:
        raise ParameterError("an overlay needs at least 2 nodes")
    if full_mesh:
        return Overlay({i: [j for j in range(node_count) if j != i] for i in range(node_count)})
    if not 0 < degree <= node_count - 1:
        raise ParameterError(f"expected degree {degree} unsatisfiable with {node_count} nodes")
    p = degree / (node_count - 1)
    for _ in range(MAX_ATTEMPTS):
        adjacency: dict[int, list[int]] = {i: [] for i in range(node_count)}
        for i in range(node_count):
            for j in range(i + 1, node_count):
                if rng.random() < p:
                    adjacency[i].append(j)
                    adjacency[j].append(i)
        overlay = Overlay(adjacency)
        if overlay.is_connected():
            return overlay
    raise ParameterError(f"no connected graph found for degree {degree} after {MAX_ATTEMPTS} tries")

"""Virtual communication overlays the heuristic gossips on.

All generators produce undirected, loop-free, connected graphs. The
heuristic's dissemination argument needs connectivity, so the small-world
generator repairs disconnected results deterministically.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

__all__ = ["ParameterError", "Overlay", "ring", "small_world", "complete", "is_connected"]


class ParameterError(ValueError):
    """Topology parameters are out of range for the requested node count."""


@dataclass(frozen=True)
class Overlay:
    node_ids: tuple[str, ...]
    adjacency: Mapping[str, tuple[str, ...]]

    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    def edges(self) -> list[tuple[str, str]]:
        seen = []
        for a in self.node_ids:
            for b in self.adjacency[a]:
                if a < b:
                    seen.append((a, b))
        return seen


def _check_ids(ids: Sequence[str]) -> tuple[str, ...]:
    ids = tuple(ids)
    if len(set(ids)) != len(ids):
        raise ParameterError("duplicate node ids")
    if not ids:
        raise ParameterError("at least one node id required")
    return ids


def _build(ids: tuple[str, ...], edges: set[tuple[int, int]]) -> Overlay:
    adj: dict[str, list[str]] = {i: [] for i in ids}
    for a, b in edges:
        adj[ids[a]].append(ids[b])
        adj[ids[b]].append(ids[a])
    return Overlay(ids, {k: tuple(sorted(v)) for k, v in adj.items()})


def _norm(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def ring(ids: Sequence[str]) -> Overlay:
    """Cycle over the ids in the given order; n=1 has no edges."""
    ids = _check_ids(ids)
    n = len(ids)
    edges: set[tuple[int, int]] = set()
    if n > 1:
        for i in range(n):
            edges.add(_norm(i, (i + 1) % n))
    return _build(ids, edges)


def complete(ids: Sequence[str]) -> Overlay:
    ids = _check_ids(ids)
    n = len(ids)
    edges = {(i, j) for i in range(n) for j in range(i + 1, n)}
    return _build(ids, edges)


def small_world(ids: Sequence[str], k: int, p: float, seed: int) -> Overlay:
    """Watts-Strogatz construction: k-nearest-neighbor ring lattice with
    every lattice edge rewired with probability ``p``, followed by a
    deterministic connectivity repair. Identical seeds give identical
    overlays.
    """
    ids = _check_ids(ids)
    n = len(ids)
    if k < 2 or k % 2 != 0:
        raise ParameterError("k must be a positive even integer")
    if k >= n:
        raise ParameterError(f"k={k} must be smaller than the node count {n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError("rewire probability must be in [0, 1]")

    rng = random.Random(seed)
    edges: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(1, k // 2 + 1):
            edges.add(_norm(i, (i + j) % n))

    degree = {i: k for i in range(n)}
    for i in range(n):
        for j in range(1, k // 2 + 1):
            if rng.random() >= p:
                continue
            old = _norm(i, (i + j) % n)
            if old not in edges:
                continue  # already rewired away from the other endpoint
            if degree[i] >= n - 1:
                continue
            w = rng.randrange(n)
            while w == i or _norm(i, w) in edges:
                w = rng.randrange(n)
            edges.remove(old)
            edges.add(_norm(i, w))
            a, b = old
            degree[a] -= 1
            degree[b] -= 1
            degree[i] += 1
            degree[w] += 1

    overlay = _build(ids, edges)
    return _repair_connectivity(overlay)


def _components(overlay: Overlay) -> list[list[str]]:
    remaining = set(overlay.node_ids)
    components = []
    while remaining:
        root = min(remaining)
        seen = {root}
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nbr in overlay.adjacency[node]:
                if nbr not in seen:
                    seen.add(nbr)
                    queue.append(nbr)
        components.append(sorted(seen))
        remaining -= seen
    return components


def is_connected(overlay: Overlay) -> bool:
    return len(_components(overlay)) <= 1


def _repair_connectivity(overlay: Overlay) -> Overlay:
    """Join components by adding an edge between their lowest ids until the
    graph is connected (components paired in lowest-id order)."""
    components = _components(overlay)
    if len(components) <= 1:
        return overlay
    index = {aid: i for i, aid in enumerate(overlay.node_ids)}
    edges = {(index[a], index[b]) for a, b in overlay.edges()}
    while len(components) > 1:
        components.sort(key=lambda c: c[0])
        a, b = components[0][0], components[1][0]
        edges.add(_norm(index[a], index[b]))
        merged = sorted(components[0] + components[1])
        components = [merged] + components[2:]
    return _build(overlay.node_ids, edges)

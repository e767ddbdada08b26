"""Simple undirected graph with dense integer node ids."""
from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Iterator

import numpy as np


class Graph:
    """Mutable simple undirected graph.

    Node ids are ``0..N-1`` assigned in arrival order, so "the graph before
    node ``i`` arrived" is the prefix on nodes ``< i``.
    """

    def __init__(self, n: int = 0):
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.edge_count = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        g = cls(n)
        for u, v in edges:
            g.add_edge(int(u), int(v))
        return g

    @property
    def node_count(self) -> int:
        return len(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def __repr__(self) -> str:
        return f"Graph(N={self.node_count}, L={self.edge_count})"

    def _check(self, u: int) -> None:
        if not 0 <= u < len(self.adj):
            raise KeyError(f"unknown node id {u}")

    def add_node(self) -> int:
        self.adj.append(set())
        return len(self.adj) - 1

    def add_edge(self, u: int, v: int) -> bool:
        """Insert ``{u, v}``; self-loops and duplicates are rejected."""
        self._check(u)
        self._check(v)
        if u == v or v in self.adj[u]:
            return False
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edge_count += 1
        return True

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, u: int) -> int:
        self._check(u)
        return len(self.adj[u])

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=len(self.adj))

    def neighbors(self, u: int) -> set[int]:
        self._check(u)
        return self.adj[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in enumerate(self.adj):
            for v in sorted(nbrs):
                if u < v:
                    yield u, v

    def copy(self) -> "Graph":
        g = Graph()
        g.adj = [set(a) for a in self.adj]
        g.edge_count = self.edge_count
        return g

    def subgraph_prefix(self, n: int) -> "Graph":
        """Induced subgraph on nodes ``0..n-1``."""
        g = Graph()
        g.adj = [{v for v in self.adj[u] if v < n} for u in range(n)]
        g.edge_count = sum(len(a) for a in g.adj) // 2
        return g

    def to_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(indptr, indices)`` with each row sorted ascending."""
        degs = self.degrees()
        indptr = np.zeros(len(self.adj) + 1, dtype=np.int64)
        np.cumsum(degs, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for u, nbrs in enumerate(self.adj):
            if nbrs:
                indices[indptr[u]:indptr[u + 1]] = sorted(nbrs)
        return indptr, indices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.adj == other.adj

    def bfs_distance(self, u: int, v: int, cap: int | None = None) -> int | None:
        """Hop distance from ``u`` to ``v``; ``None`` when unreachable within ``cap``."""
        self._check(u)
        self._check(v)
        if u == v:
            return 0
        if cap is None:
            cap = len(self.adj)
        dist = {u: 0}
        frontier = deque([u])
        while frontier:
            x = frontier.popleft()
            d = dist[x]
            if d >= cap:
                continue
            for y in self.adj[x]:
                if y not in dist:
                    if y == v:
                        return d + 1
                    dist[y] = d + 1
                    frontier.append(y)
        return None

    def bfs_from(self, u: int, cap: int | None = None, targets: set[int] | None = None) -> dict[int, int]:
        """Distances from ``u`` to every node within ``cap`` hops.

        Stops early once every node in ``targets`` has been reached.
        """
        self._check(u)
        if cap is None:
            cap = len(self.adj)
        dist = {u: 0}
        remaining = None if targets is None else set(targets) - {u}
        frontier = deque([u])
        while frontier:
            if remaining is not None and not remaining:
                break
            x = frontier.popleft()
            d = dist[x]
            if d >= cap:
                continue
            for y in self.adj[x]:
                if y not in dist:
                    dist[y] = d + 1
                    frontier.append(y)
                    if remaining is not None:
                        remaining.discard(y)
        return dist


def log_spaced_sizes(n_min: int, n_max: int, factor: float = 1.1) -> list[int]:
    """Node counts growing by ``factor`` per step, from ``n_min`` up to ``n_max``.

    >>> log_spaced_sizes(100, 134)
    [100, 110, 121, 134]
    """
    if n_min < 2:
        raise ValueError(f"n_min must be >= 2, got {n_min}")
    if factor <= 1:
        raise ValueError(f"factor must be > 1, got {factor}")
    if n_min > n_max:
        raise ValueError(f"n_min={n_min} exceeds n_max={n_max}")
    sizes = [int(n_min)]
    while True:
        # guard against float noise such as 100 * 1.1 = 110.00000000000001
        nxt = math.ceil(round(sizes[-1] * factor, 9))
        nxt = max(nxt, sizes[-1] + 1)
        if nxt >= n_max:
            break
        sizes.append(nxt)
    if sizes[-1] != n_max:
        sizes.append(int(n_max))
    return sizes

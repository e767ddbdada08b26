"""Exact clique counts of every size.

Counting walks a pivoting clique tree rooted at each vertex of a degeneracy
ordering. A leaf of the tree with ``h`` held vertices and ``q`` pivots encodes
every clique made of the held vertices plus any subset of the pivots, so it
contributes ``C(q, k - h)`` to the number of ``k``-cliques.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from . import _kernels
from .graph import Graph


@dataclass
class CliqueProfile:
    """Exact ``k``-clique counts of one graph (``counts[1] == n``, ``counts[2] == l``)."""

    n: int
    l: int
    counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.counts = {int(k): int(c) for k, c in sorted(self.counts.items()) if c}

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    @property
    def max_clique(self) -> int:
        return max(self.counts, default=0)

    def total(self, k_min: int = 1) -> int:
        return sum(c for k, c in self.counts.items() if k >= k_min)


def leaves_to_counts(leaves: np.ndarray, max_k: int | None = None) -> dict[int, int]:
    """Expand a ``leaves[h, q]`` tally into exact per-size counts."""
    counts: dict[int, int] = {}
    hs, qs = np.nonzero(leaves)
    for h, q in zip(hs.tolist(), qs.tolist()):
        mult = int(leaves[h, q])
        top = h + q if max_k is None else min(h + q, max_k)
        for k in range(h, top + 1):
            counts[k] = counts.get(k, 0) + mult * math.comb(q, k - h)
    return counts


def degeneracy_ordering(graph: Graph) -> tuple[list[int], int]:
    """Smallest-last ordering and the graph degeneracy."""
    indptr, indices = graph.to_csr()
    order, d = _kernels.degeneracy_order(indptr, indices)
    return order.tolist(), int(d)


def _root_chunk(out_ptr, out_idx, roots, max_h, dim):
    return _kernels.root_leaves(out_ptr, out_idx, roots, max_h, dim)


def count_cliques(graph: Graph, max_k: int | None = None, n_jobs: int | None = None) -> CliqueProfile:
    """Exact number of ``k``-cliques for every ``k`` (or ``k <= max_k``).

    Per-root subproblems are independent; with ``n_jobs > 1`` they are split
    into contiguous chunks and the leaf tallies are summed, which gives the
    same profile whatever the schedule.
    """
    n = graph.node_count
    if n == 0:
        return CliqueProfile(0, 0, {})
    indptr, indices = graph.to_csr()
    order, d = _kernels.degeneracy_order(indptr, indices)
    out_ptr, out_idx = _kernels.orient(indptr, indices, order)
    max_h = n + 1 if max_k is None else int(max_k)
    dim = int(d) + 2
    if n_jobs is None or n_jobs == 1 or n < 1000:
        leaves = _root_chunk(out_ptr, out_idx, order, max_h, dim)
    else:
        from joblib import Parallel, delayed

        chunks = np.array_split(order, 4 * n_jobs)
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_root_chunk)(out_ptr, out_idx, c, max_h, dim) for c in chunks
        )
        leaves = np.sum(parts, axis=0)
    counts = leaves_to_counts(leaves, max_k)
    return CliqueProfile(n, graph.edge_count, counts)


def brute_force_cliques(graph: Graph) -> CliqueProfile:
    """Reference counts by plain ordered extension (no pivoting). ``n <= 30``."""
    n = graph.node_count
    if n > 30:
        raise ValueError(f"brute force counting is limited to 30 nodes, got {n}")
    counts: dict[int, int] = {}

    def extend(size: int, candidates: list[int]) -> None:
        counts[size] = counts.get(size, 0) + 1
        for i, v in enumerate(candidates):
            extend(size + 1, [w for w in candidates[i + 1:] if w in graph.adj[v]])

    for v in range(n):
        extend(1, [w for w in range(v + 1, n) if w in graph.adj[v]])
    return CliqueProfile(n, graph.edge_count, counts)


# --------------------------------------------------------------------------
# profile CSV: header ``N,L,k,count``; one row per k >= 2


def write_profiles_csv(profiles: Iterable[CliqueProfile], fh: TextIO, meta: str | None = None) -> None:
    if meta:
        fh.write(f"# {meta}\n")
    fh.write("N,L,k,count\n")
    for prof in profiles:
        for k, c in sorted(prof.counts.items()):
            if k >= 2:
                fh.write(f"{prof.n},{prof.l},{k},{c}\n")


def read_profiles_csv(fh: TextIO) -> list[CliqueProfile]:
    """Inverse of :func:`write_profiles_csv`; profiles keyed by ``N`` in file order."""
    rows: dict[int, CliqueProfile] = {}
    header_seen = False
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "N,L,k,count":
                raise ValueError(f"line {lineno}: expected header N,L,k,count")
            header_seen = True
            continue
        try:
            n, l, k, c = (int(x) for x in line.split(","))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed row {line!r}") from exc
        prof = rows.setdefault(n, CliqueProfile(n, l, {1: n}))
        prof.counts[k] = c
    return list(rows.values())


def profiles_to_csv_string(profiles: Iterable[CliqueProfile], meta: str | None = None) -> str:
    buf = io.StringIO()
    write_profiles_csv(profiles, buf, meta)
    return buf.getvalue()

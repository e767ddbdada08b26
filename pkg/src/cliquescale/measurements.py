"""Behavioural diagnostics of growth: preferential-attachment ratio,
pre-connection distance against a random-pair null, and mean clique size."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .cliques import CliqueProfile
from .graph import Graph
from .growth import GrowthEvent, GrowthTrace
from .ingest import TemporalEdgeList
from .validation import check_rng


# --------------------------------------------------------------------------
# preferential-attachment ratio


def pa_event_ratio(degrees_before: Sequence[float], attached: Iterable[int]) -> tuple[float, float] | None:
    """Mean degree of the attached neighbours and of all target neighbours.

    ``attached`` indexes into ``degrees_before``. Returns ``None`` when the
    target has no neighbours or none of them was attached.

    >>> pa_event_ratio([9, 1], [0])
    (9.0, 5.0)
    """
    degs = np.asarray(degrees_before, dtype=np.float64)
    if degs.size == 0:
        return None
    idx = sorted(set(attached))
    if not idx:
        return None
    return float(degs[idx].mean()), float(degs.mean())


def event_ratio_terms(event: GrowthEvent) -> tuple[float, float] | None:
    """:func:`pa_event_ratio` for one arrival; only target neighbours count."""
    nbrs = sorted(event.degrees_before)
    if not nbrs:
        return None
    index = {u: i for i, u in enumerate(nbrs)}
    picked = [index[u] for u in event.attached if u in index]
    return pa_event_ratio([event.degrees_before[u] for u in nbrs], picked)


@dataclass
class PaRatioSeries:
    """Per-window ratio of averages, plus the aggregate across windows."""

    sizes: list[int]
    ratios: list[float]  # nan where a window had no qualifying event
    stderrs: list[float]
    counts: list[int]
    ratio: float = math.nan
    stderr: float = math.nan

    def rows(self) -> list[tuple[int, float, float, int]]:
        return list(zip(self.sizes, self.ratios, self.stderrs, self.counts))


def _ratio_of_means(pairs: list[tuple[float, float]]) -> tuple[float, float]:
    a = np.array([x for x, _ in pairs])
    b = np.array([y for _, y in pairs])
    ratio = a.mean() / b.mean()
    if len(pairs) < 2:
        return float(ratio), math.nan
    # delta-method standard error of a ratio of means
    resid = a - ratio * b
    se = math.sqrt(resid.var(ddof=1) / len(pairs)) / b.mean()
    return float(ratio), float(se)


def pa_ratio_series(source: GrowthTrace | Iterable[GrowthEvent], schedule: Sequence[int]) -> PaRatioSeries:
    """Preferential-attachment ratio per snapshot window.

    Window ``i`` collects arrivals that bring the node count into
    ``(schedule[i-1], schedule[i]]``. Within a window the mean attached-
    neighbour degree is averaged over qualifying arrivals and divided by the
    averaged mean neighbour degree. The aggregate is the mean of the defined
    window ratios with its standard error across windows.
    """
    events = source.events if isinstance(source, GrowthTrace) else source
    sizes = [int(s) for s in schedule]
    buckets: list[list[tuple[float, float]]] = [[] for _ in sizes]
    for ev in events:
        n_after = ev.new + 1
        i = int(np.searchsorted(sizes, n_after, side="left"))
        if i >= len(sizes):
            continue
        terms = event_ratio_terms(ev)
        if terms is not None:
            buckets[i].append(terms)
    ratios, ses, counts = [], [], []
    for b in buckets:
        counts.append(len(b))
        if b:
            r, se = _ratio_of_means(b)
        else:
            r, se = math.nan, math.nan
        ratios.append(r)
        ses.append(se)
    out = PaRatioSeries(sizes, ratios, ses, counts)
    defined = np.array([r for r in ratios if not math.isnan(r)])
    if defined.size:
        out.ratio = float(defined.mean())
        out.stderr = float(defined.std(ddof=1) / math.sqrt(defined.size)) if defined.size > 1 else math.nan
    return out


# --------------------------------------------------------------------------
# empirical arrival events


def iter_empirical_events(tel: TemporalEdgeList) -> Iterator[tuple[GrowthEvent, Graph]]:
    """Arrival events of a temporal edge list, with the graph just before each.

    A node's arrival burst is every edge touching it that carries its first
    timestamp. Its target is the first earlier-arrived node (smaller dense id)
    it meets in the burst; all such nodes form the attached set. The
    yielded graph is mutated after the caller resumes.
    """
    src = tel.dense_src.tolist()
    dst = tel.dense_dst.tolist()
    tim = tel.time.tolist()
    n_nodes = tel.node_count
    first_pos = [-1] * n_nodes
    for i, (u, v) in enumerate(zip(src, dst)):
        if first_pos[u] < 0:
            first_pos[u] = i
        if first_pos[v] < 0:
            first_pos[v] = i
    # collect bursts: node -> ordered existing partners met at its first timestamp
    bursts: dict[int, list[int]] = {}
    for i, (u, v) in enumerate(zip(src, dst)):
        if u == v:
            continue
        for node, w in ((u, v), (v, u)):
            if tim[i] == tim[first_pos[node]] and w < node:
                partners = bursts.setdefault(node, [])
                if w not in partners:
                    partners.append(w)
    g = Graph()
    for i, (u, v) in enumerate(zip(src, dst)):
        for node in sorted({u, v}):
            if node < g.node_count:
                continue
            if node in bursts:
                partners = bursts[node]
                target = partners[0]
                ev = GrowthEvent(node, target, tuple(sorted(partners)),
                                 {w: len(g.adj[w]) for w in g.adj[target]})
                yield ev, g
            g.add_node()
        g.add_edge(u, v)


def empirical_pa_events(tel: TemporalEdgeList) -> list[GrowthEvent]:
    return [ev for ev, _ in iter_empirical_events(tel)]


# --------------------------------------------------------------------------
# distances


def pre_connection_distances(graph_before: Graph, attached: Iterable[int], cap: int | None = None) -> tuple[list[int], int]:
    """Pairwise hop distances among ``attached`` before the new node links them.

    Returns ``(distances, n_unreachable)``; unreachable pairs are excluded
    from the list.
    """
    nodes = sorted(set(attached))
    dists: list[int] = []
    unreachable = 0
    for i, u in enumerate(nodes[:-1]):
        rest = set(nodes[i + 1:])
        found = graph_before.bfs_from(u, cap, targets=rest)
        for w in nodes[i + 1:]:
            d = found.get(w)
            if d is None:
                unreachable += 1
            else:
                dists.append(d)
    return dists, unreachable


def _graph_csr(graph: Graph) -> csr_matrix:
    indptr, indices = graph.to_csr()
    n = graph.node_count
    return csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(n, n))


def random_pair_null(graph: Graph, samples: int | None = 1000, rng=None, cap: int | None = None) -> tuple[list[int], int]:
    """Distances between uniform random distinct node pairs.

    ``samples=None`` uses every unordered pair instead. Returns
    ``(distances, n_unreachable)``.
    """
    n = graph.node_count
    if n < 2:
        raise ValueError("need at least two nodes")
    if samples is None:
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    else:
        rng = check_rng(rng)
        u = rng.integers(0, n, size=samples)
        v = rng.integers(0, n - 1, size=samples)
        v = np.where(v >= u, v + 1, v)
        pairs = list(zip(u.tolist(), v.tolist()))
    csr = _graph_csr(graph)
    sources = sorted({u for u, _ in pairs})
    dists: list[int] = []
    unreachable = 0
    for lo in range(0, len(sources), 128):
        chunk = sources[lo:lo + 128]
        table = shortest_path(csr, method="D", unweighted=True, indices=chunk)
        row = {s: i for i, s in enumerate(chunk)}
        for a, b in pairs:
            if a in row:
                d = table[row[a], b]
                if np.isinf(d) or (cap is not None and d > cap):
                    unreachable += 1
                else:
                    dists.append(int(d))
    return dists, unreachable


def geometric_mean(values: Sequence[float]) -> float:
    if len(values) == 0:
        return math.nan
    return float(np.exp(np.mean(np.log(np.asarray(values, dtype=np.float64)))))


@dataclass
class DistanceSeries:
    sizes: list[int] = field(default_factory=list)
    dist_geomean: list[float] = field(default_factory=list)
    null_geomean: list[float] = field(default_factory=list)
    unreachable_frac: list[float] = field(default_factory=list)
    n_pairs: list[int] = field(default_factory=list)
    max_distance: list[int] = field(default_factory=list)

    def rows(self):
        return list(zip(self.sizes, self.dist_geomean, self.null_geomean, self.unreachable_frac))


def distance_series(
    source: GrowthTrace | TemporalEdgeList,
    schedule: Sequence[int],
    cap: int | None = None,
    null_samples: int = 1000,
    max_events: int | None = None,
    rng=None,
) -> DistanceSeries:
    """Pooled pre-connection distances per snapshot window, against the null.

    The null is sampled on the graph as it stands when the window closes.
    ``max_events`` subsamples arrivals per window (every arrival when ``None``).
    """
    rng = check_rng(rng)
    sizes = [int(s) for s in schedule]
    stream = source.replay() if isinstance(source, GrowthTrace) else iter_empirical_events(source)
    out = DistanceSeries()
    window = 0
    pooled: list[int] = []
    unreachable = 0
    graph_ref: Graph | None = None

    def close(g: Graph) -> None:
        nonlocal pooled, unreachable
        total = len(pooled) + unreachable
        null, _ = random_pair_null(g, null_samples, rng, cap) if g.node_count >= 2 else ([], 0)
        out.sizes.append(sizes[window])
        out.dist_geomean.append(geometric_mean(pooled))
        out.null_geomean.append(geometric_mean(null))
        out.unreachable_frac.append(unreachable / total if total else math.nan)
        out.n_pairs.append(len(pooled))
        out.max_distance.append(max(pooled, default=0))
        pooled, unreachable = [], 0

    for ev, g in stream:
        graph_ref = g
        n_after = ev.new + 1
        while window < len(sizes) and n_after > sizes[window]:
            close(g)
            window += 1
        if window >= len(sizes):
            break
        if max_events is not None:
            width = sizes[window] - (sizes[window - 1] if window else 0)
            if width > max_events and rng.random() >= max_events / width:
                continue
        d, un = pre_connection_distances(g, ev.attached, cap)
        pooled.extend(d)
        unreachable += un
    if graph_ref is not None and window < len(sizes):
        close(graph_ref)
    return out


# --------------------------------------------------------------------------
# clique sizes


def mean_clique_size(profile: CliqueProfile, k_min: int = 2) -> float:
    """Count-weighted mean clique size over sizes ``>= k_min``.

    >>> from cliquescale.cliques import CliqueProfile
    >>> mean_clique_size(CliqueProfile(4, 6, {1: 4, 2: 6, 3: 4, 4: 1}), 1)
    2.1333333333333333
    """
    items = [(k, c) for k, c in profile.counts.items() if k >= k_min and c > 0]
    total = sum(c for _, c in items)
    if total == 0:
        raise ValueError(f"profile has no cliques of size >= {k_min}")
    return sum(k * c for k, c in items) / total

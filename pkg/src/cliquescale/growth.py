"""Step-wise growth: LPAM, node copying, Forest Fire and Barabasi-Albert.

Two engines produce the same traces. ``engine="python"`` drives the step
functions below on a :class:`~cliquescale.graph.Graph`; ``engine="numba"``
runs the compiled loop in :mod:`cliquescale._kernels`. Both draw from the
same ``numpy.random.Generator`` in the same order, so a seed gives
bit-identical events either way.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Sequence, TextIO

import numpy as np

from . import _kernels
from .cliques import CliqueProfile, count_cliques, leaves_to_counts
from .graph import Graph
from .validation import check_positive_int, check_probability, check_rng, check_schedule

if TYPE_CHECKING:
    from .models import GrowthModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthEvent:
    """One arrival: ``new`` links to every node of ``attached`` (target included).

    ``degrees_before`` maps each neighbour of the target to its degree just
    before the arrival.
    """

    new: int
    target: int
    attached: tuple[int, ...]
    degrees_before: dict[int, int] = field(hash=False, compare=True)


def lpam_neighbor_probabilities(p: float, r: float, neighbor_degrees: Sequence[int]) -> np.ndarray:
    """Per-neighbour link probabilities for a target with the given neighbours.

    Starts from ``p * k_i / mean(k)`` and caps every value at
    ``p + (1 - p) * r``, spreading clipped mass over the neighbours still
    below the cap. The mean number of links stays ``p * len(neighbor_degrees)``.

    >>> lpam_neighbor_probabilities(0.5, 1.0, [9, 1]).tolist()
    [0.9, 0.1]
    """
    p = check_probability(p, "p")
    r = check_probability(r, "r")
    degrees = np.asarray(neighbor_degrees, dtype=np.float64)
    if degrees.ndim != 1 or degrees.size == 0:
        raise ValueError("neighbor_degrees must be a non-empty 1-d sequence")
    if np.any(degrees < 1):
        raise ValueError("neighbour degrees must be >= 1")
    return _kernels.redistribute(p, r, degrees)


def _attach(graph: Graph, target: int, nbrs: list[int], probs, rng) -> GrowthEvent:
    degrees = {u: len(graph.adj[u]) for u in nbrs}
    attached = [target]
    if nbrs:
        draws = rng.random(len(nbrs))
        attached += [u for u, x, pr in zip(nbrs, draws, probs) if x < pr]
    attached.sort()
    v = graph.add_node()
    for u in attached:
        graph.add_edge(v, u)
    return GrowthEvent(v, target, tuple(attached), degrees)


def lpam_step(graph: Graph, p: float, r: float, rng) -> GrowthEvent:
    """Add one node: link to a uniform target, then to each target neighbour
    independently with its redistributed probability."""
    n = graph.node_count
    if n < 1:
        raise ValueError("growth needs at least one existing node")
    t = int(rng.integers(0, n))
    nbrs = sorted(graph.adj[t])
    probs = (
        _kernels.redistribute(p, r, np.array([len(graph.adj[u]) for u in nbrs], dtype=np.float64))
        if nbrs
        else ()
    )
    return _attach(graph, t, nbrs, probs, rng)


def copy_step(graph: Graph, p: float, rng) -> GrowthEvent:
    """Node copying: like :func:`lpam_step` with a flat probability ``p``."""
    n = graph.node_count
    if n < 1:
        raise ValueError("growth needs at least one existing node")
    t = int(rng.integers(0, n))
    nbrs = sorted(graph.adj[t])
    return _attach(graph, t, nbrs, [p] * len(nbrs), rng)


def forest_fire_step(graph: Graph, pf: float, pb: float, rng) -> GrowthEvent:
    """Forest Fire arrival on an undirected graph.

    Arrival order orients every edge from the newer to the older endpoint. From
    each burning node the fire spreads to ``x`` unburned older neighbours and
    ``y`` unburned newer ones, with ``x`` geometric of mean ``pf / (1 - pf)``
    and ``y`` geometric of mean ``pf pb / (1 - pf pb)``, each capped by the
    number of candidates. Every burned node is linked to the new node.
    """
    n = graph.node_count
    if n < 1:
        raise ValueError("growth needs at least one existing node")
    w = int(rng.integers(0, n))
    burned = {w}
    queue = [w]
    head = 0
    back = pf * pb
    while head < len(queue):
        x = queue[head]
        head += 1
        nbrs = sorted(graph.adj[x])
        for side, prob in ((0, pf), (1, back)):
            cand = [y for y in nbrs if y not in burned and ((y < x) if side == 0 else (y > x))]
            take = _kernels.geometric_count(prob, len(cand), rng)
            for i in range(take):
                j = int(rng.integers(i, len(cand)))
                cand[i], cand[j] = cand[j], cand[i]
                burned.add(cand[i])
                queue.append(cand[i])
    degrees = {u: len(graph.adj[u]) for u in graph.adj[w]}
    attached = tuple(sorted(burned))
    v = graph.add_node()
    for u in attached:
        graph.add_edge(v, u)
    return GrowthEvent(v, w, attached, degrees)


def ba_step(graph: Graph, m: int, rng) -> GrowthEvent:
    """Link a new node to ``m`` distinct nodes drawn proportionally to degree.

    Falls back to uniform draws while the graph has no edges.
    """
    n = graph.node_count
    if n < m:
        raise ValueError(f"need at least m={m} nodes, graph has {n}")
    degrees = graph.degrees()
    total = int(degrees.sum())
    if total > 0 and np.count_nonzero(degrees) < m:
        raise ValueError(f"fewer than m={m} nodes have positive degree")
    cum = np.cumsum(degrees)
    chosen: list[int] = []
    while len(chosen) < m:
        if total == 0:
            x = int(rng.integers(0, n))
        else:
            x = int(np.searchsorted(cum, rng.random() * total, side="right"))
        if x not in chosen:
            chosen.append(x)
    target = chosen[0]
    degrees_before = {u: len(graph.adj[u]) for u in graph.adj[target]}
    attached = tuple(sorted(chosen))
    v = graph.add_node()
    for u in attached:
        graph.add_edge(v, u)
    return GrowthEvent(v, target, attached, degrees_before)


def expected_edge_count(p: float, n: float) -> float:
    """Asymptotic number of links after ``n`` copying/LPAM arrivals.

    ``n / (1 - 2p)`` below ``p = 1/2``, ``n ln n`` at it, and
    ``A(p) n**(2p)`` above, with ``A(p) = 1 / ((2p - 1) Gamma(1 + 2p))``.
    """
    p = check_probability(p, "p")
    if n < 1:
        raise ValueError("n must be >= 1")
    if p < 0.5:
        return n / (1.0 - 2.0 * p)
    if p == 0.5:
        return n * math.log(n)
    amp = 1.0 / ((2.0 * p - 1.0) * math.gamma(1.0 + 2.0 * p))
    return amp * n ** (2.0 * p)


# --------------------------------------------------------------------------
# traces


@dataclass
class Snapshot:
    n: int
    l: int
    profile: CliqueProfile | None = None


@dataclass
class GrowthTrace:
    """Arrival record of one realization.

    Events are stored compactly: node ``v >= 1`` arrived attached to
    ``attached_flat[offsets[v]:offsets[v + 1]]`` with target ``targets[v]``.
    ``status`` is ``"ok"`` or the reason growth stopped early
    (``"timeout"``, ``"clique_cap"``).
    """

    model: "GrowthModel"
    seed: object
    schedule: list[int]
    n_target: int
    n: int
    targets: np.ndarray
    offsets: np.ndarray
    attached_flat: np.ndarray | None
    snapshots: list[Snapshot]
    status: str = "ok"
    elapsed: float = 0.0
    _graph: Graph | None = field(default=None, repr=False)
    _events: list[GrowthEvent] | None = field(default=None, repr=False)

    @property
    def recorded(self) -> bool:
        return self.attached_flat is not None

    def attached_of(self, v: int) -> np.ndarray:
        return self.attached_flat[self.offsets[v]:self.offsets[v + 1]]

    def replay(self) -> Iterator[tuple[GrowthEvent, Graph]]:
        """Yield ``(event, graph_before)``; the graph is mutated after each yield."""
        if not self.recorded:
            raise ValueError("trace was grown with record=False")
        g = Graph(1 if self.n else 0)
        for v in range(1, self.n):
            t = int(self.targets[v])
            att = tuple(int(u) for u in self.attached_of(v))
            ev = GrowthEvent(v, t, att, {u: len(g.adj[u]) for u in g.adj[t]})
            yield ev, g
            g.add_node()
            for u in att:
                g.add_edge(v, u)

    @property
    def events(self) -> list[GrowthEvent]:
        if self._events is None:
            self._events = [ev for ev, _ in self.replay()]
        return self._events

    @property
    def graph(self) -> Graph:
        """Final graph, rebuilt from the events."""
        if self._graph is None:
            g = Graph(1 if self.n else 0)
            for v in range(1, self.n):
                g.add_node()
                for u in self.attached_of(v):
                    g.add_edge(v, int(u))
            self._graph = g
        return self._graph

    @property
    def sizes(self) -> list[int]:
        return [s.n for s in self.snapshots]

    @property
    def edge_counts(self) -> list[int]:
        return [s.l for s in self.snapshots]

    @property
    def profiles(self) -> list[CliqueProfile]:
        return [s.profile for s in self.snapshots if s.profile is not None]

    def write_event_log(self, fh: TextIO) -> None:
        """One line per arrival, ``NEW TARGET a1,a2,...``, after a ``#`` header."""
        params = " ".join(f"{k}={v}" for k, v in sorted(self.model.get_params().items()))
        fh.write(f"# model={self.model.family} {params} seed={self.seed} nodes={self.n}\n")
        for v in range(1, self.n):
            att = ",".join(str(int(u)) for u in self.attached_of(v))
            fh.write(f"{v} {int(self.targets[v])} {att}\n")


def read_event_log(fh: TextIO) -> tuple[dict[str, str], list[tuple[int, int, tuple[int, ...]]]]:
    """Parse an event log into its header fields and ``(new, target, attached)`` rows."""
    header: dict[str, str] = {}
    rows = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    header[k] = v
            continue
        parts = line.split()
        try:
            new, target = int(parts[0]), int(parts[1])
            att = tuple(int(x) for x in parts[2].split(",")) if len(parts) > 2 else ()
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: malformed event {line!r}") from exc
        rows.append((new, target, att))
    return header, rows


def trace_from_event_log(fh: TextIO, model=None) -> GrowthTrace:
    from .models import model_from_params

    header, rows = read_event_log(fh)
    if model is None and "model" in header:
        model = model_from_params(header["model"], {k: v for k, v in header.items() if k not in ("model", "seed", "nodes")})
    n = len(rows) + 1
    targets = np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    flat: list[int] = []
    for new, target, att in rows:
        targets[new] = target
        flat.extend(att)
        offsets[new + 1] = len(flat)
    g_edges = len(flat)
    return GrowthTrace(model, header.get("seed"), [n], n, n, targets, offsets,
                       np.asarray(flat, dtype=np.int64), [Snapshot(n, g_edges)])


# --------------------------------------------------------------------------
# driver


def grow(
    model: "GrowthModel",
    n_target: int,
    seed=None,
    schedule: Sequence[int] | None = None,
    *,
    engine: str = "numba",
    record: bool = True,
    track_cliques: bool = True,
    max_k: int | None = None,
    clique_cap: float | None = None,
    time_budget: float | None = None,
    tally_dim: int = 160,
) -> GrowthTrace:
    """Grow one realization from a single seed node up to ``n_target`` nodes.

    Snapshots are taken when the node count reaches each ``schedule`` entry
    (``n_target`` alone when no schedule is given). With ``track_cliques``
    each snapshot carries its exact :class:`CliqueProfile`.

    Growth stops early, with ``trace.status`` set, when the running clique
    total exceeds ``clique_cap`` or wall time exceeds ``time_budget`` seconds.
    """
    n_target = check_positive_int(n_target, "n_target")
    model._validate()
    sizes = check_schedule(schedule) if schedule is not None else [n_target]
    sizes = [s for s in sizes if s <= n_target]
    if not sizes or sizes[-1] != n_target:
        # the final size is always a snapshot
        sizes.append(n_target)
    rng = check_rng(seed)
    if engine == "numba":
        return _grow_numba(model, n_target, seed, sizes, rng, record, track_cliques,
                           max_k, clique_cap, time_budget, tally_dim)
    if engine == "python":
        return _grow_python(model, n_target, seed, sizes, rng, track_cliques, max_k, time_budget)
    raise ValueError(f"unknown engine {engine!r}")


def _grow_python(model, n_target, seed, sizes, rng, track_cliques, max_k, time_budget):
    t0 = time.perf_counter()
    g = Graph(1)
    targets = np.zeros(n_target, dtype=np.int64)
    offsets = np.zeros(n_target + 1, dtype=np.int64)
    flat: list[int] = []
    snapshots = []
    status = "ok"
    pending = list(sizes)
    while pending and pending[0] <= 1:
        snapshots.append(_snapshot(g, track_cliques, max_k))
        pending.pop(0)
    while g.node_count < n_target:
        ev = model.step(g, rng)
        targets[ev.new] = ev.target
        flat.extend(ev.attached)
        offsets[ev.new + 1] = len(flat)
        if pending and g.node_count == pending[0]:
            snapshots.append(_snapshot(g, track_cliques, max_k))
            pending.pop(0)
            if time_budget is not None and time.perf_counter() - t0 > time_budget:
                status = "timeout"
                break
    n = g.node_count
    return GrowthTrace(model, seed, list(sizes), n_target, n, targets[:n], offsets[:n + 1],
                       np.asarray(flat, dtype=np.int64), snapshots, status,
                       time.perf_counter() - t0, _graph=g)


def _snapshot(g: Graph, track_cliques: bool, max_k) -> Snapshot:
    prof = count_cliques(g, max_k=max_k) if track_cliques else None
    return Snapshot(g.node_count, g.edge_count, prof)


# between time-budget checks when snapshots are far apart
_CHUNK = 1024


def _grow_numba(model, n_target, seed, sizes, rng, record, track_cliques, max_k,
                clique_cap, time_budget, tally_dim):
    t0 = time.perf_counter()
    code, a, b = model.kernel_spec()
    pool = np.empty(max(64, 8 * n_target), dtype=np.int32)
    start = np.zeros(n_target, dtype=np.int64)
    deg = np.zeros(n_target, dtype=np.int64)
    cap = np.zeros(n_target, dtype=np.int64)
    fen = np.zeros(n_target + 1 if code == _kernels.MODEL_BA else 1, dtype=np.int64)
    mark = np.full(n_target if code == _kernels.MODEL_FOREST_FIRE else 1, -1, dtype=np.int64)
    targets = np.zeros(n_target if record else 1, dtype=np.int64)
    offsets = np.zeros(n_target + 1 if record else 1, dtype=np.int64)
    ev_nodes = np.empty(max(64, 4 * n_target) if record else 1, dtype=np.int64)
    leaves = np.zeros((tally_dim, tally_dim) if track_cliques else (1, 1), dtype=np.int64)
    max_h = tally_dim if max_k is None else int(max_k)
    cap_value = float(clique_cap) if clique_cap else 0.0

    n = 1
    pool_end = 0
    edge_count = 0
    clique_total = 0.0
    if track_cliques:
        leaves[1, 0] = 1  # the seed node
        clique_total = 1.0
    snapshots = []
    status = "ok"
    pending = list(sizes)
    while True:
        while pending and pending[0] <= n:
            if pending[0] == n:
                prof = None
                if track_cliques:
                    counts = leaves_to_counts(leaves, max_k)
                    prof = CliqueProfile(n, edge_count, counts)
                snapshots.append(Snapshot(n, edge_count, prof))
            pending.pop(0)
        if n >= n_target or status != "ok":
            break
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            status = "timeout"
            break
        n_stop = min(pending[0], n + _CHUNK) if pending else n_target
        (n, pool, pool_end, edge_count, ev_nodes, clique_total, code_status) = _kernels.advance(
            code, a, b, rng, n, n_stop, pool, pool_end, start, deg, cap, fen, mark, edge_count,
            record, targets, offsets, ev_nodes, track_cliques, max_h, leaves, clique_total, cap_value,
        )
        if code_status == _kernels.STATUS_CLIQUE_CAP:
            status = "clique_cap"
        elif code_status == _kernels.STATUS_TALLY_OVERFLOW:
            if cap_value:
                status = "clique_cap"
            else:
                raise RuntimeError(
                    f"a clique larger than tally_dim={tally_dim} appeared; pass a larger tally_dim or max_k"
                )
    return GrowthTrace(
        model, seed, list(sizes), n_target, n,
        targets[:n] if record else targets, offsets[:n + 1] if record else offsets,
        ev_nodes[: offsets[n]] if record else None,
        snapshots, status, time.perf_counter() - t0,
    )

"""Temporal edge lists and cumulative snapshot series.

Input files hold one edge per line, ``SRC DST UNIXTIME [EXTRA...]``, fields
separated by spaces or tabs; lines starting with ``#`` are comments. Extra
fields such as weights or trust signs are ignored, as is edge direction.
"""
from __future__ import annotations

import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence, TextIO

import numpy as np

from .cliques import CliqueProfile, count_cliques, read_profiles_csv, write_profiles_csv
from .graph import Graph

logger = logging.getLogger(__name__)


@dataclass
class TemporalEdgeList:
    """Edges sorted by time (stable), with raw ids and their dense relabeling.

    Dense ids follow first appearance in time order, so they double as
    arrival order.
    """

    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    id_map: dict[int, int]

    def __post_init__(self):
        self.dense_src = np.fromiter((self.id_map[s] for s in self.src.tolist()), dtype=np.int64, count=len(self.src))
        self.dense_dst = np.fromiter((self.id_map[d] for d in self.dst.tolist()), dtype=np.int64, count=len(self.dst))

    def __len__(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.time.tolist()))

    @property
    def self_loop(self) -> np.ndarray:
        return self.src == self.dst

    @property
    def node_count(self) -> int:
        return len(self.id_map)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, int]]) -> "TemporalEdgeList":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 3)
        order = np.argsort(arr[:, 2], kind="stable")
        arr = arr[order]
        id_map: dict[int, int] = {}
        for s, d in arr[:, :2].tolist():
            if s not in id_map:
                id_map[s] = len(id_map)
            if d not in id_map:
                id_map[d] = len(id_map)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), id_map)


def parse_temporal_edges(stream: BinaryIO | TextIO | bytes | str) -> TemporalEdgeList:
    """Parse ``SRC DST TIME [EXTRA...]`` lines into a time-sorted edge list."""
    if isinstance(stream, (bytes, str)):
        text = stream.decode() if isinstance(stream, bytes) else stream
        lines: Iterable = io.StringIO(text)
    else:
        lines = stream
    rows = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.decode() if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValueError(f"line {lineno}: expected SRC DST TIME, got {line!r}")
        try:
            rows.append((int(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field in {line!r}") from None
    return TemporalEdgeList.from_edges(rows)


def read_temporal_edges(path: str | os.PathLike) -> TemporalEdgeList:
    with open(path, "rb") as fh:
        return parse_temporal_edges(fh)


@dataclass
class SeriesSnapshot:
    n: int
    l: int
    n_edges: int  # prefix length into SnapshotSeries.edges
    profile: CliqueProfile | None = None


@dataclass
class SnapshotSeries:
    """Cumulative snapshots of one growing graph.

    ``edges`` holds the de-duplicated, loop-free edges (dense ids) in replay
    order; snapshot ``i`` is the graph on its first ``n`` nodes made of the
    first ``snapshots[i].n_edges`` edges.
    """

    snapshots: list[SeriesSnapshot]
    edges: np.ndarray | None = None
    times: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def sizes(self) -> list[int]:
        return [s.n for s in self.snapshots]

    @property
    def edge_counts(self) -> list[int]:
        return [s.l for s in self.snapshots]

    def graph_at(self, i: int) -> Graph:
        if self.edges is None:
            raise ValueError("series was built from profiles only; no edges to rebuild graphs")
        snap = self.snapshots[i]
        return Graph.from_edges(snap.n, self.edges[: snap.n_edges].tolist())

    def compute_profiles(self, max_k: int | None = None, n_jobs: int | None = None) -> list[CliqueProfile]:
        """Exact clique profile of every snapshot (cached on the snapshots)."""
        for i, snap in enumerate(self.snapshots):
            if snap.profile is None:
                snap.profile = count_cliques(self.graph_at(i), max_k=max_k, n_jobs=n_jobs)
        return [s.profile for s in self.snapshots]

    @property
    def profiles(self) -> list[CliqueProfile]:
        return self.compute_profiles()

    @classmethod
    def from_profiles(cls, profiles: Sequence[CliqueProfile], meta: dict | None = None) -> "SnapshotSeries":
        snaps = [SeriesSnapshot(p.n, p.l, p.l, p) for p in profiles]
        return cls(snaps, meta=dict(meta or {}))

    @classmethod
    def from_trace(cls, trace) -> "SnapshotSeries":
        """Series view of a growth trace (edges in arrival order, target first)."""
        snaps = []
        edges = times = None
        if trace.recorded:
            edges, times = trace_edges(trace)
        for s in trace.snapshots:
            n_edges = int(trace.offsets[s.n]) if trace.recorded else s.l
            snaps.append(SeriesSnapshot(s.n, s.l, n_edges, s.profile))
        return cls(snaps, edges, times, meta={"source": "model", "model": trace.model.family,
                                                **trace.model.get_params(), "seed": trace.seed})


def trace_edges(trace) -> tuple[np.ndarray, np.ndarray]:
    """Edges of a trace in arrival order, each arrival's target edge first.

    The timestamp of every edge is the arrival index of its newer endpoint.
    """
    rows = []
    times = []
    for v in range(1, trace.n):
        t = int(trace.targets[v])
        att = [int(u) for u in trace.attached_of(v)]
        rows.append((t, v))
        rows.extend((u, v) for u in att if u != t)
        times.extend([v] * len(att))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2), np.asarray(times, dtype=np.int64)


def build_cumulative_snapshots(tel: TemporalEdgeList, schedule: Sequence[int]) -> SnapshotSeries:
    """Replay edges in time order, snapshotting each scheduled size ``N``.

    The snapshot at ``N`` holds every edge seen before the first edge that
    brings in node ``N + 1``. When one edge brings in two nodes and jumps past
    a size, the snapshot is taken at the larger count. Self-loops and repeated
    edges add no links (their endpoints still count as nodes). Sizes beyond
    the data's node count are dropped with a warning.
    """
    sizes = [int(s) for s in schedule]
    total = tel.node_count
    if sizes and sizes[-1] > total:
        logger.warning("schedule truncated: data has %d nodes, schedule asks for up to %d", total, sizes[-1])
        sizes = [s for s in sizes if s <= total]
    g = Graph()
    kept_edges: list[tuple[int, int]] = []
    kept_times: list[int] = []
    snaps: list[SeriesSnapshot] = []
    pending = list(sizes)

    def flush():
        if pending and g.node_count >= pending[0]:
            snaps.append(SeriesSnapshot(g.node_count, g.edge_count, len(kept_edges)))
            while pending and g.node_count >= pending[0]:
                pending.pop(0)

    for u, v, t in zip(tel.dense_src.tolist(), tel.dense_dst.tolist(), tel.time.tolist()):
        hi = max(u, v)
        if hi >= g.node_count:
            flush()
            if not pending:
                break
            while g.node_count <= hi:
                g.add_node()
        if g.add_edge(u, v):
            kept_edges.append((u, v))
            kept_times.append(t)
    flush()
    edges = np.asarray(kept_edges, dtype=np.int64).reshape(-1, 2)
    return SnapshotSeries(snaps, edges, np.asarray(kept_times, dtype=np.int64), meta={"source": "empirical"})


# --------------------------------------------------------------------------
# on-disk series: DIR/manifest.json, DIR/edges.tsv, DIR/profiles.csv


def write_edge_list(edges: np.ndarray, times: np.ndarray | None, fh: TextIO) -> None:
    """Write ``SRC DST TIME`` lines (the same layout the parser reads)."""
    if times is None:
        times = np.zeros(len(edges), dtype=np.int64)
    for (u, v), t in zip(edges.tolist(), times.tolist()):
        fh.write(f"{u} {v} {t}\n")


def save_series(series: SnapshotSeries, directory: str | os.PathLike, meta_line: str | None = None) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "meta": series.meta,
        "snapshots": [{"N": s.n, "L": s.l, "n_edges": s.n_edges} for s in series.snapshots],
    }
    if series.edges is not None:
        with open(out / "edges.tsv", "w") as fh:
            if meta_line:
                fh.write(f"# {meta_line}\n")
            write_edge_list(series.edges, series.times, fh)
        manifest["edges"] = "edges.tsv"
    if all(s.profile is not None for s in series.snapshots) and series.snapshots:
        with open(out / "profiles.csv", "w") as fh:
            write_profiles_csv([s.profile for s in series.snapshots], fh, meta_line)
        manifest["profiles"] = "profiles.csv"
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return out


def load_series(directory: str | os.PathLike) -> SnapshotSeries:
    """Load a series directory written by :func:`save_series` (or the CLI)."""
    d = Path(directory)
    with open(d / "manifest.json") as fh:
        manifest = json.load(fh)
    snaps = [SeriesSnapshot(s["N"], s["L"], s["n_edges"]) for s in manifest["snapshots"]]
    edges = times = None
    if manifest.get("edges"):
        tel = np.loadtxt(d / manifest["edges"], dtype=np.int64, comments="#", ndmin=2)
        if tel.size:
            edges, times = tel[:, :2].copy(), tel[:, 2].copy()
        else:
            edges, times = np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
    if manifest.get("profiles"):
        with open(d / manifest["profiles"]) as fh:
            by_n = {p.n: p for p in read_profiles_csv(fh)}
        for s in snaps:
            s.profile = by_n.get(s.n)
    return SnapshotSeries(snaps, edges, times, manifest.get("meta", {}))


def load_temporal_edges_from_series(directory: str | os.PathLike) -> TemporalEdgeList:
    d = Path(directory)
    with open(d / "edges.tsv", "rb") as fh:
        return parse_temporal_edges(fh)

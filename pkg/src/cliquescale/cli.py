"""Command-line pipelines.

Every command writes CSV with a leading ``#`` metadata line (package
version, seed, config hash). Exit status: 0 on success, 1 on a runtime
error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .cliques import CliqueProfile, count_cliques, write_profiles_csv
from .graph import Graph, log_spaced_sizes
from .growth import trace_from_event_log
from .ingest import (
    SnapshotSeries,
    build_cumulative_snapshots,
    load_series,
    load_temporal_edges_from_series,
    read_temporal_edges,
    save_series,
    write_edge_list,
)
from .measurements import distance_series, empirical_pa_events, mean_clique_size, pa_ratio_series
from .models import FAMILIES, model_from_params
from .scaling import envelope_curve, exponent_spectrum
from .selection import (
    DEFAULT_BUDGET,
    DEFAULT_CLIQUE_CAP,
    default_jobs,
    grid_search,
    parameter_grid,
    write_discard_log,
    write_results_csv,
)

logger = logging.getLogger("cliquescale")

MODEL_PARAMS = {"lpam": ("p", "r"), "copy": ("p",), "forestfire": ("pf", "pb"), "ba": ("m",)}
_NOT_CONFIG = {"func", "out", "plot", "quiet", "discard_log", "command", "jobs"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers


def config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def meta_line(args: argparse.Namespace, **extra) -> str:
    fields = [f"cliquescale={__version__}", f"command={args.command}"]
    if getattr(args, "measure", None):
        fields[-1] += f":{args.measure}"
    fields.append(f"seed={getattr(args, 'seed', None)}")
    fields.append(f"config={config_hash(args)}")
    fields.extend(f"{k}={v}" for k, v in extra.items())
    return " ".join(fields)


def fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(round(x, 12))
    return str(x)


def write_csv(path: str | None, header: str, rows, meta: str, plot: bool = False) -> None:
    def emit(fh: TextIO):
        fh.write(f"# {meta}\n{header}\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")

    if path is None or path == "-":
        emit(sys.stdout)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        emit(fh)
    if plot:
        write_plot_script(path, header.split(","))


_PLOT_TEMPLATE = '''"""Plot {csv} (generated)."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv!r}
with open(path) as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
x, ys = {x!r}, {ys!r}
fig, ax = plt.subplots()
for y in ys:
    pts = [(float(r[x]), float(r[y])) for r in rows if r[y] not in ("", "nan")]
    ax.plot([a for a, _ in pts], [b for _, b in pts], "o-", label=y)
ax.set_xlabel(x)
{scale}ax.legend()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def write_plot_script(csv_path: str, columns: list[str]) -> Path:
    x = columns[0]
    ys = [c for c in columns[1:] if c not in ("stderr", "count", "n_points", "source_k", "intercept")][:3]
    scale = 'ax.set_xscale("log")\nax.set_yscale("log")\n' if x == "N" else ""
    out = Path(str(csv_path).rsplit(".", 1)[0] + ".plot.py")
    out.write_text(_PLOT_TEMPLATE.format(csv=Path(csv_path).name, x=x, ys=ys, scale=scale))
    return out


def _schedule(args, n_max: int) -> list[int]:
    hi = min(args.n_max or n_max, n_max)
    lo = min(args.n_min, hi)
    return log_spaced_sizes(max(lo, 2), max(hi, 2), args.factor)


def _load_profiles(args) -> list[CliqueProfile]:
    series = load_series(args.series)
    return series.compute_profiles(max_k=getattr(args, "max_k", None), n_jobs=args.jobs)


# --------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    params = {}
    for name in MODEL_PARAMS[args.model]:
        value = getattr(args, name)
        if value is None:
            raise UsageError(f"--model {args.model} requires --{name}")
        params[name] = value
    try:
        model = model_from_params(args.model, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.nodes < 1:
        raise UsageError("--nodes must be at least 1")
    sizes = _schedule(args, args.nodes) if args.nodes >= 2 else []
    trace = model.grow(args.nodes, seed=args.seed, schedule=sizes, record=True,
                       track_cliques=True, max_k=args.max_k)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = meta_line(args, model=args.model, **params)
    with open(out / "events.log", "w") as fh:
        trace.write_event_log(fh)
    series = SnapshotSeries.from_trace(trace)
    save_series(series, out, meta)
    if not args.no_snapshot_edges:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for s in series.snapshots:
            with open(snap_dir / f"N{s.n}.tsv", "w") as fh:
                fh.write(f"# {meta} N={s.n} L={s.l}\n")
                write_edge_list(series.edges[: s.n_edges], series.times[: s.n_edges], fh)
    logger.info("generated %s: N=%d L=%d, %d snapshots -> %s", args.model, trace.n,
                series.snapshots[-1].l if len(series) else 0, len(series), out)
    return 0


def cmd_ingest(args) -> int:
    tel = read_temporal_edges(args.input)
    if tel.node_count < 2:
        raise ValueError(f"{args.input}: need at least 2 nodes")
    sizes = _schedule(args, tel.node_count)
    series = build_cumulative_snapshots(tel, sizes)
    series.meta.update({"input": os.path.basename(args.input)})
    if not args.no_profiles:
        series.compute_profiles(max_k=args.max_k, n_jobs=args.jobs)
    save_series(series, args.out, meta_line(args))
    logger.info("ingested %d edges, %d nodes, %d snapshots -> %s", len(tel), tel.node_count, len(series), args.out)
    return 0


def _read_plain_graph(path: str) -> Graph:
    """Edge list with at least two integer fields per line; ids relabeled densely."""
    ids: dict[int, int] = {}
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected at least two fields")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer node id") from None
            edges.append((ids.setdefault(u, len(ids)), ids.setdefault(v, len(ids))))
    return Graph.from_edges(len(ids), edges)


def cmd_count(args) -> int:
    src = Path(args.input)
    if src.is_dir():
        series = load_series(src)
        profiles = series.compute_profiles(max_k=args.max_k, n_jobs=args.jobs)
    else:
        profiles = [count_cliques(_read_plain_graph(args.input), max_k=args.max_k, n_jobs=args.jobs)]
    meta = meta_line(args)
    if args.out in (None, "-"):
        write_profiles_csv(profiles, sys.stdout, meta)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            write_profiles_csv(profiles, fh, meta)
        if args.plot:
            write_plot_script(args.out, ["N", "count"])
    return 0


def cmd_scaling(args) -> int:
    spectrum = exponent_spectrum(_load_profiles(args), n_min=args.fit_n_min, k_min=args.k_min)
    write_csv(args.out, "k,exponent,stderr,intercept,n_points", spectrum.rows(), meta_line(args), args.plot)
    return 0


def cmd_envelope(args) -> int:
    env = envelope_curve(_load_profiles(args), n_min=args.fit_n_min)
    meta = meta_line(args, exponent=fmt(env.exponent), stderr=fmt(env.stderr))
    write_csv(args.out, "N,envelope_count,source_k", env.rows(), meta, args.plot)
    return 0


def _series_source(directory: str):
    """Trace for model runs (event log present), temporal edges otherwise."""
    d = Path(directory)
    if (d / "events.log").exists():
        with open(d / "events.log") as fh:
            return trace_from_event_log(fh)
    return load_temporal_edges_from_series(d)


def cmd_measure(args) -> int:
    series = load_series(args.series)
    sizes = series.sizes
    if args.measure == "mean-clique":
        profiles = series.compute_profiles(n_jobs=args.jobs)
        rows = [(p.n, mean_clique_size(p, args.k_min)) for p in profiles]
        write_csv(args.out, "N,mean_clique_size", rows, meta_line(args), args.plot)
        return 0
    source = _series_source(args.series)
    if args.measure == "pa":
        events = source.events if hasattr(source, "events") else empirical_pa_events(source)
        res = pa_ratio_series(events, sizes)
        logger.info("aggregate ratio %.4f +/- %.4f", res.ratio, res.stderr)
        meta = meta_line(args, ratio=fmt(res.ratio), stderr=fmt(res.stderr))
        write_csv(args.out, "N,ratio,stderr,count", res.rows(), meta, args.plot)
    else:
        res = distance_series(source, sizes, cap=args.cap, null_samples=args.null_samples,
                              max_events=args.max_events, rng=args.seed)
        write_csv(args.out, "N,dist_geomean,null_geomean,unreachable_frac", res.rows(), meta_line(args), args.plot)
    return 0


def cmd_fit(args) -> int:
    series = load_series(args.data)
    model = FAMILIES[args.model]()
    try:
        n_points = len(parameter_grid(model, args.grid))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    logger.info("scheduled realizations: %d (%d grid points x %d)", n_points * args.reals, n_points, args.reals)
    results = grid_search(
        model, series, args.grid, args.reals, args.budget, seed=args.seed, k_min=args.k_min,
        clique_cap=args.clique_cap, reverse_kl=args.reverse_kl, n_jobs=args.jobs,
    )
    scored = sum(r.n_scored for r in results)
    discarded = sum(r.n_discarded for r in results)
    logger.info("scored %d, discarded %d; best %s mean_mle=%.6g", scored, discarded,
                results[0].params, results[0].mean_mle)
    kl = "reverse" if args.reverse_kl else "empirical||model"
    meta = meta_line(args, likelihood="normalized-weights", kl=kl, best=json.dumps(results[0].params, sort_keys=True).replace(" ", ""))
    if args.out in (None, "-"):
        write_results_csv(results, sys.stdout, meta)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            write_results_csv(results, fh, meta)
    log_path = args.discard_log or (None if args.out in (None, "-") else str(Path(args.out).with_suffix(".discards.log")))
    if log_path:
        with open(log_path, "w") as fh:
            write_discard_log(results, fh)
    return 0


# --------------------------------------------------------------------------
# parser


def _add_schedule(p):
    p.add_argument("--n-min", type=int, default=100, help="first snapshot size (default 100)")
    p.add_argument("--factor", type=float, default=1.1, help="growth factor between snapshots (default 1.1)")
    p.add_argument("--n-max", type=int, default=None, help="last snapshot size (default: all nodes)")


def _add_common(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default: $CLIQUESCALE_JOBS or CPU count)")
    p.add_argument("--plot", action="store_true", help="also write a matplotlib script next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cliquescale", description="Clique densification toolkit.")
    parser.add_argument("--version", action="version", version=f"cliquescale {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="grow a model realization")
    g.add_argument("--model", required=True, choices=sorted(MODEL_PARAMS))
    g.add_argument("--p", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--pf", type=float)
    g.add_argument("--pb", type=float)
    g.add_argument("--m", type=int)
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--out", default="generated", help="output directory (default ./generated)")
    g.add_argument("--max-k", type=int, default=None)
    g.add_argument("--no-snapshot-edges", action="store_true", help="skip per-snapshot edge files")
    _add_schedule(g)
    _add_common(g)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("ingest", help="build cumulative snapshots from a temporal edge list")
    i.add_argument("--input", required=True)
    i.add_argument("--out", required=True)
    i.add_argument("--max-k", type=int, default=None)
    i.add_argument("--no-profiles", action="store_true", help="do not count cliques now")
    _add_schedule(i)
    _add_common(i, seed=False)
    i.set_defaults(func=cmd_ingest)

    c = sub.add_parser("count", help="clique profile of an edge list or every snapshot of a series")
    c.add_argument("--input", required=True, help="edge-list file or series directory")
    c.add_argument("--out", default=None)
    c.add_argument("--max-k", type=int, default=None)
    _add_common(c, seed=False)
    c.set_defaults(func=cmd_count)

    for name, func, help_ in (("scaling", cmd_scaling, "scaling exponent per clique size"),
                              ("envelope", cmd_envelope, "largest clique count per snapshot")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--series", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--fit-n-min", type=int, default=100 if name == "scaling" else 0,
                       help="ignore snapshots smaller than this")
        if name == "scaling":
            s.add_argument("--k-min", type=int, default=2)
        _add_common(s, seed=False)
        s.set_defaults(func=func)

    m = sub.add_parser("measure", help="growth diagnostics")
    m.add_argument("measure", choices=["pa", "distance", "mean-clique"])
    m.add_argument("--series", required=True)
    m.add_argument("--out", default=None)
    m.add_argument("--k-min", type=int, default=2)
    m.add_argument("--cap", type=int, default=None, help="BFS depth cap for distances")
    m.add_argument("--null-samples", type=int, default=1000)
    m.add_argument("--max-events", type=int, default=None, help="subsample arrivals per window")
    _add_common(m)
    m.set_defaults(func=cmd_measure)

    f = sub.add_parser("fit", help="grid search a model family against a series")
    f.add_argument("--data", required=True, help="series directory")
    f.add_argument("--model", required=True, choices=sorted(fam for fam in MODEL_PARAMS if fam != "ba"))
    f.add_argument("--grid", type=float, default=0.01, help="grid step on [0, 1]")
    f.add_argument("--reals", type=int, default=5, help="realizations per grid point")
    f.add_argument("--budget", type=float, default=DEFAULT_BUDGET, help="seconds per realization")
    f.add_argument("--clique-cap", type=float, default=DEFAULT_CLIQUE_CAP)
    f.add_argument("--k-min", type=int, default=2)
    f.add_argument("--reverse-kl", action="store_true", help="score KL(model || empirical)")
    f.add_argument("--out", default=None)
    f.add_argument("--discard-log", default=None)
    _add_common(f)
    f.set_defaults(func=cmd_fit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "jobs", None) is None:
        args.jobs = default_jobs()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

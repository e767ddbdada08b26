"""Acceptance criteria. Each test records one PASS/FAIL line (printed in the
pytest terminal summary) with the measured value and the tolerance used.

Run standalone with ``python tests/test_acceptance.py [ids...]``.
Set ``CLIQUESCALE_DATASET`` to a temporal edge-list file to enable the
optional dataset checks (criterion 11 and the dataset part of 6).
"""
from __future__ import annotations

import itertools
import math
import os
import random
import sys
import time

import numpy as np
import pytest
from scipy import stats

from cliquescale.cliques import brute_force_cliques, count_cliques
from cliquescale.graph import Graph, log_spaced_sizes
from cliquescale.growth import lpam_neighbor_probabilities
from cliquescale.ingest import SnapshotSeries, build_cumulative_snapshots, read_temporal_edges
from cliquescale.measurements import distance_series, empirical_pa_events, pa_ratio_series
from cliquescale.models import LPAM, BarabasiAlbert, NodeCopying
from cliquescale.scaling import aggregate_spectra, exponent_spectrum, fit_power_law
from cliquescale.selection import grid_search, parameter_grid

ACCEPTANCE_LINES: list[str] = []
DATASET = os.environ.get("CLIQUESCALE_DATASET")


def report(cid: str, ok: bool | None, detail: str) -> None:
    tag = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
    line = f"[{tag}] C{cid}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def check(cid: str, ok: bool, detail: str) -> None:
    report(cid, ok, detail)
    assert ok, detail


def _seed(*parts) -> np.random.SeedSequence:
    return np.random.SeedSequence(list(parts))


# --------------------------------------------------------------------------
# 1, 2: clique counter


def test_c01_oracle_equivalence():
    rnd = random.Random(20240101)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        n = rnd.randint(2, 25)
        density = rnd.uniform(0.1, 0.7)
        g = Graph.from_edges(n, [e for e in itertools.combinations(range(n), 2) if rnd.random() < density])
        if count_cliques(g).counts != brute_force_cliques(g).counts:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    check("1", mismatches == 0 and elapsed < 60,
          f"100 random graphs, mismatches={mismatches} (need 0), runtime {elapsed:.1f}s (need <60s)")


def test_c02_complete_graphs():
    bad = [n for n in range(3, 13)
           if count_cliques(Graph.from_edges(n, itertools.combinations(range(n), 2))).counts
           != {k: math.comb(n, k) for k in range(1, n + 1)}]
    check("2", not bad, f"K_n for n=3..12 equal C(n,k) exactly; failing n={bad}")


# --------------------------------------------------------------------------
# 3: edge scaling law


def test_c03_edge_scaling():
    sizes = log_spaced_sizes(100, 100_000)
    slopes = []
    for s in range(10):
        tr = LPAM(0.75, 0.0).grow(100_000, seed=_seed(3, s), schedule=sizes, record=False, track_cliques=False)
        slopes.append(fit_power_law(tr.sizes, tr.edge_counts)[0])
    mean_slope = float(np.mean(slopes))
    ratios = []
    for s in range(10):
        tr = LPAM(0.25, 0.0).grow(10_000, seed=_seed(30, s), record=False, track_cliques=False)
        ratios.append(tr.edge_counts[-1] / 10_000)
    mean_ratio = float(np.mean(ratios))
    ok = abs(mean_slope - 1.5) <= 0.10 and abs(mean_ratio - 2.0) <= 0.2
    check("3", ok,
          f"p=0.75 exponent(k=2) mean over 10 seeds = {mean_slope:.3f} (range {min(slopes):.3f}..{max(slopes):.3f}),"
          f" need 1.50+-0.10; p=0.25 L/N at 1e4 = {mean_ratio:.3f}, need 2.0+-10%")


# --------------------------------------------------------------------------
# 4: redistribution contract


def _redistribution_round(x: np.ndarray, tau: float) -> np.ndarray:
    """One clip-and-spread pass, written independently of the package."""
    over = x > tau
    excess = float((x[over] - tau).sum())
    y = np.where(over, tau, x)
    below = y < tau
    if excess > 0 and below.any():
        y = y + np.where(below, excess / below.sum(), 0.0)
    return y


def test_c04_redistribution():
    rng = np.random.default_rng(4)
    worst_sum = worst_cap = worst_fix = 0.0
    uniform_ok = True
    for i in range(10_000):
        p = float(rng.random())
        r = 0.0 if i % 10 == 0 else float(rng.random())
        k = int(rng.integers(1, 60))
        degrees = rng.integers(1, 1 + int(rng.choice([3, 30, 3000])), size=k)
        probs = lpam_neighbor_probabilities(p, r, degrees)
        tau = p + (1 - p) * r
        worst_sum = max(worst_sum, abs(probs.sum() - p * k))
        worst_cap = max(worst_cap, probs.max() - tau)
        worst_fix = max(worst_fix, float(np.abs(_redistribution_round(probs, tau) - probs).max()))
        if r == 0.0 and not np.all(probs == p):
            uniform_ok = False
    ok = worst_sum <= 1e-9 and worst_cap <= 1e-12 and worst_fix <= 1e-12 and uniform_ok
    check("4", ok, f"1e4 inputs: max|sum-pk|={worst_sum:.2e} (<=1e-9), max excess over cap={worst_cap:.2e}"
                   f" (<=1e-12), change under one more round={worst_fix:.2e}, r=0 exactly uniform={uniform_ok}")


# --------------------------------------------------------------------------
# 5: ablations


def _degrees(model, seed, n=5000):
    return model.grow(n, seed=seed, record=True, track_cliques=False).graph.degrees()


def test_c05_ablations():
    # coupled: same seed, same random stream, so the reduction must be exact
    coupled = all(
        np.array_equal(_degrees(NodeCopying(p), _seed(5, s)), _degrees(LPAM(p, 0.0), _seed(5, s)))
        for p in (0.25, 0.42, 0.75) for s in range(10)
    )
    # independent seeds, pooled over 10 realizations each
    pooled = {}
    for p in (0.25, 0.75):
        a = np.concatenate([_degrees(NodeCopying(p), _seed(50, s, 0)) for s in range(10)])
        b = np.concatenate([_degrees(LPAM(p, 0.0), _seed(50, s, 1)) for s in range(10)])
        c = np.concatenate([_degrees(NodeCopying(p), _seed(50, s, 2)) for s in range(10)])
        pooled[p] = (stats.ks_2samp(a, b).pvalue, stats.ks_2samp(a, c).pvalue)
    sizes = log_spaced_sizes(100, 5000)
    ba_slopes = [fit_power_law(*(lambda t: (t.sizes, t.edge_counts))(
        BarabasiAlbert(2).grow(5000, seed=_seed(51, s), schedule=sizes, record=False, track_cliques=False)))[0]
        for s in range(10)]
    ba = float(np.mean(ba_slopes))
    ok = coupled and pooled[0.25][0] > 0.01 and abs(ba - 1.0) <= 0.05
    check("5", ok,
          f"coupled LPAM(r=0) vs copy degree sequences identical over 10 seeds x p in (0.25,0.42,0.75): {coupled};"
          f" independent pooled KS p=0.25: p-value {pooled[0.25][0]:.3f} (need >0.01);"
          f" [info] p=0.75 LPAM-vs-copy {pooled[0.75][0]:.1e}, copy-vs-copy control {pooled[0.75][1]:.1e};"
          f" BA exponent(k=2) = {ba:.4f} (need 1.0+-0.05)")


# --------------------------------------------------------------------------
# 6: preferential-attachment ratio


def _ratio_over_seeds(model, n=10_000, seeds=5):
    sizes = log_spaced_sizes(100, n)
    vals = [pa_ratio_series(model.grow(n, seed=_seed(6, s), track_cliques=False), sizes).ratio for s in range(seeds)]
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(seeds))


def test_c06_pa_ratio():
    lp, lp_se = _ratio_over_seeds(LPAM(0.42, 0.89))
    cp, cp_se = _ratio_over_seeds(NodeCopying(0.42))
    ok = lp > 1.1 and lp - 2 * lp_se > 1.0 and abs(cp - 1.0) <= 0.05
    check("6", ok, f"LPAM(0.42,0.89) ratio {lp:.4f} +- {lp_se:.4f} (need >1.1, ratio-2SE>1);"
                   f" copy(0.42) ratio {cp:.4f} +- {cp_se:.4f} (need within 1+-0.05)")


@pytest.mark.skipif(not DATASET, reason="CLIQUESCALE_DATASET not set")
def test_c06_dataset_ratio():
    tel = read_temporal_edges(DATASET)
    res = pa_ratio_series(empirical_pa_events(tel), log_spaced_sizes(100, tel.node_count))
    check("6-data", res.ratio > 1.0, f"empirical ratio {res.ratio:.4f} (need >1)")


# --------------------------------------------------------------------------
# 7: exponent spectrum

# Desk-scale discard rule for the grid searches: a realization is dropped once
# its running clique total passes 20x the target's final total, or after 15 s.
DESK_BUDGET = 15.0


def desk_cap(series):
    return 20.0 * float(series.profiles[-1].total(1))


@pytest.fixture(scope="module")
def lpam_spectrum_runs():
    sizes = log_spaced_sizes(100, 30_000)
    return [LPAM(0.42, 0.89).grow(30_000, seed=_seed(7, s), schedule=sizes, record=False) for s in range(5)]


def test_c07_spectrum(lpam_spectrum_runs):
    agg = aggregate_spectra([exponent_spectrum(t.profiles) for t in lpam_spectrum_runs])
    means = [agg.mean[k] for k in range(2, 6)]
    increasing = all(b > a for a, b in zip(means, means[1:]))
    # copying at its best p: MeanMLE fit to the first LPAM realization (step 0.05)
    target = SnapshotSeries.from_trace(lpam_spectrum_runs[0])
    fits = grid_search(NodeCopying(), target, 0.05, 5, budget=DESK_BUDGET, clique_cap=desk_cap(target), seed=70)
    best_p = fits[0].params["p"]
    sizes = log_spaced_sizes(100, 30_000)
    copy_runs = [NodeCopying(best_p).grow(30_000, seed=_seed(71, s), schedule=sizes, record=False) for s in range(5)]
    copy_agg = aggregate_spectra([exponent_spectrum(t.profiles) for t in copy_runs])
    copy_k5 = copy_agg.mean.get(5, float("-inf"))
    ok = increasing and copy_k5 < agg.mean[5]
    check("7", ok, "LPAM(0.42,0.89) N=3e4, 5 seeds, mean exponents k=2..5 = "
                   + ", ".join(f"{m:.3f}+-{agg.stderr[k]:.3f}" for k, m in zip(range(2, 6), means))
                   + f" (need strictly increasing); copy best p={best_p:.2f} k=5 exponent {copy_k5:.3f}"
                   f" < LPAM {agg.mean[5]:.3f}")


# --------------------------------------------------------------------------
# 8, 9: parameter recovery and grid bookkeeping

@pytest.fixture(scope="module")
def recovery():
    sizes = log_spaced_sizes(100, 5000)
    target = SnapshotSeries.from_trace(LPAM(0.6, 0.5).grow(5000, seed=_seed(8), schedule=sizes, record=False))
    t0 = time.perf_counter()
    results = grid_search(LPAM(), target, 0.05, 5, budget=DESK_BUDGET, clique_cap=desk_cap(target), seed=80)
    return target, results, time.perf_counter() - t0


def test_c08_recovery(recovery):
    target, results, elapsed = recovery
    best = results[0].params
    ok = abs(best["p"] - 0.6) <= 0.05 + 1e-9 and abs(best["r"] - 0.5) <= 0.05 + 1e-9 and elapsed <= 3600
    top = "; ".join(f"({r.params['p']:.2f},{r.params['r']:.2f}) {r.mean_mle:.4f}" for r in results[:3])
    check("8", ok, f"LPAM(0.6,0.5) N=5000 target, step 0.05: argmax p={best['p']:.2f} r={best['r']:.2f}"
                   f" (need +-0.05); top-3 {top}; grid runtime {elapsed:.0f}s (need <=3600s)")


def test_c09_bookkeeping(recovery):
    _, results, _ = recovery
    scheduled = sum(r.n_scheduled for r in results)
    accounted = all(r.n_scored + len(r.discards) == r.n_scheduled for r in results)
    reasons = {reason for r in results for _, reason in r.discards} <= {"timeout", "clique_cap"}
    formula = (len(parameter_grid(LPAM(), 0.01)) * 5 == 5 * 101 ** 2
               and len(parameter_grid(NodeCopying(), 0.01)) * 5 == 505)
    series = SnapshotSeries.from_trace(NodeCopying(0.4).grow(300, seed=9, schedule=[100, 200, 300], record=False))
    one = grid_search(NodeCopying(), series, 0.25, 5, budget=60, clique_cap=1e5, n_jobs=1)
    one_sched = sum(r.n_scheduled for r in one)
    one_ok = all(r.n_scored + len(r.discards) == r.n_scheduled for r in one)
    discarded = sum(r.n_discarded for r in results)
    ok = scheduled == 5 * 21 ** 2 and accounted and reasons and formula and one_sched == 25 and one_ok
    check("9", ok, f"2-param step 0.05: scheduled {scheduled} (need {5 * 21 ** 2}), discarded {discarded} all logged"
                   f" with reasons in {{timeout, clique_cap}}: {accounted and reasons};"
                   f" 1-param step 0.25: scheduled {one_sched} (need 25); step-0.01 grid sizes 50505/505: {formula}")


# --------------------------------------------------------------------------
# 10: distance bound


def test_c10_distances():
    worst = 0
    for model, s in ((LPAM(0.42, 0.89), 0), (LPAM(0.6, 0.5), 1), (NodeCopying(0.5), 2), (NodeCopying(0.75), 3)):
        res = distance_series(model.grow(3000, seed=_seed(10, s), clique_cap=None),
                              log_spaced_sizes(100, 3000), null_samples=100, rng=s)
        worst = max(worst, max(res.max_distance))
    # an empirical-style stream where an arrival joins two distant nodes
    from cliquescale.ingest import parse_temporal_edges

    tel = parse_temporal_edges("0 1 1\n1 2 2\n2 3 3\n4 0 4\n4 3 4\n")
    emp = distance_series(tel, [5], null_samples=10, rng=0).max_distance[0]
    check("10", worst <= 2, f"max pre-connection distance over LPAM/copy traces = {worst} (need <=2);"
                            f" empirical stream allowed to exceed: {emp}")


# --------------------------------------------------------------------------
# 11: optional dataset regression checks


@pytest.mark.skipif(not DATASET, reason="CLIQUESCALE_DATASET not set")
def test_c11_dataset():
    tel = read_temporal_edges(DATASET)
    series = build_cumulative_snapshots(tel, log_spaced_sizes(100, tel.node_count))
    spec = exponent_spectrum(series.compute_profiles())
    e2, e3 = spec[2].exponent, spec[3].exponent
    step = float(os.environ.get("CLIQUESCALE_DATASET_STEP", "0.1"))
    lp = grid_search(LPAM(), series, step, 5)[0]
    cp = grid_search(NodeCopying(), series, step, 5)[0]
    ok = e2 > 1 and e3 > e2 and lp.mean_kl <= cp.mean_kl
    check("11", ok, f"edge exponent {e2:.3f} (>1), triangle {e3:.3f} (>edge),"
                    f" best LPAM mean-KL {lp.mean_kl:.4f} <= copy {cp.mean_kl:.4f}")


def test_c11_skip_notice():
    if DATASET:
        pytest.skip("dataset supplied; see test_c11_dataset")
    report("11", None, "no dataset supplied (set CLIQUESCALE_DATASET); optional dataset checks not run")
    report("6-data", None, "no dataset supplied; empirical PA ratio check not run")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", *sys.argv[1:]]))

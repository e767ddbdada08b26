import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliquescale.cliques import CliqueProfile, count_cliques
from cliquescale.ingest import SnapshotSeries
from cliquescale.models import LPAM, NodeCopying
from cliquescale.selection import (
    ModelSearch,
    clique_size_distribution,
    evaluate,
    grid_search,
    kl_divergence,
    log_likelihood,
    mean_kl,
    parameter_grid,
    smooth,
    write_discard_log,
    write_results_csv,
)

from helpers import cycle_graph


def test_k4_distribution(k4):
    d = clique_size_distribution(count_cliques(k4))
    assert d == pytest.approx({2: 6 / 11, 3: 4 / 11, 4: 1 / 11})


def test_triangle_free_distribution():
    assert clique_size_distribution(count_cliques(cycle_graph(6))) == {2: 1.0}


def test_empty_distribution_errors():
    with pytest.raises(ValueError):
        clique_size_distribution(CliqueProfile(3, 0, {1: 3}))


def test_smoothing_union_support():
    d = clique_size_distribution(CliqueProfile(5, 4, {2: 4, 3: 1}), support=[2, 3, 4])
    assert set(d) == {2, 3, 4} and all(v > 0 for v in d.values())
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-9)


def test_kl_examples():
    assert kl_divergence({2: 0.3, 3: 0.7}, {2: 0.3, 3: 0.7}) == 0.0
    assert kl_divergence({2: 1.0}, {2: 0.5, 3: 0.5}) == pytest.approx(math.log(2), abs=1e-8)
    assert kl_divergence({2: 1.0}, {2: 0.5, 3: 0.5}, reverse=True) > 1.0


def test_mean_kl_realized():
    profs = [CliqueProfile(n, n, {2: n}) for n in (10, 20)]
    assert mean_kl(profs, [{2: 0.5, 3: 0.5}] * 2) == pytest.approx(math.log(2), abs=1e-8)


def test_likelihood_far_support():
    assert log_likelihood({2: 1.0}, {5: 1.0}) < -20


dist = st.dictionaries(st.integers(2, 8), st.floats(0.01, 1.0), min_size=1, max_size=6).map(
    lambda d: {k: v / sum(d.values()) for k, v in d.items()})


@settings(max_examples=200, deadline=None)
@given(dist, dist)
def test_gibbs_and_kl_nonnegative(w, q):
    best = log_likelihood(w, w)
    assert best == pytest.approx(sum(x * math.log(x) for x in w.values()), abs=1e-8)
    assert log_likelihood(w, q) <= best + 1e-9
    assert kl_divergence(w, q) >= 0.0
    assert sum(smooth(q, list(w)).values()) == pytest.approx(1.0, abs=1e-9)


@pytest.fixture(scope="module")
def small_series():
    tr = LPAM(0.4, 0.6).grow(400, seed=21, schedule=[100, 150, 250, 400], record=False)
    return SnapshotSeries.from_trace(tr)


def test_evaluate_bookkeeping(small_series):
    res = evaluate(small_series, LPAM(0.4, 0.6), 3, seed=1)
    assert res.n_scheduled == 3 and res.n_scored + res.n_discarded == 3
    assert [n for n, _, _ in res.per_snapshot] == small_series.sizes
    assert res.mean_kl >= 0


def test_score_method(small_series):
    assert LPAM(0.4, 0.6).score(small_series, n_realizations=2) == pytest.approx(
        evaluate(small_series, LPAM(0.4, 0.6), 2, 0).mean_mle)


def test_all_discarded(small_series):
    res = evaluate(small_series, NodeCopying(1.0), 2, clique_cap=1e4)
    assert res.n_discarded == 2 and res.mean_mle == -math.inf
    assert res.discard_reasons == {"clique_cap": 2}
    with pytest.raises(RuntimeError):
        NodeCopying(1.0).score(small_series, n_realizations=2, clique_cap=1e4)


def test_needs_two_snapshots():
    with pytest.raises(ValueError):
        evaluate([CliqueProfile(10, 9, {2: 9})], LPAM(), 1)


def test_grid_bookkeeping_and_determinism(small_series):
    results = grid_search(NodeCopying(), small_series, 0.25, 2, budget=60, clique_cap=1e6, n_jobs=1)
    assert len(results) == 5
    assert sum(r.n_scheduled for r in results) == 10
    assert all(r.n_scored + r.n_discarded == r.n_scheduled == len(r.discards) + r.n_scored for r in results)
    scores = [r.mean_mle for r in results]
    assert scores == sorted(scores, reverse=True)
    again = grid_search(NodeCopying(), small_series, 0.25, 2, budget=60, clique_cap=1e6, n_jobs=2)
    assert [(r.params, r.mean_mle) for r in again] == [(r.params, r.mean_mle) for r in results]
    csv_buf, log_buf = io.StringIO(), io.StringIO()
    write_results_csv(results, csv_buf, "m")
    write_discard_log(results, log_buf)
    assert csv_buf.getvalue().splitlines()[1] == "model,param1,param2,mean_mle,mean_kl,n_scored,n_discarded"
    discarded = sum(r.n_discarded for r in results)
    assert len(log_buf.getvalue().splitlines()) == 1 + discarded


def test_grid_sizes():
    assert len(parameter_grid(LPAM(), 0.01)) == 101 ** 2
    assert len(parameter_grid(NodeCopying(), 0.01)) == 101
    with pytest.raises(ValueError):
        grid_search(LPAM(), [], 0.3)


def test_model_search_estimator(small_series):
    search = ModelSearch(LPAM(), param_grid={"p": [0.2, 0.4], "r": [0.6]}, n_realizations=2, n_jobs=1).fit(small_series)
    assert search.best_params_ == {"p": 0.4, "r": 0.6}
    assert search.n_scheduled_ == 4
    assert math.isfinite(search.score(small_series))

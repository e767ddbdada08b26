"""Fitting growth models to an empirical snapshot series.

A model is scored by growing realizations to each empirical snapshot size
and comparing clique-size distributions: the mean over snapshots of the
empirical-weighted log-likelihood (``mean_mle``), and the mean KL divergence
(``mean_kl``). All logarithms are natural.
"""
from __future__ import annotations

import itertools
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, clone

from .cliques import CliqueProfile
from .ingest import SnapshotSeries
from .models import FAMILIES, GrowthModel, unit_grid

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-10
DEFAULT_CLIQUE_CAP = 1e12
DEFAULT_BUDGET = 600.0


def clique_size_distribution(
    profile: CliqueProfile,
    k_min: int = 2,
    epsilon: float = DEFAULT_EPSILON,
    support: Sequence[int] | None = None,
) -> dict[int, float]:
    """Normalized clique-size masses over ``k >= k_min``.

    With ``support``, categories of the support that have no mass get
    ``epsilon`` and the result is renormalized.

    >>> from cliquescale.cliques import CliqueProfile
    >>> clique_size_distribution(CliqueProfile(4, 6, {1: 4, 2: 6, 3: 4, 4: 1}))[2]
    0.5454545454545454
    """
    counts = {k: c for k, c in profile.counts.items() if k >= k_min and c > 0}
    total = sum(counts.values())
    if total == 0:
        raise ValueError(f"profile at N={profile.n} has no cliques of size >= {k_min}")
    masses = {k: c / total for k, c in sorted(counts.items())}
    if support is not None:
        masses = smooth(masses, support, epsilon)
    return masses


def smooth(masses: dict[int, float], support: Sequence[int], epsilon: float = DEFAULT_EPSILON) -> dict[int, float]:
    """Give zero-mass categories of ``support`` mass ``epsilon``, then renormalize."""
    keys = sorted(set(support) | set(masses))
    raw = {k: (masses.get(k, 0.0) or epsilon) for k in keys}
    z = sum(raw.values())
    return {k: v / z for k, v in raw.items()}


def average_distributions(dists: Sequence[dict[int, float]]) -> dict[int, float]:
    """Mean of per-realization distributions (missing categories count as 0)."""
    keys = sorted({k for d in dists for k in d})
    return {k: sum(d.get(k, 0.0) for d in dists) / len(dists) for k in keys}


def log_likelihood(empirical: dict[int, float], model: dict[int, float], epsilon: float = DEFAULT_EPSILON) -> float:
    """``sum_k w(k) log q(k)`` with ``q`` smoothed over the union support."""
    q = smooth(model, list(empirical), epsilon)
    return sum(w * math.log(q[k]) for k, w in empirical.items() if w > 0)


def kl_divergence(
    empirical: dict[int, float], model: dict[int, float], epsilon: float = DEFAULT_EPSILON, reverse: bool = False
) -> float:
    """``KL(empirical || model)`` (or the reverse) on the smoothed union support."""
    support = sorted(set(empirical) | set(model))
    w = smooth(empirical, support, epsilon)
    q = smooth(model, support, epsilon)
    if reverse:
        w, q = q, w
    return max(0.0, sum(w[k] * math.log(w[k] / q[k]) for k in support))


# --------------------------------------------------------------------------
# realizations


def _empirical_profiles(empirical) -> list[CliqueProfile]:
    if isinstance(empirical, SnapshotSeries):
        return empirical.compute_profiles()
    return list(empirical)


def realization_seed(master_seed: int, point: int, index: int) -> np.random.SeedSequence:
    """Seed for realization ``index`` of grid point ``point``; independent of run order."""
    return np.random.SeedSequence([int(master_seed), int(point), int(index)])


def _realize(model: GrowthModel, sizes: list[int], seed_seq, k_min: int, clique_cap, time_budget):
    trace = model.grow(
        sizes[-1], seed=np.random.default_rng(seed_seq), schedule=sizes, record=False,
        track_cliques=True, clique_cap=clique_cap, time_budget=time_budget,
    )
    if trace.status != "ok":
        return None, trace.status
    by_n = {s.n: s.profile for s in trace.snapshots}
    dists = []
    for n in sizes:
        prof = by_n[n]
        counts = {k: c for k, c in prof.counts.items() if k >= k_min}
        total = sum(counts.values())
        dists.append({k: c / total for k, c in counts.items()} if total else {})
    return dists, "ok"


@dataclass
class FitResult:
    model: GrowthModel
    mean_mle: float
    mean_kl: float
    per_snapshot: list[tuple[int, float, float]]  # (N, log-likelihood, KL)
    n_scheduled: int
    n_scored: int
    n_discarded: int
    discards: list[tuple[int, str]] = field(default_factory=list)  # (realization, reason)
    skipped_snapshots: list[int] = field(default_factory=list)

    @property
    def params(self) -> dict:
        return self.model.get_params()

    @property
    def discard_reasons(self) -> Counter:
        return Counter(r for _, r in self.discards)


def _score(model, emp_dists, sizes, outcomes, epsilon, reverse_kl) -> FitResult:
    scored = [d for d, status in outcomes if status == "ok"]
    discards = [(i, status) for i, (_, status) in enumerate(outcomes) if status != "ok"]
    per = []
    skipped = []
    for t, n in enumerate(sizes):
        realized = [d[t] for d in scored if d[t]]
        if not realized:
            skipped.append(n)
            continue
        q = average_distributions(realized)
        per.append((n, log_likelihood(emp_dists[t], q, epsilon), kl_divergence(emp_dists[t], q, epsilon, reverse_kl)))
    if skipped and scored:
        logger.warning("%r: %d snapshot(s) had no scored realization and were skipped", model, len(skipped))
    if per:
        mle = float(np.mean([x[1] for x in per]))
        kl = float(np.mean([x[2] for x in per]))
    else:
        mle, kl = -math.inf, math.inf
    return FitResult(model, mle, kl, per, len(outcomes), len(scored), len(discards), discards, skipped)


def evaluate(
    empirical,
    model: GrowthModel,
    n_realizations: int = 5,
    seed: int = 0,
    *,
    k_min: int = 2,
    epsilon: float = DEFAULT_EPSILON,
    clique_cap: float | None = DEFAULT_CLIQUE_CAP,
    time_budget: float | None = DEFAULT_BUDGET,
    reverse_kl: bool = False,
    point: int = 0,
    n_jobs: int | None = 1,
) -> FitResult:
    """Grow ``n_realizations`` of ``model`` and score them against ``empirical``."""
    sizes, emp_dists = _prepare(empirical, k_min)
    outcomes = _run_tasks(
        [(model, sizes, realization_seed(seed, point, j), k_min, clique_cap, time_budget) for j in range(n_realizations)],
        n_jobs,
    )
    return _score(model, emp_dists, sizes, outcomes, epsilon, reverse_kl)


def _prepare(empirical, k_min):
    profiles = [p for p in _empirical_profiles(empirical) if p.total(k_min) > 0]
    if len(profiles) < 2:
        raise ValueError(f"need at least 2 snapshots with cliques of size >= {k_min}")
    sizes = [p.n for p in profiles]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("snapshot sizes must be strictly increasing")
    return sizes, [clique_size_distribution(p, k_min) for p in profiles]


def _run_tasks(tasks, n_jobs):
    if n_jobs is None:
        n_jobs = default_jobs()
    if n_jobs == 1:
        stream = (_realize(*t) for t in tasks)
    else:
        from joblib import Parallel, delayed

        stream = Parallel(n_jobs=n_jobs, return_as="generator")(delayed(_realize)(*t) for t in tasks)
    out = []
    every = max(1, len(tasks) // 20)
    for i, res in enumerate(stream, 1):
        out.append(res)
        if len(tasks) > 1 and (i % every == 0 or i == len(tasks)):
            logger.info("realizations done: %d/%d", i, len(tasks))
    return out


def default_jobs() -> int:
    env = os.environ.get("CLIQUESCALE_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def mean_mle(empirical, model: GrowthModel, n_realizations: int = 5, seed: int = 0, **kwargs) -> float:
    """Mean over snapshots of ``sum_k w_t(k) log q_t(k)``.

    ``w_t`` is the empirical clique-size distribution at snapshot ``t`` and
    ``q_t`` the realization-averaged model distribution at the same node
    count. Raises when every realization was discarded.
    """
    res = evaluate(empirical, model, n_realizations, seed, **kwargs)
    if not res.per_snapshot:
        raise RuntimeError(f"all {res.n_scheduled} realizations of {model!r} were discarded")
    return res.mean_mle


def mean_kl(empirical, model, n_realizations: int = 5, seed: int = 0, *, k_min: int = 2,
            epsilon: float = DEFAULT_EPSILON, reverse: bool = False, **kwargs) -> float:
    """Mean over snapshots of the KL divergence between empirical and model distributions.

    ``model`` is either a growth model (realizations are grown) or a
    sequence of per-snapshot model distributions aligned with the empirical
    snapshots.
    """
    if isinstance(model, GrowthModel):
        res = evaluate(empirical, model, n_realizations, seed, k_min=k_min, epsilon=epsilon, reverse_kl=reverse, **kwargs)
        if not res.per_snapshot:
            raise RuntimeError(f"all {res.n_scheduled} realizations of {model!r} were discarded")
        return res.mean_kl
    sizes, emp = _prepare(empirical, k_min)
    model = list(model)
    if len(model) != len(emp):
        raise ValueError("need one model distribution per empirical snapshot")
    return float(np.mean([kl_divergence(w, q, epsilon, reverse) for w, q in zip(emp, model)]))


# --------------------------------------------------------------------------
# grid search


def parameter_grid(model: GrowthModel, step: float, param_grid: dict | None = None) -> list[dict]:
    """All parameter combinations: ``param_grid`` if given, else a unit grid per parameter."""
    if param_grid is None:
        if not model.unit_params:
            raise ValueError(f"{type(model).__name__} has no unit-interval parameters; pass param_grid")
        values = unit_grid(step)
        param_grid = {name: values for name in model.unit_params}
    names = list(param_grid)
    return [dict(zip(names, (float(x) for x in combo))) for combo in itertools.product(*param_grid.values())]


def grid_search(
    model: GrowthModel | str,
    empirical,
    step: float = 0.01,
    n_realizations: int = 5,
    budget: float | None = DEFAULT_BUDGET,
    *,
    seed: int = 0,
    k_min: int = 2,
    epsilon: float = DEFAULT_EPSILON,
    clique_cap: float | None = DEFAULT_CLIQUE_CAP,
    reverse_kl: bool = False,
    param_grid: dict | None = None,
    n_jobs: int | None = None,
) -> list[FitResult]:
    """Score every grid point; results sorted by ``mean_mle``, best first.

    Realizations that run past ``budget`` seconds or exceed ``clique_cap``
    total cliques are discarded and recorded on their grid point's result.
    """
    if isinstance(model, str):
        model = FAMILIES[model]()
    if budget is not None and budget <= 0:
        raise ValueError("budget must be positive")
    sizes, emp_dists = _prepare(empirical, k_min)
    points = [clone(model).set_params(**params) for params in parameter_grid(model, step, param_grid)]
    tasks = [
        (m, sizes, realization_seed(seed, i, j), k_min, clique_cap, budget)
        for i, m in enumerate(points)
        for j in range(n_realizations)
    ]
    logger.info("grid search: %d points x %d realizations = %d scheduled", len(points), n_realizations, len(tasks))
    outcomes = _run_tasks(tasks, n_jobs)
    results = []
    for i, m in enumerate(points):
        chunk = outcomes[i * n_realizations:(i + 1) * n_realizations]
        results.append(_score(m, emp_dists, sizes, chunk, epsilon, reverse_kl))
    # stable sort keeps grid order among ties
    results.sort(key=lambda r: -r.mean_mle)
    return results


class ModelSearch(BaseEstimator):
    """Grid search over a growth model's parameters, scored by mean log-likelihood.

    Parameters
    ----------
    estimator : GrowthModel
        Model whose parameters are searched.
    step : float
        Grid resolution on ``[0, 1]``.
    n_realizations : int
        Realizations per grid point.
    budget : float or None
        Wall-clock seconds per realization before it is discarded.
    clique_cap : float or None
        Running total-clique count above which a realization is discarded.
    param_grid : dict or None
        Explicit values per parameter, overriding the unit grid.
    """

    def __init__(self, estimator=None, step=0.05, n_realizations=5, budget=DEFAULT_BUDGET,
                 clique_cap=DEFAULT_CLIQUE_CAP, k_min=2, epsilon=DEFAULT_EPSILON,
                 param_grid=None, seed=0, n_jobs=None):
        self.estimator = estimator
        self.step = step
        self.n_realizations = n_realizations
        self.budget = budget
        self.clique_cap = clique_cap
        self.k_min = k_min
        self.epsilon = epsilon
        self.param_grid = param_grid
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, series, y=None):
        if self.estimator is None:
            raise ValueError("ModelSearch needs an estimator")
        self.results_ = grid_search(
            self.estimator, series, self.step, self.n_realizations, self.budget,
            seed=self.seed, k_min=self.k_min, epsilon=self.epsilon, clique_cap=self.clique_cap,
            param_grid=self.param_grid, n_jobs=self.n_jobs,
        )
        best = self.results_[0]
        self.best_estimator_ = best.model
        self.best_params_ = best.params
        self.best_score_ = best.mean_mle
        self.n_scheduled_ = sum(r.n_scheduled for r in self.results_)
        self.n_discarded_ = sum(r.n_discarded for r in self.results_)
        return self

    def score(self, series, y=None) -> float:
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self)
        return mean_mle(series, self.best_estimator_, self.n_realizations, self.seed,
                        k_min=self.k_min, epsilon=self.epsilon, clique_cap=self.clique_cap,
                        time_budget=self.budget, n_jobs=self.n_jobs)


# --------------------------------------------------------------------------
# output


def write_results_csv(results: Sequence[FitResult], fh, meta: str | None = None) -> None:
    """``model,param1,param2,mean_mle,mean_kl,n_scored,n_discarded``; parameters in
    name order, the second left blank for one-parameter families."""
    if meta:
        fh.write(f"# {meta}\n")
    fh.write("model,param1,param2,mean_mle,mean_kl,n_scored,n_discarded\n")
    for r in results:
        vals = [v for _, v in sorted(r.params.items(), key=lambda kv: _param_order(r.model, kv[0]))]
        p1 = _fmt(vals[0]) if vals else ""
        p2 = _fmt(vals[1]) if len(vals) > 1 else ""
        fh.write(f"{r.model.family},{p1},{p2},{_fmt(r.mean_mle)},{_fmt(r.mean_kl)},{r.n_scored},{r.n_discarded}\n")


def _param_order(model, name):
    order = list(model.unit_params) or sorted(model.get_params())
    return order.index(name) if name in order else len(order)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def write_discard_log(results: Sequence[FitResult], fh) -> None:
    """One line per discarded realization, after a bookkeeping header."""
    scheduled = sum(r.n_scheduled for r in results)
    scored = sum(r.n_scored for r in results)
    discarded = sum(r.n_discarded for r in results)
    fh.write(f"# scheduled_realizations={scheduled} scored={scored} discarded={discarded}\n")
    for r in results:
        params = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(r.params.items()))
        for idx, reason in r.discards:
            fh.write(f"{r.model.family} {params} realization={idx} reason={reason}\n")

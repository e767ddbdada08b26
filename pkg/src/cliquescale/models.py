"""Growth models as scikit-learn style estimators.

Each model is a parameter record (``get_params``/``set_params``/``clone``
work as usual) that knows how to take one growth step, grow a realization,
and score itself against an empirical snapshot series.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels, growth
from .validation import check_positive_int, check_probability


class GrowthModel(BaseEstimator):
    family: str = ""
    #: names of the parameters searched on the unit interval
    unit_params: tuple[str, ...] = ()

    def _validate(self) -> None:
        for name in self.unit_params:
            check_probability(getattr(self, name), name)

    def kernel_spec(self) -> tuple[int, float, float]:
        raise NotImplementedError

    def step(self, graph, rng) -> "growth.GrowthEvent":
        raise NotImplementedError

    def grow(self, n_nodes: int, seed=None, schedule=None, **kwargs) -> "growth.GrowthTrace":
        """Grow one realization; keyword arguments go to :func:`cliquescale.growth.grow`."""
        return growth.grow(self, n_nodes, seed, schedule, **kwargs)

    def score(self, series, n_realizations: int = 5, seed=0, **kwargs) -> float:
        """Mean log-likelihood of the series' clique-size distributions under this model."""
        from .selection import mean_mle

        return mean_mle(series, self, n_realizations=n_realizations, seed=seed, **kwargs)


class LPAM(GrowthModel):
    """Local preferential attachment.

    Parameters
    ----------
    p : float
        Marginal probability of linking to each neighbour of the target.
    r : float
        Preferential-attachment strength; ``r=0`` is plain node copying.
    """

    family = "lpam"
    unit_params = ("p", "r")

    def __init__(self, p: float = 0.5, r: float = 0.5):
        self.p = p
        self.r = r

    def kernel_spec(self):
        return _kernels.MODEL_LPAM, float(self.p), float(self.r)

    def step(self, graph, rng):
        return growth.lpam_step(graph, self.p, self.r, rng)


class NodeCopying(GrowthModel):
    """Link to a uniform target and to each of its neighbours with probability ``p``."""

    family = "copy"
    unit_params = ("p",)

    def __init__(self, p: float = 0.5):
        self.p = p

    def kernel_spec(self):
        return _kernels.MODEL_LPAM, float(self.p), 0.0

    def step(self, graph, rng):
        return growth.copy_step(graph, self.p, rng)


class ForestFire(GrowthModel):
    """Forest Fire growth with forward burning ``pf`` and backward ratio ``pb``."""

    family = "forestfire"
    unit_params = ("pf", "pb")

    def __init__(self, pf: float = 0.37, pb: float = 0.32):
        self.pf = pf
        self.pb = pb

    def kernel_spec(self):
        return _kernels.MODEL_FOREST_FIRE, float(self.pf), float(self.pb)

    def step(self, graph, rng):
        return growth.forest_fire_step(graph, self.pf, self.pb, rng)


class BarabasiAlbert(GrowthModel):
    """Degree-proportional attachment with ``m`` links per arrival.

    Early arrivals link to every existing node while fewer than ``m`` exist.
    """

    family = "ba"

    def __init__(self, m: int = 2):
        self.m = m

    def _validate(self):
        check_positive_int(self.m, "m")

    def kernel_spec(self):
        return _kernels.MODEL_BA, float(self.m), 0.0

    def step(self, graph, rng):
        return growth.ba_step(graph, min(int(self.m), graph.node_count), rng)


FAMILIES: dict[str, type[GrowthModel]] = {
    cls.family: cls for cls in (LPAM, NodeCopying, ForestFire, BarabasiAlbert)
}


def model_from_params(family: str, params: dict) -> GrowthModel:
    """Build a model from its family tag and (possibly string) parameter values."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown model family {family!r}; expected one of {sorted(FAMILIES)}") from None
    names = cls().get_params()
    kwargs = {}
    for k, v in params.items():
        if k not in names:
            raise ValueError(f"{family} has no parameter {k!r}")
        kwargs[k] = int(v) if k == "m" else float(v)
    model = cls(**kwargs)
    model._validate()
    return model


def unit_grid(step: float) -> np.ndarray:
    """``0, step, ..., 1`` rounded to avoid float drift; ``step`` must divide 1."""
    count = round(1.0 / step)
    if count < 1 or abs(count * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} does not divide [0, 1]")
    return np.round(np.linspace(0.0, 1.0, count + 1), 10)

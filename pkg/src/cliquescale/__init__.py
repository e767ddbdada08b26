"""Clique densification in growing networks: exact clique counting, growth
models, scaling fits and model selection."""
from .cliques import CliqueProfile, brute_force_cliques, count_cliques
from .graph import Graph, log_spaced_sizes
from .growth import GrowthEvent, GrowthTrace, grow
from .ingest import SnapshotSeries, TemporalEdgeList, build_cumulative_snapshots, parse_temporal_edges
from .models import LPAM, BarabasiAlbert, ForestFire, GrowthModel, NodeCopying
from .scaling import PowerLawFit, envelope_curve, exponent_spectrum, fit_power_law
from .selection import ModelSearch, clique_size_distribution, grid_search, mean_kl, mean_mle

__version__ = "0.1.0"

__all__ = [
    "CliqueProfile", "brute_force_cliques", "count_cliques",
    "Graph", "log_spaced_sizes",
    "GrowthEvent", "GrowthTrace", "grow",
    "SnapshotSeries", "TemporalEdgeList", "build_cumulative_snapshots", "parse_temporal_edges",
    "LPAM", "BarabasiAlbert", "ForestFire", "GrowthModel", "NodeCopying",
    "PowerLawFit", "envelope_curve", "exponent_spectrum", "fit_power_law",
    "ModelSearch", "clique_size_distribution", "grid_search", "mean_kl", "mean_mle",
]

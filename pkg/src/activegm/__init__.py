"""Active learning of Gaussian graphical model structure from marginal samples."""

from .engine import (
    RecoveredGraph,
    SubroutinePair,
    adpact_pair,
    ampl_pair,
    mb_passive,
    oracle_pair,
    run_meta,
)
from .graph import (
    DegreeStats,
    Graph,
    degree_stats,
    gen_multi_clique_chain,
    gen_power_law,
    gen_single_clique_chain,
    hamming_distance,
)
from .model import GaussianModel, assumption_scan, precision_from_graph
from .sampler import MarginalSampler, SamplingLedger, sufficient_budget

__version__ = "0.1.0"

__all__ = [
    "DegreeStats", "GaussianModel", "Graph", "MarginalSampler", "RecoveredGraph",
    "SamplingLedger", "SubroutinePair", "adpact_pair", "ampl_pair", "assumption_scan",
    "degree_stats", "gen_multi_clique_chain", "gen_power_law", "gen_single_clique_chain",
    "hamming_distance", "mb_passive", "oracle_pair", "precision_from_graph", "run_meta",
    "sufficient_budget",
]

"""Rank-prestige algorithms for follower graphs and tools to audit them against link spam."""

from .errors import InputError, UndefinedStatisticError
from .graph import (
    GraphStats,
    ReciprocityProfile,
    SocialGraph,
    build_graph,
    components,
    diameter,
    graph_reciprocity,
    graph_stats,
    read_edge_list,
    reciprocity_profile,
    write_edge_list,
)
from .ranking import (
    METHODS,
    HitsScores,
    IterationConfig,
    ScoreVector,
    discounted_pagerank,
    discounted_ratio,
    hits,
    noderanking,
    pagerank,
    paradoxical_ratio,
    prune_graph,
    pruned_pagerank,
    rank,
    raw_ratio,
    tunkrank,
    twitterrank,
)
from .evalkit import agreement_curve, decile_report, found_curve, kendall_topk, prestige_share, rank_table
from .synthgen import GenConfig, LabeledGraph, generate, scenario_fig1

__version__ = "0.1.0"

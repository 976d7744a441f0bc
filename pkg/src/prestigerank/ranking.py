"""Rank-prestige algorithms over follower graphs.

Prestige flows along follow edges: a follower endorses each of its followees,
so in PageRank terms the in-links of ``p`` are its followers and the
out-links are its followees.  Every iterative method runs through
:func:`_fixed_point`, which owns convergence detection and the optional
per-sweep observer used by invariant checks.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import InputError
from .textfeat import term_matrix
from .graph import ProfileTable, ReciprocityProfile, SocialGraph, build_graph, profiles as graph_profiles

METHODS = (
    "pagerank",
    "hits",
    "noderanking",
    "tunkrank",
    "twitterrank",
    "discounted-pagerank",
    "pruned-pagerank",
)

# retweet probability measured on the original crawl
DEFAULT_RETWEET_P = 0.0287
# weight of the fresh sweep in discounted PageRank; any value in (0, 1) keeps
# the fixed point, and 0.8 converged fastest on the benchmark graphs
_LAZY_STEP = 0.8

Observer = Callable[[int, np.ndarray], None]
log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationConfig:
    tolerance: float = 1e-10
    max_iterations: int = 200
    damping: float = 0.15

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be at least 1")
        if not 0.0 <= self.damping < 1.0:
            raise InputError("damping must lie in [0, 1)")


@dataclass(frozen=True)
class ScoreVector:
    method: str
    scores: np.ndarray
    iterations_used: int = 0
    converged: bool = True

    def __post_init__(self):
        s = np.array(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(s)):
            raise ValueError(f"{self.method}: non-finite scores")
        if s.size and s.min() < 0:
            raise ValueError(f"{self.method}: negative scores")
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    def __len__(self):
        return int(self.scores.size)

    def normalized(self) -> np.ndarray:
        total = self.scores.sum()
        if total <= 0:
            raise InputError(f"{self.method}: scores sum to zero")
        return self.scores / total


@dataclass(frozen=True)
class HitsScores:
    authority: ScoreVector
    hub: ScoreVector


def _fixed_point(step, x0, cfg: IterationConfig, metric: str = "l1", observer: Optional[Observer] = None):
    x = x0
    for it in range(1, cfg.max_iterations + 1):
        nxt = step(x)
        if observer is not None:
            observer(it, nxt)
        diff = np.abs(nxt - x)
        delta = diff.max() if metric == "linf" else diff.sum()
        x = nxt
        if delta < cfg.tolerance:
            return x, it, True
    return x, cfg.max_iterations, False


def _inflow(g: SocialGraph, per_source: np.ndarray) -> sp.csr_matrix:
    """Matrix ``M`` with ``M[i, j] = per_source[j]`` for every follow edge ``j -> i``."""
    n = g.node_count
    return sp.csr_matrix((per_source[g.in_idx], g.in_idx, g.in_ptr), shape=(n, n))


def _inverse_out_degree(g: SocialGraph) -> np.ndarray:
    deg = g.out_degree.astype(np.float64)
    inv = np.zeros_like(deg)
    np.divide(1.0, deg, out=inv, where=deg > 0)
    return inv


def _require_nodes(g: SocialGraph):
    if g.node_count < 1:
        raise InputError("ranking needs at least one node")


# --------------------------------------------------------------------------
# PageRank family

def pagerank(g: SocialGraph, cfg: IterationConfig = IterationConfig(), observer: Optional[Observer] = None) -> ScoreVector:
    """Damped PageRank; mass held by users without followees is spread uniformly."""
    _require_nodes(g)
    n = g.node_count
    d = cfg.damping
    m = _inflow(g, _inverse_out_degree(g))
    sink = g.out_degree == 0

    def step(x):
        return (1.0 - d) * (m @ x + x[sink].sum() / n) + d / n

    x, it, ok = _fixed_point(step, np.full(n, 1.0 / n), cfg, observer=observer)
    return ScoreVector("pagerank", x, it, ok)


def noderanking(g: SocialGraph, cfg: IterationConfig = IterationConfig(), observer: Optional[Observer] = None) -> ScoreVector:
    """Random surfer whose jump probability is ``1 / (1 + #followees)``.

    A user with ``k`` followees forwards ``1/(1+k)`` of its score to each of
    them and teleports the remaining ``1/(1+k)`` uniformly.  Sinks therefore
    teleport everything and need no special case.
    """
    _require_nodes(g)
    n = g.node_count
    jump = 1.0 / (1.0 + g.out_degree.astype(np.float64))
    m = _inflow(g, jump)

    def step(x):
        return m @ x + (jump @ x) / n

    x, it, ok = _fixed_point(step, np.full(n, 1.0 / n), cfg, observer=observer)
    return ScoreVector("noderanking", x, it, ok)


def tunkrank(g: SocialGraph, retweet_p: float = DEFAULT_RETWEET_P, cfg: IterationConfig = IterationConfig(),
             observer: Optional[Observer] = None) -> ScoreVector:
    """Expected-readership influence; raw values, iterated from zero."""
    _require_nodes(g)
    if not 0.0 <= retweet_p < 1.0:
        raise InputError("retweet_p must lie in [0, 1)")
    m = _inflow(g, _inverse_out_degree(g))

    def step(x):
        return m @ (1.0 + retweet_p * x)

    x, it, ok = _fixed_point(step, np.zeros(g.node_count), cfg, metric="linf", observer=observer)
    return ScoreVector("tunkrank", x, it, ok)


def _in_edge_order(g: SocialGraph) -> np.ndarray:
    """Permutation taking edges from ``g.edges()`` order to follower-CSR order."""
    return np.lexsort((g.sources(), g.out_idx))


def twitterrank(g: SocialGraph, tweet_counts, term_vectors: Optional[Sequence[dict]] = None,
                gamma: float = 0.15, cfg: IterationConfig = IterationConfig(), *,
                edge_similarity: Optional[np.ndarray] = None,
                observer: Optional[Observer] = None) -> ScoreVector:
    """Topic-free TwitterRank with cosine similarity between users.

    Similarity comes either from per-user ``term_vectors`` or from an
    explicit ``edge_similarity`` array aligned with ``g.edges()``.  The
    similarity factor makes transitions sub-stochastic, so scores are
    rescaled to sum 1 after every sweep.
    """
    _require_nodes(g)
    n = g.node_count
    if not 0.0 <= gamma <= 1.0:
        raise InputError("gamma must lie in [0, 1]")
    tau = np.asarray(tweet_counts, dtype=np.float64)
    if tau.shape != (n,) or (tau < 0).any():
        raise InputError("tweet_counts must give a non-negative count per user")
    total = tau.sum()
    if total <= 0:
        raise InputError("total tweet count is zero; teleport distribution undefined")
    if (term_vectors is None) == (edge_similarity is None):
        raise InputError("pass exactly one of term_vectors or edge_similarity")

    followers = g.in_idx
    followees = np.repeat(np.arange(n), g.in_degree)
    if edge_similarity is not None:
        sim = np.asarray(edge_similarity, dtype=np.float64)
        if sim.shape != (g.edge_count,):
            raise InputError("edge_similarity must have one value per edge")
        sim = sim[_in_edge_order(g)]
    else:
        if len(term_vectors) != n:
            raise InputError("need one term vector per user")
        x = term_matrix(term_vectors)
        sim = np.asarray(x[followees].multiply(x[followers]).sum(axis=1)).ravel()
    if (sim < 0).any():
        raise InputError("similarities must be non-negative")

    # tweets published by everyone each user follows
    followee_tweets = np.bincount(g.sources(), weights=tau[g.out_idx], minlength=n)
    denom = followee_tweets[followers]
    weight = np.zeros(g.edge_count)
    np.divide(tau[followees] * sim, denom, out=weight, where=denom > 0)
    t = sp.csr_matrix((weight, followers, g.in_ptr), shape=(n, n))
    teleport = gamma * tau / total

    def step(x):
        y = (1.0 - gamma) * (t @ x) + teleport
        s = y.sum()
        if s <= 0:
            raise InputError("twitterrank mass vanished (gamma=0 with no usable transitions)")
        return y / s

    x0 = np.full(n, 1.0 / n)
    x, it, ok = _fixed_point(step, x0, cfg, observer=observer)
    return ScoreVector("twitterrank", x, it, ok)


# --------------------------------------------------------------------------
# HITS

def hits(g: SocialGraph, cfg: IterationConfig = IterationConfig(), observer: Optional[Observer] = None) -> HitsScores:
    """Authority and hub scores over the whole graph, each with unit 2-norm.

    The observer receives a ``(2, n)`` array: authority row then hub row.
    """
    _require_nodes(g)
    n = g.node_count
    if g.edge_count == 0:
        zero = np.zeros(n)
        return HitsScores(ScoreVector("hits-authority", zero), ScoreVector("hits-hub", zero))
    a = g.adjacency()
    at = a.T.tocsr()

    def unit(v):
        norm = np.sqrt(v @ v)
        return v / norm if norm > 0 else v

    def step(state):
        auth = unit(at @ state[1])
        hub = unit(a @ auth)
        return np.vstack([auth, hub])

    start = np.full((2, n), 1.0 / np.sqrt(n))
    x, it, ok = _fixed_point(step, start, cfg, observer=observer)
    return HitsScores(ScoreVector("hits-authority", x[0], it, ok), ScoreVector("hits-hub", x[1], it, ok))


# --------------------------------------------------------------------------
# reciprocity-discounted ratios

def raw_ratio(pr: ReciprocityProfile) -> float:
    """Follower/followee ratio; a user with no followees scores its follower count."""
    if pr.followees == 0:
        return float(pr.followers)
    return pr.followers / pr.followees


def discounted_ratio(pr: ReciprocityProfile) -> float:
    """Follower/followee ratio after removing reciprocal links from both sides.

    A zero denominator yields the numerator (0 when both vanish).
    """
    num = pr.followers - pr.reciprocal
    den = pr.followees - pr.reciprocal
    if den == 0:
        return float(num)
    return num / den


def paradoxical_ratio(pr: ReciprocityProfile) -> float:
    """Raw ratio for users with more followers than followees, else the discounted one."""
    if pr.followers > pr.followees:
        return raw_ratio(pr)
    return discounted_ratio(pr)


def paradoxical_ratios(table: ProfileTable) -> np.ndarray:
    """Vectorised :func:`paradoxical_ratio` over a profile table."""
    fol = table.followers.astype(np.float64)
    fee = table.followees.astype(np.float64)
    rec = table.reciprocal.astype(np.float64)
    raw = np.where(fee > 0, fol / np.where(fee > 0, fee, 1.0), fol)
    num, den = fol - rec, fee - rec
    disc = np.where(den > 0, num / np.where(den > 0, den, 1.0), num)
    return np.where(fol > fee, raw, disc)


def _profile_table(g: SocialGraph, table) -> ProfileTable:
    if table is None:
        return graph_profiles(g)
    if not isinstance(table, ProfileTable):
        table = ProfileTable.from_profiles(list(table))
    if len(table) != g.node_count:
        raise InputError("need one reciprocity profile per user")
    return table


def discounted_pagerank(g: SocialGraph, profiles=None, cfg: IterationConfig = IterationConfig(),
                        observer: Optional[Observer] = None) -> ScoreVector:
    """PageRank without teleportation, each source de-weighted by its paradoxical ratio.

    Weights are divided by the graph maximum and scores are rescaled to sum 1
    after every sweep.  Sweeps are lazy (a fifth of the old vector is kept),
    which leaves the fixed point unchanged but damps the oscillation that
    periodic follow structures cause without teleportation.  A final plain sweep puts
    users fed only by zero-weight followers at exactly zero.

    When the weighted follow graph has no cycle, prestige drains out within
    ``node_count`` sweeps and the all-zero vector is returned.
    """
    _require_nodes(g)
    n = g.node_count
    ratio = paradoxical_ratios(_profile_table(g, profiles))
    top = ratio.max()
    if not top > 0:
        raise InputError("every paradoxical ratio is zero; de-weighting undefined")
    m = _inflow(g, ratio / top * _inverse_out_degree(g))
    m.eliminate_zeros()

    def plain(x):
        y = m @ x
        s = y.sum()
        return y / s if s > 0 else y

    x = np.full(n, 1.0 / n)
    n_strong, label = connected_components(m, directed=True, connection="strong")
    if np.bincount(label, minlength=n_strong).max() < 2:
        for it in range(1, n + 1):
            x = plain(x)
            if observer is not None:
                observer(it, x)
            if not x.any():
                break
        log.warning("discounted-pagerank: weighted graph is acyclic, all prestige drains away")
        return ScoreVector("discounted-pagerank", x, it, True)

    def lazy(x):
        return (1 - _LAZY_STEP) * x + _LAZY_STEP * plain(x)

    # settle the lazy sweep below the tolerance so the closing plain sweep
    # also moves the vector by less than it
    inner = replace(cfg, tolerance=cfg.tolerance / 4)
    x, it, ok = _fixed_point(lazy, x, inner, observer=observer)
    x = plain(x)
    if observer is not None:
        observer(it + 1, x)
    ok = ok and np.abs(plain(x) - x).sum() < cfg.tolerance
    return ScoreVector("discounted-pagerank", x, it + 1, ok)


@dataclass(frozen=True)
class PrunedGraph:
    graph: SocialGraph
    old_to_new: np.ndarray  # -1 for removed users
    kept: np.ndarray  # new id -> original id


def prune_graph(g: SocialGraph, profiles=None) -> PrunedGraph:
    """Induced subgraph on users whose paradoxical ratio is positive."""
    ratio = paradoxical_ratios(_profile_table(g, profiles))
    kept = np.flatnonzero(ratio > 0)
    if kept.size == 0:
        raise InputError("pruning removed every user")
    old_to_new = np.full(g.node_count, -1, dtype=np.int64)
    old_to_new[kept] = np.arange(kept.size)
    e = g.edges()
    keep_edge = (old_to_new[e[:, 0]] >= 0) & (old_to_new[e[:, 1]] >= 0)
    sub = build_graph(old_to_new[e[keep_edge]], kept.size)
    return PrunedGraph(sub, old_to_new, kept)


def pruned_pagerank(g: SocialGraph, cfg: IterationConfig = IterationConfig(), profiles=None) -> ScoreVector:
    """PageRank of the pruned graph, reported in original ids (removed users score 0)."""
    pruned = prune_graph(g, profiles)
    inner = pagerank(pruned.graph, cfg)
    full = np.zeros(g.node_count)
    full[pruned.kept] = inner.scores
    return ScoreVector("pruned-pagerank", full, inner.iterations_used, inner.converged)


# --------------------------------------------------------------------------
# dispatch and serialisation

def rank(g: SocialGraph, method: str, cfg: IterationConfig = IterationConfig(), *,
         retweet_p: float = DEFAULT_RETWEET_P, gamma: float = 0.15,
         tweet_counts=None, term_vectors=None) -> ScoreVector:
    """Run one named method; HITS reports its authority vector."""
    if method == "pagerank":
        return pagerank(g, cfg)
    if method == "hits":
        return hits(g, cfg).authority
    if method == "noderanking":
        return noderanking(g, cfg)
    if method == "tunkrank":
        return tunkrank(g, retweet_p, cfg)
    if method == "twitterrank":
        if tweet_counts is None or term_vectors is None:
            raise InputError("twitterrank needs a tweet corpus")
        return twitterrank(g, tweet_counts, term_vectors, gamma, cfg)
    if method == "discounted-pagerank":
        return discounted_pagerank(g, None, cfg)
    if method == "pruned-pagerank":
        return pruned_pagerank(g, cfg)
    raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def format_scores(sv: ScoreVector) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user_id", sv.method])
    for u, s in enumerate(sv.scores.tolist()):
        w.writerow([u, repr(s)])
    return buf.getvalue()


def write_scores(sv: ScoreVector, path) -> None:
    Path(path).write_text(format_scores(sv), encoding="utf-8")


def read_scores(path) -> ScoreVector:
    """Read a ``user_id,<method>`` CSV; ids must be exactly ``0..n-1``."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 2 or rows[0][0] != "user_id":
        raise InputError(f"{path}: expected header 'user_id,<method>'")
    method = rows[0][1]
    ids, vals = [], []
    for lineno, row in enumerate(rows[1:], 2):
        try:
            ids.append(int(row[0]))
            vals.append(float(row[1]))
        except (ValueError, IndexError):
            raise InputError(f"{path}:{lineno}: bad score row {row!r}") from None
    if sorted(ids) != list(range(len(ids))):
        raise InputError(f"{path}: user ids must cover 0..{len(ids) - 1} exactly once")
    scores = np.zeros(len(ids))
    scores[ids] = vals
    try:
        return ScoreVector(method, scores)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None

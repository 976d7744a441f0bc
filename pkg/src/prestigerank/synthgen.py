"""Seeded synthetic follower graphs with labelled abusive users.

The generator mixes the archetypes that matter for link-spam experiments:
ordinary users with polite follow-back, heavily followed celebrities, tight
groups of friends, follow/unfollow spammers and Sybil rings boosting a
beneficiary.  Every random draw comes from one ``numpy`` generator seeded by
``GenConfig.seed``, in a fixed order, so a configuration maps to exactly one
graph.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import InputError
from .graph import SocialGraph, build_graph
from .textfeat import Tweet

LEGIT, CELEBRITY, GROUP_MEMBER, SPAMMER, SYBIL = "legit", "celebrity", "group_member", "spammer", "sybil"
LABELS = (LEGIT, CELEBRITY, GROUP_MEMBER, SPAMMER, SYBIL)


@dataclass(frozen=True)
class GenConfig:
    n_background: int = 9_680
    n_celebrities: int = 20
    n_close_groups: int = 20
    group_size: int = 5
    n_spammers: int = 200
    n_sybil_rings: int = 0
    ring_size: int = 5
    background_follow_rate: float = 4.0
    followback_prob: float = 0.3
    spammer_targets: int = 150
    spammer_unfollow_prob: float = 0.8
    seed: int = 42
    # knobs beyond the archetype counts
    celebrity_reach: float = 0.1
    celebrity_followees: int = 5
    group_outward: int = 2
    spammer_peer_follows: int = 40
    outdegree_exponent: Optional[float] = None
    max_out_degree: int = 1_000
    tweets: bool = True

    @property
    def node_count(self) -> int:
        return (self.n_background + self.n_celebrities + self.n_close_groups * self.group_size
                + self.n_spammers + self.n_sybil_rings * (self.ring_size + 1))

    def validate(self) -> None:
        counts = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                  if f.type in ("int", int) and f.name != "seed"}
        for name, v in counts.items():
            if v < 0:
                raise InputError(f"{name} must be non-negative")
        for name in ("followback_prob", "spammer_unfollow_prob", "celebrity_reach"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must lie in [0, 1]")
        if self.background_follow_rate < 0:
            raise InputError("background_follow_rate must be non-negative")
        total = self.node_count
        if total < 1:
            raise InputError("configuration produces no users")
        if self.group_size > total:
            raise InputError(f"group_size {self.group_size} exceeds total users {total}")
        if self.ring_size > total:
            raise InputError(f"ring_size {self.ring_size} exceeds total users {total}")
        if self.n_close_groups and self.group_size < 2:
            raise InputError("close groups need group_size >= 2")
        if self.n_sybil_rings and self.ring_size < 2:
            raise InputError("Sybil rings need ring_size >= 2")
        legit = self.n_background + self.n_close_groups * self.group_size
        if self.n_spammers and self.spammer_targets > legit:
            raise InputError(f"spammer_targets {self.spammer_targets} exceeds the {legit} followable users")
        if self.n_spammers and self.spammer_peer_follows >= max(self.n_spammers, 1) and self.spammer_peer_follows:
            raise InputError("spammer_peer_follows must be smaller than n_spammers")
        if self.outdegree_exponent is not None and self.outdegree_exponent <= 0:
            raise InputError("outdegree_exponent must be positive")

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "GenConfig":
        """Build from string values (``key=value`` config files)."""
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise InputError(f"unknown generator setting {key!r}")
            kind = known[key].type
            try:
                if kind in ("bool", bool):
                    if raw.lower() not in ("1", "0", "true", "false", "yes", "no"):
                        raise ValueError(raw)
                    kwargs[key] = raw.lower() in ("1", "true", "yes")
                elif kind in ("int", int):
                    kwargs[key] = int(raw)
                elif "Optional" in str(kind):
                    kwargs[key] = None if raw.lower() in ("", "none") else float(raw)
                else:
                    kwargs[key] = float(raw)
            except ValueError:
                raise InputError(f"bad value for {key}: {raw!r}") from None
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class LabeledGraph:
    graph: SocialGraph
    labels: tuple[str, ...]
    tweets: Optional[tuple[Tweet, ...]] = None
    focal: Optional[int] = None

    def __post_init__(self):
        if len(self.labels) != self.graph.node_count:
            raise ValueError("one label per user required")

    def members(self, label: str) -> np.ndarray:
        return np.flatnonzero(np.array(self.labels) == label)


# --------------------------------------------------------------------------

def _powerlaw_degrees(rng, n, exponent, d_max):
    d = np.arange(1, d_max + 1)
    p = d.astype(np.float64) ** -exponent
    return rng.choice(d, size=n, p=p / p.sum())


def _pick(rng, lo: int, hi: int, k: int, exclude: int) -> np.ndarray:
    """``k`` distinct ids from ``[lo, hi)`` other than ``exclude``."""
    size = hi - lo
    skip = lo <= exclude < hi
    k = min(k, size - skip)
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    idx = rng.choice(size - skip, size=k, replace=False) + lo
    if skip:
        idx[idx >= exclude] += 1
    return idx


class _Edges:
    def __init__(self):
        self.src: list[np.ndarray] = []
        self.dst: list[np.ndarray] = []

    def add(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
        keep = u != v
        self.src.append(u[keep].ravel())
        self.dst.append(v[keep].ravel())

    def mutual(self, u, v):
        self.add(u, v)
        self.add(v, u)

    def array(self) -> np.ndarray:
        if not self.src:
            return np.zeros((0, 2), dtype=np.int64)
        return np.unique(np.column_stack([np.concatenate(self.src), np.concatenate(self.dst)]), axis=0)


def generate(cfg: GenConfig = GenConfig()) -> LabeledGraph:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.node_count

    # id layout: background, group members, celebrities, spammers, Sybil rings
    n_group = cfg.n_close_groups * cfg.group_size
    bg_end = cfg.n_background
    followable_end = bg_end + n_group
    organic_end = followable_end + cfg.n_celebrities
    spam_end = organic_end + cfg.n_spammers
    labels = ([LEGIT] * cfg.n_background + [GROUP_MEMBER] * n_group + [CELEBRITY] * cfg.n_celebrities
              + [SPAMMER] * cfg.n_spammers + [SYBIL] * (n - spam_end))
    edges = _Edges()

    # ordinary users follow uniformly among organic accounts
    if cfg.outdegree_exponent is None:
        k_bg = rng.poisson(cfg.background_follow_rate, size=bg_end)
    else:
        k_bg = _powerlaw_degrees(rng, bg_end, cfg.outdegree_exponent, max(1, min(cfg.max_out_degree, n - 1)))
    for u, k in enumerate(k_bg.tolist()):
        edges.add(u, _pick(rng, 0, organic_end, k, u))

    # close groups: mutual cliques with a little outward following
    for g0 in range(cfg.n_close_groups):
        members = np.arange(bg_end + g0 * cfg.group_size, bg_end + (g0 + 1) * cfg.group_size)
        edges.add(members[:, None], members[None, :])
        for u in members.tolist():
            edges.add(u, _pick(rng, 0, organic_end, cfg.group_outward, u))

    # celebrities: a broad audience, few followees
    for c in range(followable_end, organic_end):
        edges.add(np.flatnonzero(rng.random(bg_end) < cfg.celebrity_reach), c)
        edges.add(c, _pick(rng, 0, organic_end, cfg.celebrity_followees, c))

    # ordinary users and group members follow back organic followers
    e = edges.array()
    codes = e[:, 0] * n + e[:, 1]
    lonely = ~np.isin(e[:, 1] * n + e[:, 0], codes)
    polite = e[:, 1] < followable_end
    back = (rng.random(len(e)) < cfg.followback_prob) & lonely & polite
    edges.add(e[back, 1], e[back, 0])

    # spammers: mass follow, harvest follow-backs, drop the rest
    for s in range(organic_end, spam_end):
        targets = _pick(rng, 0, followable_end, cfg.spammer_targets, s)
        fb = rng.random(targets.size) < cfg.followback_prob
        kept = fb | (rng.random(targets.size) >= cfg.spammer_unfollow_prob)
        edges.add(s, targets[kept])
        edges.add(targets[fb], s)
    # link exchange among spammers; auto-follow makes every such link mutual
    for s in range(organic_end, spam_end):
        edges.mutual(s, _pick(rng, organic_end, spam_end, cfg.spammer_peer_follows, s))

    # Sybil rings: mutual ring, everyone boosts one beneficiary
    for r in range(cfg.n_sybil_rings):
        first = spam_end + r * (cfg.ring_size + 1)
        ring = np.arange(first, first + cfg.ring_size)
        edges.mutual(ring, np.roll(ring, -1))
        edges.add(ring, first + cfg.ring_size)

    g = build_graph(edges.array(), n)
    tweets = tuple(_synth_tweets(rng, labels)) if cfg.tweets else None
    return LabeledGraph(g, tuple(labels), tweets)


# --------------------------------------------------------------------------
# tweet corpus

_SYLLABLES = ("ka", "lo", "mi", "ren", "tu", "sa", "vel", "dor", "pi", "ne", "qua", "ber", "zo", "li", "mon", "ta")
_SPAM_VOCAB = ("free", "money", "make", "online", "business", "deals", "marketing", "click", "win",
               "offer", "followers", "traffic", "cash", "fast", "internet", "earn")
_TWEET_RATE = {LEGIT: 5.6, CELEBRITY: 12.0, GROUP_MEMBER: 8.0, SPAMMER: 41.0, SYBIL: 20.0}
_URL_RATE = {LEGIT: 0.18, CELEBRITY: 0.3, GROUP_MEMBER: 0.15, SPAMMER: 0.9, SYBIL: 0.9}
_EPOCH = 1_232_928_000  # 2009-01-26


def _legit_vocab() -> list[str]:
    return [a + b + c for a in _SYLLABLES for b in _SYLLABLES for c in _SYLLABLES[:4]]


def _synth_tweets(rng, labels):
    vocab = np.array(_legit_vocab())
    cdf = np.cumsum(1.0 / np.arange(1, vocab.size + 1))
    cdf /= cdf[-1]
    spam_vocab = np.array(_SPAM_VOCAB)
    for u, lab in enumerate(labels):
        robotic = lab in (SPAMMER, SYBIL)
        for _ in range(int(rng.poisson(_TWEET_RATE[lab]))):
            if robotic:
                words = spam_vocab[rng.integers(spam_vocab.size, size=6)].tolist()
            else:
                words = vocab[np.searchsorted(cdf, rng.random(8), side="right").clip(max=vocab.size - 1)].tolist()
            if rng.random() < _URL_RATE[lab]:
                words.append(f"http://t.example/{int(rng.integers(1 << 30)):x}")
            if rng.random() < 0.08:
                words.insert(0, "#" + words[0])
            if not robotic and rng.random() < 0.03:
                words = ["RT", f"@u{int(rng.integers(len(labels)))}"] + words
            elif not robotic and rng.random() < 0.2:
                words.insert(0, f"@u{int(rng.integers(len(labels)))}")
            yield Tweet(u, " ".join(words), _EPOCH + int(rng.integers(214 * 86_400)))


# --------------------------------------------------------------------------
# hand-built archetypes

# Follower/followee counts realising ratios 7/4 = 1.75, 2/3 = 0.67 and
# 8/7 = 1.14.  The celebrity has no reciprocal links; the close-group user
# is mutual with both followers; the spammer's seven followees all follow
# back, leaving one genuine follower once reciprocity is discounted.
CELEBRITY_COUNTS = (7, 4, 0)
CLOSE_GROUP_COUNTS = (2, 3, 2)
SPAMMER_COUNTS = (8, 7, 7)


def scenario_fig1() -> tuple[LabeledGraph, LabeledGraph, LabeledGraph]:
    """Opinion-maker, close-group user and link-exchange spammer; node 0 is focal in each."""
    celeb_edges = [(u, 0) for u in range(1, 8)] + [(0, v) for v in range(8, 12)]
    celeb = LabeledGraph(build_graph(celeb_edges, 12), (CELEBRITY,) + (LEGIT,) * 11, focal=0)

    group_edges = [(a, b) for a in (0, 1, 2) for b in (0, 1, 2) if a != b] + [(0, 3)]
    group = LabeledGraph(build_graph(group_edges, 4), (GROUP_MEMBER,) * 3 + (LEGIT,), focal=0)

    spam_edges = [(0, v) for v in range(1, 8)] + [(v, 0) for v in range(1, 8)] + [(8, 0)]
    spam = LabeledGraph(build_graph(spam_edges, 9), (SPAMMER,) + (LEGIT,) * 8, focal=0)
    return celeb, group, spam

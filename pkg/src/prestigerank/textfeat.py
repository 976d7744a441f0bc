"""Tweet parsing, behavioural summaries, spam scoring and term statistics."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy

from .errors import InputError
from .graph import SocialGraph

log = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"(?P<url>(?:https?://|www\.)\S+)"
    r"|(?P<hashtag>#\w+)"
    r"|(?P<mention>@\w+)"
    r"|(?P<word>[^\W_]+)",
    re.IGNORECASE,
)

# distinctive terms of spammer biographies on the original crawl
SPAM_KEYWORDS = (
    "marketing", "internet", "marketer", "online", "business", "money", "social",
    "internet marketer", "internet marketing", "social media", "entrepreneur",
    "affiliate", "network", "media", "seo", "free", "help", "deals", "make money",
    "real estate", "forex", "coach", "home", "real", "news", "money online",
    "helping", "tips", "affiliate marketing", "web", "expert", "investor", "people",
    "network marketing", "mlm", "blog", "traffic", "success", "online marketing",
    "network marketer", "affiliate marketer", "making money", "online business",
    "estate investor", "small business", "online marketer", "weight loss",
    "trump network", "helping others", "media marketing", "marketing coach",
    "money making", "help people", "forex trading", "helping people", "home based",
    "home business", "internet entrepreneur", "forex trader", "business coach",
)


@dataclass(frozen=True)
class Tweet:
    author: int
    text: str
    timestamp: Optional[int] = None

    def __post_init__(self):
        if not self.text:
            raise InputError("tweet text must be non-empty")


@dataclass(frozen=True)
class TweetFeatures:
    url_count: int
    hashtag_count: int
    mention_count: int
    is_retweet: bool
    is_conversation: bool


def tokenize(text: str) -> list[tuple[str, str]]:
    """``(kind, lowercased text)`` tokens; kinds are url, hashtag, mention, word."""
    return [(m.lastgroup, m.group().lower()) for m in _TOKEN.finditer(text)]


def _is_retweet(tokens) -> bool:
    return any(
        kind == "word" and text == "rt" and tokens[i + 1][0] == "mention"
        for i, (kind, text) in enumerate(tokens[:-1])
    )


def extract_features(t: Tweet) -> TweetFeatures:
    tokens = tokenize(t.text)
    kinds = Counter(kind for kind, _ in tokens)
    rt = _is_retweet(tokens)
    mentions = kinds["mention"]
    return TweetFeatures(
        url_count=kinds["url"],
        hashtag_count=kinds["hashtag"],
        mention_count=mentions,
        is_retweet=rt,
        is_conversation=mentions >= 1 and not rt,
    )


# --------------------------------------------------------------------------
# Table-style behaviour summaries

@dataclass(frozen=True)
class BehaviorSummary:
    members: int
    skipped: int
    avg_in_degree: float
    avg_out_degree: float
    avg_tweets: float
    std_tweets: float
    pct_tweets_with_urls: float
    avg_urls_per_url_tweet: float
    pct_tweets_with_hashtags: float
    avg_tags_per_tag_tweet: float
    pct_retweets: float
    pct_conversations: float
    avg_users_referred: float


def _ratio(num, den, scale=1.0):
    return scale * num / den if den else 0.0


def behavior_summary(corpus: Iterable[Tweet], g: SocialGraph, group: Iterable[int]) -> BehaviorSummary:
    """Aggregate degree and tweeting behaviour for a group of users.

    Members outside the graph are skipped and counted in ``skipped``.
    Conversation percentages exclude retweets from the denominator.
    """
    wanted = set(int(u) for u in group)
    if not wanted:
        raise InputError("group must be non-empty")
    members = sorted(u for u in wanted if 0 <= u < g.node_count)
    skipped = len(wanted) - len(members)
    if skipped:
        log.warning("%d group members are not in the graph", skipped)
    if not members:
        raise InputError("no group member is present in the graph")
    inside = set(members)

    per_user = Counter()
    total = url_tweets = urls = tag_tweets = tags = retweets = convs = referred = 0
    for t in corpus:
        if t.author not in inside:
            continue
        f = extract_features(t)
        per_user[t.author] += 1
        total += 1
        if f.url_count:
            url_tweets += 1
            urls += f.url_count
        if f.hashtag_count:
            tag_tweets += 1
            tags += f.hashtag_count
        if f.is_retweet:
            retweets += 1
        if f.is_conversation:
            convs += 1
            referred += f.mention_count

    counts = np.array([per_user[u] for u in members], dtype=np.float64)
    idx = np.array(members)
    return BehaviorSummary(
        members=len(members),
        skipped=skipped,
        avg_in_degree=float(g.in_degree[idx].mean()),
        avg_out_degree=float(g.out_degree[idx].mean()),
        avg_tweets=float(counts.mean()),
        std_tweets=float(counts.std()),
        pct_tweets_with_urls=_ratio(url_tweets, total, 100.0),
        avg_urls_per_url_tweet=_ratio(urls, url_tweets),
        pct_tweets_with_hashtags=_ratio(tag_tweets, total, 100.0),
        avg_tags_per_tag_tweet=_ratio(tags, tag_tweets),
        pct_retweets=_ratio(retweets, total, 100.0),
        pct_conversations=_ratio(convs, total - retweets, 100.0),
        avg_users_referred=_ratio(referred, convs),
    )


# --------------------------------------------------------------------------
# spam heuristic

@dataclass(frozen=True)
class SpamHeuristicConfig:
    keywords: Sequence[str] = SPAM_KEYWORDS
    url_weight: float = 0.5
    keyword_weight: float = 0.3
    name_weight: float = 0.2
    name_pattern: str = r"\d+$"
    bio_keywords_flag: bool = False  # let a keyword in the bio also raise the profile flag

    def __post_init__(self):
        w = (self.url_weight, self.keyword_weight, self.name_weight)
        if min(w) < 0 or not math.isclose(sum(w), 1.0):
            raise InputError("spam weights must be non-negative and sum to 1")


def _ngrams(words: Sequence[str], sizes) -> set[str]:
    return {" ".join(words[i:i + n]) for n in sizes for i in range(len(words) - n + 1)}


def _contains_keyword(text: str, keywords: set[str], sizes) -> bool:
    words = [tok for kind, tok in tokenize(text) if kind == "word"]
    return not keywords.isdisjoint(_ngrams(words, sizes))


def spam_score(profile_bio: str, handle: str, tweets: Sequence[Tweet],
               cfg: SpamHeuristicConfig = SpamHeuristicConfig()) -> float:
    """Convex mix of URL rate, keyword rate and a suspicious-profile flag.

    The profile flag fires when the handle matches ``cfg.name_pattern`` or
    contains a keyword (spaces removed); with ``cfg.bio_keywords_flag`` a
    keyword in the bio fires it too.  Without tweets only the flag counts.
    """
    keywords = {k.lower() for k in cfg.keywords}
    sizes = sorted({len(k.split()) for k in keywords})
    h = handle.lower()
    flagged = (
        re.search(cfg.name_pattern, h) is not None
        or any(k.replace(" ", "") in h for k in keywords)
        or (cfg.bio_keywords_flag and bool(profile_bio) and _contains_keyword(profile_bio, keywords, sizes))
    )
    score = cfg.name_weight * float(flagged)
    if tweets:
        with_url = sum(1 for t in tweets if extract_features(t).url_count)
        with_kw = sum(1 for t in tweets if _contains_keyword(t.text, keywords, sizes))
        score += cfg.url_weight * with_url / len(tweets) + cfg.keyword_weight * with_kw / len(tweets)
    return min(1.0, score)


# --------------------------------------------------------------------------
# distinctive terms

@dataclass(frozen=True)
class DistinctiveTerm:
    term: str
    g2: float
    side: str  # "a" or "b": the corpus where the term is relatively more frequent


def count_terms(texts: Iterable[str], max_n: int = 2, stopwords: Iterable[str] = ()) -> Counter:
    """Unigram..``max_n``-gram counts over word tokens; n-grams touching a stopword are dropped."""
    stop = {s.lower() for s in stopwords}
    counts = Counter()
    for text in texts:
        words = [tok for kind, tok in tokenize(text) if kind == "word"]
        for n in range(1, max_n + 1):
            for i in range(len(words) - n + 1):
                gram = words[i:i + n]
                if stop.intersection(gram):
                    continue
                counts[" ".join(gram)] += 1
    return counts


def log_likelihood_ratio(a, b, size_a, size_b):
    """Dunning's G² for term counts ``a`` and ``b`` in corpora of the given sizes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c, d = size_a - a, size_b - b
    n = size_a + size_b
    cells = xlogy(a, a) + xlogy(b, b) + xlogy(c, c) + xlogy(d, d)
    rows = xlogy(size_a, size_a) + xlogy(size_b, size_b)
    cols = xlogy(a + b, a + b) + xlogy(c + d, c + d)
    g2 = 2.0 * (cells - rows - cols + xlogy(n, n))
    return np.maximum(g2, 0.0)


def distinctive_terms(corpus_a: Mapping[str, int], corpus_b: Mapping[str, int], top_n: int = 60) -> list[DistinctiveTerm]:
    """Terms ranked by G², those over-represented in ``corpus_a`` first.

    Ties (including all-zero statistics) fall back to lexicographic order.
    """
    size_a, size_b = sum(corpus_a.values()), sum(corpus_b.values())
    if size_a <= 0 or size_b <= 0:
        raise InputError("both corpora must be non-empty")
    terms = sorted(set(corpus_a) | set(corpus_b))
    a = np.array([corpus_a.get(t, 0) for t in terms], dtype=np.float64)
    b = np.array([corpus_b.get(t, 0) for t in terms], dtype=np.float64)
    g2 = log_likelihood_ratio(a, b, size_a, size_b)
    lean = a * size_b - b * size_a
    side = np.where(lean > 0, "a", np.where(lean < 0, "b", "none"))
    signed = np.where(lean >= 0, g2, -g2)
    order = sorted(range(len(terms)), key=lambda i: (-signed[i], terms[i]))
    return [DistinctiveTerm(terms[i], float(g2[i]), str(side[i])) for i in order[:top_n]]


def format_terms(terms: Sequence[DistinctiveTerm]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["term", "g2", "side"])
    for t in terms:
        w.writerow([t.term, repr(t.g2), t.side])
    return buf.getvalue()


# --------------------------------------------------------------------------
# term vectors

TermVector = dict


def term_vector(tweets: Iterable[Tweet]) -> dict[str, float]:
    """Term frequencies over lowercased words and hashtags (URLs and mentions excluded)."""
    counts = Counter()
    for t in tweets:
        tokens = tokenize(t.text)
        for i, (kind, text) in enumerate(tokens):
            if kind == "hashtag":
                counts[text] += 1
            elif kind == "word":
                if text == "rt" and i + 1 < len(tokens) and tokens[i + 1][0] == "mention":
                    continue
                counts[text] += 1
    return {k: float(v) for k, v in counts.items()}


def cosine_sim(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def term_matrix(vectors: Sequence[Mapping[str, float]]) -> sp.csr_matrix:
    """Rows are unit-length term vectors over a sorted shared vocabulary (empty rows stay zero)."""
    vocab = sorted(set().union(*vectors)) if vectors else []
    col = {t: j for j, t in enumerate(vocab)}
    indptr, indices, data = [0], [], []
    for v in vectors:
        items = sorted((col[t], w) for t, w in v.items())
        norm = math.sqrt(sum(w * w for _, w in items))
        for j, w in items:
            indices.append(j)
            data.append(w / norm)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(vectors), len(vocab)),
    )


def corpus_by_user(tweets: Iterable[Tweet], node_count: int) -> tuple[np.ndarray, list[dict[str, float]]]:
    """Per-user tweet counts and term vectors; authors outside the graph are ignored."""
    grouped: list[list[Tweet]] = [[] for _ in range(node_count)]
    dropped = 0
    for t in tweets:
        if 0 <= t.author < node_count:
            grouped[t.author].append(t)
        else:
            dropped += 1
    if dropped:
        log.warning("ignored %d tweets by users outside the graph", dropped)
    counts = np.array([len(ts) for ts in grouped], dtype=np.int64)
    return counts, [term_vector(ts) for ts in grouped]


# --------------------------------------------------------------------------
# JSON-lines corpora

def parse_tweets(lines: Iterable[str], source: str = "<tweets>") -> list[Tweet]:
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(Tweet(int(rec["user"]), str(rec["text"]), None if rec.get("ts") is None else int(rec["ts"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{source}:{lineno}: bad tweet record ({exc})") from None
    return out


def read_tweets(path) -> list[Tweet]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_tweets(fh, str(path))


def format_tweets(tweets: Iterable[Tweet]) -> str:
    rows = []
    for t in tweets:
        rec = {"user": t.author, "text": t.text}
        if t.timestamp is not None:
            rec["ts"] = t.timestamp
        rows.append(json.dumps(rec, ensure_ascii=False, sort_keys=True))
    return "".join(r + "\n" for r in rows)

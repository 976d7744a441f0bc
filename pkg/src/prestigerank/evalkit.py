"""Evaluation of rankings against labelled abusive users.

Positions are 1-based with 1 the most prestigious; tied scores share their
midrank, which is why report positions can end in ``.5``.
"""

from __future__ import annotations

import csv
import io
import logging
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from ._threads import thread_count
from .errors import InputError
from .ranking import ScoreVector

log = logging.getLogger(__name__)

ALL_USERS = "all"


@dataclass(frozen=True)
class RankTable:
    position: np.ndarray  # midrank per user
    order: np.ndarray  # user ids best first, ties by ascending id

    def __len__(self):
        return int(self.position.size)

    def head(self, k: int) -> np.ndarray:
        return self.order[:k]


def rank_table(s: ScoreVector) -> RankTable:
    scores = s.scores
    position = rankdata(-scores, method="average")
    order = np.lexsort((np.arange(scores.size), -scores))
    return RankTable(position, order)


def prestige_share(s: ScoreVector, group: Iterable[int]) -> float:
    total = float(s.scores.sum())
    if total <= 0:
        raise InputError(f"{s.method}: total prestige is zero")
    idx = np.fromiter(set(int(u) for u in group), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    return float(s.scores[idx].sum()) / total


# --------------------------------------------------------------------------
# decile reports

@dataclass(frozen=True)
class DecileRow:
    group: str
    decile: int
    boundary: float
    mean: float
    median: float


@dataclass(frozen=True)
class DecileReport:
    rows: tuple[DecileRow, ...]

    def for_group(self, name: str) -> list[DecileRow]:
        return [r for r in self.rows if r.group == name]

    def groups(self) -> list[str]:
        return list(dict.fromkeys(r.group for r in self.rows))


def _decile_rows(name: str, positions: np.ndarray) -> list[DecileRow]:
    pos = np.sort(positions)
    rows = []
    for d in range(9, 0, -1):
        # cumulative slice: the best ceil(|G| * (10 - d) / 10) members
        take = (pos.size * (10 - d) + 9) // 10
        part = pos[:take]
        rows.append(DecileRow(name, d, float(part[-1]), float(part.mean()), float(np.median(part))))
    return rows


def decile_report(rt: RankTable, groups: Mapping[str, Iterable[int]]) -> DecileReport:
    """Boundary (worst), mean and median positions of each group's best slices.

    Decile ``d`` covers the best ``(10 - d) * 10`` percent of a group, so the
    9th decile is its top tenth and the 1st its top nine tenths.  An
    all-users block is always included first; empty groups are skipped.
    """
    rows = _decile_rows(ALL_USERS, rt.position)
    for name, members in groups.items():
        idx = np.fromiter(set(int(u) for u in members), dtype=np.int64)
        if idx.size == 0:
            log.warning("group %r is empty; omitted from decile report", name)
            continue
        rows.extend(_decile_rows(name, rt.position[idx]))
    return DecileReport(tuple(rows))


# --------------------------------------------------------------------------
# found curves

@dataclass(frozen=True)
class FoundCurve:
    cut: np.ndarray  # top fraction of the global ranking
    found: np.ndarray  # fraction of the group at or above that cut


def found_curve(rt: RankTable, group: Iterable[int], resolution: int = 100) -> FoundCurve:
    idx = np.fromiter(set(int(u) for u in group), dtype=np.int64)
    if idx.size == 0:
        raise InputError("found curve needs a non-empty group")
    if resolution < 1:
        raise InputError("resolution must be positive")
    n = len(rt)
    pos = np.sort(rt.position[idx])
    steps = np.arange(1, resolution + 1)
    # position <= (i / resolution) * n, compared without dividing
    hits = np.searchsorted(pos * resolution, steps * n, side="right")
    return FoundCurve(steps / resolution, hits / idx.size)


# --------------------------------------------------------------------------
# top-k Kendall distance

def _inversions(seq: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``seq[i] > seq[j]``; values are distinct."""
    seen: list[int] = []
    count = 0
    for x in seq:
        pos = bisect_right(seen, x)
        count += len(seen) - pos
        seen.insert(pos, x)
    return count


def kendall_topk(list_a: Sequence[int], list_b: Sequence[int], penalty_p: float = 0.0) -> float:
    """Fagin's K^(p) distance between two top-k lists, scaled to [0, 1].

    The divisor ``k² + p·k(k-1)`` is the value reached by two disjoint
    lists, the largest possible; for ``p = 0`` it is plain ``k²``.
    """
    a, b = list(list_a), list(list_b)
    k = len(a)
    if len(b) != k:
        raise InputError(f"top-k lists differ in length ({k} vs {len(b)})")
    if len(set(a)) != k or len(set(b)) != k:
        raise InputError("top-k lists must not contain duplicates")
    if not 0.0 <= penalty_p <= 1.0:
        raise InputError("penalty must lie in [0, 1]")
    if k == 0:
        return 0.0
    rank_a = {x: i for i, x in enumerate(a)}
    rank_b = {x: i for i, x in enumerate(b)}
    only_a = [x for x in a if x not in rank_b]
    only_b = [x for x in b if x not in rank_a]

    # both items in both lists: discordant pairs
    total = _inversions([rank_b[x] for x in a if x in rank_b])
    # both in one list, exactly one of them in the other: the present item
    # must be ahead, so count absent items ranked above present ones
    for this, other in ((a, rank_b), (b, rank_a)):
        shared_below = 0
        for x in reversed(this):
            if x in other:
                shared_below += 1
            else:
                total += shared_below
    # one item only in a, the other only in b
    total += len(only_a) * len(only_b)
    # both items missing from the other list
    pairs = len(only_a) * (len(only_a) - 1) // 2 + len(only_b) * (len(only_b) - 1) // 2
    return (total + penalty_p * pairs) / (k * k + penalty_p * k * (k - 1))


@dataclass(frozen=True)
class AgreementCurve:
    k: np.ndarray
    distance: np.ndarray


def agreement_curve(s_a: ScoreVector, s_b: ScoreVector, ks: Sequence[int], penalty_p: float = 0.0) -> AgreementCurve:
    n = len(s_a)
    if len(s_b) != n:
        raise InputError("score vectors cover different user sets")
    ks = [int(k) for k in ks]
    for k in ks:
        if not 1 <= k <= n:
            raise InputError(f"k={k} outside [1, {n}]")
    head_a = rank_table(s_a).order.tolist()
    head_b = rank_table(s_b).order.tolist()

    def one(k):
        return kendall_topk(head_a[:k], head_b[:k], penalty_p)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        dist = list(pool.map(one, ks))
    return AgreementCurve(np.array(ks, dtype=np.int64), np.array(dist, dtype=np.float64))


# --------------------------------------------------------------------------
# CSV artefacts

def _csv(rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return repr(float(x))


def format_decile_report(rep: DecileReport) -> str:
    rows = [("group", "decile", "boundary", "mean", "median")]
    rows += [(r.group, r.decile, _num(r.boundary), _num(r.mean), _num(r.median)) for r in rep.rows]
    return _csv(rows)


def format_found_curves(curves: Mapping[str, FoundCurve]) -> str:
    rows = [("group", "cut", "found")]
    for name, c in curves.items():
        rows += [(name, _num(x), _num(y)) for x, y in zip(c.cut, c.found)]
    return _csv(rows)


def format_shares(shares: Mapping[str, float]) -> str:
    return _csv([("group", "share")] + [(name, _num(v)) for name, v in shares.items()])


def format_agreement(curve: AgreementCurve) -> str:
    return _csv([("k", "distance")] + [(int(k), _num(d)) for k, d in zip(curve.k, curve.distance)])


# --------------------------------------------------------------------------
# labels

def read_labels(path) -> dict[int, str]:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["user_id", "label"]:
        raise InputError(f"{path}: expected header 'user_id,label'")
    labels = {}
    for lineno, row in enumerate(rows[1:], 2):
        try:
            labels[int(row[0])] = row[1]
        except (ValueError, IndexError):
            raise InputError(f"{path}:{lineno}: bad label row {row!r}") from None
    return labels


def format_labels(labels: Sequence[str]) -> str:
    return _csv([("user_id", "label")] + list(enumerate(labels)))


def groups_from_labels(labels: Mapping[int, str], skip: Iterable[str] = ("legit",)) -> dict[str, list[int]]:
    """Group user ids by label, omitting the ``skip`` classes; groups in sorted label order."""
    skip = set(skip)
    out: dict[str, list[int]] = {}
    for u, lab in sorted(labels.items()):
        if lab not in skip:
            out.setdefault(lab, []).append(u)
    return dict(sorted(out.items()))

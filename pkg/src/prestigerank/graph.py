"""Directed follower graphs and their structural statistics.

A follow edge ``u -> v`` means *u follows v*: ``v`` is a followee of ``u`` and
``u`` is a follower of ``v``.  Graphs are stored as two CSR adjacency
structures (followees and followers) and never mutated after construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from ._threads import thread_count
from .errors import InputError, UndefinedStatisticError

log = logging.getLogger(__name__)

DEFAULT_DIAMETER_CAP = 20_000
_MIN_BATCH = 64  # BFS sources per scipy call


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SocialGraph:
    """Immutable simple directed graph over dense ids ``0..node_count-1``."""

    __slots__ = ("node_count", "out_ptr", "out_idx", "in_ptr", "in_idx", "_src")

    def __init__(self, node_count: int, out_ptr, out_idx, in_ptr, in_idx):
        self.node_count = int(node_count)
        self.out_ptr = _frozen(np.asarray(out_ptr, dtype=np.int64))
        self.out_idx = _frozen(np.asarray(out_idx, dtype=np.int64))
        self.in_ptr = _frozen(np.asarray(in_ptr, dtype=np.int64))
        self.in_idx = _frozen(np.asarray(in_idx, dtype=np.int64))
        self._src = None

    def __setattr__(self, name, value):
        if name != "_src" and hasattr(self, name):
            raise AttributeError("SocialGraph is immutable")
        object.__setattr__(self, name, value)

    def __repr__(self):
        return f"SocialGraph(node_count={self.node_count}, edge_count={self.edge_count})"

    @property
    def edge_count(self) -> int:
        return int(self.out_idx.size)

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def followees(self, u: int) -> np.ndarray:
        self._check(u)
        return self.out_idx[self.out_ptr[u]:self.out_ptr[u + 1]]

    def followers(self, u: int) -> np.ndarray:
        self._check(u)
        return self.in_idx[self.in_ptr[u]:self.in_ptr[u + 1]]

    def sources(self) -> np.ndarray:
        """Source id of every edge, aligned with ``out_idx``."""
        if self._src is None:
            self._src = _frozen(np.repeat(np.arange(self.node_count), self.out_degree))
        return self._src

    def edges(self) -> np.ndarray:
        """``(edge_count, 2)`` array of ``(follower, followee)`` sorted lexicographically."""
        return np.column_stack([self.sources(), self.out_idx])

    def adjacency(self) -> sp.csr_matrix:
        """Sparse matrix with ``A[u, v] = 1`` for every edge ``u -> v``."""
        n = self.node_count
        data = np.ones(self.edge_count)
        return sp.csr_matrix((data, self.out_idx, self.out_ptr), shape=(n, n))

    def undirected(self) -> sp.csr_matrix:
        a = self.adjacency()
        u = ((a + a.T) > 0).astype(np.float64).tocsr()
        u.sort_indices()
        return u

    def _check(self, u):
        if not 0 <= u < self.node_count:
            raise InputError(f"user id {u} outside [0, {self.node_count})")


def build_graph(edges: Iterable[Sequence[int]], node_count: int) -> SocialGraph:
    """Build a graph from ``(follower, followee)`` pairs.

    Duplicate edges are collapsed; self-loops and out-of-range ids raise
    :class:`InputError`.
    """
    n = int(node_count)
    if n < 0:
        raise InputError("node_count must be non-negative")
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("edges must be pairs")
    src, dst = arr[:, 0], arr[:, 1]
    bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InputError(f"edge {tuple(arr[i])} has an endpoint outside [0, {n})")
    loops = src == dst
    if loops.any():
        i = int(np.flatnonzero(loops)[0])
        raise InputError(f"self-loop on user {src[i]} is not allowed")

    codes = np.unique(src * n + dst)
    src, dst = codes // n if n else codes, codes % n if n else codes
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
    order = np.lexsort((src, dst))
    in_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
    return SocialGraph(n, out_ptr, dst, in_ptr, src[order])


# --------------------------------------------------------------------------
# reciprocity

@dataclass(frozen=True)
class ReciprocityProfile:
    followers: int
    followees: int
    reciprocal: int

    def __post_init__(self):
        if min(self.followers, self.followees, self.reciprocal) < 0:
            raise InputError("profile counts must be non-negative")
        if self.reciprocal > min(self.followers, self.followees):
            raise InputError("reciprocal count exceeds followers or followees")


@dataclass(frozen=True)
class ProfileTable:
    """Column-oriented reciprocity profiles for every node of a graph."""

    followers: np.ndarray
    followees: np.ndarray
    reciprocal: np.ndarray

    def __len__(self):
        return int(self.followers.size)

    def __getitem__(self, u) -> ReciprocityProfile:
        return ReciprocityProfile(int(self.followers[u]), int(self.followees[u]), int(self.reciprocal[u]))

    @classmethod
    def from_profiles(cls, profiles: Sequence[ReciprocityProfile]) -> "ProfileTable":
        return cls(
            np.array([p.followers for p in profiles], dtype=np.int64),
            np.array([p.followees for p in profiles], dtype=np.int64),
            np.array([p.reciprocal for p in profiles], dtype=np.int64),
        )


def reciprocity_profile(g: SocialGraph, u: int) -> ReciprocityProfile:
    outs, ins = g.followees(u), g.followers(u)
    # both sides are sorted: locate each followee among the followers
    pos = np.searchsorted(ins, outs)
    hit = pos < ins.size
    hit[hit] = ins[pos[hit]] == outs[hit]
    return ReciprocityProfile(int(ins.size), int(outs.size), int(hit.sum()))


def mutual_edge_mask(g: SocialGraph) -> np.ndarray:
    """Boolean mask over edges (in ``out_idx`` order) whose reverse edge exists."""
    n = g.node_count
    src, dst = g.sources(), g.out_idx
    codes = src * n + dst  # ascending by construction
    rev = dst * n + src
    pos = np.searchsorted(codes, rev)
    ok = pos < codes.size
    ok[ok] = codes[pos[ok]] == rev[ok]
    return ok


def profiles(g: SocialGraph) -> ProfileTable:
    mask = mutual_edge_mask(g)
    recip = np.bincount(g.sources()[mask], minlength=g.node_count).astype(np.int64)
    return ProfileTable(g.in_degree.astype(np.int64), g.out_degree.astype(np.int64), recip)


def graph_reciprocity(g: SocialGraph) -> float:
    """Fraction of directed edges whose reverse edge is also present."""
    if g.edge_count == 0:
        raise UndefinedStatisticError("reciprocity of a graph without edges")
    return float(mutual_edge_mask(g).sum()) / g.edge_count


# --------------------------------------------------------------------------
# degree statistics

def degree_correlation(g: SocialGraph) -> float:
    """Pearson correlation between per-node in-degree and out-degree."""
    x = g.in_degree.astype(np.float64)
    y = g.out_degree.astype(np.float64)
    if x.size < 2:
        raise UndefinedStatisticError("degree correlation needs at least two nodes")
    x = x - x.mean()
    y = y - y.mean()
    sxx, syy = float(x @ x), float(y @ y)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedStatisticError("degree correlation with zero degree variance")
    return float(x @ y) / np.sqrt(sxx * syy)


def loglog_slope(values, frequencies) -> float:
    """OLS slope of ``log(frequency)`` against ``log(value)``."""
    v = np.asarray(values, dtype=np.float64)
    f = np.asarray(frequencies, dtype=np.float64)
    keep = (v >= 1) & (f > 0)
    v, f = v[keep], f[keep]
    if np.unique(v).size < 3:
        raise UndefinedStatisticError("power-law fit needs at least 3 distinct nonzero degrees")
    slope, _ = np.polyfit(np.log(v), np.log(f), 1)
    return float(slope)


def degree_slope(g: SocialGraph, side: str = "in") -> float:
    if side == "in":
        deg = g.in_degree
    elif side == "out":
        deg = g.out_degree
    else:
        raise InputError(f"side must be 'in' or 'out', got {side!r}")
    values, counts = np.unique(deg[deg >= 1], return_counts=True)
    return loglog_slope(values, counts)


def clustering_coefficient(g: SocialGraph, chunk: int = 4096) -> float:
    """Mean local clustering coefficient of the undirected projection.

    Nodes with fewer than two undirected neighbours contribute zero.
    """
    n = g.node_count
    if n == 0:
        raise UndefinedStatisticError("clustering coefficient of an empty graph")
    u = g.undirected()
    deg = np.diff(u.indptr).astype(np.float64)
    tri = np.zeros(n)
    for lo in range(0, n, chunk):
        rows = u[lo:lo + chunk]
        # closed wedges through each row node, counted twice
        tri[lo:lo + chunk] = np.asarray((rows @ u).multiply(rows).sum(axis=1)).ravel() / 2.0
    local = np.zeros(n)
    ok = deg >= 2
    local[ok] = 2.0 * tri[ok] / (deg[ok] * (deg[ok] - 1.0))
    return float(local.sum() / n)


# --------------------------------------------------------------------------
# connectivity

def _weak_labels(g: SocialGraph) -> np.ndarray:
    parent = list(range(g.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(g.sources().tolist(), g.out_idx.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return np.array([find(x) for x in range(g.node_count)], dtype=np.int64)


def _strong_labels(g: SocialGraph) -> np.ndarray:
    """Iterative Tarjan; returns a component id per node."""
    n = g.node_count
    ptr, idx = g.out_ptr.tolist(), g.out_idx.tolist()
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, ptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < ptr[v + 1]:
                work[-1] = (v, i + 1)
                w = idx[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, ptr[w]))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return np.array(comp, dtype=np.int64)


def _largest(labels: np.ndarray) -> int:
    if labels.size == 0:
        return 0
    return int(np.bincount(labels).max())


def components(g: SocialGraph) -> tuple[int, int]:
    """Sizes of the largest weakly and strongly connected components."""
    return _largest(_weak_labels(g)), _largest(_strong_labels(g))


def _bfs_distances(u: sp.csr_matrix, sources) -> np.ndarray:
    return shortest_path(u, method="D", directed=False, unweighted=True, indices=sources)


def diameter(g: SocialGraph, node_cap: int = DEFAULT_DIAMETER_CAP) -> Optional[int]:
    """Exact diameter of the undirected projection of the largest WCC.

    Returns ``None`` when the graph has more than ``node_cap`` nodes.  Uses
    eccentricity bounding so most nodes never need their own BFS; the answer
    equals the all-sources BFS maximum.
    """
    if g.node_count > node_cap:
        return None
    if g.node_count == 0:
        return 0
    labels = _weak_labels(g)
    big = np.bincount(labels).argmax()
    keep = np.flatnonzero(labels == big)
    u = g.undirected()[keep][:, keep].tocsr()
    return _bounded_diameter(u)


def _bounded_diameter(u: sp.csr_matrix) -> int:
    n = u.shape[0]
    if n <= 1:
        return 0
    deg = np.diff(u.indptr)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.full(n, n, dtype=np.int64)  # eccentricity never exceeds n - 1
    alive = np.ones(n, dtype=bool)
    d_lo, d_hi = 0, n
    pick_high = True
    batch_size = max(thread_count(), _MIN_BATCH)
    while d_lo < d_hi and alive.any():
        cand = np.flatnonzero(alive)
        bound = -hi[cand] if pick_high else lo[cand]
        order = np.lexsort((cand, -deg[cand], bound))
        batch = cand[order[:batch_size]]
        pick_high = not pick_high
        dist = np.atleast_2d(_bfs_distances(u, batch)).astype(np.int64)
        for row, v in zip(dist, batch):
            ecc = int(row.max())
            lo = np.maximum(lo, np.maximum(ecc - row, row))
            hi = np.minimum(hi, ecc + row)
            lo[v] = hi[v] = ecc
        d_lo = int(lo.max())
        alive &= ~((lo == hi) | (hi <= d_lo))
        if alive.any():
            d_hi = max(d_lo, int(hi[alive].max()))
        else:
            d_hi = d_lo
    return d_lo


# --------------------------------------------------------------------------
# summary

@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    average_degree: Optional[float]
    reciprocity: Optional[float]
    clustering_coefficient: Optional[float]
    degree_correlation: Optional[float]
    indegree_slope: Optional[float]
    outdegree_slope: Optional[float]
    largest_wcc: int
    largest_scc: int
    diameter: Optional[int]

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _maybe(fn, *args):
    try:
        return fn(*args)
    except UndefinedStatisticError as exc:
        log.info("statistic undefined: %s", exc)
        return None


def graph_stats(g: SocialGraph, node_cap: int = DEFAULT_DIAMETER_CAP) -> GraphStats:
    wcc, scc = components(g)
    return GraphStats(
        node_count=g.node_count,
        edge_count=g.edge_count,
        average_degree=g.edge_count / g.node_count if g.node_count else None,
        reciprocity=_maybe(graph_reciprocity, g),
        clustering_coefficient=_maybe(clustering_coefficient, g),
        degree_correlation=_maybe(degree_correlation, g),
        indegree_slope=_maybe(degree_slope, g, "in"),
        outdegree_slope=_maybe(degree_slope, g, "out"),
        largest_wcc=wcc,
        largest_scc=scc,
        diameter=diameter(g, node_cap),
    )


def format_graph_stats(st: GraphStats) -> str:
    """Header plus one row; undefined statistics are left empty."""
    def cell(v):
        if v is None:
            return ""
        return repr(float(v)) if isinstance(v, float) else str(v)
    names = GraphStats.field_names()
    return ",".join(names) + "\n" + ",".join(cell(getattr(st, f)) for f in names) + "\n"


# --------------------------------------------------------------------------
# edge-list files

def parse_edge_list(lines: Iterable[str], source: str = "<edges>") -> SocialGraph:
    """Parse ``follower<TAB>followee`` lines; ``#nodes=N`` fixes the node count."""
    declared = None
    pairs = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("nodes="):
                try:
                    declared = int(body[len("nodes="):])
                except ValueError:
                    raise InputError(f"{source}:{lineno}: bad node count header {line!r}") from None
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            parts = line.split()
        try:
            a, b = (int(p) for p in parts)
        except ValueError:
            raise InputError(f"{source}:{lineno}: cannot parse edge {line!r}") from None
        pairs.append((a, b))
    if declared is None:
        declared = max((max(p) for p in pairs), default=-1) + 1
    return build_graph(np.array(pairs, dtype=np.int64).reshape(-1, 2), declared)


def read_edge_list(path) -> SocialGraph:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_edge_list(fh, str(path))


def format_edge_list(g: SocialGraph) -> str:
    rows = [f"#nodes={g.node_count}"]
    rows.extend(f"{a}\t{b}" for a, b in g.edges().tolist())
    return "\n".join(rows) + "\n"


def write_edge_list(g: SocialGraph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")

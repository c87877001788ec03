"""Citation graph data model, ingestion, edge splits and negative sampling."""
from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.75, 0.05, 0.20)


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or label files."""


class CitationGraph:
    """Undirected simple graph of papers with optional category labels.

    Nodes are opaque string tokens mapped to dense indices ``0..n-1`` in
    first-seen order. Edges are stored once as ``(i, j)`` with ``i < j``,
    sorted lexicographically. Instances are treated as immutable.
    """

    def __init__(
        self,
        nodes: Sequence[str],
        edges: np.ndarray | Iterable[tuple[int, int]] = (),
        labels: np.ndarray | None = None,
        category_names: Sequence[str] | None = None,
    ):
        self.nodes: tuple[str, ...] = tuple(str(t) for t in nodes)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate node tokens")
        n = len(self.nodes)

        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            e = np.sort(e, axis=1)
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.unique(e, axis=0)
        self.edges: np.ndarray = e
        self.edges.setflags(write=False)

        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValueError("labels must cover every node")
            if category_names is None:
                category_names = [str(c) for c in range(int(labels.max()) + 1 if n else 0)]
            if n and (labels.min() < 0 or labels.max() >= len(category_names)):
                raise ValueError("label outside category table")
            labels.setflags(write=False)
        self.labels: np.ndarray | None = labels
        self.category_names: tuple[str, ...] | None = (
            tuple(category_names) if category_names is not None else None
        )

        order = np.argsort(np.concatenate([e[:, 0], e[:, 1]]), kind="stable")
        targets = np.concatenate([e[:, 1], e[:, 0]])[order]
        counts = np.bincount(np.concatenate([e[:, 0], e[:, 1]]), minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        # neighbours sorted within each row so membership tests can bisect
        for i in range(n):
            targets[indptr[i]:indptr[i + 1]].sort()
        self.indptr: np.ndarray = indptr
        self.indices: np.ndarray = targets.astype(np.int64)
        self._edge_keys: np.ndarray = e[:, 0] * n + e[:, 1] if len(e) else np.zeros(0, np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def node_index(self, node: str | int) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n_nodes:
                raise KeyError(f"unknown node index {node}")
            return int(node)
        try:
            return self.index[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    def edge_keys(self, pairs: np.ndarray) -> np.ndarray:
        """Encode unordered index pairs as ``min * n + max``."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        return pairs[:, 0] * self.n_nodes + pairs[:, 1]

    def has_edges(self, pairs: np.ndarray) -> np.ndarray:
        keys = self.edge_keys(pairs)
        pos = np.searchsorted(self._edge_keys, keys)
        pos = np.minimum(pos, max(len(self._edge_keys) - 1, 0))
        if not len(self._edge_keys):
            return np.zeros(len(keys), dtype=bool)
        return self._edge_keys[pos] == keys

    def has_edge(self, u: str | int, v: str | int) -> bool:
        return bool(self.has_edges(np.array([[self.node_index(u), self.node_index(v)]]))[0])

    def with_edges(self, edges: np.ndarray) -> "CitationGraph":
        """Same node set and labels, different edge set."""
        return CitationGraph(self.nodes, edges, self.labels, self.category_names)

    def with_labels(self, labels: np.ndarray, category_names: Sequence[str]) -> "CitationGraph":
        return CitationGraph(self.nodes, self.edges, labels, category_names)

    def __repr__(self) -> str:
        topics = len(self.category_names) if self.category_names is not None else None
        return f"CitationGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges}, topics={topics})"


@dataclass(frozen=True)
class GraphSummary:
    paper_count: int
    citations_per_paper: float
    topic_count: int

    def __str__(self) -> str:
        return (
            f"{self.paper_count} papers, {self.citations_per_paper:.2f} cites/paper, "
            f"{self.topic_count} topics"
        )


@dataclass(frozen=True)
class EdgeSplit:
    """Train/validation/test positives plus matched negatives, as ``(k, 2)`` index arrays."""

    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    train_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    val_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    test_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    seed: int = 0
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    @property
    def has_negatives(self) -> bool:
        return len(self.train_neg) == len(self.train_pos) and len(self.test_neg) == len(self.test_pos)


# --------------------------------------------------------------------- ingestion


def load_edge_list(source: TextIO) -> CitationGraph:
    """Read a whitespace-separated edge list; ``#`` starts a comment.

    Duplicate and reversed lines collapse to one undirected edge and
    self-loops are dropped (their count is logged and stored on the graph as
    ``dropped_self_loops``).
    """
    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    self_loops = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 2 node tokens, got {len(parts)}")
        a, b = parts
        if a == b:
            index.setdefault(a, len(index))
            self_loops += 1
            continue
        i = index.setdefault(a, len(index))
        j = index.setdefault(b, len(index))
        pairs.append((i, j))
    g = CitationGraph(list(index), np.array(pairs, dtype=np.int64).reshape(-1, 2))
    if self_loops:
        logger.info("dropped %d self-loop(s)", self_loops)
    g.dropped_self_loops = self_loops
    return g


def load_node_labels(source: TextIO, g: CitationGraph, add_missing_nodes: bool = False) -> CitationGraph:
    """Attach one category per node from ``node<ws>category`` lines.

    Category ids are assigned in first-seen order. With
    ``add_missing_nodes`` tokens absent from ``g`` become isolated nodes
    (benchmark graphs list isolated papers only in their label files);
    otherwise they are an error.
    """
    nodes = list(g.nodes)
    index = dict(g.index)
    assigned: dict[int, int] = {}
    categories: dict[str, int] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'node category', got {line!r}")
        token, cat = parts
        if token not in index:
            if not add_missing_nodes:
                raise GraphFormatError(f"line {lineno}: unknown node {token!r}")
            index[token] = len(nodes)
            nodes.append(token)
        i = index[token]
        if i in assigned:
            raise GraphFormatError(f"line {lineno}: node {token!r} labeled twice")
        assigned[i] = categories.setdefault(cat, len(categories))
    missing = [nodes[i] for i in range(len(nodes)) if i not in assigned]
    if missing:
        shown = ", ".join(missing[:5])
        raise GraphFormatError(f"{len(missing)} node(s) left unlabeled: {shown}")
    labels = np.array([assigned[i] for i in range(len(nodes))], dtype=np.int64)
    out = CitationGraph(nodes, g.edges, labels, list(categories))
    out.dropped_self_loops = getattr(g, "dropped_self_loops", 0)
    return out


def write_edge_list(g: CitationGraph, sink: TextIO) -> None:
    for i, j in g.edges:
        sink.write(f"{g.nodes[i]} {g.nodes[j]}\n")


def write_node_labels(g: CitationGraph, sink: TextIO) -> None:
    if g.labels is None:
        raise ValueError("graph is unlabeled")
    for token, lab in zip(g.nodes, g.labels):
        sink.write(f"{token}\t{g.category_names[lab]}\n")


def write_graph_cache(g: CitationGraph, sink: TextIO) -> None:
    """Compact JSON form of the graph, stable byte-for-byte for equal graphs."""
    data = {
        "nodes": list(g.nodes),
        "edges": g.edges.tolist(),
        "labels": None if g.labels is None else g.labels.tolist(),
        "categories": None if g.category_names is None else list(g.category_names),
    }
    json.dump(data, sink, separators=(",", ":"))
    sink.write("\n")


def read_graph_cache(source: TextIO) -> CitationGraph:
    try:
        data = json.load(source)
        return CitationGraph(data["nodes"], np.asarray(data["edges"], dtype=np.int64).reshape(-1, 2),
                             data["labels"], data["categories"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise GraphFormatError(f"not a graph cache: {exc}") from None


# ------------------------------------------------------------------ splitting


def split_edges(g: CitationGraph, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0) -> EdgeSplit:
    """Uniformly partition the edges into train/val/test positives.

    Validation and test sizes are ``floor(ratio * |E|)``; the remainder goes
    to train. Negatives are left empty (see :func:`add_negative_edges`).
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three nonnegative fractions summing to 1, got {ratios}")
    m = g.n_edges
    if m == 0:
        raise ValueError("cannot split an empty edge set")
    # the epsilon guards against 0.29 * 100 == 28.999999999999996
    n_val = int(np.floor(ratios[1] * m + 1e-9))
    n_test = int(np.floor(ratios[2] * m + 1e-9))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    edges = g.edges
    val = edges[perm[:n_val]]
    test = edges[perm[n_val:n_val + n_test]]
    train = edges[perm[n_val + n_test:]]
    return EdgeSplit(train_pos=train, val_pos=val, test_pos=test, seed=seed, ratios=ratios)


def sample_negative_edges(
    g: CitationGraph, count: int, seed: int = 0, exclude: np.ndarray | None = None
) -> np.ndarray:
    """Draw ``count`` distinct non-adjacent pairs uniformly, avoiding ``exclude``.

    Returns a ``(count, 2)`` array with ``i < j`` in each row.
    """
    n = g.n_nodes
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)

    banned = g._edge_keys
    if exclude is not None and len(exclude):
        ex = g.edge_keys(exclude)
        ex = ex[~np.isin(ex, banned)]
        banned = np.union1d(banned, ex)
    total_pairs = n * (n - 1) // 2
    admissible = total_pairs - len(np.unique(banned))
    if count > admissible:
        raise ValueError(
            f"requested {count} negative edges but only {admissible} admissible pairs exist "
            f"(short by {count - admissible})"
        )

    rng = np.random.default_rng(seed)
    if admissible <= 4 * count or total_pairs <= 2_000_000:
        # enumerate every admissible pair and pick without replacement
        iu, ju = np.triu_indices(n, k=1)
        keys = iu.astype(np.int64) * n + ju
        keys = keys[~np.isin(keys, banned)]
        chosen = np.sort(rng.choice(len(keys), size=count, replace=False))
        picked = keys[chosen]
        picked = picked[rng.permutation(count)]
    else:
        banned_set = set(banned.tolist())
        seen: set[int] = set()
        out: list[int] = []
        while len(out) < count:
            need = count - len(out)
            a = rng.integers(0, n, size=2 * need + 16)
            b = rng.integers(0, n, size=2 * need + 16)
            for x, y in zip(a.tolist(), b.tolist()):
                if x == y:
                    continue
                key = min(x, y) * n + max(x, y)
                if key in banned_set or key in seen:
                    continue
                seen.add(key)
                out.append(key)
                if len(out) == count:
                    break
        picked = np.array(out, dtype=np.int64)
    return np.stack([picked // n, picked % n], axis=1)


def add_negative_edges(g: CitationGraph, split: EdgeSplit) -> EdgeSplit:
    """Fill the split's negative sets, each as large as its positive set.

    Each set excludes every positive edge and every negative drawn for an
    earlier set, so validation/test negatives never leak into training.
    """
    ss = np.random.SeedSequence([split.seed, 0x6E6567])
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(3)]
    drawn = np.zeros((0, 2), dtype=np.int64)
    sets = []
    for pos, s in zip((split.train_pos, split.val_pos, split.test_pos), seeds):
        neg = sample_negative_edges(g, len(pos), seed=s, exclude=drawn)
        drawn = np.concatenate([drawn, neg])
        sets.append(neg)
    return replace(split, train_neg=sets[0], val_neg=sets[1], test_neg=sets[2])


def make_split(g: CitationGraph, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0) -> EdgeSplit:
    """Positive split plus matched negatives in one call."""
    return add_negative_edges(g, split_edges(g, ratios, seed))


def induced_training_subgraph(g: CitationGraph, split: EdgeSplit) -> CitationGraph:
    """All nodes of ``g`` with only the training positives as edges."""
    return g.with_edges(split.train_pos)


# -------------------------------------------------------------------- queries


def bfs_distances(g: CitationGraph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every node; -1 where unreachable."""
    dist = np.full(g.n_nodes, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    indptr, indices = g.indptr, g.indices
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in indices[indptr[x]:indptr[x + 1]]:
            if dist[y] < 0:
                dist[y] = dx
                queue.append(y)
    return dist


def shortest_path_length(g: CitationGraph, u: str | int, v: str | int) -> int | None:
    """Breadth-first hop count between two nodes, ``None`` if unreachable."""
    i, j = g.node_index(u), g.node_index(v)
    if i == j:
        return 0
    # bidirectional frontier expansion; stops as soon as the balls meet
    dist_a = {i: 0}
    dist_b = {j: 0}
    frontier_a, frontier_b = [i], [j]
    while frontier_a and frontier_b:
        if len(frontier_a) > len(frontier_b):
            frontier_a, frontier_b = frontier_b, frontier_a
            dist_a, dist_b = dist_b, dist_a
        nxt = []
        best = None
        for x in frontier_a:
            dx = dist_a[x] + 1
            for y in g.neighbors(x).tolist():
                if y in dist_b:
                    cand = dx + dist_b[y]
                    best = cand if best is None else min(best, cand)
                if y not in dist_a:
                    dist_a[y] = dx
                    nxt.append(y)
        if best is not None:
            return best
        frontier_a = nxt
    return None


def graph_stats(g: CitationGraph) -> GraphSummary:
    n = g.n_nodes
    mean_degree = 2.0 * g.n_edges / n if n else 0.0
    topics = len(np.unique(g.labels)) if g.labels is not None else 0
    return GraphSummary(paper_count=n, citations_per_paper=mean_degree, topic_count=topics)

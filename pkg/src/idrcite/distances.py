"""Per-citation distance measures: topic, network and embedding distances."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, TextIO

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .embeddings import EmbeddingMatrix
from .embeddings.roles import adjacency_matrix
from .graph import CitationGraph, shortest_path_length


class DistanceKind(str, Enum):
    TOPIC = "topic"
    NETWORK = "network"
    DEEPWALK = "deepwalk"
    NODE2VEC = "node2vec"
    ROLE2VEC = "role2vec"

    @property
    def display_name(self) -> str:
        return {
            "topic": "Topic",
            "network": "Network Distance",
            "deepwalk": "DeepWalk Embedding",
            "node2vec": "Node2vec Embedding",
            "role2vec": "Role2vec Embedding",
        }[self.value]

    @property
    def embedding_method(self) -> str | None:
        return self.value if self in EMBEDDING_KINDS else None


EMBEDDING_KINDS = (DistanceKind.DEEPWALK, DistanceKind.NODE2VEC, DistanceKind.ROLE2VEC)
ALL_KINDS = tuple(DistanceKind)


# ---------------------------------------------------------- category matrix


@dataclass(frozen=True)
class CategoryCitationMatrix:
    weights: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"category matrix must be square, got shape {w.shape}")
        if w.shape[0] != len(self.names):
            raise ValueError("one name per category row required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("category matrix entries must be finite and nonnegative")

    def index_of(self, category: str | int) -> int:
        if isinstance(category, (int, np.integer)):
            if not 0 <= category < len(self.names):
                raise KeyError(f"unknown category index {category}")
            return int(category)
        try:
            return self.names.index(category)
        except ValueError:
            raise KeyError(f"unknown category {category!r}") from None

    def distance_matrix(self) -> np.ndarray:
        """``1 - cosine`` between every pair of rows; NaN where a row is all zero."""
        w = self.weights.astype(np.float64)
        norms = np.linalg.norm(w, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = (w @ w.T) / np.outer(norms, norms)
        d = np.clip(1.0 - cos, 0.0, 1.0)
        np.fill_diagonal(d, np.where(norms > 0, 0.0, np.nan))
        return d


def build_category_matrix(g: CitationGraph) -> CategoryCitationMatrix:
    """Count citations between every pair of categories (same-category edges on the diagonal)."""
    if g.labels is None:
        raise ValueError("graph has no category labels")
    c = len(g.category_names)
    a = g.labels[g.edges[:, 0]]
    b = g.labels[g.edges[:, 1]]
    w = np.zeros((c, c))
    np.add.at(w, (a, b), 1.0)
    off = a != b
    np.add.at(w, (b[off], a[off]), 1.0)
    return CategoryCitationMatrix(w, g.category_names)


def load_category_matrix(source: TextIO) -> CategoryCitationMatrix:
    """Read a tab-separated header of category names followed by one numeric row per category."""
    lines = [ln.rstrip("\n") for ln in source if ln.strip()]
    if not lines:
        raise ValueError("empty category matrix file")
    names = lines[0].split("\t")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            rows.append([float(x) for x in line.split("\t")])
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric entry") from None
    if len(rows) != len(names) or any(len(r) != len(names) for r in rows):
        raise ValueError(f"expected {len(names)}x{len(names)} matrix, got {len(rows)} row(s)")
    return CategoryCitationMatrix(np.array(rows, dtype=np.float64).reshape(len(names), len(names)), tuple(names))


def write_category_matrix(w: CategoryCitationMatrix, sink: TextIO) -> None:
    sink.write("\t".join(w.names) + "\n")
    for row in w.weights:
        sink.write("\t".join(repr(float(x)) for x in row) + "\n")


def topic_distance(w: CategoryCitationMatrix, i: str | int, j: str | int) -> float:
    """``1 - cos(W[i], W[j])``; raises if either row is all zero."""
    a, b = w.index_of(i), w.index_of(j)
    ra, rb = w.weights[a], w.weights[b]
    na, nb = np.linalg.norm(ra), np.linalg.norm(rb)
    if na == 0 or nb == 0:
        raise ValueError(f"category {w.names[a] if na == 0 else w.names[b]!r} has no citations; "
                         "cosine similarity undefined")
    if a == b:
        return 0.0
    return float(np.clip(1.0 - ra @ rb / (na * nb), 0.0, 1.0))


# ------------------------------------------------------- embedding / network


def embedding_distances(m: EmbeddingMatrix, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    a = m.node_vectors(edges[:, 0])
    b = m.node_vectors(edges[:, 1])
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ValueError("zero embedding vector; cosine distance undefined")
    cos = np.einsum("ij,ij->i", a, b) / (na * nb)
    d = np.clip(1.0 - cos, 0.0, 2.0)
    # nodes sharing a row (same node, or same role) are exactly 0 apart
    d[m.node_rows[edges[:, 0]] == m.node_rows[edges[:, 1]]] = 0.0
    return d


def embedding_distance(m: EmbeddingMatrix, u: int, v: int) -> float:
    """Cosine distance ``1 - cos(emb(u), emb(v))`` in [0, 2]."""
    return float(embedding_distances(m, np.array([[u, v]]))[0])


def network_distance(train_g: CitationGraph, u, v) -> int | None:
    """Shortest-path hops on the training subgraph, ``None`` if disconnected."""
    return shortest_path_length(train_g, u, v)


def network_distances(train_g: CitationGraph, edges: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Hop counts for many pairs at once; NaN marks unreachable pairs."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    out = np.full(len(edges), np.nan)
    if not len(edges):
        return out
    adj = adjacency_matrix(train_g).astype(np.float64)
    sources = np.unique(edges[:, 0])
    for start in range(0, len(sources), chunk):
        block = sources[start:start + chunk]
        dist = shortest_path(adj, method="D", directed=False, unweighted=True, indices=block)
        row_of = {s: r for r, s in enumerate(block.tolist())}
        sel = np.isin(edges[:, 0], block)
        rows = np.array([row_of[s] for s in edges[sel, 0].tolist()], dtype=np.int64)
        vals = dist[rows, edges[sel, 1]]
        out[sel] = np.where(np.isfinite(vals), vals, np.nan)
    return out


# -------------------------------------------------------------- tables


@dataclass
class DistanceContext:
    """Inputs the different distance kinds need; supply only what is used."""

    graph: CitationGraph | None = None
    category_matrix: CategoryCitationMatrix | None = None
    train_graph: CitationGraph | None = None
    embeddings: Mapping[str, EmbeddingMatrix] = field(default_factory=dict)


@dataclass
class CitationDistanceTable:
    kind: DistanceKind
    edges: np.ndarray  # (k, 2) node indices
    labels: np.ndarray  # 1 positive, 0 negative
    scores: np.ndarray  # classifier score, NaN if not scored
    distances: np.ndarray  # NaN marks an unreachable pair

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def reachable(self) -> np.ndarray:
        return np.isfinite(self.distances)

    @property
    def n_unreachable(self) -> int:
        return int((~self.reachable).sum())

    def write_csv(self, sink: TextIO, node_tokens=None) -> None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(["edge_u", "edge_v", "label", "score", "kind", "distance"])
        for (u, v), lab, s, d in zip(self.edges.tolist(), self.labels.tolist(),
                                     self.scores.tolist(), self.distances.tolist()):
            if node_tokens is not None:
                u, v = node_tokens[u], node_tokens[v]
            w.writerow([u, v, int(lab), "" if np.isnan(s) else repr(s), self.kind.value,
                        "" if np.isnan(d) else repr(d)])


def read_distance_csv(source: TextIO, node_index: Mapping[str, int] | None = None) -> CitationDistanceTable:
    rows = list(csv.DictReader(source))
    if not rows:
        raise ValueError("empty distance table")
    kinds = {r["kind"] for r in rows}
    if len(kinds) != 1:
        raise ValueError(f"mixed distance kinds in one table: {sorted(kinds)}")

    def node(t):
        return node_index[t] if node_index is not None else int(t)

    return CitationDistanceTable(
        kind=DistanceKind(kinds.pop()),
        edges=np.array([[node(r["edge_u"]), node(r["edge_v"])] for r in rows], dtype=np.int64),
        labels=np.array([int(r["label"]) for r in rows]),
        scores=np.array([float(r["score"]) if r["score"] else np.nan for r in rows]),
        distances=np.array([float(r["distance"]) if r["distance"] else np.nan for r in rows]),
    )


def distance_table(edges: np.ndarray, labels, scores, kind: DistanceKind | str,
                   context: DistanceContext) -> CitationDistanceTable:
    """One row per edge with its distance under ``kind``; unreachable rows stay, flagged by NaN."""
    kind = DistanceKind(kind)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.full(len(edges), np.nan) if scores is None else np.asarray(scores, dtype=np.float64)
    if not len(labels) == len(scores) == len(edges):
        raise ValueError("edges, labels and scores must align")

    if kind is DistanceKind.TOPIC:
        g, w = context.graph, context.category_matrix
        if g is None or g.labels is None or w is None:
            raise ValueError("topic distance needs a labeled graph and a category matrix")
        cat_rows = np.array([w.index_of(name) for name in g.category_names], dtype=np.int64)
        dm = w.distance_matrix()
        a = cat_rows[g.labels[edges[:, 0]]]
        b = cat_rows[g.labels[edges[:, 1]]]
        dist = dm[a, b]
        if np.any(np.isnan(dist)):
            raise ValueError("an edge endpoint's category has an all-zero row in the category matrix")
    elif kind is DistanceKind.NETWORK:
        if context.train_graph is None:
            raise ValueError("network distance needs the training subgraph")
        dist = network_distances(context.train_graph, edges)
    else:
        emb = context.embeddings.get(kind.embedding_method)
        if emb is None:
            raise ValueError(f"{kind.display_name} distance needs {kind.embedding_method} embeddings")
        dist = embedding_distances(emb, edges)
    return CitationDistanceTable(kind=kind, edges=edges, labels=labels, scores=scores, distances=dist)

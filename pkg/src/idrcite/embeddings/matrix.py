from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense embedding rows plus a node -> row resolver.

    Node-indexed embeddings have one row per node (``node_rows`` is the
    identity); role-level role2vec has one row per role and ``node_rows``
    maps each node to its role's row.
    """

    vectors: np.ndarray
    node_rows: np.ndarray
    tokens: tuple[str, ...]
    method: str = ""

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_rows(self) -> int:
        return self.vectors.shape[0]

    def row(self, node: int) -> int:
        if not 0 <= node < len(self.node_rows):
            raise KeyError(f"node {node} not resolvable in embedding")
        return int(self.node_rows[node])

    def vector(self, node: int) -> np.ndarray:
        return self.vectors[self.row(node)]

    def node_vectors(self, nodes: np.ndarray | None = None) -> np.ndarray:
        """Per-node embedding rows, for all nodes or the given node indices."""
        if nodes is None:
            return self.vectors[self.node_rows]
        nodes = np.asarray(nodes, dtype=np.int64)
        if len(nodes) and (nodes.min() < 0 or nodes.max() >= len(self.node_rows)):
            raise KeyError("node index not resolvable in embedding")
        return self.vectors[self.node_rows[nodes]]


def write_word2vec(m: EmbeddingMatrix, sink: TextIO) -> None:
    """word2vec text format: ``<rows> <d>`` header then ``<token> <floats>`` lines."""
    sink.write(f"{m.n_rows} {m.dim}\n")
    for token, row in zip(m.tokens, m.vectors):
        sink.write(token + " " + " ".join(repr(float(x)) for x in row) + "\n")


def read_word2vec(source: TextIO) -> tuple[tuple[str, ...], np.ndarray]:
    header = source.readline().split()
    if len(header) != 2:
        raise ValueError("word2vec header must be '<rows> <d>'")
    rows, d = int(header[0]), int(header[1])
    tokens, vecs = [], []
    for lineno, line in enumerate(source, start=2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != d + 1:
            raise ValueError(f"line {lineno}: expected {d + 1} fields, got {len(parts)}")
        tokens.append(parts[0])
        vecs.append([float(x) for x in parts[1:]])
    if len(tokens) != rows:
        raise ValueError(f"header announces {rows} rows, found {len(tokens)}")
    return tuple(tokens), np.array(vecs, dtype=np.float64).reshape(rows, d)


def write_role_map(node_tokens, m: EmbeddingMatrix, sink: TextIO) -> None:
    for token, row in zip(node_tokens, m.node_rows):
        sink.write(f"{token}\t{m.tokens[row]}\n")


def load_embedding(vectors: TextIO, node_tokens, role_map: TextIO | None = None, method: str = "") -> EmbeddingMatrix:
    """Rebuild an :class:`EmbeddingMatrix` for a graph's node order from saved files."""
    tokens, vecs = read_word2vec(vectors)
    row_of = {t: i for i, t in enumerate(tokens)}
    if role_map is not None:
        node_to_token = dict(line.rstrip("\n").split("\t") for line in role_map if line.strip())
    else:
        node_to_token = {t: t for t in node_tokens}
    try:
        node_rows = np.array([row_of[node_to_token[t]] for t in node_tokens], dtype=np.int64)
    except KeyError as exc:
        raise KeyError(f"node {exc.args[0]!r} missing from embedding files") from None
    return EmbeddingMatrix(vectors=vecs, node_rows=node_rows, tokens=tokens, method=method)

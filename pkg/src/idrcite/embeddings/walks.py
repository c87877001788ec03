"""Uniform (DeepWalk) and second-order biased (node2vec) random walks."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..graph import CitationGraph
from ._rng import next_below, next_float, stream_state


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")


@dataclass(frozen=True)
class WalkCorpus:
    """Walks as a ``(n_walks, walk_length)`` token array padded with -1.

    ``lengths[k]`` is the number of real tokens in walk ``k`` (shorter than
    ``walk_length`` only when a walk starts at an isolated node).
    """

    tokens: np.ndarray
    lengths: np.ndarray
    vocabulary_size: int

    @property
    def n_walks(self) -> int:
        return len(self.lengths)

    @property
    def walks(self) -> list[np.ndarray]:
        return [self.tokens[k, : self.lengths[k]] for k in range(self.n_walks)]

    def counts(self) -> np.ndarray:
        valid = self.tokens[self.tokens >= 0]
        return np.bincount(valid, minlength=self.vocabulary_size)

    def map_tokens(self, mapping: np.ndarray, vocabulary_size: int) -> "WalkCorpus":
        mapped = np.where(self.tokens >= 0, mapping[np.maximum(self.tokens, 0)], -1)
        return WalkCorpus(mapped.astype(np.int64), self.lengths, vocabulary_size)


@numba.njit(cache=True)
def _is_neighbor(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        v = indices[mid]
        if v == b:
            return True
        if v < b:
            lo = mid + 1
        else:
            hi = mid
    return False


@numba.njit(cache=True)
def _walk_kernel(indptr, indices, starts, walk_ids, length, inv_p, inv_q, uniform, seed, out, lengths):
    weights = np.empty(max(1, np.max(indptr[1:] - indptr[:-1])), dtype=np.float64)
    state = np.empty(1, dtype=np.uint64)
    for k in range(len(starts)):
        start = starts[k]
        state[0] = stream_state(seed, start, walk_ids[k])
        out[k, 0] = start
        pos = 1
        prev = -1
        cur = start
        while pos < length:
            lo = indptr[cur]
            deg = indptr[cur + 1] - lo
            if deg == 0:
                break
            if uniform or prev < 0:
                nxt = indices[lo + next_below(state, deg)]
            else:
                total = 0.0
                for t in range(deg):
                    x = indices[lo + t]
                    if x == prev:
                        w = inv_p
                    elif _is_neighbor(indptr, indices, prev, x):
                        w = 1.0
                    else:
                        w = inv_q
                    total += w
                    weights[t] = total
                r = next_float(state) * total
                t = 0
                while t < deg - 1 and weights[t] <= r:
                    t += 1
                nxt = indices[lo + t]
            out[k, pos] = nxt
            pos += 1
            prev = cur
            cur = nxt
        lengths[k] = pos


def _run_walks(g: CitationGraph, cfg: WalkConfig, p: float, q: float) -> WalkCorpus:
    n = g.n_nodes
    if n == 0:
        raise ValueError("cannot walk on an empty graph")
    rounds = cfg.walks_per_node
    starts = np.tile(np.arange(n, dtype=np.int64), rounds)
    walk_ids = np.repeat(np.arange(rounds, dtype=np.int64), n)
    order = np.random.default_rng(cfg.seed).permutation(len(starts))
    starts, walk_ids = starts[order], walk_ids[order]
    out = np.full((len(starts), cfg.walk_length), -1, dtype=np.int64)
    lengths = np.zeros(len(starts), dtype=np.int64)
    uniform = p == 1.0 and q == 1.0
    _walk_kernel(g.indptr, g.indices, starts, walk_ids, cfg.walk_length,
                 1.0 / p, 1.0 / q, uniform, np.uint64(cfg.seed & 0xFFFFFFFFFFFFFFFF), out, lengths)
    return WalkCorpus(out, lengths, n)


def generate_walks_uniform(g: CitationGraph, cfg: WalkConfig = WalkConfig()) -> WalkCorpus:
    """DeepWalk walks: each step uniform over the current node's neighbours."""
    return _run_walks(g, cfg, 1.0, 1.0)


def generate_walks_biased(g: CitationGraph, cfg: WalkConfig = WalkConfig()) -> WalkCorpus:
    """node2vec second-order walks with return parameter ``p`` and in-out parameter ``q``.

    From ``cur`` reached via ``prev``, neighbour ``x`` gets unnormalised weight
    ``1/p`` if ``x == prev``, ``1`` if ``x`` is adjacent to ``prev`` and ``1/q``
    otherwise. The first step of a walk is uniform.
    """
    return _run_walks(g, cfg, cfg.p, cfg.q)


def transition_probabilities(g: CitationGraph, prev: int | None, cur: int, p: float = 1.0, q: float = 1.0):
    """Exact next-step distribution of the biased walk, as ``(neighbours, probs)``."""
    nbrs = g.neighbors(cur)
    if len(nbrs) == 0:
        return nbrs, np.zeros(0)
    if prev is None:
        return nbrs, np.full(len(nbrs), 1.0 / len(nbrs))
    prev_nbrs = set(g.neighbors(prev).tolist())
    w = np.array([1.0 / p if x == prev else 1.0 if x in prev_nbrs else 1.0 / q for x in nbrs.tolist()])
    return nbrs, w / w.sum()

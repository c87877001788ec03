"""SkipGram with negative sampling over walk corpora."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numba
import numpy as np

from ._rng import next_below, next_float, stream_state
from .matrix import EmbeddingMatrix
from .walks import WalkCorpus

logger = logging.getLogger(__name__)

MIN_LR_FRACTION = 1e-4


@dataclass(frozen=True)
class SkipGramConfig:
    window: int = 10
    negatives_per_positive: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.initial_learning_rate > 0:
            raise ValueError("initial_learning_rate must be positive")


@dataclass
class TrainingLog:
    epoch_loss: list[float] = field(default_factory=list)
    pairs_per_epoch: int = 0


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def sgns_pair_loss(u: np.ndarray, v_pos: np.ndarray, v_neg: np.ndarray) -> float:
    """``-log s(u.v) - sum_k log s(-u.v_k)`` for one (center, context) pair."""
    return float(-_log_sigmoid(u @ v_pos) - _log_sigmoid(-(v_neg @ u)).sum())


def sgns_pair_gradients(u: np.ndarray, v_pos: np.ndarray, v_neg: np.ndarray):
    """Analytic gradients of :func:`sgns_pair_loss` w.r.t. ``u``, ``v_pos`` and each row of ``v_neg``."""
    sp = 1.0 / (1.0 + np.exp(-(u @ v_pos)))
    sn = 1.0 / (1.0 + np.exp(-(v_neg @ u)))
    du = (sp - 1.0) * v_pos + sn @ v_neg
    dv_pos = (sp - 1.0) * u
    dv_neg = sn[:, None] * u[None, :]
    return du, dv_pos, dv_neg


def negative_distribution(counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    """Normalised unigram**power token distribution."""
    w = np.asarray(counts, dtype=np.float64) ** power
    if w.sum() <= 0:
        raise ValueError("corpus has no tokens")
    return w / w.sum()


def alias_table(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Walker alias table for O(1) exact sampling from ``probs``."""
    n = len(probs)
    scaled = np.asarray(probs, dtype=np.float64) * n
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


@numba.njit(cache=True, inline="always")
def _draw(prob, alias, state):
    k = next_below(state, len(prob))
    if next_float(state) < prob[k]:
        return k
    return alias[k]


@numba.njit(cache=True, fastmath=True)
def _train_epoch(syn0, syn1, tokens, contexts, lengths, window, negatives, prob, alias, lr0, done, total, seed, epoch, neu1e):
    """One pass over the corpus; returns (summed loss, pairs, tokens processed)."""
    d = syn0.shape[1]
    state = np.empty(1, dtype=np.uint64)
    state[0] = stream_state(seed, 0x5347, epoch)
    loss = 0.0
    pairs = 0
    for k in range(tokens.shape[0]):
        n = lengths[k]
        for i in range(n):
            lr = lr0 * max(1.0 - done / total, MIN_LR_FRACTION)
            done += 1
            c = tokens[k, i]
            # word2vec's dynamic window: effective radius uniform in 1..window
            b = 1 + next_below(state, window)
            lo = max(0, i - b)
            hi = min(n, i + b + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                o = contexts[k, j]
                for t in range(d):
                    neu1e[t] = 0.0
                for s in range(negatives + 1):
                    if s == 0:
                        target = o
                        label = 1.0
                    else:
                        target = _draw(prob, alias, state)
                        if target == o:
                            continue
                        label = 0.0
                    f = 0.0
                    for t in range(d):
                        f += syn0[c, t] * syn1[target, t]
                    # one exp + one log1p gives both sigma(f) and the log-loss term
                    e = np.exp(-abs(f))
                    l1p = np.log1p(e)
                    if f >= 0:
                        sig = 1.0 / (1.0 + e)
                        loss += l1p if label > 0 else f + l1p
                    else:
                        sig = e / (1.0 + e)
                        loss += l1p - f if label > 0 else l1p
                    g = (label - sig) * lr
                    for t in range(d):
                        neu1e[t] += g * syn1[target, t]
                    for t in range(d):
                        syn1[target, t] += g * syn0[c, t]
                for t in range(d):
                    syn0[c, t] += neu1e[t]
                pairs += 1
    return loss, pairs, done


def init_vectors(vocabulary_size: int, d: int, seed: int,
                 context_vocabulary_size: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """word2vec initialisation: input table uniform in +-0.5/d, output table zero."""
    rng = np.random.default_rng(seed)
    syn0 = (rng.random((vocabulary_size, d)) - 0.5) / d
    syn1 = np.zeros((context_vocabulary_size or vocabulary_size, d))
    return syn0, syn1


def train_skipgram(
    corpus: WalkCorpus,
    d: int = 128,
    cfg: SkipGramConfig = SkipGramConfig(),
    log: TrainingLog | None = None,
    contexts: WalkCorpus | None = None,
) -> EmbeddingMatrix:
    """Train SGNS vectors for every token of ``corpus``; the input table is returned.

    ``contexts`` optionally supplies a position-aligned corpus whose tokens
    are predicted instead of ``corpus``'s own (node centres predicting the
    roles around them); negatives are then drawn from its vocabulary.

    Learning rate decays linearly with processed tokens down to
    ``1e-4 * initial_learning_rate``. Serial and deterministic for a fixed seed.
    """
    if d <= 0:
        raise ValueError("embedding dimension must be positive")
    n_tokens = int(corpus.lengths.sum())
    if corpus.n_walks == 0 or n_tokens == 0:
        raise ValueError("empty walk corpus")
    if contexts is None:
        contexts = corpus
    elif contexts.tokens.shape != corpus.tokens.shape or not np.array_equal(contexts.lengths, corpus.lengths):
        raise ValueError("context corpus must align position by position with the centre corpus")
    V = corpus.vocabulary_size
    syn0, syn1 = init_vectors(V, d, cfg.seed, contexts.vocabulary_size)
    prob, alias = alias_table(negative_distribution(contexts.counts()))
    total = float(max(cfg.epochs, 1) * n_tokens)
    done = 0.0
    neu1e = np.zeros(d)
    log = log if log is not None else TrainingLog()
    seed = np.uint64(cfg.seed & 0xFFFFFFFFFFFFFFFF)
    tokens = np.ascontiguousarray(corpus.tokens, dtype=np.int64)
    ctx = tokens if contexts is corpus else np.ascontiguousarray(contexts.tokens, dtype=np.int64)
    lengths = np.ascontiguousarray(corpus.lengths, dtype=np.int64)
    for epoch in range(cfg.epochs):
        loss, pairs, done = _train_epoch(syn0, syn1, tokens, ctx, lengths, cfg.window,
                                         cfg.negatives_per_positive, prob, alias, cfg.initial_learning_rate,
                                         done, total, seed, epoch, neu1e)
        log.epoch_loss.append(loss / max(pairs, 1))
        log.pairs_per_epoch = pairs
        logger.debug("epoch %d: mean pair loss %.4f", epoch, log.epoch_loss[-1])
    if not np.all(np.isfinite(syn0)):
        raise FloatingPointError("non-finite embedding entries; lower the learning rate")
    return EmbeddingMatrix(vectors=syn0, node_rows=np.arange(V, dtype=np.int64),
                           tokens=tuple(str(i) for i in range(V)))


def sgd_pair_step(syn0, syn1, center: int, context: int, negatives: np.ndarray, lr: float) -> None:
    """Apply one SGNS update in place with explicit negatives (reference path for tests)."""
    u = syn0[center].copy()
    neu1e = np.zeros_like(u)
    for target, label in [(context, 1.0)] + [(int(t), 0.0) for t in negatives]:
        f = u @ syn1[target]
        g = (label - 1.0 / (1.0 + np.exp(-f))) * lr
        neu1e += g * syn1[target]
        syn1[target] += g * u
    syn0[center] += neu1e


__all__ = [
    "SkipGramConfig",
    "TrainingLog",
    "init_vectors",
    "alias_table",
    "negative_distribution",
    "sgd_pair_step",
    "sgns_pair_gradients",
    "sgns_pair_loss",
    "train_skipgram",
]

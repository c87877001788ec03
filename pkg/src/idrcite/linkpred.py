"""Edge featurisation, MLP citation classifier, AUC / IDR AUC evaluation."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from .embeddings import DEFAULT_DIM, EmbeddingMatrix, SkipGramConfig, WalkConfig, embed_nodes
from .graph import DEFAULT_RATIOS, CitationGraph, EdgeSplit, induced_training_subgraph, make_split

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------ features


def featurize_edges(edges: np.ndarray, m: EmbeddingMatrix, reverse: bool = False) -> np.ndarray:
    """Concatenate endpoint embeddings, lower node index first.

    ``reverse=True`` puts the higher index first (used for symmetrised
    training and scoring).
    """
    edges = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
    if reverse:
        edges = edges[:, ::-1]
    return np.hstack([m.node_vectors(edges[:, 0]), m.node_vectors(edges[:, 1])])


def featurize_edge(edge: tuple[int, int], m: EmbeddingMatrix) -> np.ndarray:
    return featurize_edges(np.array([edge]), m)[0]


# ----------------------------------------------------------------------- AUC


def compute_auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative (ties count 1/2)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


# ----------------------------------------------------------------------- MLP


@dataclass(frozen=True)
class MLPConfig:
    hidden: int = 128
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 256
    epochs: int = 200
    patience: int = 10
    symmetrize: bool = False
    seed: int = 0


@dataclass
class MLPModel:
    """One hidden ReLU layer, sigmoid output: ``2d -> hidden -> 1``."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    symmetrize: bool = False
    val_auc_history: list[float] = field(default_factory=list)
    best_val_auc: float = float("nan")
    best_epoch: int = 0

    @classmethod
    def initialize(cls, n_in: int, hidden: int, seed: int = 0) -> "MLPModel":
        rng = np.random.default_rng(seed)
        # He init for the ReLU layer, Glorot for the output unit
        w1 = rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, hidden))
        w2 = rng.normal(0.0, np.sqrt(2.0 / (hidden + 1)), size=(hidden, 1))
        return cls(w1=w1, b1=np.zeros(hidden), w2=w2, b2=np.zeros(1))

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[0]

    def copy(self) -> "MLPModel":
        return MLPModel(*(p.copy() for p in self.params), symmetrize=self.symmetrize,
                        val_auc_history=list(self.val_auc_history),
                        best_val_auc=self.best_val_auc, best_epoch=self.best_epoch)


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def forward_logits(model: MLPModel, x: np.ndarray) -> np.ndarray:
    h = np.maximum(x @ model.w1 + model.b1, 0.0)
    return (h @ model.w2 + model.b2).ravel()


def mlp_loss(params: list[np.ndarray], x: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy of the MLP with the given parameters."""
    w1, b1, w2, b2 = params
    z = (np.maximum(x @ w1 + b1, 0.0) @ w2 + b2).ravel()
    # BCE from logits: log(1 + e^z) - y z
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def mlp_gradients(params: list[np.ndarray], x: np.ndarray, y: np.ndarray) -> list[np.ndarray]:
    """Backprop gradients of :func:`mlp_loss`, in ``params`` order."""
    w1, b1, w2, b2 = params
    pre = x @ w1 + b1
    h = np.maximum(pre, 0.0)
    z = (h @ w2 + b2).ravel()
    dz = (_sigmoid(z) - y) / len(y)
    dw2 = h.T @ dz[:, None]
    db2 = np.array([dz.sum()])
    dh = dz[:, None] * w2.T
    dpre = dh * (pre > 0)
    dw1 = x.T @ dpre
    db1 = dpre.sum(axis=0)
    return [dw1, db1, dw2, db2]


def predict(model: MLPModel, feats: np.ndarray) -> np.ndarray:
    """Edge probabilities in (0, 1).

    For a symmetrised model ``feats`` must hold canonical-order rows; the
    score is averaged with the swapped-halves row.
    """
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != model.n_inputs:
        raise ValueError(f"expected features of width {model.n_inputs}, got shape {feats.shape}")
    p = _sigmoid(forward_logits(model, feats))
    if model.symmetrize:
        half = feats.shape[1] // 2
        swapped = np.hstack([feats[:, half:], feats[:, :half]])
        p = 0.5 * (p + _sigmoid(forward_logits(model, swapped)))
    return p


def train_classifier(
    x_train: np.ndarray, y_train: np.ndarray, x_val: np.ndarray, y_val: np.ndarray, cfg: MLPConfig = MLPConfig()
) -> MLPModel:
    """Minibatch SGD with momentum on binary cross-entropy.

    The snapshot with the best validation AUC is returned; training stops
    after ``patience`` epochs without improvement.
    """
    y_train = np.asarray(y_train, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    for name, y in (("training", y_train), ("validation", y_val)):
        if len(np.unique(y)) < 2:
            raise ValueError(f"{name} set must contain both positive and negative edges")
    if cfg.symmetrize:
        half = x_train.shape[1] // 2
        x_train = np.vstack([x_train, np.hstack([x_train[:, half:], x_train[:, :half]])])
        y_train = np.concatenate([y_train, y_train])

    model = MLPModel.initialize(x_train.shape[1], cfg.hidden, cfg.seed)
    model.symmetrize = cfg.symmetrize
    rng = np.random.default_rng(cfg.seed + 1)
    velocity = [np.zeros_like(p) for p in model.params]

    best = model.copy()
    best.best_val_auc = compute_auc(predict(model, x_val), y_val)
    best.best_epoch = 0
    history = [best.best_val_auc]
    stale = 0
    n = len(y_train)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads = mlp_gradients(model.params, x_train[idx], y_train[idx])
            for p, v, gr in zip(model.params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.learning_rate * gr
                p += v
        auc = compute_auc(predict(model, x_val), y_val)
        history.append(auc)
        if auc > best.best_val_auc:
            best = model.copy()
            best.best_val_auc, best.best_epoch = auc, epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    best.val_auc_history = history
    return best


# ---------------------------------------------------------------- evaluation


@dataclass
class EvalReport:
    auc: float
    idr_auc: float | None
    n_test_pos: int
    n_test_neg: int
    n_idr_pos: int
    n_idr_neg: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def interdisciplinary_mask(g: CitationGraph, edges: np.ndarray) -> np.ndarray:
    """True where the two endpoints carry different category labels."""
    if g.labels is None:
        raise ValueError("graph has no category labels")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return g.labels[edges[:, 0]] != g.labels[edges[:, 1]]


def score_edges(model: MLPModel, emb: EmbeddingMatrix, edges: np.ndarray) -> np.ndarray:
    return predict(model, featurize_edges(edges, emb))


def report_from_scores(g: CitationGraph, pos: np.ndarray, neg: np.ndarray,
                       pos_scores: np.ndarray, neg_scores: np.ndarray, seed: int | None = None) -> EvalReport:
    scores = np.concatenate([pos_scores, neg_scores])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    auc = compute_auc(scores, labels)
    idr = interdisciplinary_mask(g, np.concatenate([pos, neg]))
    n_ip, n_in = int(idr[: len(pos)].sum()), int(idr[len(pos):].sum())
    idr_auc = compute_auc(scores[idr], labels[idr]) if n_ip and n_in else None
    return EvalReport(auc=auc, idr_auc=idr_auc, n_test_pos=len(pos), n_test_neg=len(neg),
                      n_idr_pos=n_ip, n_idr_neg=n_in, seed=seed)


def evaluate(model: MLPModel, emb: EmbeddingMatrix, split: EdgeSplit, g: CitationGraph) -> EvalReport:
    """Overall AUC on the test edges plus AUC over the cross-label subset."""
    if not len(split.test_pos) or not len(split.test_neg):
        raise ValueError("test sets must be nonempty")
    return report_from_scores(g, split.test_pos, split.test_neg,
                              score_edges(model, emb, split.test_pos),
                              score_edges(model, emb, split.test_neg), seed=split.seed)


# ---------------------------------------------------------------- experiment


@dataclass(frozen=True)
class PipelineConfig:
    walk: WalkConfig = WalkConfig()
    skipgram: SkipGramConfig = SkipGramConfig()
    mlp: MLPConfig = MLPConfig()
    dim: int = DEFAULT_DIM
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    role_level: bool = False
    wl_iterations: int = 1


@dataclass
class SeedRun:
    """Everything one seed of the pipeline produced, kept for downstream distance analyses."""

    seed: int
    split: EdgeSplit
    train_graph: CitationGraph
    embeddings: dict[str, EmbeddingMatrix]
    models: dict[str, MLPModel]
    test_scores: dict[str, tuple[np.ndarray, np.ndarray]]
    reports: dict[str, EvalReport]
    timings: dict[str, float] = field(default_factory=dict)


def _seeded(cfg: PipelineConfig, seed: int) -> PipelineConfig:
    from dataclasses import replace
    return replace(cfg, walk=replace(cfg.walk, seed=seed), skipgram=replace(cfg.skipgram, seed=seed),
                   mlp=replace(cfg.mlp, seed=seed))


def run_seed(g: CitationGraph, methods, seed: int, cfg: PipelineConfig = PipelineConfig(),
             embed_only=()) -> SeedRun:
    """Split, embed on the training subgraph, train and evaluate each method for one seed.

    Methods in ``embed_only`` are embedded (for distance metrics) but not
    classified.
    """
    cfg = _seeded(cfg, seed)
    t0 = time.perf_counter()
    split = make_split(g, cfg.ratios, seed)
    train_g = induced_training_subgraph(g, split)
    run = SeedRun(seed=seed, split=split, train_graph=train_g, embeddings={}, models={},
                  test_scores={}, reports={}, timings={"split": time.perf_counter() - t0})
    for method in list(dict.fromkeys(list(methods) + list(embed_only))):
        t0 = time.perf_counter()
        emb = embed_nodes(train_g, method, cfg.walk, cfg.skipgram, cfg.dim,
                          role_level=cfg.role_level, wl_iterations=cfg.wl_iterations)
        run.embeddings[method] = emb
        run.timings[f"embed:{method}"] = time.perf_counter() - t0
        if method not in methods:
            continue
        t0 = time.perf_counter()
        x_tr = featurize_edges(np.concatenate([split.train_pos, split.train_neg]), emb)
        y_tr = np.concatenate([np.ones(len(split.train_pos)), np.zeros(len(split.train_neg))])
        x_va = featurize_edges(np.concatenate([split.val_pos, split.val_neg]), emb)
        y_va = np.concatenate([np.ones(len(split.val_pos)), np.zeros(len(split.val_neg))])
        model = train_classifier(x_tr, y_tr, x_va, y_va, cfg.mlp)
        pos_s = score_edges(model, emb, split.test_pos)
        neg_s = score_edges(model, emb, split.test_neg)
        run.models[method] = model
        run.test_scores[method] = (pos_s, neg_s)
        run.reports[method] = (report_from_scores(g, split.test_pos, split.test_neg, pos_s, neg_s, seed)
                               if g.is_labeled else
                               EvalReport(compute_auc(np.concatenate([pos_s, neg_s]),
                                                      np.r_[np.ones(len(pos_s)), np.zeros(len(neg_s))]),
                                          None, len(pos_s), len(neg_s), 0, 0, seed))
        run.timings[f"classify:{method}"] = time.perf_counter() - t0
        logger.info("seed %d %s: AUC %.3f (IDR %s)", seed, method, run.reports[method].auc,
                    run.reports[method].idr_auc)
    return run


@dataclass
class ExperimentResult:
    method: str
    mean_auc: float
    mean_idr_auc: float | None
    per_seed: list[EvalReport]

    def to_dict(self) -> dict:
        return {"method": self.method, "auc": self.mean_auc, "idr_auc": self.mean_idr_auc,
                "seeds": [r.seed for r in self.per_seed], "per_seed": [r.to_dict() for r in self.per_seed]}


def summarize(method: str, reports: list[EvalReport]) -> ExperimentResult:
    idr = [r.idr_auc for r in reports if r.idr_auc is not None]
    return ExperimentResult(method=method, mean_auc=float(np.mean([r.auc for r in reports])),
                            mean_idr_auc=float(np.mean(idr)) if idr else None, per_seed=list(reports))


def run_experiment(g: CitationGraph, method: str, seeds=(0, 1, 2, 3, 4),
                   cfg: PipelineConfig = PipelineConfig()) -> ExperimentResult:
    """Full pipeline per seed; AUCs are arithmetic means over seeds."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    return summarize(method, [run_seed(g, [method], s, cfg).reports[method] for s in seeds])

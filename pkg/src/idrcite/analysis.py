"""Edge betweenness, rank statistics and AUC-versus-distance analyses."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numba
import numpy as np
from scipy import stats

from .distances import CitationDistanceTable
from .graph import CitationGraph
from .linkpred import compute_auc

MIN_EDGES_PER_BIN = 25
DEFAULT_BINS = 20


# ---------------------------------------------------------------- betweenness


def _csr_edge_ids(g: CitationGraph) -> np.ndarray:
    """Edge id (row of ``g.edges``) for every adjacency entry of the CSR arrays."""
    src = np.repeat(np.arange(g.n_nodes, dtype=np.int64), g.degree())
    keys = np.minimum(src, g.indices) * g.n_nodes + np.maximum(src, g.indices)
    edge_keys = g.edges[:, 0] * g.n_nodes + g.edges[:, 1]
    return np.searchsorted(edge_keys, keys)


@numba.njit(cache=True)
def _brandes_edges(indptr, indices, edge_ids, n_edges):
    n = len(indptr) - 1
    eb = np.zeros(n_edges)
    sigma = np.zeros(n)
    delta = np.zeros(n)
    dist = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            sigma[i] = 0.0
            delta[i] = 0.0
            dist[i] = -1
        sigma[s] = 1.0
        dist[s] = 0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for pos in range(tail - 1, 0, -1):
            w = order[pos]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dist[w] - 1:
                    c = sigma[v] * coeff
                    eb[edge_ids[k]] += c
                    delta[v] += c
    return eb


def edge_betweenness(g: CitationGraph) -> np.ndarray:
    """Raw shortest-path edge betweenness, aligned with ``g.edges``.

    Each unordered node pair contributes once, split evenly over its
    shortest paths. Not normalised.
    """
    if g.n_edges == 0:
        return np.zeros(0)
    eb = _brandes_edges(g.indptr, g.indices, _csr_edge_ids(g), g.n_edges)
    return eb / 2.0


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class CorrelationReport:
    spearman_rho: float
    n: int


@dataclass(frozen=True)
class KSReport:
    d_statistic: float
    p_value: float
    n_a: int
    n_b: int


@dataclass(frozen=True)
class RegressionReport:
    slope: float
    intercept: float
    p_value: float
    significant_5pct: bool
    standardized: float
    n: int

    def formatted(self, standardized: bool = False) -> str:
        return format_coefficient(self.standardized if standardized else self.slope, self.significant_5pct)

    def to_dict(self) -> dict:
        return asdict(self)


def format_coefficient(value: float, significant: bool) -> str:
    """Three decimals, starred when significant at 5%: ``-0.875*``."""
    return f"{value:.3f}" + ("*" if significant else "")


def spearman(x, y) -> CorrelationReport:
    """Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two 1-D samples of equal length")
    if len(x) < 3:
        raise ValueError("spearman needs at least 3 observations")
    rx = stats.rankdata(x) - (len(x) + 1) / 2.0
    ry = stats.rankdata(y) - (len(y) + 1) / 2.0
    sx, sy = np.sqrt(rx @ rx), np.sqrt(ry @ ry)
    if sx == 0 or sy == 0:
        raise ValueError("spearman is undefined for a constant sample")
    rho = float(np.clip(rx @ ry / (sx * sy), -1.0, 1.0))
    return CorrelationReport(spearman_rho=rho, n=len(x))


def ks_two_sample(a, b) -> KSReport:
    """Two-sample Kolmogorov-Smirnov: exact sup ECDF gap, asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if not len(a) or not len(b):
        raise ValueError("both samples must be nonempty")
    grid = np.union1d(a, b)
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    d = float(np.max(np.abs(fa - fb)))
    en = len(a) * len(b) / (len(a) + len(b))
    p = float(stats.kstwobign.sf(d * np.sqrt(en)))
    p = min(max(p, float(np.finfo(float).tiny)), 1.0)
    return KSReport(d_statistic=d, p_value=p, n_a=len(a), n_b=len(b))


@dataclass(frozen=True)
class BetweennessIDRReport:
    ks: KSReport
    inter_mean: float
    intra_mean: float
    n_inter: int
    n_intra: int

    @property
    def inter_greater(self) -> bool:
        return self.inter_mean > self.intra_mean


def betweenness_idr_test(g: CitationGraph, bt: np.ndarray) -> BetweennessIDRReport:
    """Compare betweenness of cross-label edges against same-label edges."""
    if g.labels is None:
        raise ValueError("graph has no category labels")
    bt = np.asarray(bt, dtype=np.float64)
    if len(bt) != g.n_edges:
        raise ValueError("betweenness must be aligned with the graph's edges")
    inter = g.labels[g.edges[:, 0]] != g.labels[g.edges[:, 1]]
    if inter.all() or not inter.any():
        raise ValueError("need both inter-label and intra-label edges; one class is empty")
    return BetweennessIDRReport(ks=ks_two_sample(bt[inter], bt[~inter]),
                                inter_mean=float(bt[inter].mean()), intra_mean=float(bt[~inter].mean()),
                                n_inter=int(inter.sum()), n_intra=int((~inter).sum()))


# ------------------------------------------------------------ binned curves


@dataclass(frozen=True)
class DistanceHistogram:
    bin_edges: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    n_unreachable: int


def _finite_range(d: np.ndarray) -> tuple[float, float]:
    if not len(d):
        raise ValueError("no finite distances (every row unreachable)")
    return float(d.min()), float(d.max())


def distance_histograms(t: CitationDistanceTable, n_bins: int = DEFAULT_BINS) -> DistanceHistogram:
    """Aligned positive / negative counts over equal-width bins of the finite distances."""
    if not len(t):
        raise ValueError("empty distance table")
    ok = t.reachable
    d = t.distances[ok]
    lo, hi = _finite_range(d)
    edges = np.histogram_bin_edges(d, bins=n_bins, range=(lo, hi))
    lab = t.labels[ok]
    pos, _ = np.histogram(d[lab == 1], bins=edges)
    neg, _ = np.histogram(d[lab == 0], bins=edges)
    return DistanceHistogram(bin_edges=edges, positive=pos, negative=neg, n_unreachable=t.n_unreachable)


@dataclass(frozen=True)
class BinnedAUC:
    low: np.ndarray
    high: np.ndarray
    n_pos: np.ndarray
    n_neg: np.ndarray
    auc: np.ndarray  # NaN where a bin has fewer than min_count positives or negatives
    width: float
    min_count: int
    n_unreachable: int

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.low + self.high)

    @property
    def qualifying(self) -> np.ndarray:
        return np.isfinite(self.auc)

    @property
    def is_empty(self) -> bool:
        return not self.qualifying.any()

    def rows(self) -> list[dict]:
        return [
            {"low": float(lo), "high": float(hi), "midpoint": float(0.5 * (lo + hi)),
             "n_pos": int(p), "n_neg": int(n), "auc": None if np.isnan(a) else float(a)}
            for lo, hi, p, n, a in zip(self.low, self.high, self.n_pos, self.n_neg, self.auc)
        ]


def bin_index(d: np.ndarray, lo: float, width: float, n_bins: int) -> np.ndarray:
    """Equal-width bin of each value; the top edge falls in the last bin."""
    if width <= 0:
        return np.zeros(len(d), dtype=np.int64)
    return np.clip(np.floor((d - lo) / width).astype(np.int64), 0, n_bins - 1)


def binned_auc(t: CitationDistanceTable, n_bins: int | None = DEFAULT_BINS, width: float | None = None,
               min_count: int = MIN_EDGES_PER_BIN) -> BinnedAUC:
    """Rank AUC within equal-width distance bins.

    Give either ``n_bins`` or ``width``. Bins with fewer than ``min_count``
    positives or negatives keep their counts but get no AUC. Unreachable
    rows are excluded and counted.
    """
    if np.any(np.isnan(t.scores)):
        raise ValueError("binned AUC needs a classifier score on every row")
    ok = t.reachable
    d, lab, s = t.distances[ok], t.labels[ok], t.scores[ok]
    lo, hi = _finite_range(d)
    span = hi - lo
    if width is not None:
        if width <= 0:
            raise ValueError("bin width must be positive")
        n = max(1, int(np.ceil(span / width - 1e-12))) if span > 0 else 1
    else:
        if not n_bins or n_bins < 1:
            raise ValueError("need a positive bin count or a bin width")
        n = n_bins if span > 0 else 1
        width = span / n if span > 0 else 1.0
    idx = bin_index(d, lo, width if span > 0 else 0.0, n)
    low = lo + width * np.arange(n)
    n_pos = np.bincount(idx[lab == 1], minlength=n)
    n_neg = np.bincount(idx[lab == 0], minlength=n)
    auc = np.full(n, np.nan)
    for k in np.flatnonzero((n_pos >= min_count) & (n_neg >= min_count)):
        sel = idx == k
        auc[k] = compute_auc(s[sel], lab[sel])
    return BinnedAUC(low=low, high=low + width, n_pos=n_pos, n_neg=n_neg, auc=auc, width=float(width),
                     min_count=min_count, n_unreachable=t.n_unreachable)


# ---------------------------------------------------------------- regression


def linear_regression(x, y) -> RegressionReport:
    """OLS of ``y`` on ``x`` with a two-sided t-test on the slope."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise ValueError(f"regression needs at least 3 points, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    if sxx == 0:
        raise ValueError("regressor is constant")
    slope = float(xc @ yc / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    sse = float(resid @ resid)
    syy = float(yc @ yc)
    if sse <= 1e-24 * max(syy, 1.0):
        p = 0.0 if abs(slope) > 0 and syy > 0 else 1.0
    else:
        se = np.sqrt(sse / (n - 2) / sxx)
        p = float(2.0 * stats.t.sf(abs(slope) / se, n - 2))
    standardized = slope * np.sqrt(sxx / syy) if syy > 0 else 0.0
    return RegressionReport(slope=slope, intercept=intercept, p_value=p, significant_5pct=p < 0.05,
                            standardized=float(standardized), n=n)


def regress_auc_on_distance(curve: BinnedAUC) -> RegressionReport:
    """Regress qualifying bins' AUC on their bin midpoints."""
    q = curve.qualifying
    if q.sum() < 3:
        raise ValueError(f"need at least 3 qualifying bins, got {int(q.sum())}")
    return linear_regression(curve.midpoints[q], curve.auc[q])


def edge_auc_contributions(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-edge share of the AUC: for a positive, the fraction of negatives it outscores
    (ties 1/2); for a negative, the fraction of positives that outscore it."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    pos, neg = np.sort(scores[labels]), np.sort(scores[~labels])
    out = np.empty(len(scores))
    below = np.searchsorted(neg, scores[labels], "left")
    tied = np.searchsorted(neg, scores[labels], "right") - below
    out[labels] = (below + 0.5 * tied) / len(neg)
    above = len(pos) - np.searchsorted(pos, scores[~labels], "right")
    tied = np.searchsorted(pos, scores[~labels], "right") - np.searchsorted(pos, scores[~labels], "left")
    out[~labels] = (above + 0.5 * tied) / len(pos)
    return out


def regress_auc_on_distance_edges(t: CitationDistanceTable) -> RegressionReport:
    """Raw-edge variant: regress each reachable edge's AUC contribution on its distance."""
    ok = t.reachable
    return linear_regression(t.distances[ok], edge_auc_contributions(t.scores[ok], t.labels[ok]))

"""Run an :class:`ExperimentConfig` end to end and write its report files.

Output directory layout::

    manifest.json         config echo, stage wall-times, file hashes, status
    config.yaml           the resolved configuration
    results.json          per-method mean and per-seed AUC / IDR AUC
    table1.csv            one row per method, "AUC (IDR AUC)"
    distances/<method>__<kind>.csv  per test edge: label, method's score, distance
    curves/<method>__<kind>.csv   distance-binned AUC
    regression.csv        slope and p-value per (method, kind), starred text
    betweenness.json      Spearman / KS betweenness analyses

Everything except ``manifest.json`` is byte-for-byte reproducible for fixed
inputs and seeds.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    betweenness_idr_test,
    binned_auc,
    edge_betweenness,
    regress_auc_on_distance,
    regress_auc_on_distance_edges,
    spearman,
)
from .config import ExperimentConfig, write_config
from .distances import (
    EMBEDDING_KINDS,
    CitationDistanceTable,
    DistanceContext,
    DistanceKind,
    build_category_matrix,
    distance_table,
    load_category_matrix,
)
from .graph import CitationGraph, load_edge_list, load_node_labels, read_graph_cache
from .linkpred import SeedRun, run_seed, summarize

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunManifest:
    config: dict
    tool_version: str = __version__
    python: str = platform.python_version()
    status: str = "running"
    failed_stage: str | None = None
    error: str | None = None
    stage_seconds: dict[str, float] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)  # relative path -> sha256

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def load_graph(cfg: ExperimentConfig) -> CitationGraph:
    if cfg.graph:
        with open(cfg.graph) as fh:
            return read_graph_cache(fh)
    with open(cfg.edges) as fh:
        g = load_edge_list(fh)
    if cfg.labels:
        with open(cfg.labels) as fh:
            g = load_node_labels(fh, g, add_missing_nodes=True)
    return g


def _fmt(x: float | None) -> str:
    return "NA" if x is None else f"{x:.3f}"


def table1_rows(results) -> list[list[str]]:
    return [[r.method, f"{_fmt(r.mean_auc)} ({_fmt(r.mean_idr_auc)})"] for r in results]


class _Writer:
    """Collects output files in memory-light form and hashes them on write."""

    def __init__(self, root: Path):
        self.root = root
        self.hashes: dict[str, str] = {}

    def text(self, rel: str, content: str) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        self.hashes[rel] = hashlib.sha256(content.encode()).hexdigest()

    def json(self, rel: str, obj) -> None:
        self.text(rel, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def csv(self, rel: str, header: list[str], rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self.text(rel, buf.getvalue())


def _scored_table(run: SeedRun, method: str, kind: DistanceKind, ctx: DistanceContext) -> CitationDistanceTable:
    pos_s, neg_s = run.test_scores[method]
    edges = np.concatenate([run.split.test_pos, run.split.test_neg])
    labels = np.r_[np.ones(len(pos_s), dtype=np.int64), np.zeros(len(neg_s), dtype=np.int64)]
    return distance_table(edges, labels, np.concatenate([pos_s, neg_s]), kind, ctx)


def run_experiment_config(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> Path:
    """Execute every stage ``cfg`` asks for; on failure no report files are left behind.

    The manifest is written first with status ``running`` and finalized as
    ``complete`` or ``failed`` (naming the stage). Outputs are assembled in a
    staging directory and moved into place only after all stages succeed.
    """
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=cfg.to_dict())
    manifest.write(out / "manifest.json")
    staging = out / ".staging"
    shutil.rmtree(staging, ignore_errors=True)
    staging.mkdir()
    w = _Writer(staging)
    @contextmanager
    def stage(name: str):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        manifest.stage_seconds[name] = round(time.perf_counter() - t0, 3)

    try:
        with stage("config"):
            buf = io.StringIO()
            write_config(cfg, buf)
            w.text("config.yaml", buf.getvalue())
            pipe = cfg.pipeline()
            kinds = cfg.kinds
        with stage("ingest"):
            g = load_graph(cfg)
            if kinds and DistanceKind.TOPIC in kinds and g.labels is None:
                raise ValueError("topic distance needs node labels")

        methods = list(cfg.methods)
        runs: list[SeedRun] = []
        analysis_seed = cfg.seeds[0]
        for seed in cfg.seeds:
            extra = [k.embedding_method for k in kinds if k in EMBEDDING_KINDS] if seed == analysis_seed else []
            with stage(f"pipeline:seed{seed}"):
                runs.append(run_seed(g, methods, seed, pipe, embed_only=extra))

        with stage("evaluate"):
            results = [summarize(m, [r.reports[m] for r in runs]) for m in methods]
            w.json("results.json", {"dataset_nodes": g.n_nodes, "dataset_edges": g.n_edges,
                                    "seeds": list(cfg.seeds), "methods": [r.to_dict() for r in results]})
            w.csv("table1.csv", ["method", "AUC (IDR AUC)"], table1_rows(results))

        if kinds:
            run = runs[0]
            with stage("distances"):
                cm = None
                if DistanceKind.TOPIC in kinds:
                    if cfg.category_matrix:
                        with open(cfg.category_matrix) as fh:
                            cm = load_category_matrix(fh)
                    else:
                        cm = build_category_matrix(g)
                ctx = DistanceContext(graph=g, category_matrix=cm, train_graph=run.train_graph,
                                      embeddings=run.embeddings)
                tables = {(m, k): _scored_table(run, m, k, ctx) for m in methods for k in kinds}
                for (m, k), t in tables.items():
                    buf = io.StringIO()
                    t.write_csv(buf, g.nodes)
                    w.text(f"distances/{m}__{k.value}.csv", buf.getvalue())
            with stage("analysis"):
                reg_rows = []
                for (m, k), t in tables.items():
                    curve = binned_auc(t, n_bins=None if cfg.bin_width else cfg.bins,
                                       width=cfg.bin_width, min_count=cfg.min_count)
                    w.csv(f"curves/{m}__{k.value}.csv",
                          ["low", "high", "midpoint", "n_pos", "n_neg", "auc"],
                          [[repr(r["low"]), repr(r["high"]), repr(r["midpoint"]), r["n_pos"], r["n_neg"],
                            "" if r["auc"] is None else repr(r["auc"])] for r in curve.rows()])
                    try:
                        rep = (regress_auc_on_distance(curve) if cfg.regression == "bins"
                               else regress_auc_on_distance_edges(t))
                        reg_rows.append([m, k.value, repr(rep.slope), repr(rep.standardized), repr(rep.p_value),
                                         rep.n, rep.formatted(), t.n_unreachable])
                    except ValueError as exc:
                        logger.warning("no regression for %s x %s: %s", m, k.value, exc)
                        reg_rows.append([m, k.value, "", "", "", int(curve.qualifying.sum()),
                                         "insufficient bins", t.n_unreachable])
                w.csv("regression.csv", ["method", "kind", "slope", "standardized", "p_value", "n",
                                         "formatted", "n_unreachable"], reg_rows)
                w.text("regression.txt", regression_text(reg_rows, methods, kinds))

        if cfg.betweenness:
            with stage("betweenness"):
                w.json("betweenness.json", betweenness_report(g, runs[0], kinds))

        with stage("finalize"):
            for p in sorted(staging.rglob("*")):
                if p.is_file():
                    dest = out / p.relative_to(staging)
                    dest.parent.mkdir(parents=True, exist_ok=True)
                    p.replace(dest)
            shutil.rmtree(staging)
            manifest.artifacts = dict(sorted(w.hashes.items()))
            manifest.status = "complete"
            manifest.write(out / "manifest.json")
    except StageError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        manifest.status = "failed"
        manifest.failed_stage = exc.stage
        manifest.error = str(exc.cause)
        manifest.write(out / "manifest.json")
        raise
    return out


def regression_text(rows, methods, kinds) -> str:
    """Table-3-style grid: rows are prediction methods, columns distance kinds."""
    cell = {(r[0], r[1]): r[6] for r in rows}
    header = ["method"] + [k.display_name for k in kinds]
    lines = [header] + [[m] + [cell[(m, k.value)] for k in kinds] for m in methods]
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "".join("  ".join(c.ljust(wd) for c, wd in zip(line, widths)).rstrip() + "\n" for line in lines)


def betweenness_report(g: CitationGraph, run: SeedRun, kinds) -> dict:
    """IDR-vs-betweenness KS test on the full graph; distance-vs-betweenness
    Spearman on the training edges of the first seed."""
    out: dict = {}
    if g.labels is not None:
        rep = betweenness_idr_test(g, edge_betweenness(g))
        out["idr_test"] = {"ks_d": rep.ks.d_statistic, "ks_p": rep.ks.p_value, "inter_mean": rep.inter_mean,
                           "intra_mean": rep.intra_mean, "n_inter": rep.n_inter, "n_intra": rep.n_intra,
                           "inter_greater": rep.inter_greater}
    tg = run.train_graph
    bt = edge_betweenness(tg)
    ctx = DistanceContext(graph=g, category_matrix=build_category_matrix(g) if g.labels is not None else None,
                          train_graph=tg, embeddings=run.embeddings)
    corr = {}
    for k in kinds:
        if k is DistanceKind.NETWORK:
            continue  # every training edge is 1 hop apart
        t = distance_table(tg.edges, np.ones(tg.n_edges, dtype=np.int64), None, k, ctx)
        try:
            corr[k.value] = spearman(t.distances, bt).spearman_rho
        except ValueError as exc:
            corr[k.value] = None
            logger.warning("no correlation for %s: %s", k.value, exc)
    out["spearman_with_betweenness"] = corr
    return out


def format_table1(results) -> str:
    rows = [["method", "AUC (IDR AUC)"]] + table1_rows(results)
    width = max(len(r[0]) for r in rows)
    return "".join(f"{a.ljust(width)}  {b}\n" for a, b in rows)


__all__ = ["RunManifest", "StageError", "format_table1", "load_graph",
           "run_experiment_config"]

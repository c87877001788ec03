"""``idrcite`` command line: ingest, run, plot, stats."""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import yaml

from .config import config_from_dict
from .graph import (
    GraphFormatError,
    graph_stats,
    load_edge_list,
    load_node_labels,
    read_graph_cache,
    write_graph_cache,
)

class CLIError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in _csv_list(text)]


def _float_list(text: str) -> list[float]:
    vals = [float(t) for t in _csv_list(text.replace(":", ","))]
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("ratios need three values, e.g. 0.75,0.05,0.20")
    return vals


# --------------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    try:
        with open(args.edges) as fh:
            g = load_edge_list(fh)
    except (OSError, GraphFormatError) as exc:
        raise CLIError("ingest", f"{args.edges}: {exc}") from None
    if args.labels and Path(args.labels).exists():
        try:
            with open(args.labels) as fh:
                g = load_node_labels(fh, g, add_missing_nodes=args.add_missing_nodes)
        except GraphFormatError as exc:
            raise CLIError("ingest", f"{args.labels}: {exc}") from None
    else:
        where = f" ({args.labels} not found)" if args.labels else ""
        print(f"warning: no label file{where}; graph cached unlabeled", file=sys.stderr)
    buf = io.StringIO()
    write_graph_cache(g, buf)
    data = buf.getvalue().encode()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    print(graph_stats(g))
    print(f"cache {out} sha256 {hashlib.sha256(data).hexdigest()}")
    return 0


# ------------------------------------------------------------------------ run

# flag name -> config key
RUN_FLAGS = {
    "graph": "graph", "edges": "edges", "labels": "labels", "category_matrix": "category_matrix",
    "method": "methods", "dims": "dims", "p": "p", "q": "q", "walk_length": "walk_length",
    "num_walks": "num_walks", "window": "window", "wl_iterations": "wl_iterations", "epochs": "epochs",
    "seeds": "seeds", "ratios": "ratios",
    "bins": "bins", "bin_width": "bin_width", "distance_kinds": "distance_kinds", "regression": "regression",
    "out": "out",
}


def resolve_config(args):
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise CLIError("config", str(exc)) from None
    for flag, key in RUN_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            data[key] = val
    for flag in ("role_level", "symmetrize", "betweenness"):
        if getattr(args, flag):
            data[flag] = True
    if data.get("distance_kinds") == ["all"]:
        data["distance_kinds"] = ["topic", "network", "deepwalk", "node2vec", "role2vec"]
    try:
        return config_from_dict(data)
    except (TypeError, ValueError) as exc:
        raise CLIError("config", str(exc)) from None


def cmd_run(args) -> int:
    from .runner import StageError, format_table1, run_experiment_config
    from .linkpred import EvalReport, summarize

    cfg = resolve_config(args)
    try:
        out = run_experiment_config(cfg)
    except StageError as exc:
        raise CLIError(exc.stage, str(exc.cause)) from None
    results = json.loads((out / "results.json").read_text())
    rows = [summarize(m["method"], [EvalReport(**r) for r in m["per_seed"]]) for m in results["methods"]]
    print(format_table1(rows), end="")
    reg = out / "regression.txt"
    if reg.exists():
        print()
        print(reg.read_text(), end="")
    print(f"outputs in {out}")
    return 0


# ----------------------------------------------------------------------- plot


def cmd_plot(args) -> int:
    from .plots import plot_run

    run_dir = Path(args.run)
    if not (run_dir / "results.json").exists():
        raise CLIError("plot", f"{run_dir} is not a completed run directory (no results.json)")
    try:
        written = plot_run(run_dir, Path(args.out) if args.out else run_dir / "figures", bins=args.bins)
    except (OSError, ValueError) as exc:
        raise CLIError("plot", str(exc)) from None
    for p in written:
        print(p)
    return 0


# ---------------------------------------------------------------------- stats


def cmd_stats(args) -> int:
    rows = []
    for path in args.graphs:
        try:
            with open(path) as fh:
                g = read_graph_cache(fh)
        except (OSError, GraphFormatError) as exc:
            raise CLIError("stats", f"{path}: {exc}") from None
        s = graph_stats(g)
        rows.append({"graph": path, "papers": s.paper_count, "cites_per_paper": round(s.citations_per_paper, 2),
                     "topics": s.topic_count, "edges": g.n_edges})
        if not args.json:
            print(f"{path}: {s}")
    if args.json:
        print(json.dumps(rows, indent=2))
    return 0


# ----------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idrcite", description="Citation prediction and citation-distance analyses.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    ing = sub.add_parser("ingest", help="parse an edge list (and labels) into a graph cache")
    ing.add_argument("edges")
    ing.add_argument("--labels")
    ing.add_argument("--out", default="graph.json")
    ing.add_argument("--add-missing-nodes", action="store_true",
                     help="label-file nodes absent from the edge list become isolated nodes")
    ing.set_defaults(func=cmd_ingest)

    run = sub.add_parser("run", help="split, embed, classify, evaluate and analyze")
    run.add_argument("--config", help="YAML file with experiment keys; flags override it")
    run.add_argument("--graph", help="graph cache written by `ingest`")
    run.add_argument("--edges")
    run.add_argument("--labels")
    run.add_argument("--category-matrix")
    run.add_argument("--method", type=_csv_list, help="comma list of deepwalk,node2vec,role2vec")
    run.add_argument("--dims", type=int)
    run.add_argument("--p", type=float)
    run.add_argument("--q", type=float)
    run.add_argument("--walk-length", type=int)
    run.add_argument("--num-walks", type=int)
    run.add_argument("--window", type=int)
    run.add_argument("--epochs", type=int)
    run.add_argument("--seeds", type=_int_list, help="comma list, default 0,1,2,3,4")
    run.add_argument("--ratios", type=_float_list, help="train,val,test fractions")
    run.add_argument("--bins", type=int)
    run.add_argument("--bin-width", type=float)
    run.add_argument("--distance-kinds", type=_csv_list,
                     help="comma list of topic,network,deepwalk,node2vec,role2vec, or 'all'")
    run.add_argument("--regression", choices=("bins", "edges"))
    run.add_argument("--role-level", action="store_true", help="role2vec with one vector per role")
    run.add_argument("--wl-iterations", type=int, help="role refinement steps for role2vec (default 1)")
    run.add_argument("--symmetrize", action="store_true")
    run.add_argument("--betweenness", action="store_true")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="SVG figures from a run directory")
    pl.add_argument("run")
    pl.add_argument("--out")
    pl.add_argument("--bins", type=int, default=20)
    pl.set_defaults(func=cmd_plot)

    st = sub.add_parser("stats", help="dataset summary for graph caches")
    st.add_argument("graphs", nargs="+")
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"idrcite: error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

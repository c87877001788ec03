"""SVG figures from a run directory: AUC against distance, and pos/neg distance histograms."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .distances import DistanceKind  # noqa: E402

# fixed ids and no timestamp keep the SVG bytes reproducible
matplotlib.rcParams["svg.hashsalt"] = "idrcite"
SVG_METADATA = {"Date": None, "Creator": None}
KIND_ORDER = [k.value for k in DistanceKind]


def _read_csv(path: Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _floats(rows, key):
    return np.array([float(r[key]) if r[key] != "" else np.nan for r in rows])


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def collect_curves(run_dir: Path) -> dict[str, dict[str, list[dict]]]:
    """kind -> method -> curve rows."""
    out: dict[str, dict[str, list[dict]]] = {}
    for p in sorted((run_dir / "curves").glob("*__*.csv")):
        method, kind = p.stem.split("__", 1)
        out.setdefault(kind, {})[method] = _read_csv(p)
    return dict(sorted(out.items(), key=lambda kv: KIND_ORDER.index(kv[0])))


def plot_auc_vs_distance(curves: dict[str, dict[str, list[dict]]], path: Path) -> Path:
    """One panel per distance kind, one line per prediction method."""
    kinds = list(curves)
    fig, axes = plt.subplots(1, len(kinds), figsize=(3.2 * len(kinds), 3.2), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        any_points = False
        for method, rows in sorted(curves[kind].items()):
            x, y = _floats(rows, "midpoint"), _floats(rows, "auc")
            ok = np.isfinite(y)
            if ok.any():
                any_points = True
                ax.plot(x[ok], y[ok], marker="o", markersize=3, label=method)
        if not any_points:
            ax.text(0.5, 0.5, "insufficient bins", ha="center", va="center", transform=ax.transAxes)
        else:
            ax.legend(fontsize=7)
        ax.set_title(DistanceKind(kind).display_name, fontsize=9)
        ax.set_xlabel("citation distance")
        ax.set_ylabel("AUC")
    fig.tight_layout()
    return _save(fig, path)


def plot_histogram(rows: list[dict], kind: str, path: Path, bins: int = 20) -> Path:
    """Overlaid positive (blue) / negative (red) distance histograms."""
    d, lab = _floats(rows, "distance"), np.array([int(r["label"]) for r in rows])
    ok = np.isfinite(d)
    fig, ax = plt.subplots(figsize=(4, 3))
    if ok.any():
        edges = np.histogram_bin_edges(d[ok], bins=bins)
        ax.hist(d[ok & (lab == 1)], bins=edges, color="tab:blue", alpha=0.6, label="positive")
        ax.hist(d[ok & (lab == 0)], bins=edges, color="tab:red", alpha=0.6, label="negative")
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no finite distances", ha="center", va="center", transform=ax.transAxes)
    ax.set_title(DistanceKind(kind).display_name, fontsize=9)
    ax.set_xlabel("citation distance")
    ax.set_ylabel("edges")
    fig.tight_layout()
    return _save(fig, path)


def plot_run(run_dir: Path, out_dir: Path, bins: int = 20) -> list[Path]:
    written = []
    curves = collect_curves(run_dir)
    if curves:
        written.append(plot_auc_vs_distance(curves, out_dir / "auc_vs_distance.svg"))
    seen = set()
    for p in sorted((run_dir / "distances").glob("*__*.csv")):
        kind = p.stem.split("__", 1)[1]
        if kind in seen:
            continue  # distances do not depend on the scoring method
        seen.add(kind)
        written.append(plot_histogram(_read_csv(p), kind, out_dir / f"histogram_{kind}.svg", bins))
    return written

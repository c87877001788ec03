"""Convert the Cora / CiteSeer / PubMed benchmark files into edge-list + label files.

Cora is read from the LINQS ``cora.cites`` / ``cora.content`` pair; CiteSeer and
PubMed from the Planetoid ``ind.<name>.*`` pickles. Both source layouts ship in
the ``pgl`` wheel under ``pgl/data/``::

    pip download --no-deps pgl
    python -m zipfile -e pgl-*.whl /tmp/pgl
    python tools/convert_benchmarks.py /tmp/pgl/pgl/data data/
"""
import pickle
import sys
from pathlib import Path

import numpy as np


def convert_cora(src: Path, dst: Path) -> None:
    dst.mkdir(parents=True, exist_ok=True)
    with open(src / "cora.cites") as fin, open(dst / "edges.txt", "w") as fout:
        fout.write("# Cora citations, one 'cited citing' pair per line (LINQS order)\n")
        for line in fin:
            a, b = line.split()
            fout.write(f"{a} {b}\n")
    with open(src / "cora.content") as fin, open(dst / "labels.txt", "w") as fout:
        for line in fin:
            parts = line.split()
            fout.write(f"{parts[0]}\t{parts[-1]}\n")


def _load_pickle(path: Path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert_planetoid(src: Path, name: str, dst: Path) -> None:
    dst.mkdir(parents=True, exist_ok=True)
    graph = _load_pickle(src / f"ind.{name}.graph")
    ally = np.asarray(_load_pickle(src / f"ind.{name}.ally"))
    ty = np.asarray(_load_pickle(src / f"ind.{name}.ty"))
    test_index = [int(x) for x in open(src / f"ind.{name}.test.index").read().split()]

    n = len(graph)
    onehot = np.zeros((n, ally.shape[1]))
    onehot[: len(ally)] = ally
    onehot[test_index] = ty
    # CiteSeer has test nodes with no label row; they fall back to class 0
    # exactly as the usual Planetoid loaders do.
    labels = onehot.argmax(axis=1)

    pairs = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v:
                pairs.add((min(u, v), max(u, v)))
    with open(dst / "edges.txt", "w") as f:
        f.write(f"# {name} citations (Planetoid graph dict), undirected, one pair per line\n")
        for u, v in sorted(pairs):
            f.write(f"{u} {v}\n")
    with open(dst / "labels.txt", "w") as f:
        for node in range(n):
            f.write(f"{node}\tclass{labels[node]}\n")


if __name__ == "__main__":
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    convert_cora(src / "cora", out / "cora")
    convert_planetoid(src / "citeseer", "citeseer", out / "citeseer")
    convert_planetoid(src / "pubmed", "pubmed", out / "pubmed")

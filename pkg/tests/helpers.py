from pathlib import Path

from idrcite.graph import CitationGraph, load_edge_list, load_node_labels

DATA = Path(__file__).resolve().parent.parent / "data"


def graph_from(edges, n=None, labels=None):
    """Graph on nodes "0".."n-1"; ``labels`` are category names per node."""
    n = n if n is not None else 1 + max(max(e) for e in edges)
    names = None if labels is None else sorted(set(labels))
    lab = None if labels is None else [names.index(x) for x in labels]
    return CitationGraph([str(i) for i in range(n)], edges, lab, names)


def load_dataset(name):
    with open(DATA / name / "edges.txt") as fe, open(DATA / name / "labels.txt") as fl:
        return load_node_labels(fl, load_edge_list(fe), add_missing_nodes=True)

import io
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import graph_from
from idrcite.graph import (
    GraphFormatError,
    add_negative_edges,
    bfs_distances,
    graph_stats,
    induced_training_subgraph,
    load_edge_list,
    load_node_labels,
    make_split,
    sample_negative_edges,
    shortest_path_length,
    split_edges,
    write_edge_list,
    write_node_labels,
)
from oracles import adjacency_sets, hop_distance_by_enumeration


def edge_set(pairs):
    return {tuple(sorted(map(int, p))) for p in np.asarray(pairs).reshape(-1, 2)}


# ---------------------------------------------------------------- ingestion


def test_duplicates_and_self_loops_collapse():
    g = load_edge_list(io.StringIO("a b\nb a\na a\n"))
    assert set(g.nodes) == {"a", "b"}
    assert g.n_edges == 1
    assert g.dropped_self_loops == 1


def test_empty_stream():
    g = load_edge_list(io.StringIO(""))
    assert g.n_nodes == 0 and g.n_edges == 0


def test_comments_and_blank_lines():
    g = load_edge_list(io.StringIO("# header\n\na b  # trailing\nb c\n"))
    assert g.n_edges == 2


def test_malformed_line_reports_line_number():
    with pytest.raises(GraphFormatError, match="line 2"):
        load_edge_list(io.StringIO("a b\na b c\n"))


def test_labels_one_topic():
    g = load_node_labels(io.StringIO("a X\nb X\n"), load_edge_list(io.StringIO("a b\n")))
    assert graph_stats(g).topic_count == 1
    assert g.category_names == ("X",)


@pytest.mark.parametrize(
    "labels, message",
    [("a X\n", "unlabeled"), ("a X\nb X\nc Y\n", "unknown node"), ("a X\nb X\na Y\n", "labeled twice")],
)
def test_label_errors(labels, message):
    g = load_edge_list(io.StringIO("a b\n"))
    with pytest.raises(GraphFormatError, match=message):
        load_node_labels(io.StringIO(labels), g)


def test_labels_can_add_isolated_nodes():
    g = load_edge_list(io.StringIO("a b\n"))
    g2 = load_node_labels(io.StringIO("a X\nb Y\nc X\n"), g, add_missing_nodes=True)
    assert g2.n_nodes == 3 and g2.n_edges == 1
    assert len(g2.neighbors(g2.index["c"])) == 0


def test_round_trip_files():
    g = graph_from([(0, 1), (1, 2), (0, 3)], labels=["x", "y", "x", "z"])
    e, lab = io.StringIO(), io.StringIO()
    write_edge_list(g, e)
    write_node_labels(g, lab)
    g2 = load_node_labels(io.StringIO(lab.getvalue()), load_edge_list(io.StringIO(e.getvalue())))
    assert edge_set(g.edges) == {tuple(sorted((int(g2.nodes[i]), int(g2.nodes[j])))) for i, j in g2.edges}
    assert [g.category_names[g.labels[g.index[t]]] for t in g2.nodes] == [
        g2.category_names[x] for x in g2.labels]


def test_dense_index_bijection():
    g = load_edge_list(io.StringIO("p q\nq r\nr p\n"))
    assert [g.index[t] for t in g.nodes] == list(range(g.n_nodes))


# --------------------------------------------------------------- benchmarks


def test_cora_summary(cora):
    s = graph_stats(cora)
    assert s.paper_count == 2708
    assert abs(s.citations_per_paper - 3.90) <= 0.01
    assert s.topic_count == 7


def test_citeseer_summary(citeseer):
    s = graph_stats(citeseer)
    assert s.paper_count == 3327
    assert abs(s.citations_per_paper - 2.74) <= 0.01
    assert s.topic_count == 6


def test_pubmed_summary():
    from helpers import load_dataset
    s = graph_stats(load_dataset("pubmed"))
    assert s.paper_count == 19717
    assert abs(s.citations_per_paper - 4.50) <= 0.01
    assert s.topic_count == 3


def test_graph_stats_single_edge():
    s = graph_stats(graph_from([(0, 1)], labels=["t", "t"]))
    assert (s.paper_count, s.citations_per_paper, s.topic_count) == (2, 1.0, 1)


def test_summary_string(cora):
    assert str(graph_stats(cora)) == "2708 papers, 3.90 cites/paper, 7 topics"


# ------------------------------------------------------------------ splits


def test_split_sizes_75_5_20():
    g = graph_from([(i, j) for i, j in combinations(range(15), 2)][:100])
    s = split_edges(g, (0.75, 0.05, 0.20), seed=3)
    assert (len(s.train_pos), len(s.val_pos), len(s.test_pos)) == (75, 5, 20)


def test_split_all_train():
    g = graph_from([(0, 1), (1, 2), (2, 3)])
    s = split_edges(g, (1, 0, 0), seed=0)
    assert edge_set(s.train_pos) == edge_set(g.edges)
    assert len(s.val_pos) == len(s.test_pos) == 0


def test_split_deterministic():
    g = graph_from([(i, j) for i, j in combinations(range(10), 2)])
    a, b = split_edges(g, seed=11), split_edges(g, seed=11)
    for x, y in zip((a.train_pos, a.val_pos, a.test_pos), (b.train_pos, b.val_pos, b.test_pos)):
        np.testing.assert_array_equal(x, y)


def test_split_rejects_bad_input():
    with pytest.raises(ValueError):
        split_edges(graph_from([], n=3))
    with pytest.raises(ValueError):
        split_edges(graph_from([(0, 1)]), (0.5, 0.5, 0.5))


def test_split_floor_rule_is_robust_to_float_rounding():
    g = graph_from([(i, j) for i, j in combinations(range(15), 2)][:100])
    s = split_edges(g, (0.42, 0.29, 0.29), seed=0)
    assert (len(s.val_pos), len(s.test_pos), len(s.train_pos)) == (29, 29, 42)


# -------------------------------------------------------------- negatives


def test_negative_only_admissible_pair():
    # K4 on a,b,c,d minus (c,d)
    g = graph_from([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    assert edge_set(sample_negative_edges(g, 1, seed=0)) == {(2, 3)}


def test_negative_path_graph():
    g = graph_from([(0, 1), (1, 2)])
    assert edge_set(sample_negative_edges(g, 1, seed=5)) == {(0, 2)}


def test_negative_count_zero():
    assert sample_negative_edges(graph_from([(0, 1)]), 0).shape == (0, 2)


def test_negative_shortfall_names_amount():
    g = graph_from([(0, 1), (1, 2)])
    with pytest.raises(ValueError, match="short by 2"):
        sample_negative_edges(g, 3)


def test_negative_respects_exclude():
    g = graph_from([(0, 1)], n=4)
    got = sample_negative_edges(g, 4, seed=0, exclude=np.array([[2, 3]]))
    assert edge_set(got) == {(0, 2), (0, 3), (1, 2), (1, 3)}


def test_negative_sampling_is_uniform():
    # path 0-1-2-3-4 has 6 non-edges; each should be drawn ~1/6 of the time
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 4)])
    counts = {}
    for seed in range(3000):
        (p,) = edge_set(sample_negative_edges(g, 1, seed=seed))
        counts[p] = counts.get(p, 0) + 1
    assert len(counts) == 6
    sigma = np.sqrt(3000 * (1 / 6) * (5 / 6))
    assert all(abs(c - 500) < 4 * sigma for c in counts.values())


def test_rejection_path_large_graph():
    # above the enumeration threshold the sampler switches to rejection
    n = 2100
    g = graph_from([(i, i + 1) for i in range(n - 1)])
    neg = sample_negative_edges(g, 500, seed=1)
    assert len(edge_set(neg)) == 500
    assert not g.has_edges(neg).any()


def test_split_negatives_disjoint_and_matched(cora):
    s = make_split(cora, seed=0)
    pos = edge_set(cora.edges)
    sets = [edge_set(s.train_neg), edge_set(s.val_neg), edge_set(s.test_neg)]
    for neg, p in zip(sets, (s.train_pos, s.val_pos, s.test_pos)):
        assert len(neg) == len(p)
        assert not neg & pos
    assert not (sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2])


# ------------------------------------------------------------- subgraph


def test_training_subgraph_all_train_equals_graph():
    g = graph_from([(0, 1), (1, 2), (2, 0), (2, 3)])
    s = split_edges(g, (1, 0, 0))
    assert edge_set(induced_training_subgraph(g, s).edges) == edge_set(g.edges)


def test_training_subgraph_triangle():
    g = graph_from([(0, 1), (1, 2), (0, 2)])
    s = split_edges(g, (2 / 3, 0, 1 / 3), seed=0)
    tg = induced_training_subgraph(g, s)
    assert tg.n_nodes == 3 and tg.n_edges == 2


def test_training_subgraph_cora_edge_count(cora):
    s = split_edges(cora, (0.75, 0.05, 0.20), seed=0)
    m = cora.n_edges
    expected = m - int(np.floor(0.05 * m)) - int(np.floor(0.20 * m))
    tg = induced_training_subgraph(cora, s)
    assert tg.n_edges == expected
    assert tg.n_nodes == cora.n_nodes


# ------------------------------------------------------------ shortest path


def test_shortest_path_basics():
    g = graph_from([(0, 1), (1, 2), (2, 3)], n=5)
    assert shortest_path_length(g, "0", "1") == 1
    assert shortest_path_length(g, "2", "2") == 0
    assert shortest_path_length(g, "0", "3") == 3
    assert shortest_path_length(g, "0", "4") is None
    with pytest.raises(KeyError):
        shortest_path_length(g, "0", "zz")


def test_shortest_path_matches_enumeration_on_path():
    edges = [(0, 1), (1, 2), (2, 3)]
    adj = adjacency_sets(4, edges)
    assert shortest_path_length(graph_from(edges), 0, 3) == hop_distance_by_enumeration(adj, 0, 3) == 3


@st.composite
def small_graphs(draw, max_nodes=12):
    n = draw(st.integers(2, max_nodes))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    return graph_from(chosen, n=n)


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_shortest_path_symmetry_and_triangle_inequality(g):
    n = g.n_nodes
    d = np.array([bfs_distances(g, s) for s in range(n)])
    for u in range(n):
        for v in range(n):
            got = shortest_path_length(g, u, v)
            assert got == (None if d[u, v] < 0 else d[u, v])
            assert got == shortest_path_length(g, v, u)
    for u, v, w in combinations(range(n), 3):
        if d[u, v] >= 0 and d[v, w] >= 0:
            assert d[u, w] <= d[u, v] + d[v, w]


@settings(max_examples=20, deadline=None)
@given(small_graphs(max_nodes=6))
def test_shortest_path_matches_enumeration(g):
    adj = adjacency_sets(g.n_nodes, g.edges.tolist())
    for u, v in combinations(range(g.n_nodes), 2):
        assert shortest_path_length(g, u, v) == hop_distance_by_enumeration(adj, u, v)


# ------------------------------------------------------------- properties


@settings(max_examples=50, deadline=None)
@given(small_graphs(max_nodes=14), st.integers(0, 2**31 - 1))
def test_split_partition_property(g, seed):
    if g.n_edges == 0:
        return
    s = split_edges(g, seed=seed)
    parts = [edge_set(s.train_pos), edge_set(s.val_pos), edge_set(s.test_pos)]
    assert parts[0] | parts[1] | parts[2] == edge_set(g.edges)
    assert sum(map(len, parts)) == g.n_edges
    m = g.n_edges
    assert len(parts[1]) == int(np.floor(0.05 * m + 1e-9))
    assert len(parts[2]) == int(np.floor(0.20 * m + 1e-9))


@settings(max_examples=50, deadline=None)
@given(small_graphs(max_nodes=14), st.integers(0, 1000), st.integers(0, 2**31 - 1))
def test_negative_sampling_property(g, count, seed):
    n = g.n_nodes
    admissible = n * (n - 1) // 2 - g.n_edges
    count = min(count, admissible)
    neg = sample_negative_edges(g, count, seed)
    assert len(edge_set(neg)) == count
    assert not edge_set(neg) & edge_set(g.edges)
    assert np.all(neg[:, 0] < neg[:, 1]) if count else True


def test_graph_stats_mean_degree_exact():
    g = graph_from([(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)], n=7)
    assert graph_stats(g).citations_per_paper == 2 * 5 / 7


def test_add_negative_edges_deterministic(cora):
    s = split_edges(cora, seed=4)
    a, b = add_negative_edges(cora, s), add_negative_edges(cora, s)
    np.testing.assert_array_equal(a.test_neg, b.test_neg)

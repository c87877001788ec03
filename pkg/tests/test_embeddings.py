import io
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import graph_from
from idrcite.embeddings import (
    EmbeddingMatrix,
    SkipGramConfig,
    StructuralFeatures,
    TrainingLog,
    WalkConfig,
    WalkCorpus,
    assign_roles,
    refine_roles,
    embed_nodes,
    generate_role_walks,
    generate_walks_biased,
    generate_walks_uniform,
    load_embedding,
    read_word2vec,
    structural_features,
    train_skipgram,
    transition_probabilities,
    write_role_map,
    write_word2vec,
)
from idrcite.embeddings.roles import log_bin
from idrcite.embeddings.skipgram import (
    alias_table,
    negative_distribution,
    sgd_pair_step,
    sgns_pair_gradients,
    sgns_pair_loss,
)
from idrcite.graph import make_split
from idrcite.synthetic import planted_partition
from oracles import central_difference, random_connected_graph, triangles_by_enumeration

SMALL_WALK = WalkConfig(walks_per_node=4, walk_length=20)
SMALL_SG = SkipGramConfig(window=3, epochs=2)


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# ------------------------------------------------------------------- walks


def test_single_edge_walk_alternates():
    g = graph_from([(0, 1)])
    c = generate_walks_uniform(g, WalkConfig(walks_per_node=3, walk_length=4))
    for w in c.walks:
        if w[0] == 0:
            assert w.tolist() == [0, 1, 0, 1]


def test_corpus_size_and_starts():
    g = graph_from([(0, 1), (1, 2), (2, 3)], n=6)
    c = generate_walks_uniform(g, WalkConfig(walks_per_node=10, walk_length=5))
    assert c.n_walks == 60
    assert np.bincount(c.tokens[:, 0], minlength=6).tolist() == [10] * 6


def test_isolated_node_walks_have_length_one():
    g = graph_from([(0, 1)], n=3)
    c = generate_walks_uniform(g, WalkConfig(walks_per_node=2, walk_length=5))
    assert all(len(w) == 1 for w in c.walks if w[0] == 2)
    assert all(len(w) == 5 for w in c.walks if w[0] != 2)


def test_walk_steps_follow_edges():
    rng = np.random.default_rng(0)
    g = graph_from(random_connected_graph(rng, 12, 0.2))
    for c in (generate_walks_uniform(g, SMALL_WALK), generate_walks_biased(g, WalkConfig(p=0.5, q=3.0))):
        for w in c.walks:
            assert g.has_edges(np.stack([w[:-1], w[1:]], axis=1)).all()


def test_star_leaf_frequencies():
    k = 5
    g = graph_from([(0, leaf) for leaf in range(1, k + 1)])
    c = generate_walks_uniform(g, WalkConfig(walks_per_node=400, walk_length=11))
    steps = []
    for w in c.walks:
        steps.extend(w[i + 1] for i in range(len(w) - 1) if w[i] == 0)
    steps = np.array(steps)
    n = len(steps)
    assert n >= 10_000
    sigma = np.sqrt(n * (1 / k) * (1 - 1 / k))
    for leaf in range(1, k + 1):
        assert abs((steps == leaf).sum() - n / k) <= 3 * sigma


def test_walks_deterministic_per_seed():
    g = graph_from([(0, 1), (1, 2), (2, 0), (2, 3)])
    a = generate_walks_biased(g, WalkConfig(p=2, q=0.5, seed=7))
    b = generate_walks_biased(g, WalkConfig(p=2, q=0.5, seed=7))
    c = generate_walks_biased(g, WalkConfig(p=2, q=0.5, seed=8))
    np.testing.assert_array_equal(a.tokens, b.tokens)
    assert not np.array_equal(a.tokens, c.tokens)


def test_unbiased_biased_walks_equal_uniform():
    g = graph_from(random_connected_graph(np.random.default_rng(1), 15, 0.2))
    np.testing.assert_array_equal(generate_walks_biased(g, SMALL_WALK).tokens,
                                  generate_walks_uniform(g, SMALL_WALK).tokens)


def test_transition_triangle():
    g = graph_from([(0, 1), (1, 2), (0, 2)])
    nbrs, probs = transition_probabilities(g, 0, 1, p=4.0, q=1.0)
    w = dict(zip(nbrs.tolist(), probs))
    assert w[0] == pytest.approx(0.25 / 1.25)
    assert w[2] == pytest.approx(1 / 1.25)


def test_transition_path_q4():
    g = graph_from([(0, 1), (1, 2)])
    nbrs, probs = transition_probabilities(g, 0, 1, p=1.0, q=4.0)
    assert dict(zip(nbrs.tolist(), probs))[2] == pytest.approx(0.2)


def test_unit_pq_transition_law_is_uniform_everywhere():
    g = graph_from(random_connected_graph(np.random.default_rng(2), 9, 0.3))
    for cur in range(g.n_nodes):
        for prev in [None] + g.neighbors(cur).tolist():
            _, probs = transition_probabilities(g, prev, cur)
            np.testing.assert_allclose(probs, 1 / len(probs))


def test_biased_walk_empirical_law():
    # path 0-1-2 plus pendant: from 1 reached via 0, q=4 -> P(2) = 0.2
    g = graph_from([(0, 1), (1, 2)])
    c = generate_walks_biased(g, WalkConfig(walks_per_node=3000, walk_length=3, q=4.0))
    walks = np.array([w for w in c.walks if w[0] == 0])
    frac = (walks[:, 2] == 2).mean()
    sigma = np.sqrt(0.2 * 0.8 / len(walks))
    assert abs(frac - 0.2) < 4 * sigma


def test_walk_config_validation():
    for kwargs in ({"walks_per_node": 0}, {"walk_length": 1}, {"p": 0}, {"q": -1}):
        with pytest.raises(ValueError):
            WalkConfig(**kwargs)


def test_empty_graph_rejected():
    with pytest.raises(ValueError):
        generate_walks_uniform(graph_from([], n=0))


# ------------------------------------------------------------------- roles


def test_structural_features_examples():
    f = structural_features(graph_from([(0, 1), (1, 2), (0, 2)], n=4))
    assert f.degree.tolist() == [2, 2, 2, 0]
    assert f.triangle_count.tolist() == [1, 1, 1, 0]
    star = structural_features(graph_from([(0, i) for i in range(1, 6)]))
    assert (star.degree[0], star.triangle_count[0]) == (5, 0)


def test_triangles_match_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(20):
        edges = random_connected_graph(rng, 10, 0.35)
        f = structural_features(graph_from(edges))
        np.testing.assert_array_equal(f.triangle_count, triangles_by_enumeration(10, edges))


def test_log_bins():
    assert log_bin(np.array([0, 1, 3, 7])).tolist() == [0, 1, 2, 3]
    x = np.arange(0, 5000)
    np.testing.assert_array_equal(log_bin(x), [int(np.log2(1 + v) + 1e-12) for v in x])


def test_roles_first_seen_order():
    f = StructuralFeatures(np.array([3, 0, 3, 1]), np.array([1, 0, 1, 0]))
    r = assign_roles(f)
    assert r.roles.tolist() == [0, 1, 0, 2]
    assert r.keys == ((2, 1), (0, 0), (1, 0))


def test_all_distinct_tuples():
    f = StructuralFeatures(np.array([0, 1, 3, 7]), np.zeros(4, dtype=int))
    assert assign_roles(f).n_roles == 4


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 300), st.integers(0, 300)), min_size=1, max_size=40))
def test_role_map_is_function_of_bins(rows):
    f = StructuralFeatures(np.array([a for a, _ in rows]), np.array([b for _, b in rows]))
    r = assign_roles(f)
    bins = list(zip(log_bin(f.degree).tolist(), log_bin(f.triangle_count).tolist()))
    for i, j in combinations(range(len(rows)), 2):
        assert (r.roles[i] == r.roles[j]) == (bins[i] == bins[j])


def test_refine_roles_splits_by_neighbour_roles():
    # on a 5-path degrees 1 and 2 share a log bin, so one role until refined
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 4)])
    base = assign_roles(structural_features(g))
    assert base.n_roles == 1
    r = refine_roles(g, base)
    assert r.roles.tolist() == [0, 1, 1, 1, 0]
    assert r.keys == ((0, (0,)), (0, (0, 0)))
    assert refine_roles(g, base, 2).roles.tolist() == [0, 1, 2, 1, 0]


def test_refine_roles_zero_iterations_and_stability():
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 0)])
    base = assign_roles(structural_features(g))
    assert refine_roles(g, base, 0) is base
    assert refine_roles(g, base, 3).roles.tolist() == [0, 0, 0, 0]
    with pytest.raises(ValueError):
        refine_roles(g, base, -1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_refinement_only_splits_roles(seed):
    g = graph_from(random_connected_graph(np.random.default_rng(seed), 15, 0.2))
    base = assign_roles(structural_features(g))
    r = refine_roles(g, base, 2)
    for i, j in combinations(range(g.n_nodes), 2):
        if r.roles[i] == r.roles[j]:
            assert base.roles[i] == base.roles[j]


def test_wl_iterations_change_role_level_rows():
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 4)])
    plain = embed_nodes(g, "role2vec", SMALL_WALK, SMALL_SG, d=8, role_level=True, wl_iterations=0)
    refined = embed_nodes(g, "role2vec", SMALL_WALK, SMALL_SG, d=8, role_level=True)
    assert plain.n_rows == 1 and refined.n_rows == 2
    assert refined.node_rows.tolist() == [0, 1, 1, 1, 0]


def test_role_walks_emit_roles():
    g = graph_from([(0, 1), (1, 2)])
    roles = assign_roles(structural_features(g))
    cfg = WalkConfig(walks_per_node=2, walk_length=4)
    rc = generate_role_walks(g, roles, cfg)
    assert rc.vocabulary_size == roles.n_roles
    uc = generate_walks_uniform(g, cfg)
    np.testing.assert_array_equal(rc.counts(), np.bincount(roles.roles[uc.tokens[uc.tokens >= 0]],
                                                           minlength=roles.n_roles))


def test_role_walks_single_edge():
    g = graph_from([(0, 1)])
    roles = assign_roles(StructuralFeatures(np.array([1, 3]), np.array([0, 0])))
    rc = generate_role_walks(g, roles, WalkConfig(walks_per_node=1, walk_length=4))
    uc = generate_walks_uniform(g, WalkConfig(walks_per_node=1, walk_length=4))
    for rw, uw in zip(rc.walks, uc.walks):
        if uw[0] == 0:
            assert rw.tolist() == [0, 1, 0, 1]


def test_one_role_walks_constant():
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 0)])
    roles = assign_roles(structural_features(g))
    assert roles.n_roles == 1
    assert all(set(w.tolist()) == {0} for w in generate_role_walks(g, roles, SMALL_WALK).walks)


# ---------------------------------------------------------------- skipgram


def test_sgns_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        u, vp, vn = rng.normal(size=8), rng.normal(size=8), rng.normal(size=(5, 8))
        du, dvp, dvn = sgns_pair_gradients(u, vp, vn)
        loss = lambda: sgns_pair_loss(u, vp, vn)  # noqa: E731
        for analytic, x in ((du, u), (dvp, vp), (dvn, vn)):
            numeric = central_difference(loss, x, 1e-5)
            assert np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric) < 1e-4


def test_sgd_pair_step_is_gradient_step():
    rng = np.random.default_rng(1)
    syn0, syn1 = rng.normal(size=(4, 6)), rng.normal(size=(4, 6))
    negs = np.array([2, 3])
    before = syn0.copy(), syn1.copy()
    lr = 1e-3
    du, dvp, _ = sgns_pair_gradients(syn0[0], syn1[1], syn1[negs])
    sgd_pair_step(syn0, syn1, 0, 1, negs, lr)
    np.testing.assert_allclose(syn0[0], before[0][0] - lr * du, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(syn1[1], before[1][1] - lr * dvp, rtol=1e-9, atol=1e-12)
    assert sgns_pair_loss(syn0[0], syn1[1], syn1[negs]) < sgns_pair_loss(before[0][0], before[1][1], before[1][negs])


def test_alias_table_exact_distribution():
    p = negative_distribution(np.array([1, 5, 0, 20, 3]))
    prob, alias = alias_table(p)
    n = len(p)
    recovered = np.zeros(n)
    for k in range(n):
        recovered[k] += prob[k] / n
        recovered[alias[k]] += (1 - prob[k]) / n
    np.testing.assert_allclose(recovered, p, atol=1e-12)
    assert p[2] == 0


def test_negative_distribution_power():
    p = negative_distribution(np.array([1, 16]))
    assert p[1] / p[0] == pytest.approx(8.0)


def test_output_shape_defaults():
    g = graph_from(random_connected_graph(np.random.default_rng(4), 30, 0.1))
    m = train_skipgram(generate_walks_uniform(g, SMALL_WALK), cfg=SkipGramConfig(epochs=1))
    assert m.vectors.shape == (30, 128)


def test_tokens_sharing_a_context_become_similar():
    # a=0 and b=1 both always sit next to 2; tokens 3..9 form unrelated pairs
    rows = [[0, 2], [1, 2]] * 100 + [[3 + k % 7, 3 + (k + 1) % 7] for k in range(200)]
    corpus = WalkCorpus(np.array(rows, dtype=np.int64), np.full(len(rows), 2), 10)
    base = train_skipgram(corpus, 16, SkipGramConfig(window=1, epochs=0))
    trained = train_skipgram(corpus, 16, SkipGramConfig(window=1, epochs=5))
    assert cosine(trained.vectors[0], trained.vectors[1]) > cosine(base.vectors[0], base.vectors[1])
    assert cosine(trained.vectors[0], trained.vectors[1]) > 0.5


def test_loss_non_increasing():
    g = planted_partition(n_blocks=2, block_size=60, p_in=0.1, p_out=0.01, seed=0).graph
    log = TrainingLog()
    train_skipgram(generate_walks_uniform(g, SMALL_WALK), 32, SkipGramConfig(window=5, epochs=5), log)
    assert len(log.epoch_loss) == 5
    for a, b in zip(log.epoch_loss, log.epoch_loss[1:]):
        assert b <= a * 1.02


def test_training_deterministic():
    g = graph_from(random_connected_graph(np.random.default_rng(5), 25, 0.1))
    c = generate_walks_uniform(g, SMALL_WALK)
    a = train_skipgram(c, 16, SMALL_SG)
    b = train_skipgram(c, 16, SMALL_SG)
    assert np.array_equal(a.vectors, b.vectors)


def test_skipgram_errors():
    c = WalkCorpus(np.array([[0, 1]]), np.array([2]), 2)
    with pytest.raises(ValueError):
        train_skipgram(c, 0)
    with pytest.raises(ValueError):
        train_skipgram(WalkCorpus(np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64), 2))
    with pytest.raises(ValueError):
        SkipGramConfig(window=0)


def test_context_corpus_must_align():
    c = WalkCorpus(np.array([[0, 1]]), np.array([2]), 2)
    with pytest.raises(ValueError, match="align"):
        train_skipgram(c, 4, contexts=WalkCorpus(np.array([[0, 1, 0]]), np.array([3]), 1))


# --------------------------------------------------------------- embed_nodes


def test_deepwalk_equals_unbiased_pipeline():
    g = graph_from(random_connected_graph(np.random.default_rng(6), 20, 0.1))
    a = embed_nodes(g, "deepwalk", WalkConfig(walks_per_node=3, walk_length=10, p=3, q=0.2), SMALL_SG, d=16)
    b = train_skipgram(generate_walks_biased(g, WalkConfig(walks_per_node=3, walk_length=10)), 16, SMALL_SG)
    assert np.array_equal(a.node_vectors(), b.vectors)


def test_node2vec_at_unit_pq_is_deepwalk():
    g = graph_from(random_connected_graph(np.random.default_rng(8), 20, 0.1))
    cfg = WalkConfig(walks_per_node=3, walk_length=10)
    a = embed_nodes(g, "deepwalk", cfg, SMALL_SG, d=16)
    b = embed_nodes(g, "node2vec", cfg, SMALL_SG, d=16)
    assert np.array_equal(a.node_vectors(), b.node_vectors())


def test_role_level_one_role_identical_vectors():
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 0)])
    m = embed_nodes(g, "role2vec", SMALL_WALK, SMALL_SG, d=8, role_level=True)
    v = m.node_vectors()
    assert m.n_rows == 1
    assert np.all(v == v[0])


def test_role2vec_node_level_shape():
    g = graph_from(random_connected_graph(np.random.default_rng(7), 20, 0.1))
    m = embed_nodes(g, "role2vec", SMALL_WALK, SMALL_SG, d=8)
    assert m.vectors.shape == (20, 8)
    assert m.node_rows.tolist() == list(range(20))


def test_unknown_method():
    with pytest.raises(ValueError, match="unknown embedding method"):
        embed_nodes(graph_from([(0, 1)]), "line")


def test_deepwalk_separates_communities():
    pp = planted_partition(n_blocks=2, block_size=100, p_in=0.08, p_out=0.004, seed=1)
    m = embed_nodes(pp.graph, "deepwalk", WalkConfig(walks_per_node=5, walk_length=30),
                    SkipGramConfig(window=5, epochs=2), d=32)
    v = m.node_vectors()
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    sim = v @ v.T
    same = pp.blocks[:, None] == pp.blocks[None, :]
    off = ~np.eye(len(v), dtype=bool)
    assert sim[same & off].mean() > sim[~same].mean()


@pytest.mark.parametrize("seed", range(50))
def test_default_dimension_is_128(seed):
    g = graph_from(random_connected_graph(np.random.default_rng(seed), 8 + seed % 5, 0.2))
    cfg = WalkConfig(walks_per_node=1, walk_length=5, seed=seed)
    m = embed_nodes(g, ("deepwalk", "node2vec", "role2vec")[seed % 3], cfg, SkipGramConfig(epochs=1, seed=seed))
    assert m.dim == 128


def test_embedding_files_round_trip():
    g = graph_from([(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)])
    for role_level in (False, True):
        m = embed_nodes(g, "role2vec", SMALL_WALK, SMALL_SG, d=4, role_level=role_level)
        vec, roles = io.StringIO(), io.StringIO()
        write_word2vec(m, vec)
        write_role_map(g.nodes, m, roles)
        back = load_embedding(io.StringIO(vec.getvalue()), g.nodes,
                              io.StringIO(roles.getvalue()) if role_level else None)
        assert np.array_equal(back.node_vectors(), m.node_vectors())


def test_word2vec_header_checked():
    with pytest.raises(ValueError, match="announces"):
        read_word2vec(io.StringIO("2 2\na 1 2\n"))


def test_embedding_matrix_rejects_unknown_node():
    m = EmbeddingMatrix(np.zeros((2, 3)), np.array([0, 1]), ("a", "b"))
    with pytest.raises(KeyError):
        m.vector(5)


def test_cora_training_subgraph_embedding_covers_all_nodes(cora):
    tg_nodes = cora.n_nodes
    s = make_split(cora, seed=0)
    assert len(s.train_pos) > 0
    m = EmbeddingMatrix(np.zeros((tg_nodes, 128)), np.arange(tg_nodes), cora.nodes)
    assert m.node_vectors(np.unique(s.test_pos)).shape[1] == 128

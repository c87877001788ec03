"""DeepWalk, node2vec and role2vec node embeddings trained with SGNS."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..graph import CitationGraph
from .matrix import EmbeddingMatrix, load_embedding, read_word2vec, write_role_map, write_word2vec
from .roles import RoleAssignment, StructuralFeatures, assign_roles, refine_roles, structural_features
from .skipgram import SkipGramConfig, TrainingLog, train_skipgram
from .walks import (
    WalkConfig,
    WalkCorpus,
    generate_walks_biased,
    generate_walks_uniform,
    transition_probabilities,
)

METHODS = ("deepwalk", "node2vec", "role2vec")
DEFAULT_DIM = 128


def generate_role_walks(g: CitationGraph, roles: RoleAssignment, cfg: WalkConfig = WalkConfig()) -> WalkCorpus:
    """Uniform walks over ``g`` that emit each visited node's role instead of the node."""
    return generate_walks_uniform(g, cfg).map_tokens(roles.roles, roles.n_roles)


def embed_nodes(
    g: CitationGraph,
    method: str,
    walk_cfg: WalkConfig = WalkConfig(),
    sg_cfg: SkipGramConfig = SkipGramConfig(),
    d: int = DEFAULT_DIM,
    log: TrainingLog | None = None,
    role_level: bool = False,
    wl_iterations: int = 1,
) -> EmbeddingMatrix:
    """Embed every node of ``g`` (normally the training subgraph).

    ``deepwalk`` ignores ``p``/``q`` and walks uniformly; ``node2vec`` uses the
    biased walk. ``role2vec`` walks uniformly and trains each node to predict
    the structural roles of the nodes around it, so nodes with similar
    surroundings of roles end up close. Roles are log-binned (degree,
    triangles) tuples refined by ``wl_iterations`` Weisfeiler-Lehman steps.
    With ``role_level=True`` the walks emit role tokens only and every node
    gets its role's vector.
    """
    if method == "deepwalk":
        corpus = generate_walks_biased(g, replace(walk_cfg, p=1.0, q=1.0))
    elif method == "node2vec":
        corpus = generate_walks_biased(g, walk_cfg)
    elif method == "role2vec":
        roles = refine_roles(g, assign_roles(structural_features(g)), wl_iterations)
        corpus = generate_walks_uniform(g, walk_cfg)
        if not role_level:
            m = train_skipgram(corpus, d, sg_cfg, log,
                               contexts=corpus.map_tokens(roles.roles, roles.n_roles))
            return EmbeddingMatrix(vectors=m.vectors, node_rows=np.arange(g.n_nodes, dtype=np.int64),
                                   tokens=g.nodes, method=method)
        corpus = corpus.map_tokens(roles.roles, roles.n_roles)
    else:
        raise ValueError(f"unknown embedding method {method!r}; expected one of {METHODS}")

    m = train_skipgram(corpus, d, sg_cfg, log)
    if method == "role2vec":
        return EmbeddingMatrix(vectors=m.vectors, node_rows=roles.roles.copy(),
                               tokens=tuple(f"role{r}" for r in range(roles.n_roles)), method=method)
    return EmbeddingMatrix(vectors=m.vectors, node_rows=np.arange(g.n_nodes, dtype=np.int64),
                           tokens=g.nodes, method=method)


__all__ = [
    "DEFAULT_DIM",
    "METHODS",
    "EmbeddingMatrix",
    "RoleAssignment",
    "SkipGramConfig",
    "StructuralFeatures",
    "TrainingLog",
    "WalkConfig",
    "WalkCorpus",
    "assign_roles",
    "embed_nodes",
    "generate_role_walks",
    "generate_walks_biased",
    "generate_walks_uniform",
    "load_embedding",
    "read_word2vec",
    "refine_roles",
    "structural_features",
    "train_skipgram",
    "transition_probabilities",
    "write_role_map",
    "write_word2vec",
]

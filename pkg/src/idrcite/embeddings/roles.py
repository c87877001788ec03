"""Structural features and the role map used by role2vec."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..graph import CitationGraph


@dataclass(frozen=True)
class StructuralFeatures:
    degree: np.ndarray
    triangle_count: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([self.degree, self.triangle_count])


@dataclass(frozen=True)
class RoleAssignment:
    roles: np.ndarray  # node index -> role id
    n_roles: int
    keys: tuple[tuple[int, ...], ...]  # role id -> binned feature tuple

    def __post_init__(self):
        if len(self.keys) != self.n_roles:
            raise ValueError("one key per role required")


def adjacency_matrix(g: CitationGraph) -> sp.csr_matrix:
    n = g.n_nodes
    data = np.ones(len(g.indices), dtype=np.int64)
    return sp.csr_matrix((data, g.indices, g.indptr), shape=(n, n))


def structural_features(g: CitationGraph) -> StructuralFeatures:
    """Degree and number of triangles through each node."""
    a = adjacency_matrix(g)
    # (A @ A) masked by A counts common neighbours per edge; each triangle
    # at a node is seen twice, once per incident edge
    tri = np.asarray(a.multiply(a @ a).sum(axis=1)).ravel() // 2
    return StructuralFeatures(degree=g.degree().astype(np.int64), triangle_count=tri.astype(np.int64))


def log_bin(x: np.ndarray, base: float = 2.0) -> np.ndarray:
    """``floor(log_base(1 + x))`` computed exactly for integer ``x``."""
    x = np.asarray(x, dtype=np.int64)
    out = np.floor(np.log1p(x) / np.log(base)).astype(np.int64)
    # repair float rounding at exact powers of the base
    out[base ** (out + 1) <= 1 + x] += 1
    out[base ** out > 1 + x] -= 1
    return out


def assign_roles(features: StructuralFeatures, log_base: float = 2.0) -> RoleAssignment:
    """Map each node to the role of its log-binned feature tuple.

    Roles are numbered in order of first appearance by node index.
    """
    binned = np.column_stack([log_bin(col, log_base) for col in features.as_matrix().T])
    table: dict[tuple[int, ...], int] = {}
    roles = np.empty(len(binned), dtype=np.int64)
    for i, row in enumerate(map(tuple, binned.tolist())):
        roles[i] = table.setdefault(row, len(table))
    return RoleAssignment(roles=roles, n_roles=len(table), keys=tuple(table))


def refine_roles(g: CitationGraph, roles: RoleAssignment, iterations: int = 1) -> RoleAssignment:
    """Weisfeiler-Lehman refinement: split each role by the multiset of neighbour roles.

    After ``k`` iterations two nodes share a role only if their ``k``-hop
    neighbourhoods look alike role-wise. New roles are numbered in order of
    first appearance by node index; keys become ``(old role, neighbour roles)``.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    for _ in range(iterations):
        table: dict[tuple, int] = {}
        new = np.empty(g.n_nodes, dtype=np.int64)
        old = roles.roles
        for i in range(g.n_nodes):
            key = (int(old[i]), tuple(sorted(old[g.neighbors(i)].tolist())))
            new[i] = table.setdefault(key, len(table))
        roles = RoleAssignment(roles=new, n_roles=len(table), keys=tuple(table))
    return roles

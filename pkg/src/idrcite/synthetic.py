"""Planted-partition graphs with known communities, used as ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CitationGraph


@dataclass(frozen=True)
class PlantedPartition:
    graph: CitationGraph
    blocks: np.ndarray
    n_cross_edges: int


def planted_partition(
    n_blocks: int = 5, block_size: int = 400, p_in: float = 0.02, p_out: float = 0.002, seed: int = 0
) -> PlantedPartition:
    """Random graph where each pair is linked with ``p_in`` inside a block, ``p_out`` across.

    Blocks double as category labels (``block0``, ``block1``, ...).
    """
    n = n_blocks * block_size
    rng = np.random.default_rng(seed)
    blocks = np.repeat(np.arange(n_blocks), block_size)
    iu, ju = np.triu_indices(n, k=1)
    same = blocks[iu] == blocks[ju]
    keep = rng.random(len(iu)) < np.where(same, p_in, p_out)
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    g = CitationGraph([str(i) for i in range(n)], edges, blocks, [f"block{b}" for b in range(n_blocks)])
    return PlantedPartition(graph=g, blocks=blocks, n_cross_edges=int((keep & ~same).sum()))

"""Experiment configuration: a YAML file whose keys mirror the CLI flags."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, TextIO

import yaml

from .distances import ALL_KINDS, DistanceKind
from .embeddings import DEFAULT_DIM, METHODS, SkipGramConfig, WalkConfig
from .graph import DEFAULT_RATIOS
from .linkpred import MLPConfig, PipelineConfig


@dataclass(frozen=True)
class ExperimentConfig:
    # inputs: a graph cache from `ingest`, or raw edge/label files
    graph: str | None = None
    edges: str | None = None
    labels: str | None = None
    category_matrix: str | None = None  # defaults to the matrix built from the graph's own labels

    methods: tuple[str, ...] = ("role2vec",)
    dims: int = DEFAULT_DIM
    num_walks: int = 10
    walk_length: int = 80
    p: float = 1.0
    q: float = 1.0
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    role_level: bool = False
    wl_iterations: int = 1

    hidden: int = 128
    mlp_learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 256
    mlp_epochs: int = 200
    patience: int = 10
    symmetrize: bool = False

    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    # distance analyses run on the first seed's split
    distance_kinds: tuple[str, ...] = ()
    bins: int = 20
    bin_width: float | None = None
    min_count: int = 25
    regression: str = "bins"  # or "edges"
    betweenness: bool = False

    out: str = "run"

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {list(self.methods)}")
        kinds = {k.value for k in ALL_KINDS}
        bad = [k for k in self.distance_kinds if k not in kinds]
        if bad:
            raise ValueError(f"unknown distance kind(s) {bad}; expected some of {sorted(kinds)}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if len(self.ratios) != 3:
            raise ValueError("ratios must have three entries (train, validation, test)")
        if self.regression not in ("bins", "edges"):
            raise ValueError("regression must be 'bins' or 'edges'")
        if self.graph is None and self.edges is None:
            raise ValueError("config needs a graph cache or an edge file")
        # building the sub-configs validates their ranges too
        self.pipeline()

    @property
    def kinds(self) -> tuple[DistanceKind, ...]:
        return tuple(DistanceKind(k) for k in self.distance_kinds)

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            walk=WalkConfig(walks_per_node=self.num_walks, walk_length=self.walk_length, p=self.p, q=self.q),
            skipgram=SkipGramConfig(window=self.window, negatives_per_positive=self.negatives,
                                    epochs=self.epochs, initial_learning_rate=self.learning_rate),
            mlp=MLPConfig(hidden=self.hidden, learning_rate=self.mlp_learning_rate, momentum=self.momentum,
                          batch_size=self.batch_size, epochs=self.mlp_epochs, patience=self.patience,
                          symmetrize=self.symmetrize),
            dim=self.dims,
            ratios=tuple(self.ratios),
            role_level=self.role_level,
            wl_iterations=self.wl_iterations,
        )

    def to_dict(self) -> dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_TUPLE_FIELDS = {f.name for f in fields(ExperimentConfig) if str(f.type).startswith("tuple")}


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    data = {k: tuple(v) if k in _TUPLE_FIELDS and v is not None else v for k, v in data.items()}
    return ExperimentConfig(**data)


def read_config(source: TextIO | str | Path) -> ExperimentConfig:
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return read_config(fh)
    data = yaml.safe_load(source) or {}
    if not isinstance(data, dict):
        raise ValueError("config file must be a mapping of keys to values")
    return config_from_dict(data)


def write_config(cfg: ExperimentConfig, sink: TextIO) -> None:
    yaml.safe_dump(cfg.to_dict(), sink, sort_keys=False, default_flow_style=None)


def default_config_dict() -> dict[str, Any]:
    """Every field with its default (inputs left empty)."""
    return {f.name: list(f.default) if isinstance(f.default, tuple) else f.default
            for f in fields(ExperimentConfig)}


__all__ = ["ExperimentConfig", "config_from_dict", "default_config_dict", "read_config", "write_config"]

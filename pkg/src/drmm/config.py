"""Experiment configuration: a dataclass loaded from ``key = value`` files.

Every field below is a valid key. Lists are comma-separated. Relative paths
are resolved against the config file's directory.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .firststage import MODELS, RetrievalParams
from .model import NetworkConfig, parse_variant
from .train import TrainConfig

PATH_KEYS = ("corpus", "topics", "qrels", "embeddings", "index_dir", "output_dir", "stoplist")


@dataclass
class ExperimentConfig:
    corpus: str = ""
    corpus_format: str = "auto"
    topics: str = ""
    qrels: str = ""
    embeddings: str = ""
    embedding_format: str = "text"
    index_dir: str = ""
    output_dir: str = "experiment"
    stoplist: str = ""
    stemmer: str = "porter"
    field: str = "title"

    variant: str = "LCHxIDF"
    layer_sizes: tuple[int, ...] = (30, 5, 1)

    first_stage: str = "QL"
    mu: float = 2500.0
    k1: float = 1.2
    b: float = 0.75
    rerank_depth: int = 2000
    output_depth: int = 1000

    folds: int = 5
    fold_seed: int = 0
    validation_fraction: float = 0.2
    learning_rates: tuple[float, ...] = (0.1,)
    batch_size: int = 20
    adagrad_epsilon: float = 1e-8
    max_epochs: int = 30
    patience: int = 5
    negatives_per_positive: int = 1
    train_seed: int = 0
    init_seed: int = 0

    fisher_iterations: int = 100_000
    fisher_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.rerank_depth >= self.output_depth >= 1:
            raise ConfigError("need rerank_depth >= output_depth >= 1")
        try:
            parse_variant(self.variant)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.first_stage not in MODELS:
            raise ConfigError(f"first_stage must be one of {MODELS}")
        if self.field not in ("title", "desc"):
            raise ConfigError("field must be 'title' or 'desc'")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie in (0, 1)")
        if not self.learning_rates:
            raise ConfigError("learning_rates must list at least one value")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        try:
            self.retrieval_params()
            self.train_configs()
            NetworkConfig(self.layer_sizes, "IDF", self.input_mode)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    @property
    def input_mode(self) -> str:
        return parse_variant(self.variant)[0]

    @property
    def gating(self) -> str:
        return parse_variant(self.variant)[1]

    @property
    def bins(self) -> int:
        return self.layer_sizes[0]

    def retrieval_params(self, top_k: int | None = None) -> RetrievalParams:
        return RetrievalParams(self.mu, self.k1, self.b, top_k or self.rerank_depth)

    def network_config(self, embedding_dim: int | None = None) -> NetworkConfig:
        return NetworkConfig(self.layer_sizes, self.gating, self.input_mode, embedding_dim)

    def train_configs(self) -> list[TrainConfig]:
        return [TrainConfig(learning_rate=lr, batch_size=self.batch_size, adagrad_epsilon=self.adagrad_epsilon,
                            max_epochs=self.max_epochs, patience=self.patience,
                            negatives_per_positive=self.negatives_per_positive, seed=self.train_seed)
                for lr in self.learning_rates]

    def dump(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _coerce(name: str, raw: str, default):
    if isinstance(default, tuple):
        kind = type(default[0]) if default else str
        items = [x.strip() for x in raw.split(",") if x.strip()]
        return tuple(kind(x) for x in items)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_assignments(lines, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def make_config(values: Mapping[str, str]) -> ExperimentConfig:
    defaults = {f.name: f.default for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in values.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            value = _coerce(key, raw, defaults[key])
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
        kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path | None, overrides: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Read a config file (optional) and apply ``key -> value`` overrides."""
    values: dict[str, str] = {}
    base = None
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        values = parse_assignments(path.read_text("utf-8").splitlines(), str(path))
        base = path.parent
    merged = {k: (str(base / v) if base and k in PATH_KEYS and v and not Path(v).is_absolute() else v)
              for k, v in values.items()}
    merged.update(overrides or {})
    return make_config(merged)

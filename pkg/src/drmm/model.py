"""The DRMM scoring network.

Each query term's input vector goes through the same stack of tanh layers to
a scalar; a softmax term gate (over term vectors, IDF values, or uniform)
mixes the per-term scalars into the document score. Parameters live in a
plain ``dict[str, np.ndarray]`` keyed ``W1, b1, ..., WL, bL, wg``.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

GATINGS = ("TV", "IDF", "UNI")

Params = dict[str, np.ndarray]


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple[int, ...] = (30, 5, 1)
    gating: str = "IDF"
    input_mode: str = "LCH"
    embedding_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        if len(self.layer_sizes) < 2 or self.layer_sizes[-1] != 1:
            raise ValueError("layer_sizes must have at least two entries and end in 1")
        if self.gating not in GATINGS:
            raise ValueError(f"unknown gating {self.gating!r}; expected one of {GATINGS}")
        if self.gating == "TV" and not self.embedding_dim:
            raise ValueError("TV gating needs embedding_dim")

    @property
    def depth(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def gate_dim(self) -> int:
        return {"TV": self.embedding_dim or 0, "IDF": 1, "UNI": 0}[self.gating]

    @property
    def variant(self) -> str:
        return f"{self.input_mode}x{self.gating}"

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        for l in range(1, self.depth + 1):
            shapes[f"W{l}"] = (self.layer_sizes[l], self.layer_sizes[l - 1])
            shapes[f"b{l}"] = (self.layer_sizes[l],)
        if self.gating != "UNI":
            shapes["wg"] = (self.gate_dim,)
        return shapes


def init_params(config: NetworkConfig, seed: int = 0) -> Params:
    """Glorot-uniform weights, zero biases, zero gate weights."""
    rng = np.random.default_rng(seed)
    params = {}
    for l in range(1, config.depth + 1):
        fan_out, fan_in = config.layer_sizes[l], config.layer_sizes[l - 1]
        r = np.sqrt(6.0 / (fan_in + fan_out))
        params[f"W{l}"] = rng.uniform(-r, r, size=(fan_out, fan_in))
        params[f"b{l}"] = np.zeros(fan_out)
    if config.gating != "UNI":
        params["wg"] = np.zeros(config.gate_dim)
    return params


def check_params(params: Params, config: NetworkConfig) -> None:
    shapes = config.param_shapes()
    if set(params) != set(shapes):
        raise ValueError(f"parameter keys {sorted(params)} != expected {sorted(shapes)}")
    for name, shape in shapes.items():
        if params[name].shape != shape:
            raise ValueError(f"{name} has shape {params[name].shape}, expected {shape}")
        if not np.all(np.isfinite(params[name])):
            raise ValueError(f"{name} has non-finite entries")


def _layers(z0: np.ndarray, params: Params) -> list[np.ndarray]:
    """Activations [z0, z1, ..., zL] for a batch of inputs (rows)."""
    acts = [z0]
    l = 1
    while f"W{l}" in params:
        W, b = params[f"W{l}"], params[f"b{l}"]
        if acts[-1].shape[-1] != W.shape[1]:
            raise ValueError(f"layer {l} expects input size {W.shape[1]}, got {acts[-1].shape[-1]}")
        acts.append(np.tanh(acts[-1] @ W.T + b))
        l += 1
    return acts


def term_forward(z0, params: Params) -> float:
    """Matching-network output z^(L) for one query term's input vector."""
    return float(_layers(np.asarray(z0, dtype=np.float64)[None, :], params)[-1][0, 0])


def term_outputs(Z0: np.ndarray, params: Params) -> np.ndarray:
    """z^(L) for every row of ``Z0`` (M x B), shared weights."""
    return _layers(np.asarray(Z0, dtype=np.float64), params)[-1][:, 0]


def gate_logits(features: np.ndarray, params: Params, gating: str) -> np.ndarray:
    if gating == "UNI":
        return np.zeros(len(features))
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X @ params["wg"]


def gate_weights(features, params: Params, gating: str) -> np.ndarray:
    """Softmax gates over query terms (max-subtracted). UNI gives exactly 1/M."""
    M = len(features)
    if M == 0:
        raise ValueError("no query terms")
    if gating == "UNI":
        return np.full(M, 1.0 / M)
    logits = gate_logits(features, params, gating)
    e = np.exp(logits - logits.max())
    return e / e.sum()


@dataclass
class QueryInputs:
    """Network inputs for one (query, document) pair.

    ``Z0`` holds one input vector per query term (M x B); ``X`` the gate
    features (M x d for TV, M for IDF, ignored for UNI).
    """

    Z0: np.ndarray
    X: np.ndarray


def score(inputs: QueryInputs, params: Params, gating: str) -> float:
    z = term_outputs(inputs.Z0, params)
    g = gate_weights(inputs.X, params, gating)
    return float(g @ z)


def score_batch(Z0s: np.ndarray, X: np.ndarray, params: Params, gating: str) -> np.ndarray:
    """Scores for N documents against one query: ``Z0s`` is N x M x B."""
    Z0s = np.asarray(Z0s, dtype=np.float64)
    n, m, b = Z0s.shape
    z = term_outputs(Z0s.reshape(n * m, b), params).reshape(n, m)
    return z @ gate_weights(X, params, gating)


def _score_and_grad(inputs: QueryInputs, params: Params, gating: str, upstream: float, grads: Params):
    """Accumulate ``upstream * d score / d params`` into ``grads``; return the score."""
    acts = _layers(np.asarray(inputs.Z0, dtype=np.float64), params)
    z = acts[-1][:, 0]
    g = gate_weights(inputs.X, params, gating)
    s = float(g @ z)
    if gating != "UNI":
        X = np.asarray(inputs.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        # d s / d logit_i = g_i (z_i - s)
        grads["wg"] += upstream * (X.T @ (g * (z - s)))
    delta = (upstream * g)[:, None]  # d(upstream*s)/d zL, shape M x 1
    L = len(acts) - 1
    for l in range(L, 0, -1):
        delta = delta * (1.0 - acts[l] ** 2)
        grads[f"W{l}"] += delta.T @ acts[l - 1]
        grads[f"b{l}"] += delta.sum(axis=0)
        if l > 1:
            delta = delta @ params[f"W{l}"]
    return s


def zeros_like(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def hinge_loss(s_plus: float, s_minus: float) -> float:
    return max(0.0, 1.0 - s_plus + s_minus)


def triple_loss(pos: QueryInputs, neg: QueryInputs, params: Params, gating: str) -> float:
    return hinge_loss(score(pos, params, gating), score(neg, params, gating))


def gradients(pos: QueryInputs, neg: QueryInputs, params: Params, gating: str) -> tuple[float, Params]:
    """Hinge loss of one (q, d+, d-) triple and its exact gradient.

    Inside the flat region (margin met) every gradient entry is exactly zero.
    """
    s_pos = score(pos, params, gating)
    s_neg = score(neg, params, gating)
    loss = hinge_loss(s_pos, s_neg)
    grads = zeros_like(params)
    if loss > 0.0:
        _score_and_grad(pos, params, gating, -1.0, grads)
        _score_and_grad(neg, params, gating, 1.0, grads)
    return loss, grads


def param_count(config: NetworkConfig) -> dict[str, int]:
    shapes = config.param_shapes()
    matching = sum(int(np.prod(s)) for k, s in shapes.items() if k != "wg")
    gate = int(np.prod(shapes["wg"])) if "wg" in shapes else 0
    return {"matching": matching, "gating": gate}


@dataclass
class DrmmModel:
    config: NetworkConfig
    params: Params
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @classmethod
    def create(cls, config: NetworkConfig, seed: int = 0) -> "DrmmModel":
        return cls(config, init_params(config, seed), seed)

    def score(self, inputs: QueryInputs) -> float:
        return score(inputs, self.params, self.config.gating)

    def save(self, path: str | Path) -> None:
        """Checkpoint as ``.npz``: arrays stored verbatim, config as JSON."""
        header = {"config": asdict(self.config), "seed": self.seed, "meta": self.meta}
        arrays = {f"param_{k}": v for k, v in self.params.items()}
        with open(path, "wb") as f:
            np.savez(f, header=np.array(json.dumps(header, sort_keys=True)), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "DrmmModel":
        with np.load(path) as data:
            header = json.loads(str(data["header"]))
            params = {k[len("param_"):]: data[k].copy() for k in data.files if k.startswith("param_")}
        config = NetworkConfig(**header["config"])
        check_params(params, config)
        return cls(config, params, header["seed"], header.get("meta", {}))


def parse_variant(variant: str) -> tuple[str, str]:
    """``"LCHxIDF"`` / ``"LCH×IDF"`` -> ("LCH", "IDF")."""
    m = re.fullmatch(r"(CH|NH|LCH|KMAX)[x×*](TV|IDF|UNI)", variant.strip(), flags=re.IGNORECASE)
    if m is None:
        raise ValueError(f"bad variant {variant!r}; expected e.g. LCHxIDF")
    mode, gating = m.group(1).upper(), m.group(2).upper()
    if mode == "KMAX" and gating != "IDF":
        raise ValueError("K-max input is only defined with IDF gating")
    return mode, gating


def stack_inputs(z0s: Sequence[np.ndarray], features: Sequence) -> QueryInputs:
    return QueryInputs(np.vstack(z0s), np.asarray(features, dtype=np.float64))

"""Pairwise hinge-loss training with Adagrad mini-batches and early stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .model import DrmmModel, Params, QueryInputs, gradients, hinge_loss, zeros_like

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingTriple:
    query_id: str
    doc_plus: str
    doc_minus: str


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    batch_size: int = 20
    adagrad_epsilon: float = 1e-8
    max_epochs: int = 30
    patience: int = 5
    negatives_per_positive: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")


@dataclass
class TripleSample:
    triples: list[TrainingTriple]
    skipped_queries: list[str] = field(default_factory=list)
    unjudged_negatives: int = 0


def generate_triples(qrels: Mapping[str, Mapping[str, int]], candidates: Mapping[str, Sequence[str]],
                     rng: np.random.Generator, negatives_per_positive: int = 1,
                     query_ids: Sequence[str] | None = None) -> TripleSample:
    """Sample (q, d+, d-) triples from first-stage candidates.

    Every candidate judged relevant is a positive; its negatives are drawn
    uniformly from candidates with strictly lower relevance (unjudged counts
    as 0). Queries without a usable positive are skipped and reported.
    """
    query_ids = sorted(candidates) if query_ids is None else list(query_ids)
    out = TripleSample([])
    for qid in query_ids:
        judged = qrels.get(qid, {})
        cands = list(dict.fromkeys(candidates.get(qid, [])))
        rel = {d: judged.get(d, 0) for d in cands}
        positives = [d for d in cands if rel[d] >= 1]
        made = 0
        for pos in positives:
            pool = [d for d in cands if rel[d] < rel[pos]]
            if not pool:
                continue
            n = negatives_per_positive
            picks = rng.choice(len(pool), size=n, replace=n > len(pool))
            for j in picks:
                neg = pool[int(j)]
                out.unjudged_negatives += neg not in judged
                out.triples.append(TrainingTriple(qid, pos, neg))
                made += 1
        if made == 0:
            out.skipped_queries.append(qid)
    if out.skipped_queries:
        log.debug("%d queries yielded no triples", len(out.skipped_queries))
    return out


@dataclass
class AdagradState:
    accum: Params

    @classmethod
    def zeros(cls, params: Params) -> "AdagradState":
        return cls(zeros_like(params))


def adagrad_step(params: Params, grads: Params, state: AdagradState, lr: float, eps: float = 1e-8) -> None:
    """In-place update: accum += g^2; theta -= lr * g / (sqrt(accum) + eps).

    Raises FloatingPointError and leaves everything untouched on a non-finite
    gradient.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name}; step aborted")
    for name, g in grads.items():
        acc = state.accum[name]
        acc += g * g
        step = np.zeros_like(g)
        nz = acc > 0
        step[nz] = lr * g[nz] / (np.sqrt(acc[nz]) + eps)
        params[name] -= step


def batch_gradient(batch: Sequence[tuple[QueryInputs, QueryInputs]], params: Params,
                   gating: str) -> tuple[float, Params]:
    """Mean loss and mean gradient over a batch of (positive, negative) inputs."""
    total = zeros_like(params)
    loss = 0.0
    for pos, neg in batch:
        l, g = gradients(pos, neg, params, gating)
        loss += l
        for k in total:
            total[k] += g[k]
    n = len(batch)
    return loss / n, {k: v / n for k, v in total.items()}


@dataclass
class EpochLog:
    epoch: int
    loss: float
    triples: int
    validation_map: float | None

    def line(self) -> str:
        v = "nan" if self.validation_map is None else f"{self.validation_map:.6f}"
        return f"epoch={self.epoch}\tloss={self.loss:.6f}\ttriples={self.triples}\tval_map={v}"


@dataclass
class TrainResult:
    model: DrmmModel
    best_epoch: int
    log: list[EpochLog]
    stopped_early: bool

    def log_text(self) -> str:
        return "\n".join(e.line() for e in self.log) + "\n"


TripleSource = Callable[[np.random.Generator], Sequence[TrainingTriple]]


def train(model: DrmmModel, triples: Sequence[TrainingTriple] | TripleSource,
          inputs: Callable[[str, str], QueryInputs], config: TrainConfig,
          validate: Callable[[Params], float] | None = None) -> TrainResult:
    """Train ``model`` in place; return the best-validation checkpoint.

    ``triples`` is either a fixed list (reshuffled every epoch) or a callable
    drawing a fresh sample from the epoch RNG. ``inputs(qid, external_id)``
    yields the network inputs; ``validate(params)`` returns validation MAP.
    Without ``validate`` the final epoch's parameters are returned.
    """
    rng = np.random.default_rng(config.seed)
    gating = model.config.gating
    params = model.params
    state = AdagradState.zeros(params)
    best_map = -np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    best_epoch = 0
    history: list[EpochLog] = []
    since_best = 0
    stopped = False
    for epoch in range(1, config.max_epochs + 1):
        sample = list(triples(rng) if callable(triples) else triples)
        if not sample:
            raise ValueError("no training triples")
        order = rng.permutation(len(sample))
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [sample[i] for i in order[start:start + config.batch_size]]
            pairs = [(inputs(t.query_id, t.doc_plus), inputs(t.query_id, t.doc_minus)) for t in batch]
            loss, grads = batch_gradient(pairs, params, gating)
            losses.append(loss * len(batch))
            adagrad_step(params, grads, state, config.learning_rate, config.adagrad_epsilon)
        epoch_loss = float(np.sum(losses) / len(sample))
        vmap = validate(params) if validate is not None else None
        history.append(EpochLog(epoch, epoch_loss, len(sample), vmap))
        log.info(history[-1].line())
        if vmap is None:
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            continue
        if vmap > best_map:
            best_map, best_epoch, since_best = vmap, epoch, 0
            best_params = {k: v.copy() for k, v in params.items()}
        else:
            since_best += 1
            if since_best >= config.patience:
                stopped = True
                break
    model.params = best_params
    model.meta = dict(model.meta, best_epoch=best_epoch, train_seed=config.seed)
    return TrainResult(model, best_epoch, history, stopped)


def pairwise_accuracy(model: DrmmModel, triples: Sequence[TrainingTriple],
                      inputs: Callable[[str, str], QueryInputs]) -> float:
    if not triples:
        return float("nan")
    wins = sum(model.score(inputs(t.query_id, t.doc_plus)) > model.score(inputs(t.query_id, t.doc_minus))
               for t in triples)
    return wins / len(triples)


def mean_hinge(model: DrmmModel, triples: Sequence[TrainingTriple],
               inputs: Callable[[str, str], QueryInputs]) -> float:
    return float(np.mean([hinge_loss(model.score(inputs(t.query_id, t.doc_plus)),
                                     model.score(inputs(t.query_id, t.doc_minus))) for t in triples]))

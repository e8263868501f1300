"""End-to-end plumbing: queries, first-stage runs, reranking, and the k-fold experiment."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .config import ExperimentConfig
from .embed import EmbeddingStore, load_embeddings
from .errors import DataError, EmptyQueryError, StageError
from .evaluate import (EvalReport, FoldPlan, add_significance, cross_validate, evaluate_run,
                       mean_average_precision, report_from_folds)
from .features import Featurizer
from .firststage import RetrievalParams, retrieve
from .histogram import InputSpec
from .index import InvertedIndex, build_index
from .model import DrmmModel, NetworkConfig, score_batch
from .textpipe import StopList, TextPipeline
from .train import TrainConfig, TrainResult, generate_triples, train
from .trec import Topic, read_corpus, read_qrels, read_topics, write_run

log = logging.getLogger(__name__)

Scored = list[tuple[str, float]]


def prepare_queries(topics: Sequence[Topic], field: str, pipeline: TextPipeline,
                    stoplist: StopList) -> tuple[dict[str, list[str]], list[str]]:
    """Normalized, stopped query terms per topic, plus ids of topics left empty."""
    queries, skipped = {}, []
    for t in topics:
        terms = pipeline.query_terms(t.text(field), stoplist)
        if terms:
            queries[t.query_id] = terms
        else:
            skipped.append(t.query_id)
            log.warning("query %s is empty after stopping; skipped", t.query_id)
    return queries, skipped


def first_stage(index: InvertedIndex, queries: Mapping[str, Sequence[str]], model: str,
                params: RetrievalParams) -> dict[str, Scored]:
    run = {}
    for qid in sorted(queries):
        try:
            docs = retrieve(queries[qid], index, model, params)
        except EmptyQueryError:
            log.warning("query %s is empty; skipped", qid)
            continue
        run[qid] = [(d.external_id, d.score) for d in docs]
    return run


def rank_pairs(pairs: Sequence[tuple[str, float]], depth: int | None = None) -> Scored:
    ranked = sorted(pairs, key=lambda p: (-p[1], p[0]))
    return ranked if depth is None else ranked[:depth]


def rerank(model: DrmmModel, featurizer: Featurizer, candidates: Mapping[str, Sequence[str]],
           query_ids: Sequence[str] | None = None, depth: int | None = None,
           params=None) -> dict[str, Scored]:
    """Rescore each query's candidates with DRMM; output is a permutation prefix."""
    params = model.params if params is None else params
    query_ids = sorted(candidates) if query_ids is None else query_ids
    out = {}
    for qid in query_ids:
        docs = list(candidates.get(qid, []))
        if not docs:
            out[qid] = []
            continue
        doc_ids = [featurizer.index.doc_id(d) for d in docs]
        Z = np.stack([featurizer.inputs(qid, i).Z0 for i in doc_ids])
        scores = score_batch(Z, featurizer.gate_features(qid), params, model.config.gating)
        out[qid] = rank_pairs(list(zip(docs, scores.tolist())), depth)
    return out


def rankings(run: Mapping[str, Scored]) -> dict[str, list[str]]:
    return {q: [d for d, _ in docs] for q, docs in run.items()}


@dataclass
class DrmmRanker:
    """A trained model bound to its featurizer and candidate lists."""

    model: DrmmModel
    featurizer: Featurizer
    candidates: Mapping[str, Sequence[str]]
    depth: int
    result: TrainResult | None = None

    def scored(self, query_ids: Sequence[str]) -> dict[str, Scored]:
        return rerank(self.model, self.featurizer, self.candidates, query_ids, self.depth)

    def __call__(self, query_ids: Sequence[str]) -> dict[str, list[str]]:
        return rankings(self.scored(query_ids))


def split_validation(query_ids: Sequence[str], fraction: float, seed: int) -> tuple[list[str], list[str]]:
    ids = sorted(query_ids)
    n_val = max(1, int(round(fraction * len(ids))))
    if n_val >= len(ids):
        raise ValueError("validation split leaves no training queries")
    perm = np.random.default_rng(seed).permutation(len(ids))
    val = sorted(ids[i] for i in perm[:n_val])
    return sorted(set(ids) - set(val)), val


def fit_drmm(net: NetworkConfig, tc: TrainConfig, featurizer: Featurizer, qrels,
             candidates: Mapping[str, Sequence[str]], train_qids: Sequence[str], depth: int,
             validation_fraction: float = 0.2, split_seed: int = 0, init_seed: int = 0,
             map_cutoff: int = 1000) -> DrmmRanker:
    """Train on ``train_qids`` with an inner validation split for early stopping."""
    inner, val = split_validation(train_qids, validation_fraction, split_seed)
    index = featurizer.index

    def sample(rng):
        return generate_triples(qrels, candidates, rng, tc.negatives_per_positive, inner).triples

    def inputs(qid, ext):
        return featurizer.inputs(qid, index.doc_id(ext))

    def validate(params):
        run = rerank(model, featurizer, candidates, val, depth, params=params)
        return mean_average_precision(rankings(run), qrels, val, map_cutoff)

    model = DrmmModel.create(net, init_seed)
    result = train(model, sample, inputs, tc, validate)
    return DrmmRanker(result.model, featurizer, candidates, depth, result)


# -- full experiment ----------------------------------------------------------

@dataclass
class ExperimentResult:
    drmm: EvalReport
    baseline: EvalReport
    drmm_run: dict[str, Scored]
    baseline_run: dict[str, Scored]
    train_logs: list[TrainResult] = field(default_factory=list)
    output_dir: Path | None = None


@dataclass
class Collection:
    index: InvertedIndex
    store: EmbeddingStore
    queries: dict[str, list[str]]
    qrels: dict[str, dict[str, int]]
    skipped: list[str]


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as e:  # noqa: BLE001 - re-raised with stage context
                raise StageError(name, e) from e
        return inner
    return wrap


def load_or_build_index(config: ExperimentConfig, pipeline: TextPipeline) -> InvertedIndex:
    index_dir = Path(config.index_dir) if config.index_dir else Path(config.output_dir) / "index"
    if (index_dir / "meta.json").exists():
        log.info("loading index from %s", index_dir)
        return InvertedIndex.load(index_dir)
    index = build_index(read_corpus(config.corpus, config.corpus_format), pipeline)
    index.save(index_dir)
    return index


def load_collection(config: ExperimentConfig) -> Collection:
    pipeline = TextPipeline(config.stemmer)
    index = _stage("index")(load_or_build_index)(config, pipeline)
    stoplist = pipeline.load_stoplist(config.stoplist or None)
    topics = _stage("topics")(read_topics)(config.topics)
    queries, skipped = prepare_queries(topics, config.field, pipeline, stoplist)
    qrels = _stage("qrels")(read_qrels)(config.qrels)
    store = _stage("embeddings")(load_embeddings)(config.embeddings, config.embedding_format, pipeline)
    return Collection(index, store, queries, qrels, skipped)


def run_experiment(config: ExperimentConfig, collection: Collection | None = None,
                   write: bool = True) -> ExperimentResult:
    """First stage, k-fold DRMM training/reranking, evaluation, significance."""
    out = Path(config.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(config.dump())
    col = collection or load_collection(config)
    index, queries, qrels = col.index, col.queries, col.qrels

    fs_run = _stage("first-stage")(first_stage)(index, queries, config.first_stage, config.retrieval_params())
    candidates = rankings(fs_run)
    baseline_run = {q: docs[:config.output_depth] for q, docs in fs_run.items()}

    net = config.network_config(col.store.dimension)
    featurizer = Featurizer(index, col.store, InputSpec(config.input_mode, config.bins), net.gating, queries)
    cov = featurizer.coverage_report()
    log.info("query term coverage: %d in vocabulary, %d OOV", cov["in_vocabulary"], cov["oov"])

    train_logs: list[TrainResult] = []
    fold_counter = iter(range(10 ** 9))

    def fit(tc: TrainConfig, train_qids):
        n = next(fold_counter)
        ranker = fit_drmm(net, tc, featurizer, qrels, candidates, train_qids, config.output_depth,
                          config.validation_fraction, split_seed=config.fold_seed + n,
                          init_seed=config.init_seed, map_cutoff=config.output_depth)
        train_logs.append(ranker.result)
        return ranker

    qids = sorted(queries)
    name = f"DRMM_{config.variant}"
    report = _stage("cross-validation")(cross_validate)(
        qids, qrels, config.train_configs(), fit, config.folds, config.fold_seed,
        config.output_depth, name)

    drmm_run: dict[str, Scored] = {}
    for fr in report.folds:
        drmm_run.update(fr.ranker.scored(fr.test_queries))

    plan = _fold_plan(report)
    base_pq, base_exc = evaluate_run(rankings(baseline_run), qrels, qids, config.output_depth)
    baseline = report_from_folds(config.first_stage, base_pq, plan, base_exc)
    add_significance(report, baseline, config.fisher_iterations, config.fisher_seed)

    result = ExperimentResult(report, baseline, drmm_run, baseline_run, train_logs, out if write else None)
    if write:
        _stage("write")(write_outputs)(result, config)
    return result


def _fold_plan(report: EvalReport) -> FoldPlan:
    assignment = {q: fr.fold for fr in report.folds for q in fr.test_queries}
    return FoldPlan(len(report.folds), -1, assignment)


def write_outputs(result: ExperimentResult, config: ExperimentConfig) -> None:
    out = Path(config.output_dir)
    tag = f"DRMM_{config.variant}"
    write_run(result.baseline_run, out / "firststage.run", config.first_stage)
    write_run(result.drmm_run, out / "drmm.run", tag)
    (out / "report.txt").write_text(result.drmm.table([result.baseline]) + "\n")
    lines = [f"{result.drmm.name}\t{l}" for l in result.drmm.kv_lines()]
    lines += [f"{result.baseline.name}\t{l}" for l in result.baseline.kv_lines()]
    (out / "report.tsv").write_text("\n".join(lines) + "\n")
    ckpt = out / "checkpoints"
    ckpt.mkdir(exist_ok=True)
    for fr in result.drmm.folds:
        fr.ranker.model.save(ckpt / f"fold{fr.fold}.npz")
    with open(out / "train.log", "w") as f:
        for i, tr in enumerate(result.train_logs):
            f.write(f"# run {i}\n{tr.log_text()}")


def check_candidates(index: InvertedIndex, candidates: Mapping[str, Sequence[str]]) -> None:
    for qid, docs in candidates.items():
        for d in docs:
            if d not in index.ext_to_doc:
                raise DataError(f"candidate document {d!r} for query {qid} is not in the index")

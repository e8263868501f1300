"""Retrieval metrics, k-fold cross-validation and the Fisher randomization test."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

Qrels = Mapping[str, Mapping[str, int]]
METRICS = ("map", "ndcg_cut_20", "P_20")


def _judgments(qrels: Qrels, query_id: str) -> Mapping[str, int]:
    return qrels.get(query_id, {})


def relevant_count(qrels: Qrels, query_id: str) -> int:
    return sum(1 for r in _judgments(qrels, query_id).values() if r >= 1)


def average_precision(ranking: Sequence[str], qrels: Qrels, query_id: str, cutoff: int = 1000) -> float:
    judged = _judgments(qrels, query_id)
    R = relevant_count(qrels, query_id)
    if R == 0:
        return 0.0
    hits = 0
    total = 0.0
    for k, doc in enumerate(ranking[:cutoff], start=1):
        if judged.get(doc, 0) >= 1:
            hits += 1
            total += hits / k
    return total / R


def ndcg_at(ranking: Sequence[str], qrels: Qrels, query_id: str, k: int = 20) -> float:
    judged = _judgments(qrels, query_id)
    dcg = sum((2 ** max(judged.get(doc, 0), 0) - 1) / math.log2(i + 1)
              for i, doc in enumerate(ranking[:k], start=1))
    ideal = sorted((r for r in judged.values() if r > 0), reverse=True)[:k]
    idcg = sum((2 ** r - 1) / math.log2(i + 1) for i, r in enumerate(ideal, start=1))
    return dcg / idcg if idcg > 0 else 0.0


def precision_at(ranking: Sequence[str], qrels: Qrels, query_id: str, k: int = 20) -> float:
    judged = _judgments(qrels, query_id)
    return sum(1 for doc in ranking[:k] if judged.get(doc, 0) >= 1) / k


def query_metrics(ranking: Sequence[str], qrels: Qrels, query_id: str, map_cutoff: int = 1000) -> dict[str, float]:
    return {
        "map": average_precision(ranking, qrels, query_id, map_cutoff),
        "ndcg_cut_20": ndcg_at(ranking, qrels, query_id, 20),
        "P_20": precision_at(ranking, qrels, query_id, 20),
    }


def evaluate_run(run: Mapping[str, Sequence[str]], qrels: Qrels, query_ids: Sequence[str] | None = None,
                 map_cutoff: int = 1000) -> tuple[dict[str, dict[str, float]], list[str]]:
    """Per-query metrics ``{metric: {qid: value}}`` and the excluded query ids.

    Queries without any judged-relevant document are excluded. A query with
    judgments but no ranking scores zero.
    """
    query_ids = sorted(run) if query_ids is None else list(query_ids)
    per_query: dict[str, dict[str, float]] = {m: {} for m in METRICS}
    excluded = []
    for qid in query_ids:
        if relevant_count(qrels, qid) == 0:
            excluded.append(qid)
            continue
        for m, v in query_metrics(run.get(qid, []), qrels, qid, map_cutoff).items():
            per_query[m][qid] = v
    if excluded:
        log.info("%d queries without relevant judgments excluded from means", len(excluded))
    return per_query, excluded


def mean_average_precision(run: Mapping[str, Sequence[str]], qrels: Qrels,
                           query_ids: Sequence[str] | None = None, cutoff: int = 1000) -> float:
    per_query, _ = evaluate_run(run, qrels, query_ids, cutoff)
    values = list(per_query["map"].values())
    return float(np.mean(values)) if values else 0.0


# -- significance ---------------------------------------------------------

def fisher_randomization(a: Sequence[float], b: Sequence[float], iterations: int = 100_000,
                         seed: int = 0, chunk: int = 10_000) -> float:
    """Two-sided paired randomization test on the mean difference.

    Each iteration flips the sign of every per-query difference with
    probability 1/2; p = (1 + #{|mean| >= |observed|}) / (1 + iterations).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"paired vectors differ in length: {len(a)} vs {len(b)}")
    if a.size == 0:
        return 1.0
    diff = a - b
    observed = abs(diff.mean())
    # relative slack so sign patterns equivalent up to rounding count as ties
    threshold = observed - 1e-12 * max(1.0, float(np.abs(diff).sum()))
    rng = np.random.default_rng(seed)
    extreme = 0
    done = 0
    while done < iterations:
        n = min(chunk, iterations - done)
        signs = rng.integers(0, 2, size=(n, diff.size), dtype=np.int8) * 2 - 1
        means = np.abs(signs @ diff) / diff.size
        extreme += int(np.count_nonzero(means >= threshold))
        done += n
    return (extreme + 1) / (iterations + 1)


# -- cross-validation -----------------------------------------------------

@dataclass
class FoldPlan:
    k: int
    seed: int
    assignment: dict[str, int]

    def folds(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for qid, f in sorted(self.assignment.items()):
            out[f].append(qid)
        return out

    def split(self, fold: int) -> tuple[list[str], list[str]]:
        test = [q for q, f in sorted(self.assignment.items()) if f == fold]
        train = [q for q, f in sorted(self.assignment.items()) if f != fold]
        return train, test


def make_folds(query_ids: Sequence[str], k: int = 5, seed: int = 0) -> FoldPlan:
    """Random partition into ``k`` folds whose sizes differ by at most one."""
    ids = sorted(set(query_ids))
    if len(ids) < k:
        raise ValueError(f"need at least {k} queries for {k}-fold cross-validation, got {len(ids)}")
    perm = np.random.default_rng(seed).permutation(len(ids))
    return FoldPlan(k, seed, {ids[j]: i % k for i, j in enumerate(perm)})


Ranker = Callable[[Sequence[str]], Mapping[str, Sequence[str]]]


@dataclass
class FoldResult:
    fold: int
    train_queries: list[str]
    test_queries: list[str]
    chosen: object
    train_map: float
    means: dict[str, float]
    ranker: object = None


@dataclass
class EvalReport:
    per_query: dict[str, dict[str, float]]
    means: dict[str, float]
    fold_means: list[dict[str, float]] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)
    p_values: dict[str, dict[str, float]] = field(default_factory=dict)
    folds: list[FoldResult] = field(default_factory=list)
    name: str = "run"

    def kv_lines(self) -> list[str]:
        """Machine-readable lines: ``metric <TAB> qid|all <TAB> value``."""
        lines = []
        for m in METRICS:
            for qid in sorted(self.per_query.get(m, {})):
                lines.append(f"{m}\t{qid}\t{self.per_query[m][qid]:.6f}")
            lines.append(f"{m}\tall\t{self.means[m]:.6f}")
        for other, pv in sorted(self.p_values.items()):
            for m in METRICS:
                if m in pv:
                    lines.append(f"p_{m}_vs_{other}\tall\t{pv[m]:.6f}")
        return lines

    def table(self, others: Sequence["EvalReport"] = ()) -> str:
        """Aligned plain-text summary; ``others`` add comparison rows."""
        rows = [self, *others]
        labels = [r.name for r in rows] + [f"p({self.name} vs {o})" for o in self.p_values]
        width = max(len(l) for l in labels) + 2
        head = "model".ljust(width) + "".join(m.rjust(13) for m in METRICS)
        out = [head, "-" * len(head)]
        for r in rows:
            out.append(r.name.ljust(width) + "".join(f"{r.means[m]:13.4f}" for m in METRICS))
        for other, pv in sorted(self.p_values.items()):
            out.append(f"p({self.name} vs {other})".ljust(width)
                       + "".join(f"{pv.get(m, float('nan')):13.4f}" for m in METRICS))
        if self.excluded:
            out.append(f"excluded (no relevant judgments): {len(self.excluded)} queries")
        return "\n".join(out)


def report_from_folds(name: str, per_query: dict[str, dict[str, float]], plan: FoldPlan,
                      excluded: Sequence[str] = ()) -> EvalReport:
    """Means are the average of fold-level means over folds with evaluated queries."""
    fold_means = []
    for test in plan.folds():
        fm = {}
        for m in METRICS:
            vals = [per_query[m][q] for q in test if q in per_query[m]]
            fm[m] = float(np.mean(vals)) if vals else float("nan")
        fold_means.append(fm)
    means = {m: float(np.nanmean([fm[m] for fm in fold_means])) for m in METRICS}
    return EvalReport(per_query, means, fold_means, sorted(excluded), name=name)


def add_significance(report: EvalReport, baseline: EvalReport, iterations: int = 100_000, seed: int = 0) -> None:
    pv = {}
    for m in METRICS:
        qids = sorted(set(report.per_query[m]) & set(baseline.per_query[m]))
        pv[m] = fisher_randomization([report.per_query[m][q] for q in qids],
                                     [baseline.per_query[m][q] for q in qids], iterations, seed)
    report.p_values[baseline.name] = pv


def cross_validate(query_ids: Sequence[str], qrels: Qrels, model_space: Sequence,
                   fit: Callable[[object, list[str]], Ranker], k: int = 5, seed: int = 0,
                   map_cutoff: int = 1000, name: str = "model") -> EvalReport:
    """k-fold protocol: per fold, pick the candidate with best training-fold MAP.

    ``fit(candidate, train_qids)`` returns a ranker mapping query ids to ranked
    external ids; any inner validation split for early stopping is ``fit``'s
    business. With a single candidate no selection run is needed.
    """
    if not model_space:
        raise ValueError("empty model space")
    plan = make_folds(query_ids, k, seed)
    per_query: dict[str, dict[str, float]] = {m: {} for m in METRICS}
    excluded: list[str] = []
    folds = []
    for f in range(k):
        train, test = plan.split(f)
        best = None
        for cand in model_space:
            ranker = fit(cand, train)
            train_map = (mean_average_precision(ranker(train), qrels, train, map_cutoff)
                         if len(model_space) > 1 else float("nan"))
            if best is None or train_map > best[1]:
                best = (cand, train_map, ranker)
        cand, train_map, ranker = best
        pq, exc = evaluate_run(ranker(test), qrels, test, map_cutoff)
        excluded.extend(exc)
        for m in METRICS:
            per_query[m].update(pq[m])
        folds.append(FoldResult(f, train, test, cand, train_map,
                                {m: float(np.mean(list(pq[m].values()))) if pq[m] else float("nan")
                                 for m in METRICS}, ranker))
        log.info("fold %d: chose %r (train MAP %.4f), test MAP %.4f", f, cand, train_map, folds[-1].means["map"])
    report = report_from_folds(name, per_query, plan, excluded)
    report.folds = folds
    return report

"""Query likelihood (Dirichlet) and BM25 candidate retrieval."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyQueryError
from .index import InvertedIndex

MODELS = ("QL", "BM25")


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: int
    external_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RetrievalParams:
    mu: float = 2500.0
    k1: float = 1.2
    b: float = 0.75
    top_k: int = 2000

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must lie in [0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


def _check_query(query_terms: Sequence[str]) -> Counter:
    if not query_terms:
        raise EmptyQueryError()
    return Counter(query_terms)


def ql_score(query_terms: Sequence[str], doc_id: int, index: InvertedIndex, mu: float = 2500.0) -> float:
    """Dirichlet-smoothed log query likelihood of one document."""
    qtf = _check_query(query_terms)
    total = index.stats.total_term_count
    length = index.doc_lengths[doc_id]
    score = 0.0
    for term, n in qtf.items():
        cf = index.collection_frequency(term)
        if cf == 0:
            continue
        score += n * np.log((index.tf(term, doc_id) + mu * cf / total) / (length + mu))
    return float(score)


def bm25_score(query_terms: Sequence[str], doc_id: int, index: InvertedIndex,
               k1: float = 1.2, b: float = 0.75) -> float:
    qtf = _check_query(query_terms)
    norm = k1 * (1 - b + b * index.doc_lengths[doc_id] / index.stats.avg_doc_length)
    score = 0.0
    for term, n in qtf.items():
        tf = index.tf(term, doc_id)
        if tf == 0:
            continue
        score += n * index.idf(term) * tf * (k1 + 1) / (tf + norm)
    return float(score)


def _candidate_scores(query_terms, index, model, params):
    """Scores for every doc containing at least one query term (vectorized)."""
    qtf = _check_query(query_terms)
    present = [(t, n) for t, n in qtf.items() if index.collection_frequency(t) > 0]
    if not present:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    postings = {t: index.postings(t) for t, _ in present}
    docs = np.unique(np.concatenate([postings[t][0] for t, _ in present]))
    lengths = index.doc_lengths[docs].astype(float)
    scores = np.zeros(len(docs))
    if model == "BM25":
        norm = params.k1 * (1 - params.b + params.b * lengths / index.stats.avg_doc_length)
    for term, n in present:
        pdocs, ptfs = postings[term]
        tf = np.zeros(len(docs))
        tf[np.searchsorted(docs, pdocs)] = ptfs
        if model == "QL":
            background = params.mu * index.collection_frequency(term) / index.stats.total_term_count
            scores += n * np.log((tf + background) / (lengths + params.mu))
        else:
            scores += n * index.idf(term) * tf * (params.k1 + 1) / (tf + norm)
    return docs, scores


def rank_scored(doc_ids, scores, index: InvertedIndex, top_k: int | None = None) -> list[ScoredDoc]:
    """Sort by descending score, ties by ascending external id, assign ranks."""
    order = sorted(range(len(doc_ids)), key=lambda i: (-scores[i], index.external_ids[doc_ids[i]]))
    if top_k is not None:
        order = order[:top_k]
    return [ScoredDoc(int(doc_ids[i]), index.external_ids[doc_ids[i]], float(scores[i]), r)
            for r, i in enumerate(order, start=1)]


def retrieve(query_terms: Sequence[str], index: InvertedIndex, model: str = "QL",
             params: RetrievalParams | None = None) -> list[ScoredDoc]:
    """Top ``params.top_k`` documents among those matching any query term."""
    if model not in MODELS:
        raise ValueError(f"unknown retrieval model {model!r}; expected one of {MODELS}")
    params = params or RetrievalParams()
    docs, scores = _candidate_scores(query_terms, index, model, params)
    return rank_scored(docs, scores, index, params.top_k)

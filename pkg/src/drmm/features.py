"""Builds network inputs for (query, document) pairs, with caching."""

from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np

from .embed import DocumentInteractor, EmbeddingStore
from .histogram import InputSpec
from .index import InvertedIndex
from .model import QueryInputs

log = logging.getLogger(__name__)


class Featurizer:
    """Turns query terms and indexed documents into :class:`QueryInputs`.

    ``queries`` maps query id to its normalized, stopped term list. Duplicate
    terms are kept: each occurrence is its own gated query term.
    """

    def __init__(self, index: InvertedIndex, store: EmbeddingStore, spec: InputSpec,
                 gating: str, queries: Mapping[str, Sequence[str]]):
        self.index = index
        self.store = store
        self.spec = spec
        self.gating = gating
        self.queries = {q: list(t) for q, t in queries.items()}
        self.interactor = DocumentInteractor(index, store)
        self._gate_cache: dict[str, np.ndarray] = {}
        self._cache: dict[tuple[str, int], QueryInputs] = {}

    def gate_features(self, qid: str) -> np.ndarray:
        feats = self._gate_cache.get(qid)
        if feats is None:
            terms = self.queries[qid]
            if self.gating == "TV":
                # OOV query terms get a zero vector, i.e. a neutral logit of 0
                feats = np.zeros((len(terms), self.store.dimension))
                for i, t in enumerate(terms):
                    row = self.store.row.get(t)
                    if row is not None:
                        feats[i] = self.store.vectors[row]
            else:
                feats = np.array([self.index.idf(t) for t in terms])
            self._gate_cache[qid] = feats
        return feats

    def inputs(self, qid: str, doc_id: int) -> QueryInputs:
        key = (qid, doc_id)
        cached = self._cache.get(key)
        if cached is None:
            rows = [self.spec.encode(self.interactor.row(t, doc_id)) for t in self.queries[qid]]
            cached = QueryInputs(np.vstack(rows), self.gate_features(qid))
            self._cache[key] = cached
        return cached

    def coverage_report(self) -> dict[str, int]:
        inv = oov = 0
        for terms in self.queries.values():
            a, b = self.store.coverage(terms)
            inv += a
            oov += b
        return {"in_vocabulary": inv, "oov": oov}

    def clear(self) -> None:
        self._cache.clear()

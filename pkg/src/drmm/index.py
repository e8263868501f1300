"""In-memory inverted index with on-disk persistence.

Layout of a saved index directory::

    meta.json    collection stats, stemmer name, idf formula, format version
    terms.tsv    term <TAB> df <TAB> cf, line number = term id
    docs.tsv     external_id <TAB> length, line number = doc id
    arrays.npz   doc_terms/doc_offsets (term ids in document order) and
                 post_docs/post_tfs/post_offsets (postings, by term id)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError, ParseError
from .textpipe import TextPipeline, default_pipeline

FORMAT_VERSION = 1


@dataclass(frozen=True)
class CollectionStats:
    doc_count: int
    total_term_count: int

    @property
    def avg_doc_length(self) -> float:
        return self.total_term_count / self.doc_count if self.doc_count else 0.0


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: int
    external_id: str
    term_ids: np.ndarray

    @property
    def length(self) -> int:
        return len(self.term_ids)


def bm25_idf(df, doc_count):
    """ln((N - df + 0.5) / (df + 0.5) + 1); positive for 0 <= df <= N."""
    return np.log((doc_count - np.asarray(df, dtype=float) + 0.5) / (np.asarray(df, dtype=float) + 0.5) + 1.0)


IDF_FORMULAS = {"bm25": bm25_idf}


class InvertedIndex:
    def __init__(self, terms, df, cf, external_ids, doc_terms, doc_offsets,
                 post_docs, post_tfs, post_offsets, stemmer="porter", idf_formula="bm25"):
        self.terms: list[str] = list(terms)
        self.term_to_id = {t: i for i, t in enumerate(self.terms)}
        self.df = np.asarray(df, dtype=np.int64)
        self.cf = np.asarray(cf, dtype=np.int64)
        self.external_ids: list[str] = list(external_ids)
        self.ext_to_doc = {e: i for i, e in enumerate(self.external_ids)}
        self.doc_terms = np.asarray(doc_terms, dtype=np.int64)
        self.doc_offsets = np.asarray(doc_offsets, dtype=np.int64)
        self.post_docs = np.asarray(post_docs, dtype=np.int64)
        self.post_tfs = np.asarray(post_tfs, dtype=np.int64)
        self.post_offsets = np.asarray(post_offsets, dtype=np.int64)
        self.doc_lengths = np.diff(self.doc_offsets)
        self.stemmer = stemmer
        if idf_formula not in IDF_FORMULAS:
            raise ValueError(f"unknown idf formula {idf_formula!r}")
        self.idf_formula = idf_formula
        self.stats = CollectionStats(len(self.external_ids), int(self.doc_lengths.sum()))

    # -- lookups -----------------------------------------------------------

    @property
    def vocab_size(self) -> int:
        return len(self.terms)

    def term_id(self, term: str) -> int | None:
        return self.term_to_id.get(term)

    def doc_id(self, external_id: str) -> int:
        try:
            return self.ext_to_doc[external_id]
        except KeyError:
            raise DataError(f"document {external_id!r} not in index") from None

    def document(self, doc_id: int) -> DocumentRecord:
        lo, hi = self.doc_offsets[doc_id], self.doc_offsets[doc_id + 1]
        return DocumentRecord(doc_id, self.external_ids[doc_id], self.doc_terms[lo:hi])

    def doc_term_strings(self, doc_id: int) -> list[str]:
        return [self.terms[t] for t in self.document(doc_id).term_ids]

    def postings(self, term: str) -> tuple[np.ndarray, np.ndarray]:
        """(doc_ids, tfs) for ``term``; empty arrays if absent."""
        tid = self.term_to_id.get(term)
        if tid is None:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        lo, hi = self.post_offsets[tid], self.post_offsets[tid + 1]
        return self.post_docs[lo:hi], self.post_tfs[lo:hi]

    def tf(self, term: str, doc_id: int) -> int:
        docs, tfs = self.postings(term)
        pos = np.searchsorted(docs, doc_id)
        if pos < len(docs) and docs[pos] == doc_id:
            return int(tfs[pos])
        return 0

    def document_frequency(self, term: str) -> int:
        tid = self.term_to_id.get(term)
        return 0 if tid is None else int(self.df[tid])

    def collection_frequency(self, term: str) -> int:
        tid = self.term_to_id.get(term)
        return 0 if tid is None else int(self.cf[tid])

    def idf(self, term: str) -> float:
        return float(IDF_FORMULAS[self.idf_formula](self.document_frequency(term), self.stats.doc_count))

    # -- persistence -------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "format_version": FORMAT_VERSION,
            "doc_count": self.stats.doc_count,
            "total_term_count": self.stats.total_term_count,
            "vocab_size": self.vocab_size,
            "stemmer": self.stemmer,
            "idf_formula": self.idf_formula,
        }
        (directory / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        with open(directory / "terms.tsv", "w", encoding="utf-8") as f:
            for t, d, c in zip(self.terms, self.df, self.cf):
                f.write(f"{t}\t{d}\t{c}\n")
        with open(directory / "docs.tsv", "w", encoding="utf-8") as f:
            for e, n in zip(self.external_ids, self.doc_lengths):
                f.write(f"{e}\t{n}\n")
        np.savez(directory / "arrays.npz", doc_terms=self.doc_terms, doc_offsets=self.doc_offsets,
                 post_docs=self.post_docs, post_tfs=self.post_tfs, post_offsets=self.post_offsets)

    @classmethod
    def load(cls, directory: str | Path) -> "InvertedIndex":
        directory = Path(directory)
        meta_path = directory / "meta.json"
        if not meta_path.exists():
            raise ParseError("not an index directory (meta.json missing)", path=directory)
        meta = json.loads(meta_path.read_text())
        if meta.get("format_version") != FORMAT_VERSION:
            raise ParseError(f"unsupported index format {meta.get('format_version')}", path=meta_path)
        terms, df, cf = [], [], []
        for line in (directory / "terms.tsv").read_text("utf-8").splitlines():
            t, d, c = line.split("\t")
            terms.append(t)
            df.append(int(d))
            cf.append(int(c))
        ext = [line.split("\t")[0] for line in (directory / "docs.tsv").read_text("utf-8").splitlines()]
        with np.load(directory / "arrays.npz") as arrays:
            index = cls(terms, df, cf, ext, arrays["doc_terms"], arrays["doc_offsets"],
                        arrays["post_docs"], arrays["post_tfs"], arrays["post_offsets"],
                        stemmer=meta["stemmer"], idf_formula=meta["idf_formula"])
        return index


def build_index(documents: Iterable[tuple[str, str]], pipeline: TextPipeline | None = None,
                idf_formula: str = "bm25") -> InvertedIndex:
    """Index ``(external_id, text)`` pairs. Doc ids follow ingestion order."""
    pipeline = pipeline or default_pipeline()
    term_to_id: dict[str, int] = {}
    terms: list[str] = []
    external_ids: list[str] = []
    seen: set[str] = set()
    doc_chunks: list[np.ndarray] = []
    doc_offsets = [0]
    for external_id, text in documents:
        if external_id in seen:
            raise ParseError(f"duplicate external_id {external_id!r}")
        seen.add(external_id)
        external_ids.append(external_id)
        ids = []
        for term in pipeline.terms(text):
            tid = term_to_id.get(term)
            if tid is None:
                tid = term_to_id[term] = len(terms)
                terms.append(term)
            ids.append(tid)
        doc_chunks.append(np.asarray(ids, dtype=np.int64))
        doc_offsets.append(doc_offsets[-1] + len(ids))

    doc_terms = np.concatenate(doc_chunks) if doc_chunks else np.zeros(0, dtype=np.int64)
    doc_of_pos = np.repeat(np.arange(len(external_ids), dtype=np.int64), np.diff(doc_offsets))
    # (term, doc) pairs sorted by term then doc give postings directly
    order = np.lexsort((doc_of_pos, doc_terms))
    pairs_t, pairs_d = doc_terms[order], doc_of_pos[order]
    if len(pairs_t):
        new = np.ones(len(pairs_t), dtype=bool)
        new[1:] = (pairs_t[1:] != pairs_t[:-1]) | (pairs_d[1:] != pairs_d[:-1])
        starts = np.flatnonzero(new)
        post_terms = pairs_t[starts]
        post_docs = pairs_d[starts]
        post_tfs = np.diff(np.append(starts, len(pairs_t)))
    else:
        post_terms = post_docs = post_tfs = np.zeros(0, dtype=np.int64)
    df = np.bincount(post_terms, minlength=len(terms))
    cf = np.bincount(doc_terms, minlength=len(terms))
    post_offsets = np.concatenate([[0], np.cumsum(df)])
    return InvertedIndex(terms, df, cf, external_ids, doc_terms, doc_offsets,
                         post_docs, post_tfs, post_offsets,
                         stemmer=pipeline.stemmer, idf_formula=idf_formula)


def idf(term: str, index: InvertedIndex) -> float:
    return index.idf(term)


def stats_summary(index: InvertedIndex) -> dict[str, float]:
    return {
        "docs": index.stats.doc_count,
        "vocab": index.vocab_size,
        "length": index.stats.total_term_count,
        "avg_doc_length": index.stats.avg_doc_length,
    }

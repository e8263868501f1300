"""Pretrained term vectors and query/document local interactions."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParseError
from .textpipe import TextPipeline, default_pipeline

log = logging.getLogger(__name__)

# Largest double below 1.0: ceiling for cosines between distinct strings.
BELOW_ONE = np.nextafter(1.0, 0.0)


class EmbeddingStore:
    """Unit-normalized vectors keyed by normalized term string."""

    def __init__(self, terms: Sequence[str], vectors: np.ndarray, duplicates: int = 0):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or len(terms) != len(vectors):
            raise ValueError("vectors must be a (len(terms), d) matrix")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0):
            bad = terms[int(np.flatnonzero(norms == 0)[0])]
            raise ValueError(f"zero vector for term {bad!r}")
        self.terms = list(terms)
        self.row = {t: i for i, t in enumerate(self.terms)}
        self.vectors = vectors / norms[:, None]
        self.duplicates = duplicates
        self.oov: set[str] = set()

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.row

    def lookup(self, term: str) -> np.ndarray | None:
        """Vector for ``term``, or None (recording it as OOV)."""
        i = self.row.get(term)
        if i is None:
            self.oov.add(term)
            return None
        return self.vectors[i]

    def coverage(self, query_terms: Sequence[str]) -> tuple[int, int]:
        """(in-vocabulary, out-of-vocabulary) counts over ``query_terms``."""
        inv = sum(1 for t in query_terms if t in self.row)
        return inv, len(query_terms) - inv


def _normalize_keys(words, rows, pipeline):
    terms, keep, dup = [], [], 0
    seen = set()
    for i, w in enumerate(words):
        key = pipeline.normalize(w)
        if not key:
            continue
        if key in seen:
            dup += 1
            continue
        seen.add(key)
        terms.append(key)
        keep.append(i)
    return terms, rows[keep] if keep else np.zeros((0, rows.shape[1])), dup


def _parse_header(line, path):
    parts = line.split()
    if len(parts) != 2:
        raise ParseError("expected header 'vocab_size dim'", path, 1)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError("expected header 'vocab_size dim'", path, 1) from None


def _load_text(path: Path):
    words, rows = [], []
    with open(path, encoding="utf-8") as f:
        _, dim = _parse_header(f.readline(), path)
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise ParseError(f"expected {dim} components, found {len(parts) - 1}", path, lineno)
            try:
                vec = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise ParseError("non-numeric component", path, lineno) from None
            if not np.all(np.isfinite(vec)):
                raise ParseError("non-finite component", path, lineno)
            words.append(parts[0])
            rows.append(vec)
    return words, np.array(rows).reshape(len(rows), dim)


def _load_binary(path: Path):
    """word2vec binary: text header, then ``word<space><dim float32 LE>`` records."""
    data = path.read_bytes()
    nl = data.index(b"\n")
    count, dim = _parse_header(data[:nl].decode("utf-8"), path)
    pos = nl + 1
    words, rows = [], np.zeros((count, dim))
    for i in range(count):
        while pos < len(data) and data[pos:pos + 1] in (b"\n", b" "):
            pos += 1
        sp = data.index(b" ", pos)
        words.append(data[pos:sp].decode("utf-8", errors="replace"))
        start = sp + 1
        end = start + 4 * dim
        if end > len(data):
            raise ParseError(f"truncated vector for record {i + 1}", path, i + 2)
        vec = np.frombuffer(data[start:end], dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(vec)):
            raise ParseError("non-finite component", path, i + 2)
        rows[i] = vec
        pos = end
    return words, rows


def load_embeddings(path: str | Path, fmt: str = "text", pipeline: TextPipeline | None = None) -> EmbeddingStore:
    """Load word2vec-style vectors; keys normalized, first duplicate kept."""
    path = Path(path)
    if fmt == "text":
        words, rows = _load_text(path)
    elif fmt == "binary":
        words, rows = _load_binary(path)
    else:
        raise ValueError(f"unknown embedding format {fmt!r}")
    norms = np.linalg.norm(rows, axis=1)
    zero = np.flatnonzero(norms == 0)
    if len(zero):
        raise ParseError(f"zero vector for {words[zero[0]]!r}", path, int(zero[0]) + 2)
    terms, rows, dup = _normalize_keys(words, rows, pipeline or default_pipeline())
    if dup:
        log.warning("%s: %d duplicate keys after normalization; first occurrence kept", path, dup)
    return EmbeddingStore(terms, rows, duplicates=dup)


def save_embeddings_text(store_terms: Sequence[str], vectors: np.ndarray, path: str | Path) -> None:
    vectors = np.asarray(vectors)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(store_terms)} {vectors.shape[1]}\n")
        for t, v in zip(store_terms, vectors):
            f.write(t + " " + " ".join(repr(float(x)) for x in v) + "\n")


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class InteractionRow:
    query_term: str
    values: np.ndarray
    exact_matches: int


def interactions(query_term: str, doc_terms: Sequence[str], store: EmbeddingStore) -> InteractionRow:
    """Local interactions of one query term with every document position.

    Identical strings give exactly 1.0; in-vocabulary pairs give the clipped
    cosine, capped just below 1.0; a pair with an OOV side and differing
    strings is omitted.
    """
    qvec = store.lookup(query_term)
    values = []
    exact = 0
    for term in doc_terms:
        if term == query_term:
            values.append(1.0)
            exact += 1
            continue
        if qvec is None:
            continue
        row = store.row.get(term)
        if row is None:
            continue
        values.append(min(float(np.clip(store.vectors[row] @ qvec, -1.0, 1.0)), BELOW_ONE))
    return InteractionRow(query_term, np.array(values, dtype=np.float64), exact)


class DocumentInteractor:
    """Vectorized interactions against indexed documents.

    Maps lexicon ids to embedding rows once, so each (query term, doc) pair is a
    single gather plus matrix-vector product.
    """

    def __init__(self, index, store: EmbeddingStore):
        self.index = index
        self.store = store
        self.emb_row = np.array([store.row.get(t, -1) for t in index.terms], dtype=np.int64)

    def row(self, query_term: str, doc_id: int) -> InteractionRow:
        doc_ids = self.index.document(doc_id).term_ids
        qid = self.index.term_id(query_term)
        exact_mask = doc_ids == qid if qid is not None else np.zeros(len(doc_ids), dtype=bool)
        qvec = self.store.lookup(query_term)
        rows = self.emb_row[doc_ids]
        out = np.empty(len(doc_ids))
        keep = exact_mask.copy()
        out[exact_mask] = 1.0
        if qvec is not None:
            soft = (~exact_mask) & (rows >= 0)
            if soft.any():
                sims = np.clip(self.store.vectors[rows[soft]] @ qvec, -1.0, 1.0)
                out[soft] = np.minimum(sims, BELOW_ONE)
            keep |= soft
        return InteractionRow(query_term, out[keep], int(exact_mask.sum()))

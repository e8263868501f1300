"""Synthetic retrieval collections with a known relevance rule.

Documents are bags of pseudo-words drawn from a skewed unigram distribution.
Queries pick a few distinct words; a document is relevant when at least
``min_distinct`` distinct query words occur in it. Embeddings are random unit
vectors, so the only reliable signal is exact matching.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embed import save_embeddings_text
from .textpipe import TextPipeline, default_pipeline
from .trec import Topic, write_qrels

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aiou"


def pseudo_words(n: int, pipeline: TextPipeline | None = None, stopwords=frozenset()) -> list[str]:
    """``n`` distinct CVCV-style words that the stemmer leaves unchanged."""
    pipeline = pipeline or default_pipeline()
    words = []
    for c1, v1, c2, v2, c3 in itertools.product(_CONSONANTS, _VOWELS, _CONSONANTS, _VOWELS, _CONSONANTS):
        w = c1 + v1 + c2 + v2 + c3
        if pipeline.normalize(w) == w and w not in stopwords:
            words.append(w)
            if len(words) == n:
                return words
    raise ValueError(f"cannot generate {n} stable pseudo-words")


@dataclass
class SyntheticCollection:
    documents: list[tuple[str, str]]
    topics: list[Topic]
    qrels: dict[str, dict[str, int]]
    vocab: list[str]
    vectors: np.ndarray

    def write(self, directory: str | Path, config_overrides: dict | None = None) -> Path:
        """Write corpus/topics/qrels/embeddings plus an ``experiment.cfg``.

        ``config_overrides`` adds or replaces config keys; a value of None
        removes the key.
        """
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "corpus.tsv", "w", encoding="utf-8") as f:
            for ext, text in self.documents:
                f.write(f"{ext}\t{text}\n")
        with open(d / "topics.tsv", "w", encoding="utf-8") as f:
            for t in self.topics:
                f.write(f"{t.query_id}\t{t.title}\t{t.description}\n")
        write_qrels(self.qrels, d / "qrels.txt")
        save_embeddings_text(self.vocab, self.vectors, d / "embeddings.txt")
        settings = {
            "corpus": "corpus.tsv",
            "topics": "topics.tsv",
            "qrels": "qrels.txt",
            "embeddings": "embeddings.txt",
            "index_dir": "index",
            "output_dir": "out",
        }
        settings.update(config_overrides or {})
        # None drops a key, leaving the experiment default in place
        lines = [f"{k} = {v}\n" for k, v in settings.items() if v is not None]
        (d / "experiment.cfg").write_text("".join(lines))
        return d / "experiment.cfg"


def generate(num_docs: int = 500, num_queries: int = 30, vocab_size: int = 50, dim: int = 16,
             doc_length: tuple[int, int] = (20, 60), query_length: tuple[int, int] = (2, 4),
             min_distinct: int = 2, zipf: float = 1.0, seed: int = 0) -> SyntheticCollection:
    rng = np.random.default_rng(seed)
    vocab = pseudo_words(vocab_size)
    weights = 1.0 / np.arange(1, vocab_size + 1) ** zipf
    weights /= weights.sum()

    documents = []
    bags = []
    for i in range(num_docs):
        n = int(rng.integers(doc_length[0], doc_length[1] + 1))
        words = rng.choice(vocab_size, size=n, p=weights)
        bags.append(set(words.tolist()))
        documents.append((f"D{i:04d}", " ".join(vocab[w] for w in words)))

    # skip the most frequent fifth of the vocabulary so relevance stays selective
    pool = np.arange(vocab_size // 5, vocab_size)
    topics, qrels = [], {}
    for q in range(num_queries):
        m = int(rng.integers(query_length[0], query_length[1] + 1))
        terms = rng.choice(pool, size=m, replace=False)
        qid = f"Q{q:03d}"
        title = " ".join(vocab[t] for t in terms)
        topics.append(Topic(qid, title, "documents about " + title))
        judged = {}
        for (ext, _), bag in zip(documents, bags):
            hits = sum(1 for t in terms if t in bag)
            if hits:
                judged[ext] = 1 if hits >= min_distinct else 0
        qrels[qid] = judged

    vectors = rng.normal(size=(vocab_size, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return SyntheticCollection(documents, topics, qrels, vocab, vectors)

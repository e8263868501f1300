"""Tokenization, stemming and stopword filtering.

Documents and queries go through the same pipeline: whitespace split, strip
punctuation from token edges, lowercase, stem. Stopwords are removed from
queries only; documents keep them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer

STEMMERS = ("porter", "none")


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str


@dataclass(frozen=True)
class StopList:
    terms: frozenset = field(default_factory=frozenset)

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


def strip_edges(word: str) -> str:
    """Drop leading/trailing characters that are not letters or digits."""
    start, end = 0, len(word)
    while start < end and not word[start].isalnum():
        start += 1
    while end > start and not word[end - 1].isalnum():
        end -= 1
    return word[start:end]


class TextPipeline:
    """Deterministic text normalizer.

    ``stemmer`` is ``"porter"`` or ``"none"``. Stems are iterated to a fixed
    point, so ``stem(stem(x)) == stem(x)`` holds even where a single Porter
    pass is not idempotent.
    """

    def __init__(self, stemmer: str = "porter"):
        if stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer {stemmer!r}; expected one of {STEMMERS}")
        self.stemmer = stemmer
        self._porter = PorterStemmer() if stemmer == "porter" else None
        self._cache: dict[str, str] = {}

    def stem(self, token: str) -> str:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        out = token
        if self._porter is not None:
            for _ in range(len(token) + 1):
                nxt = self._porter.stem(out, to_lowercase=False)
                if not nxt or nxt == out:
                    break
                out = nxt
        self._cache[token] = out
        return out

    def normalize(self, word: str) -> str | None:
        """Normalize one whitespace-delimited word; None if nothing survives."""
        core = strip_edges(word).lower()
        if not core:
            return None
        return self.stem(core)

    def tokenize(self, text: str) -> list[Token]:
        tokens = []
        for word in text.split():
            norm = self.normalize(word)
            if norm:
                tokens.append(Token(word, norm))
        return tokens

    def terms(self, text: str) -> list[str]:
        return [t.normalized for t in self.tokenize(text)]

    def load_stoplist(self, path: str | Path | None = None) -> StopList:
        """Read a stoplist (one term per line, ``#`` comments) and normalize it.

        ``None`` loads the bundled default list.
        """
        if path is None:
            text = resources.files("drmm.data").joinpath("stopwords.txt").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return self.stoplist_from_words(text.splitlines())

    def stoplist_from_words(self, words: Iterable[str]) -> StopList:
        terms = set()
        for line in words:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            norm = self.normalize(line)
            if norm:
                terms.add(norm)
        return StopList(frozenset(terms))

    def query_terms(self, text: str, stoplist: StopList) -> list[str]:
        return [t.normalized for t in remove_stopwords(self.tokenize(text), stoplist)]


def remove_stopwords(tokens: Sequence[Token], stoplist: StopList) -> list[Token]:
    return [t for t in tokens if t.normalized not in stoplist]


@lru_cache(maxsize=None)
def default_pipeline() -> TextPipeline:
    return TextPipeline("porter")


def tokenize(text: str) -> list[Token]:
    return default_pipeline().tokenize(text)


def stem(token: str) -> str:
    return default_pipeline().stem(token)

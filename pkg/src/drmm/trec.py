"""Readers and writers for TREC-style corpora, topics, qrels and run files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import ParseError

_TAG = re.compile(r"<[^>]+>")


@dataclass(frozen=True)
class Topic:
    query_id: str
    title: str
    description: str = ""

    def __post_init__(self):
        if not (self.title.strip() or self.description.strip()):
            raise ValueError(f"topic {self.query_id} has neither title nor description")

    def text(self, field: str) -> str:
        if field == "title":
            return self.title
        if field in ("desc", "description"):
            return self.description
        raise ValueError(f"unknown topic field {field!r}; expected 'title' or 'desc'")


def _first_content_line(path: Path) -> str:
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                return line.strip()
    return ""


# -- corpus ---------------------------------------------------------------

def read_corpus(path: str | Path, fmt: str = "auto") -> Iterator[tuple[str, str]]:
    """Yield ``(external_id, text)``. ``fmt`` is ``trec``, ``tsv`` or ``auto``."""
    path = Path(path)
    if not path.exists():
        raise ParseError("corpus file not found", path)
    if fmt == "auto":
        fmt = "trec" if _first_content_line(path).upper().startswith("<DOC") else "tsv"
    if fmt == "tsv":
        yield from _read_corpus_tsv(path)
    elif fmt == "trec":
        yield from _read_corpus_trec(path)
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")


def _read_corpus_tsv(path: Path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError("expected 'external_id<TAB>text'", path, lineno)
            ext, text = line.split("\t", 1)
            if not ext.strip():
                raise ParseError("empty external_id", path, lineno)
            yield ext.strip(), text


def _read_corpus_trec(path: Path):
    docno = None
    body: list[str] = []
    in_doc = False
    start = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            upper = stripped.upper()
            if upper.startswith("<DOC>"):
                if in_doc:
                    raise ParseError("nested <DOC>", path, lineno)
                in_doc, docno, body, start = True, None, [], lineno
                continue
            if upper.startswith("</DOC>"):
                if not in_doc:
                    raise ParseError("</DOC> without <DOC>", path, lineno)
                if not docno:
                    raise ParseError("document without <DOCNO>", path, start)
                yield docno, _TAG.sub(" ", "\n".join(body))
                in_doc = False
                continue
            if not in_doc:
                if stripped:
                    raise ParseError("text outside <DOC>", path, lineno)
                continue
            m = re.match(r"<DOCNO>\s*(.*?)\s*</DOCNO>", stripped, flags=re.IGNORECASE)
            if m:
                docno = m.group(1)
            else:
                body.append(line.rstrip("\n"))
    if in_doc:
        raise ParseError("unterminated <DOC>", path, start)


# -- topics ---------------------------------------------------------------

def read_topics(path: str | Path) -> list[Topic]:
    """TREC SGML topics (``<top>``/``<num>``/``<title>``/``<desc>``) or TSV."""
    path = Path(path)
    if not path.exists():
        raise ParseError("topic file not found", path)
    if _first_content_line(path).lower().startswith("<top"):
        return _read_topics_sgml(path)
    topics = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ParseError("expected 'qid<TAB>title[<TAB>desc]'", path, lineno)
            try:
                topics.append(Topic(parts[0].strip(), parts[1].strip(), parts[2].strip() if len(parts) > 2 else ""))
            except ValueError as e:
                raise ParseError(str(e), path, lineno) from None
    return topics


_FIELD = re.compile(r"<(num|title|desc|narr)>", re.IGNORECASE)


def _read_topics_sgml(path: Path) -> list[Topic]:
    text = path.read_text("utf-8")
    topics = []
    for block in re.findall(r"<top>(.*?)</top>", text, flags=re.IGNORECASE | re.DOTALL):
        fields: dict[str, str] = {}
        pieces = _FIELD.split(block)
        for name, value in zip(pieces[1::2], pieces[2::2]):
            fields[name.lower()] = " ".join(_TAG.sub(" ", value).split())
        num = re.sub(r"^(number:)\s*", "", fields.get("num", ""), flags=re.IGNORECASE).strip()
        title = re.sub(r"^(topic:)\s*", "", fields.get("title", ""), flags=re.IGNORECASE)
        desc = re.sub(r"^(description:)\s*", "", fields.get("desc", ""), flags=re.IGNORECASE)
        if not num:
            raise ParseError("topic without <num>", path)
        topics.append(Topic(num, title, desc))
    return topics


# -- qrels ----------------------------------------------------------------

def read_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    """``qid iter external_id rel`` per line."""
    path = Path(path)
    if not path.exists():
        raise ParseError("qrels file not found", path)
    qrels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ParseError("expected 'qid 0 external_id rel'", path, lineno)
            try:
                rel = int(parts[3])
            except ValueError:
                raise ParseError("relevance must be an integer", path, lineno) from None
            qrels.setdefault(parts[0], {})[parts[2]] = rel
    return qrels


def write_qrels(qrels: Mapping[str, Mapping[str, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for qid in sorted(qrels):
            for doc in sorted(qrels[qid]):
                f.write(f"{qid} 0 {doc} {qrels[qid][doc]}\n")


# -- runs -----------------------------------------------------------------

@dataclass(frozen=True)
class RunEntry:
    query_id: str
    external_id: str
    rank: int
    score: float
    tag: str


def read_run(path: str | Path) -> dict[str, list[RunEntry]]:
    """Run file -> per-query entries, ordered by rank."""
    path = Path(path)
    if not path.exists():
        raise ParseError("run file not found", path)
    run: dict[str, list[RunEntry]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ParseError("expected 'qid Q0 external_id rank score tag'", path, lineno)
            try:
                entry = RunEntry(parts[0], parts[2], int(parts[3]), float(parts[4]), parts[5])
            except ValueError:
                raise ParseError("bad rank or score", path, lineno) from None
            run.setdefault(entry.query_id, []).append(entry)
    for entries in run.values():
        entries.sort(key=lambda e: e.rank)
    return run


def run_rankings(run: Mapping[str, Sequence[RunEntry]]) -> dict[str, list[str]]:
    return {q: [e.external_id for e in entries] for q, entries in run.items()}


def format_run_lines(query_id: str, ranked: Sequence[tuple[str, float]], tag: str) -> list[str]:
    """``ranked`` is (external_id, score) already in rank order."""
    return [f"{query_id} Q0 {ext} {rank} {score:.10g} {tag}" for rank, (ext, score) in enumerate(ranked, start=1)]


def write_run(run: Mapping[str, Sequence[tuple[str, float]]], path: str | Path, tag: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for qid in sorted(run):
            for line in format_run_lines(qid, run[qid], tag):
                f.write(line + "\n")

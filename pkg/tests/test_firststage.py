import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drmm.errors import EmptyQueryError
from drmm.firststage import RetrievalParams, bm25_score, ql_score, retrieve
from drmm.index import build_index
from drmm.textpipe import TextPipeline


# Oracles: scoring straight from raw token lists, no index involved.

def oracle_ql(query, doc_tokens, corpus_tokens, mu):
    total = sum(len(d) for d in corpus_tokens)
    cf = Counter(t for d in corpus_tokens for t in d)
    tf = Counter(doc_tokens)
    s = 0.0
    for t, n in Counter(query).items():
        if cf[t] == 0:
            continue
        s += n * math.log((tf[t] + mu * cf[t] / total) / (len(doc_tokens) + mu))
    return s


def oracle_bm25(query, doc_tokens, corpus_tokens, k1, b):
    N = len(corpus_tokens)
    avg = sum(len(d) for d in corpus_tokens) / N
    tf = Counter(doc_tokens)
    s = 0.0
    for t, n in Counter(query).items():
        df = sum(1 for d in corpus_tokens if t in d)
        idf = math.log((N - df + 0.5) / (df + 0.5) + 1)
        s += n * idf * tf[t] * (k1 + 1) / (tf[t] + k1 * (1 - b + b * len(doc_tokens) / avg))
    return s


def test_ql_hand_values(hand_index):
    assert ql_score(["a"], 0, hand_index, mu=1) == pytest.approx(math.log(0.6), abs=1e-12)
    assert ql_score(["a"], 0, hand_index, mu=1) == pytest.approx(-0.5108256238, abs=1e-9)
    assert ql_score(["a"], 1, hand_index, mu=1) == pytest.approx(math.log(0.4 / 3), abs=1e-12)
    assert ql_score(["a"], 1, hand_index, mu=1) == pytest.approx(-2.0149030205, abs=1e-9)


def test_ql_unknown_term_changes_nothing(hand_index):
    p = RetrievalParams(mu=1)
    base = retrieve(["a", "b"], hand_index, "QL", p)
    more = retrieve(["a", "b", "zzz"], hand_index, "QL", p)
    assert base == more
    assert ql_score(["zzz"], 0, hand_index, 1) == 0.0


def test_bm25_hand_values(hand_index):
    idf_b = math.log(1.2)
    s1 = bm25_score(["b"], 0, hand_index, 1.2, 0.75)
    s2 = bm25_score(["b"], 1, hand_index, 1.2, 0.75)
    assert s1 == pytest.approx(idf_b * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 3 / 2.5)), abs=1e-12)
    assert s2 == pytest.approx(idf_b * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 2 / 2.5)), abs=1e-12)
    assert s2 > s1
    ranked = retrieve(["b"], hand_index, "BM25")
    assert [d.external_id for d in ranked] == ["d2", "d1"]


def test_bm25_zero_tf_and_b0(hand_index):
    assert bm25_score(["zzz"], 0, hand_index) == 0.0
    assert bm25_score(["b"], 0, hand_index, b=0.0) == bm25_score(["b"], 1, hand_index, b=0.0)


def test_empty_query_rejected(hand_index):
    for fn in (lambda: ql_score([], 0, hand_index), lambda: bm25_score([], 0, hand_index),
               lambda: retrieve([], hand_index)):
        with pytest.raises(EmptyQueryError, match="empty query"):
            fn()


def test_retrieve_examples(hand_index):
    assert RetrievalParams().top_k == 2000
    assert retrieve(["nothing"], hand_index) == []
    top = retrieve(["a", "b"], hand_index, "QL", RetrievalParams(mu=1, top_k=1))
    assert len(top) == 1 and top[0].external_id == "d1" and top[0].rank == 1


def test_params_validated():
    for kw in ({"mu": 0}, {"k1": -1}, {"b": 1.5}, {"top_k": 0}):
        with pytest.raises(ValueError):
            RetrievalParams(**kw)


def test_ties_broken_by_external_id():
    idx = build_index([("z", "q x"), ("m", "q y"), ("a", "q w")], TextPipeline("none"))
    ranked = retrieve(["q"], idx, "BM25")
    assert [d.external_id for d in ranked] == ["a", "m", "z"]
    assert [d.rank for d in ranked] == [1, 2, 3]


corpus_st = st.lists(st.lists(st.sampled_from(list("abcdef")), min_size=1, max_size=10),
                     min_size=1, max_size=30)
query_st = st.lists(st.sampled_from(list("abcdefg")), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(corpus_st, query_st, st.sampled_from(["QL", "BM25"]))
def test_scores_and_ranking_match_exhaustive_oracle(docs, query, model):
    corpus = [(f"d{i:02d}", " ".join(d)) for i, d in enumerate(docs)]
    idx = build_index(corpus, TextPipeline("none"))
    p = RetrievalParams(mu=10.0, top_k=len(docs) + 5)
    oracle = {}
    for i, d in enumerate(docs):
        if not set(query) & set(d):
            continue
        s = oracle_ql(query, d, docs, p.mu) if model == "QL" else oracle_bm25(query, d, docs, p.k1, p.b)
        oracle[f"d{i:02d}"] = s
    got = retrieve(query, idx, model, p)
    assert len(got) == len(oracle)
    for d in got:
        assert d.score == pytest.approx(oracle[d.external_id], abs=1e-9)
    expected = sorted(oracle, key=lambda e: (-oracle[e], e))
    # near-ties may legitimately swap under rounding; compare score sequence instead
    np.testing.assert_allclose([d.score for d in got], [oracle[e] for e in expected], atol=1e-9)
    assert all(a.score >= b.score for a, b in zip(got, got[1:]))


@settings(max_examples=30, deadline=None)
@given(corpus_st, query_st, st.integers(1, 10), st.integers(1, 10))
def test_prefix_property(docs, query, n, m):
    n, m = sorted((n, m))
    idx = build_index([(f"d{i:02d}", " ".join(d)) for i, d in enumerate(docs)], TextPipeline("none"))
    short = retrieve(query, idx, "QL", RetrievalParams(top_k=n))
    long = retrieve(query, idx, "QL", RetrievalParams(top_k=m))
    assert short == long[:len(short)]


def test_ql_strictly_increasing_in_tf():
    docs = [("d0", "a x x x"), ("d1", "a a x x"), ("d2", "a a a x"), ("d3", "y y y y")]
    idx = build_index(docs, TextPipeline("none"))
    scores = [ql_score(["a"], i, idx, mu=5) for i in range(3)]
    assert scores[0] < scores[1] < scores[2]


@given(st.integers(0, 50), st.floats(0, 3), st.floats(0, 1))
def test_bm25_bounded_and_monotone(tf, k1, b):
    docs = [("d0", " ".join(["a"] * tf + ["x"] * 5)), ("d1", "a y"), ("d2", "z z")]
    idx = build_index(docs, TextPipeline("none"))
    s = bm25_score(["a"], 0, idx, k1, b)
    assert 0 <= s <= idx.idf("a") * (k1 + 1) + 1e-12
    if tf == 0:
        return
    # same length and df, one more occurrence
    docs2 = [("d0", " ".join(["a"] * (tf + 1) + ["x"] * 4)), ("d1", "a y"), ("d2", "z z")]
    idx2 = build_index(docs2, TextPipeline("none"))
    assert bm25_score(["a"], 0, idx2, k1, b) >= s - 1e-12

from hypothesis import given, strategies as st

from drmm.textpipe import StopList, TextPipeline, Token, remove_stopwords, stem, strip_edges, tokenize


def test_tokenize_lowercases():
    assert [t.normalized for t in tokenize("Bitcoin news")] == ["bitcoin", "news"]


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   \n\t ") == []


def test_case_and_punctuation_variants_collapse():
    toks = tokenize("cars, Cars CARS.")
    assert len(toks) == 3
    assert len({t.normalized for t in toks}) == 1
    assert [t.surface for t in toks] == ["cars,", "Cars", "CARS."]


def test_punctuation_only_words_vanish():
    assert tokenize("-- ... !!") == []
    assert strip_edges("(u.s.)") == "u.s"


def test_stem_examples():
    assert stem("news") == "news"
    assert stem("a") == "a"
    assert stem(stem("viewing")) == stem("viewing")


def test_no_stemming_pipeline_only_lowercases():
    p = TextPipeline("none")
    assert p.terms("Running CARS") == ["running", "cars"]


@given(st.text(alphabet=st.characters(categories=("Ll", "Lu", "Nd")), min_size=1, max_size=20))
def test_stem_idempotent(word):
    w = word.lower()
    assert stem(stem(w)) == stem(w)


@given(st.text(max_size=200))
def test_tokens_nonempty_without_whitespace_and_deterministic(text):
    toks = tokenize(text)
    for t in toks:
        assert t.normalized
        assert not any(c.isspace() for c in t.normalized)
    assert toks == tokenize(text)


def test_remove_stopwords_examples():
    toks = [Token(w, w) for w in ("the", "bitcoin", "news")]
    assert [t.normalized for t in remove_stopwords(toks, StopList(frozenset({"the"})))] == ["bitcoin", "news"]
    assert remove_stopwords([], StopList(frozenset({"the"}))) == []
    assert remove_stopwords(toks[:1], StopList(frozenset({"the"}))) == []


@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=20), st.sets(st.sampled_from(["a", "b", "c", "d"])))
def test_remove_stopwords_is_ordered_subsequence(words, stop):
    toks = [Token(w, w) for w in words]
    kept = remove_stopwords(toks, StopList(frozenset(stop)))
    assert kept == [t for t in toks if t.normalized not in stop]


def test_stoplist_file_is_normalized(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment\nThe\n\nRunning\n")
    p = TextPipeline("porter")
    sl = p.load_stoplist(path)
    assert "the" in sl and p.stem("running") in sl and len(sl) == 2
    assert p.query_terms("The running man", sl) == [p.stem("man")]


def test_bundled_stoplist_loads():
    sl = TextPipeline().load_stoplist()
    assert "the" in sl and len(sl) > 300

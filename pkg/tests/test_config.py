import pytest

from drmm.config import ExperimentConfig, load_config, make_config, parse_assignments
from drmm.errors import ConfigError


def test_defaults():
    c = ExperimentConfig()
    assert c.variant == "LCHxIDF" and c.rerank_depth == 2000 and c.output_depth == 1000
    assert c.layer_sizes == (30, 5, 1) and c.folds == 5 and c.batch_size == 20
    assert (c.input_mode, c.gating, c.bins) == ("LCH", "IDF", 30)
    assert c.retrieval_params().top_k == 2000


def test_file_and_overrides(tmp_path):
    p = tmp_path / "sub" / "exp.cfg"
    p.parent.mkdir()
    p.write_text("# comment\ncorpus = corpus.tsv\nlearning_rates = 0.05, 0.1\nvariant = CHxTV\nmu=1000\n")
    c = load_config(p, {"mu": "1500", "output_dir": "/abs/out"})
    assert c.corpus == str(p.parent / "corpus.tsv")
    assert c.learning_rates == (0.05, 0.1)
    assert c.mu == 1500.0 and c.output_dir == "/abs/out"
    assert [tc.learning_rate for tc in c.train_configs()] == [0.05, 0.1]
    assert c.network_config(7).embedding_dim == 7


@pytest.mark.parametrize("values, msg", [
    ({"rerank_depth": "10", "output_depth": "20"}, "rerank_depth"),
    ({"variant": "KMAXxTV"}, "K-max"),
    ({"first_stage": "TFIDF"}, "first_stage"),
    ({"field": "narr"}, "field"),
    ({"colour": "red"}, "unknown config key"),
    ({"mu": "lots"}, "bad value"),
    ({"folds": "1"}, "folds"),
])
def test_invalid_configs(values, msg):
    with pytest.raises(ConfigError, match=msg):
        make_config(values)


def test_assignment_syntax():
    assert parse_assignments(["a = 1", "", "# x", "b=c=d"]) == {"a": "1", "b": "c=d"}
    with pytest.raises(ConfigError, match="2"):
        parse_assignments(["a = 1", "oops"])


def test_dump_round_trip():
    c = make_config({"learning_rates": "0.2,0.3", "variant": "NHxUNI", "layer_sizes": "30,10,1"})
    assert make_config(parse_assignments(c.dump().splitlines())) == c


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/x.cfg")

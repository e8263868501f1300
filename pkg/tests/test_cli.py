import time

import pytest

from drmm.cli import main
from drmm.trec import read_run


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_index_stats_and_refusal(tmp_path, capsys):
    corpus = tmp_path / "c.tsv"
    corpus.write_text("d1\ta b a\nd2\tb c\n")
    idx = tmp_path / "idx"
    assert run_cli("index", "--corpus", corpus, "--index-dir", idx, "--stemmer", "none") == 0
    out = capsys.readouterr().out
    assert "docs\t2" in out and "vocab\t3" in out and "length\t5" in out
    assert run_cli("index", "--corpus", corpus, "--index-dir", idx) == 4
    assert "--force" in capsys.readouterr().err
    assert run_cli("index", "--corpus", corpus, "--index-dir", idx, "--force") == 0


def test_index_empty_corpus_warns(tmp_path, capsys):
    corpus = tmp_path / "empty.tsv"
    corpus.write_text("")
    assert run_cli("index", "--corpus", corpus, "--index-dir", tmp_path / "i") == 0
    cap = capsys.readouterr()
    assert "docs\t0" in cap.out and "vocab\t0" in cap.out and "warning" in cap.err


def test_index_parse_error_exit_code(tmp_path, capsys):
    corpus = tmp_path / "bad.tsv"
    corpus.write_text("d1\tok\nno tab here\n")
    assert run_cli("index", "--corpus", corpus, "--index-dir", tmp_path / "i", "--format", "tsv") == 3
    assert f"{corpus}:2" in capsys.readouterr().err


@pytest.fixture(scope="module")
def pipeline_files(small_collection, tmp_path_factory):
    d, _ = small_collection
    work = tmp_path_factory.mktemp("cli")
    idx = work / "idx"
    assert run_cli("index", "--corpus", d / "corpus.tsv", "--index-dir", idx) == 0
    run = work / "ql.run"
    assert run_cli("retrieve", "--index-dir", idx, "--topics", d / "topics.tsv", "-k", 60, "--output", run) == 0
    return d, work, idx, run


def test_retrieve_is_deterministic_and_valid(pipeline_files):
    d, work, idx, run = pipeline_files
    again = work / "ql2.run"
    assert run_cli("retrieve", "--index-dir", idx, "--topics", d / "topics.tsv", "-k", 60, "--output", again) == 0
    assert run.read_bytes() == again.read_bytes()
    for entries in read_run(run).values():
        assert len(entries) <= 60
        assert [e.rank for e in entries] == list(range(1, len(entries) + 1))
        assert all(a.score >= b.score for a, b in zip(entries, entries[1:]))
        assert entries[0].tag == "QL"


def test_retrieve_skips_stopped_out_topics(pipeline_files, tmp_path, capsys):
    _, _, idx, _ = pipeline_files
    topics = tmp_path / "t.tsv"
    topics.write_text("q1\tthe of and\nq2\tzzzz\n")
    assert run_cli("retrieve", "--index-dir", idx, "--topics", topics, "--output", tmp_path / "r") == 0
    assert "q1" in capsys.readouterr().err
    assert (tmp_path / "r").read_text() == ""


def test_train_rerank_evaluate(pipeline_files, tmp_path, capsys):
    d, work, idx, run = pipeline_files
    common = ["--index-dir", idx, "--embeddings", d / "embeddings.txt", "--run", run, "--topics", d / "topics.tsv"]
    ckpt = tmp_path / "m.npz"
    assert run_cli("train", *common, "--qrels", d / "qrels.txt", "--max-epochs", 2, "--output", ckpt,
                   "--log", tmp_path / "train.log") == 0
    assert (tmp_path / "train.log").read_text().startswith("epoch=1\t")

    out = tmp_path / "drmm.run"
    dump = tmp_path / "hist.txt"
    assert run_cli("rerank", *common, "--model", ckpt, "--depth", 40, "--output", out,
                   "--dump-histograms", dump) == 0
    assert "OOV" in capsys.readouterr().err
    first, second = read_run(run), read_run(out)
    assert set(second) == set(first)
    for qid, entries in second.items():
        assert len(entries) == min(40, len(first[qid]))
        assert {e.external_id for e in entries} <= {e.external_id for e in first[qid]}
        assert entries[0].tag == "DRMM_LCHxIDF"
    assert len(dump.read_text().splitlines()[0].split("\t")) == 4

    kv = tmp_path / "kv.tsv"
    assert run_cli("evaluate", "--run", out, "--qrels", d / "qrels.txt", "--baseline", run,
                   "--iterations", 200, "--kv-output", kv) == 0
    table = capsys.readouterr().out
    assert "ndcg_cut_20" in table and "ql.run" in table
    lines = kv.read_text().splitlines()
    assert any(l.startswith("map\tall\t") for l in lines)
    assert any(l.startswith("p_P_20_vs_ql.run\tall\t") for l in lines)


def test_rerank_single_candidate(pipeline_files, tmp_path):
    d, work, idx, run = pipeline_files
    first = read_run(run)
    qid = sorted(first)[0]
    one = tmp_path / "one.run"
    e = first[qid][0]
    one.write_text(f"{qid} Q0 {e.external_id} 1 {e.score} QL\n")
    from drmm.model import DrmmModel, NetworkConfig

    ckpt = tmp_path / "m.npz"
    DrmmModel.create(NetworkConfig(), seed=1).save(ckpt)
    out = tmp_path / "o.run"
    assert run_cli("rerank", "--index-dir", idx, "--embeddings", d / "embeddings.txt", "--run", one,
                   "--topics", d / "topics.tsv", "--model", ckpt, "--output", out) == 0
    assert [x.external_id for x in read_run(out)[qid]] == [e.external_id]


def test_rerank_unknown_candidate(pipeline_files, tmp_path, capsys):
    d, work, idx, run = pipeline_files
    qid = sorted(read_run(run))[0]
    bad = tmp_path / "bad.run"
    bad.write_text(f"{qid} Q0 NOT-A-DOC 1 1.0 QL\n")
    from drmm.model import DrmmModel, NetworkConfig

    ckpt = tmp_path / "m.npz"
    DrmmModel.create(NetworkConfig(), seed=1).save(ckpt)
    code = run_cli("rerank", "--index-dir", idx, "--embeddings", d / "embeddings.txt", "--run", bad,
                   "--topics", d / "topics.tsv", "--model", ckpt, "--output", tmp_path / "o")
    assert code == 6 and "NOT-A-DOC" in capsys.readouterr().err


def test_experiment_command(small_collection, tmp_path, capsys):
    _, cfg = small_collection
    out = tmp_path / "exp"
    assert run_cli("experiment", "--config", cfg, "--output-dir", out, "--set", "max_epochs=2") == 0
    assert "DRMM_LCHxIDF" in capsys.readouterr().out
    for name in ("firststage.run", "drmm.run", "report.txt", "report.tsv", "train.log", "config.txt"):
        assert (out / name).exists()
    assert len(list((out / "checkpoints").glob("fold*.npz"))) == 5


def test_experiment_stage_failure(tmp_path, capsys):
    code = run_cli("experiment", "--set", "corpus=/nonexistent.tsv", "--output-dir", tmp_path / "x")
    assert code == 7
    assert "stage 'index' failed" in capsys.readouterr().err


def test_bad_config_key_exit_code(capsys):
    assert run_cli("experiment", "--set", "nonsense=1") == 4


def test_bundled_toy_experiment(tmp_path, capsys):
    start = time.perf_counter()
    assert run_cli("experiment", "--toy", "--output-dir", tmp_path / "toy") == 0
    assert time.perf_counter() - start < 60
    table = capsys.readouterr().out
    for metric in ("map", "ndcg_cut_20", "P_20"):
        assert metric in table
    kv = (tmp_path / "toy" / "report.tsv").read_text()
    assert "DRMM_LCHxIDF\tmap\tall\t" in kv and "QL\tP_20\tall\t" in kv

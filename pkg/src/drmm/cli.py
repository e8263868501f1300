"""Command-line interface: ``drmm {index,retrieve,train,rerank,evaluate,experiment}``."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import load_config, parse_assignments
from .embed import load_embeddings
from .errors import ConfigError, DrmmError
from .evaluate import add_significance, evaluate_run, EvalReport, METRICS
from .features import Featurizer
from .firststage import RetrievalParams
from .histogram import InputSpec, dump_line
from .index import InvertedIndex, build_index, stats_summary
from .model import DrmmModel, NetworkConfig, parse_variant
from .pipeline import check_candidates, first_stage, fit_drmm, prepare_queries, rerank, run_experiment
from .textpipe import TextPipeline
from .train import TrainConfig
from .trec import read_corpus, read_qrels, read_run, read_topics, run_rankings, write_run

log = logging.getLogger("drmm")


def _queries(args, pipeline):
    stoplist = pipeline.load_stoplist(args.stoplist)
    queries, skipped = prepare_queries(read_topics(args.topics), args.field, pipeline, stoplist)
    for qid in skipped:
        print(f"warning: query {qid} has no terms after stopping; skipped", file=sys.stderr)
    return queries


def cmd_index(args) -> int:
    out = Path(args.index_dir)
    if (out / "meta.json").exists() and not args.force:
        raise ConfigError(f"{out} already holds an index; pass --force to overwrite")
    index = build_index(read_corpus(args.corpus, args.format), TextPipeline(args.stemmer))
    index.save(out)
    stats = stats_summary(index)
    if stats["docs"] == 0:
        print("warning: corpus is empty", file=sys.stderr)
    print(f"docs\t{stats['docs']}\nvocab\t{stats['vocab']}\nlength\t{stats['length']}\n"
          f"avg_doc_length\t{stats['avg_doc_length']:.4f}")
    return 0


def cmd_retrieve(args) -> int:
    index = InvertedIndex.load(args.index_dir)
    queries = _queries(args, TextPipeline(index.stemmer))
    run = first_stage(index, queries, args.model, RetrievalParams(args.mu, args.k1, args.b, args.k))
    write_run(run, args.output, args.tag or args.model)
    return 0


def _featurizer(index, store, network: NetworkConfig, queries):
    return Featurizer(index, store, InputSpec(network.input_mode, network.layer_sizes[0]), network.gating, queries)


def cmd_train(args) -> int:
    index = InvertedIndex.load(args.index_dir)
    pipeline = TextPipeline(index.stemmer)
    queries = _queries(args, pipeline)
    store = load_embeddings(args.embeddings, args.embedding_format, pipeline)
    qrels = read_qrels(args.qrels)
    candidates = {q: d[:args.rerank_depth] for q, d in run_rankings(read_run(args.run)).items() if q in queries}
    check_candidates(index, candidates)
    mode, gating = parse_variant(args.variant)
    layers = tuple(int(x) for x in args.layers.split(","))
    net = NetworkConfig(layers, gating, mode, store.dimension)
    tc = TrainConfig(args.learning_rate, args.batch_size, args.adagrad_epsilon, args.max_epochs,
                     args.patience, args.negatives, args.seed)
    featurizer = _featurizer(index, store, net, queries)
    ranker = fit_drmm(net, tc, featurizer, qrels, candidates, sorted(candidates), args.depth,
                      args.validation_fraction, split_seed=args.seed, init_seed=args.seed, map_cutoff=args.depth)
    ranker.model.save(args.output)
    log_text = ranker.result.log_text()
    if args.log:
        Path(args.log).write_text(log_text)
    sys.stdout.write(log_text)
    return 0


def cmd_rerank(args) -> int:
    index = InvertedIndex.load(args.index_dir)
    pipeline = TextPipeline(index.stemmer)
    queries = _queries(args, pipeline)
    store = load_embeddings(args.embeddings, args.embedding_format, pipeline)
    model = DrmmModel.load(args.model)
    candidates = {q: d for q, d in run_rankings(read_run(args.run)).items() if q in queries}
    check_candidates(index, candidates)
    featurizer = _featurizer(index, store, model.config, queries)
    inv, oov = featurizer.coverage_report().values()
    print(f"query terms in vocabulary: {inv}, OOV: {oov}", file=sys.stderr)
    run = rerank(model, featurizer, candidates, depth=args.depth)
    write_run(run, args.output, f"DRMM_{model.config.variant}")
    if args.dump_histograms:
        with open(args.dump_histograms, "w") as f:
            for qid in sorted(run):
                for ext, _ in run[qid]:
                    inputs = featurizer.inputs(qid, index.doc_id(ext))
                    for term, vec in zip(queries[qid], inputs.Z0):
                        f.write(dump_line(qid, ext, term, vec) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    qrels = read_qrels(args.qrels)
    runs = [args.run] + list(args.baseline or [])
    reports = []
    for path in runs:
        ranking = run_rankings(read_run(path))
        qids = sorted(set(ranking) | set(qrels)) if args.all_queries else sorted(ranking)
        pq, excluded = evaluate_run(ranking, qrels, qids, args.cutoff)
        means = {m: (sum(pq[m].values()) / len(pq[m]) if pq[m] else 0.0) for m in METRICS}
        reports.append(EvalReport(pq, means, excluded=excluded, name=Path(path).name))
    main = reports[0]
    for other in reports[1:]:
        add_significance(main, other, args.iterations, args.seed)
    print(main.table(reports[1:]))
    kv = "\n".join(main.kv_lines()) + "\n"
    if args.kv_output:
        Path(args.kv_output).write_text(kv)
    else:
        sys.stdout.write(kv)
    return 0


def toy_config_path() -> Path:
    return Path(str(resources.files("drmm.data") / "toy" / "experiment.cfg"))


def cmd_experiment(args) -> int:
    overrides = parse_assignments(args.set or [], "--set")
    for key in ("variant", "output_dir", "field"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    path = toy_config_path() if args.toy else args.config
    if path is None and not overrides:
        raise ConfigError("experiment needs --config, --toy or --set key=value settings")
    config = load_config(path, overrides)
    result = run_experiment(config)
    print(result.drmm.table([result.baseline]))
    print(f"outputs written to {result.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drmm", description="Deep relevance matching for ad-hoc retrieval.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def query_args(sp):
        sp.add_argument("--topics", required=True)
        sp.add_argument("--field", choices=("title", "desc"), default="title")
        sp.add_argument("--stoplist", default=None, help="stoplist file (default: bundled list)")

    sp = sub.add_parser("index", help="build an inverted index")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--index-dir", required=True)
    sp.add_argument("--format", choices=("auto", "trec", "tsv"), default="auto")
    sp.add_argument("--stemmer", choices=("porter", "none"), default="porter")
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("retrieve", help="first-stage QL/BM25 retrieval")
    sp.add_argument("--index-dir", required=True)
    query_args(sp)
    sp.add_argument("--model", choices=("QL", "BM25"), default="QL")
    sp.add_argument("--mu", type=float, default=2500.0)
    sp.add_argument("--k1", type=float, default=1.2)
    sp.add_argument("--b", type=float, default=0.75)
    sp.add_argument("-k", type=int, default=2000)
    sp.add_argument("--tag", default=None)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_retrieve)

    def model_inputs(sp):
        sp.add_argument("--index-dir", required=True)
        sp.add_argument("--embeddings", required=True)
        sp.add_argument("--embedding-format", choices=("text", "binary"), default="text")
        sp.add_argument("--run", required=True, help="first-stage run file with candidates")
        query_args(sp)

    sp = sub.add_parser("train", help="train a DRMM checkpoint")
    model_inputs(sp)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--variant", default="LCHxIDF")
    sp.add_argument("--layers", default="30,5,1")
    sp.add_argument("--learning-rate", type=float, default=0.1)
    sp.add_argument("--batch-size", type=int, default=20)
    sp.add_argument("--adagrad-epsilon", type=float, default=1e-8)
    sp.add_argument("--max-epochs", type=int, default=30)
    sp.add_argument("--patience", type=int, default=5)
    sp.add_argument("--negatives", type=int, default=1)
    sp.add_argument("--validation-fraction", type=float, default=0.2)
    sp.add_argument("--rerank-depth", type=int, default=2000)
    sp.add_argument("--depth", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--log", default=None)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("rerank", help="rerank a first-stage run with a checkpoint")
    model_inputs(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--depth", type=int, default=1000)
    sp.add_argument("--dump-histograms", default=None)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_rerank)

    sp = sub.add_parser("evaluate", help="MAP / nDCG@20 / P@20 with significance tests")
    sp.add_argument("--run", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--baseline", action="append", help="run(s) to compare against")
    sp.add_argument("--cutoff", type=int, default=1000)
    sp.add_argument("--iterations", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--all-queries", action="store_true", help="score judged queries missing from the run as 0")
    sp.add_argument("--kv-output", default=None)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("experiment", help="full k-fold experiment")
    sp.add_argument("--config", default=None)
    sp.add_argument("--toy", action="store_true", help="use the bundled toy collection")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE")
    sp.add_argument("--variant", default=None)
    sp.add_argument("--output-dir", dest="output_dir", default=None)
    sp.add_argument("--field", choices=("title", "desc"), default=None)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DrmmError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

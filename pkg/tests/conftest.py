import numpy as np
import pytest

from drmm.embed import EmbeddingStore
from drmm.index import build_index
from drmm.textpipe import TextPipeline

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    crit = getattr(report, "_acceptance", None)
    if crit is None:
        return
    if report.failed:
        _acceptance[crit] = "failed"
    elif report.skipped:
        _acceptance.setdefault(crit, "skipped")
    elif report.when == "call":
        _acceptance.setdefault(crit, "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), outcome in sorted(_acceptance.items()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {num}: {text}")


@pytest.fixture
def plain():
    """Pipeline without stemming, for hand-computed examples."""
    return TextPipeline("none")


@pytest.fixture
def hand_index(plain):
    return build_index([("d1", "a b a"), ("d2", "b c")], plain)


def random_store(terms, dim=8, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingStore(list(terms), rng.normal(size=(len(terms), dim)))


@pytest.fixture(scope="session")
def small_collection(tmp_path_factory):
    """A written synthetic collection small enough for CLI round trips."""
    from drmm.synthetic import generate

    d = tmp_path_factory.mktemp("collection")
    col = generate(num_docs=120, num_queries=10, vocab_size=30, dim=8, seed=5)
    cfg = col.write(d, {"max_epochs": 3, "patience": 2, "fisher_iterations": 500, "rerank_depth": 100,
                        "output_depth": 50})
    return d, cfg

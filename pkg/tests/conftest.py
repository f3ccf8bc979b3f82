import pytest

from ptlab.graph_core import Graph, graph_classes, random_graph
from ptlab.seeding import derive_seed, rng_for

CORPUS_SEED = 20240611


def class_representatives(lo=4, hi=7):
    """One graph per isomorphism class on lo..hi vertices."""
    return [Graph.from_mask(code, k) for k in range(lo, hi + 1) for code in graph_classes(k)]


def random_corpus(count=500, max_n=40, seed=CORPUS_SEED):
    rng = rng_for(seed)
    sizes = rng.integers(4, max_n + 1, size=count)
    return [random_graph(int(n), derive_seed(seed, i)) for i, n in enumerate(sizes)]


@pytest.fixture(scope="session")
def corpus():
    return class_representatives() + random_corpus()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from gffnet.graph import cycle_graph, path_graph, sample_erdos_renyi, star_graph

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(name: str, passed: bool, detail: str):
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def random_graph(rng: np.random.Generator, d: int):
    """Mixed family: ER with random p (weighted or not), path, cycle, star."""
    kind = rng.integers(5)
    if kind == 0 or d < 3:
        return path_graph(d)
    if kind == 1:
        return cycle_graph(d)
    if kind == 2:
        return star_graph(d)
    g = sample_erdos_renyi(d, float(rng.uniform(0.2, 1.0)), rng)
    if kind == 4:
        from gffnet.graph import WeightedGraph
        return WeightedGraph(d, tuple((i, j, float(rng.uniform(0.5, 3.0))) for i, j, _ in g.edges))
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

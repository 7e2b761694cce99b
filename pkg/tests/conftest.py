import networkx as nx
import pytest

from attrgof.graph import AttributedGraph
from attrgof.io import save_gml


def lesmis_graph():
    """Les Miserables co-appearance network as shipped with networkx, attributes zero."""
    G = nx.convert_node_labels_to_integers(nx.les_miserables_graph())
    return AttributedGraph.from_edges(G.number_of_nodes(), list(G.edges()),
                                      [0] * G.number_of_nodes())


@pytest.fixture(scope="session")
def lesmis_gml(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "lesmis.gml"
    save_gml(lesmis_graph(), path)
    return path


_ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one acceptance verdict; the summary is printed at the end of the run."""
    def _record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

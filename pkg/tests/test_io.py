import logging

import networkx as nx
import numpy as np
import pytest

from attrgof import io
from attrgof.errors import DomainError, ParseError, UnsupportedConstructError
from attrgof.graph import AttributedGraph
from attrgof.models import er_model, gf_model, sbm_model


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- edge lists -------------------------------------------------------------

def test_edge_list_basic(tmp_path):
    p = write(tmp_path, "g.txt", "# nodes: 5\n0 1\n1 2  # trailing comment\n\n3 1\n")
    g = io.load_edge_list(p)
    assert g.node_count == 5
    assert g.edges.tolist() == [[0, 1], [1, 2], [1, 3]]


def test_edge_list_infers_node_count(tmp_path):
    g = io.load_edge_list(write(tmp_path, "g.txt", "0 1\n2 3\n"))
    assert g.node_count == 4


def test_edge_list_duplicates_warn(tmp_path, caplog):
    p = write(tmp_path, "g.txt", "0 1\n1 0\n0 1\n")
    with caplog.at_level(logging.WARNING):
        g = io.load_edge_list(p)
    assert g.edge_count == 1
    assert "duplicate" in caplog.text


@pytest.mark.parametrize("text,line", [
    ("0 1\n2 2\n", 2), ("0 1\n0 x\n", 2), ("0 1 2\n", 1), ("0 -1\n", 1),
])
def test_edge_list_errors(tmp_path, text, line):
    with pytest.raises(ParseError) as err:
        io.load_edge_list(write(tmp_path, "g.txt", text))
    assert err.value.line == line


def test_edge_list_out_of_range(tmp_path):
    with pytest.raises(ParseError) as err:
        io.load_edge_list(write(tmp_path, "g.txt", "# nodes: 3\n0 1\n1 3\n"))
    assert err.value.line == 3


def test_attributes(tmp_path):
    x = io.load_attributes(write(tmp_path, "a.txt", "0 1\n2 0\n1 1\n"), 3)
    assert x.tolist() == [1, 1, 0]
    with pytest.raises(DomainError):
        io.load_attributes(write(tmp_path, "b.txt", "0 2\n"), 1)
    with pytest.raises(ParseError):
        io.load_attributes(write(tmp_path, "c.txt", "0 1\n"), 2)
    with pytest.raises(ParseError):
        io.load_attributes(write(tmp_path, "d.txt", "0 1\n0 0\n"), 1)


def test_edge_list_round_trip(tmp_path):
    g = AttributedGraph.from_edges(6, [(0, 5), (1, 2), (3, 4)], [1, 0, 1, 1, 0, 0])
    io.save_edge_list(g, tmp_path / "e.txt")
    io.save_attributes(g, tmp_path / "a.txt")
    h = io.load_edge_list(tmp_path / "e.txt", attributes=io.load_attributes(tmp_path / "a.txt"))
    assert h == g


# --- GML --------------------------------------------------------------------

GML = """\
graph [
  comment "toy"
  directed 0
  node [ id 10 label "a" value 3 ]
  node [ id 20 label "b" value 0 ]
  node [
    id 30
    value 1
  ]
  edge [ source 10 target 20 ]
  edge [ source 30 target 20 value 2.5 ]
]
"""


def test_gml_subset(tmp_path):
    res = io.load_gml_subset(write(tmp_path, "g.gml", GML))
    assert res.node_ids == (10, 20, 30)
    assert res.has_values
    assert res.graph.attributes.tolist() == [1, 0, 1]
    assert res.graph.edges.tolist() == [[0, 1], [1, 2]]


@pytest.mark.parametrize("text,exc,line", [
    ("graph [ directed 1 node [ id 0 ] ]", UnsupportedConstructError, 1),
    ("graph [\n multigraph 1\n]", UnsupportedConstructError, 2),
    ("graph [\n node [ id 0 ]\n edge [ source 0 target 5 ]\n]", ParseError, 3),
    ("graph [\n node [ id 0 ]\n\n edge [ source 0 target 0 ]\n]", ParseError, 4),
    ("graph [\n node [ label \"x\" ]\n]", UnsupportedConstructError, 2),
    ("graph [\n node [ id 0 ]\n edge [ source 0 ]\n]", UnsupportedConstructError, 3),
])
def test_gml_errors(tmp_path, text, exc, line):
    with pytest.raises(exc) as err:
        io.load_gml_subset(write(tmp_path, "g.gml", text))
    assert err.value.line == line


def test_gml_string_values_need_predicate(tmp_path):
    text = 'graph [ node [ id 0 value "c" ] node [ id 1 value "l" ] edge [ source 0 target 1 ] ]'
    p = write(tmp_path, "g.gml", text)
    with pytest.raises(DomainError):
        io.load_gml_subset(p)
    res = io.load_gml_subset(p, lambda v: 1 if v == "l" else 0)
    assert res.graph.attributes.tolist() == [0, 1]


def test_gml_matches_networkx_on_lesmis(tmp_path):
    G = nx.convert_node_labels_to_integers(nx.les_miserables_graph())
    path = tmp_path / "lesmis.gml"
    nx.write_gml(G, path)
    res = io.load_gml_subset(path)
    assert res.graph.node_count == G.number_of_nodes() == 77
    assert res.graph.edge_count == G.number_of_edges() == 254
    got = {tuple(e) for e in res.graph.edges.tolist()}
    want = {(min(u, v), max(u, v)) for u, v in G.edges()}
    assert got == want
    assert not res.has_values


def test_gml_round_trip(tmp_path):
    g = AttributedGraph.from_edges(4, [(0, 1), (2, 3), (1, 3)], [1, 0, 0, 1])
    io.save_gml(g, tmp_path / "g.gml")
    h = io.load_gml_subset(tmp_path / "g.gml").graph
    np.testing.assert_array_equal(h.edges, g.edges)
    np.testing.assert_array_equal(h.attributes, g.attributes)
    back = nx.read_gml(tmp_path / "g.gml", label="id")
    assert back.number_of_edges() == 3


# --- manifests, models, CSV -------------------------------------------------

def test_manifest():
    g = AttributedGraph.from_edges(74, [(0, 1)], [1] + [0] * 73)
    m = io.DatasetManifest.from_graph("lesmis", g)
    assert (m.pair_count, m.ordered_pair_count, m.positive_attribute_count) == (2701, 5476, 1)
    assert m.benchmark_match() is True
    assert io.DatasetManifest.from_graph("lesmis", g.permuted(list(range(74)))).benchmark_match()
    other = io.DatasetManifest.from_graph("other", g)
    assert other.benchmark_match() is None


@pytest.mark.parametrize("model", [
    er_model(5, 0.25),
    sbm_model([0, 0, 1, 1, 1], [[0.5, 0.1], [0.1, 0.3]]),
    gf_model(0.5, 1.0, 3.0, 50, 12, seed=2, truncation=200),
])
def test_model_json_round_trip(tmp_path, model):
    io.save_model(model, tmp_path / "m.json")
    back = io.load_model(tmp_path / "m.json")
    assert back.kind == model.kind
    np.testing.assert_array_equal(back.prob, model.prob)


def test_write_csv(tmp_path, capsys):
    rows = [[1, 0.1, True, float("nan"), "x"]]
    io.write_csv(rows, ["a", "b", "c", "d", "e"], tmp_path / "o.csv")
    assert (tmp_path / "o.csv").read_bytes() == b"a,b,c,d,e\n1,0.1,1,nan,x\n"
    io.write_csv(rows, ["a", "b", "c", "d", "e"], "-")
    assert capsys.readouterr().out == "a,b,c,d,e\n1,0.1,1,nan,x\n"

"""Reading and writing graphs, attributes, models and CSV tables.

Edge lists are plain text with one whitespace-separated ``u v`` pair of
0-based ids per line. ``#`` starts a comment, and a ``# nodes: N`` comment
declares the node count. Attribute files hold ``node_id value`` lines. GML
support covers the undirected ``node [ id .. value .. ]`` /
``edge [ source .. target .. ]`` subset.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GraphValidationError, ParseError, UnsupportedConstructError
from .graph import AttributedGraph
from .models import EdgeProbabilityModel, er_model, gf_model, sbm_model

log = logging.getLogger(__name__)

_NODES_RE = re.compile(r"#\s*nodes\s*[:=]\s*(\d+)", re.IGNORECASE)

# Node counts of the benchmark networks used for SBM model selection.
BENCHMARK_NODE_COUNTS = {
    "adjnoun": 109,
    "dolphins": 51,
    "polbooks": 103,
    "football": 113,
    "lesmis": 74,
}


def _strip(line):
    return line.split("#", 1)[0].strip()


def _parse_int(tok, lineno, path):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno, path) from None


def read_edge_pairs(path):
    """``(pairs, declared_node_count)`` from an edge-list file."""
    pairs = []
    declared = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            m = _NODES_RE.match(raw.strip())
            if m:
                declared = int(m.group(1))
                continue
            line = _strip(raw)
            if not line:
                continue
            toks = line.split()
            if len(toks) != 2:
                raise ParseError(f"expected 'u v', got {line!r}", lineno, path)
            u, v = (_parse_int(t, lineno, path) for t in toks)
            if u < 0 or v < 0:
                raise ParseError("node ids must be non-negative", lineno, path)
            if u == v:
                raise ParseError(f"self-loop on node {u}", lineno, path)
            pairs.append((u, v, lineno))
    return pairs, declared


def load_edge_list(path, node_count=None, attributes=None):
    pairs, declared = read_edge_pairs(path)
    n = node_count if node_count is not None else declared
    max_id = max((max(u, v) for u, v, _ in pairs), default=-1)
    if n is None:
        n = max_id + 1
    for u, v, lineno in pairs:
        if max(u, v) >= n:
            raise ParseError(f"node id {max(u, v)} out of range for {n} nodes", lineno, path)
    seen = {(min(u, v), max(u, v)) for u, v, _ in pairs}
    if len(seen) < len(pairs):
        log.warning("%s: collapsed %d duplicate edges", path, len(pairs) - len(seen))
    if n < 1:
        raise ParseError("graph has no nodes", None, path)
    return AttributedGraph.from_edges(n, sorted(seen) or np.zeros((0, 2), np.int64),
                                      attributes)


def load_attributes(path, node_count=None):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = _strip(raw)
            if not line:
                continue
            toks = line.split()
            if len(toks) != 2:
                raise ParseError(f"expected 'node_id value', got {line!r}", lineno, path)
            node = _parse_int(toks[0], lineno, path)
            val = _parse_int(toks[1], lineno, path)
            if val not in (0, 1):
                raise DomainError(f"{path}:{lineno}: attribute value {val} is not 0 or 1")
            if node < 0 or (node_count is not None and node >= node_count):
                raise ParseError(f"node id {node} out of range", lineno, path)
            if node in values:
                raise ParseError(f"duplicate attribute for node {node}", lineno, path)
            values[node] = val
    n = node_count if node_count is not None else (max(values, default=-1) + 1)
    missing = [i for i in range(n) if i not in values]
    if missing:
        raise ParseError(f"missing attribute for node {missing[0]}", None, path)
    return np.array([values[i] for i in range(n)], dtype=np.int8)


def save_edge_list(graph, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# nodes: {graph.node_count}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")


def save_attributes(graph, path):
    with open(path, "w", newline="\n") as fh:
        for i, x in enumerate(graph.attributes):
            fh.write(f"{i} {int(x)}\n")


# --- GML subset -----------------------------------------------------------

_TOKEN_RE = re.compile(r'\s*(?:(#[^\n]*)|("(?:[^"\\]|\\.)*")|(\[)|(\])|([^\s\[\]"]+))')


def _tokenize(text, path):
    pos = 0
    line = 1
    lpos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError("unreadable GML token", line, path)
        start = m.start(m.lastindex)
        line += text.count("\n", lpos, start)
        lpos = start
        pos = m.end()
        comment, string, lb, rb, word = m.groups()
        if comment is not None:
            continue
        if string is not None:
            out.append(("str", string[1:-1], line))
        elif lb:
            out.append(("[", lb, line))
        elif rb:
            out.append(("]", rb, line))
        elif word is not None:
            out.append(("word", word, line))
    return out


def _parse_block(tokens, i, path):
    """Parse ``key value`` pairs until the matching ``]``; returns (list, next_i)."""
    items = []
    while i < len(tokens):
        kind, val, line = tokens[i]
        if kind == "]":
            return items, i + 1
        if kind != "word":
            raise ParseError(f"expected a key, got {val!r}", line, path)
        if i + 1 >= len(tokens):
            raise ParseError(f"key {val!r} has no value", line, path)
        vkind, vval, _ = tokens[i + 1]
        if vkind == "[":
            sub, i = _parse_block(tokens, i + 2, path)
            items.append((val, sub, line))
        elif vkind == "]":
            raise ParseError(f"key {val!r} has no value", line, path)
        else:
            items.append((val, _gml_scalar(vkind, vval), line))
            i += 2
    return items, i


def _gml_scalar(kind, val):
    if kind == "str":
        return val
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            pass
    return val


def default_binarize(value):
    if isinstance(value, str):
        raise DomainError(f"non-numeric node value {value!r}; supply positive values")
    return 1 if value > 0 else 0


@dataclass(frozen=True)
class GmlGraph:
    graph: AttributedGraph
    node_ids: tuple
    has_values: bool


def load_gml_subset(path, binarize=default_binarize):
    """Load an undirected GML file; node ``value`` fields become attributes.

    Nodes are renumbered ``0..n-1`` in file order. Nodes without ``value`` get
    attribute 0; ``has_values`` on the result tells whether any value was seen.
    """
    with open(path) as fh:
        tokens = _tokenize(fh.read(), path)
    top, i = _parse_block(tokens, 0, path)
    if i < len(tokens):
        raise ParseError("unbalanced ']'", tokens[i - 1][2], path)
    graphs = [(body, line) for key, body, line in top if key == "graph"]
    if len(graphs) != 1 or not isinstance(graphs[0][0], list):
        raise UnsupportedConstructError("expected exactly one 'graph [ ... ]' record", None, path)
    body, gline = graphs[0]
    ids = {}
    order = []
    raw_values = []
    edges = []
    for key, val, line in body:
        if key in ("directed", "multigraph") and val not in (0, "0"):
            raise UnsupportedConstructError(f"{key} graphs are not supported", line, path)
        if key == "node":
            rec = {k: v for k, v, _ in val}
            if "id" not in rec:
                raise UnsupportedConstructError("node without id", line, path)
            nid = rec["id"]
            if nid in ids:
                raise ParseError(f"duplicate node id {nid!r}", line, path)
            ids[nid] = len(order)
            order.append(nid)
            raw_values.append(rec.get("value"))
        elif key == "edge":
            rec = {k: v for k, v, _ in val}
            if "source" not in rec or "target" not in rec:
                raise UnsupportedConstructError("edge without source/target", line, path)
            edges.append((rec["source"], rec["target"], line))
    if not order:
        raise ParseError("graph has no nodes", gline, path)
    pairs = set()
    for s, t, line in edges:
        if s not in ids or t not in ids:
            raise ParseError(f"edge references unknown node {s if s not in ids else t!r}",
                             line, path)
        u, v = ids[s], ids[t]
        if u == v:
            raise ParseError(f"self-loop on node {s!r}", line, path)
        pairs.add((min(u, v), max(u, v)))
    if len(pairs) < len(edges):
        log.warning("%s: collapsed %d duplicate edges", path, len(edges) - len(pairs))
    has_values = any(v is not None for v in raw_values)
    attrs = np.array([0 if v is None else binarize(v) for v in raw_values], dtype=np.int8)
    try:
        graph = AttributedGraph.from_edges(len(order), sorted(pairs) or np.zeros((0, 2)), attrs)
    except GraphValidationError as exc:
        raise DomainError(str(exc)) from exc
    return GmlGraph(graph, tuple(order), has_values)


def save_gml(graph, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("graph [\n  directed 0\n")
        for i, x in enumerate(graph.attributes):
            fh.write(f"  node [\n    id {i}\n    value {int(x)}\n  ]\n")
        for u, v in graph.edges:
            fh.write(f"  edge [\n    source {u}\n    target {v}\n  ]\n")
        fh.write("]\n")


# --- manifests ------------------------------------------------------------

@dataclass(frozen=True)
class DatasetManifest:
    name: str
    node_count: int
    edge_count: int
    pair_count: int
    ordered_pair_count: int
    positive_attribute_count: int
    sources: tuple = ()

    @classmethod
    def from_graph(cls, name, graph, sources=()):
        n = graph.node_count
        return cls(name, n, graph.edge_count, n * (n - 1) // 2, n * n,
                   int(graph.attributes.sum()), tuple(str(s) for s in sources))

    def benchmark_match(self):
        """``None`` if the name is not a benchmark network, else whether node counts agree."""
        want = BENCHMARK_NODE_COUNTS.get(self.name.lower())
        return None if want is None else want == self.node_count


# --- models ---------------------------------------------------------------

def model_to_dict(model):
    out = {"kind": model.kind, "node_count": model.node_count, "params": model.params}
    if model.kind == "CUSTOM":
        out["prob"] = model.prob.tolist()
    return out


def model_from_dict(d):
    kind = d["kind"]
    params = d.get("params", {})
    n = int(d["node_count"])
    if kind == "ER":
        return er_model(n, params["p"])
    if kind == "SBM":
        return sbm_model(params["z"], params["theta"])
    if kind == "GF":
        return gf_model(params["alpha"], params["beta"], params["gamma"],
                        params["iterations"], n, params.get("seed", 0),
                        params.get("truncation", 5000))
    return EdgeProbabilityModel(n, np.array(d["prob"]), "CUSTOM", params)


def save_model(model, path):
    with open(path, "w", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))


# --- CSV ------------------------------------------------------------------

def format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return "" if v is None else str(v)


def write_csv(rows, header, path=None):
    """Write ``rows`` with ``\\n`` line endings; ``path`` None or ``-`` means stdout."""
    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])

    if path is None or str(path) == "-":
        _emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            _emit(fh)

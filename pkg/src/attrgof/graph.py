"""Attributed graphs, edge-label counts and the phi (MSCC) statistic.

Edge labels are coded by the sum of the endpoint attributes, so label 0 is
``00``, label 1 is ``01`` and label 2 is ``11``. For an undirected graph the
ordered labels ``01`` and ``10`` are the same label.

Every undirected ``01`` edge contributes one half to each off-diagonal cell of
the ordered-pair contingency table. With that convention the table form of phi
and the beta parameterisation below give the same number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMarginError, EmptyGraphError, GraphValidationError

LABELS = ("00", "01", "11")


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected simple graph with one binary attribute per node.

    ``edges`` is an ``(m, 2)`` integer array with ``u < v`` in every row and
    rows sorted lexicographically; use :meth:`from_edges` to build one from
    arbitrary input.
    """

    node_count: int
    edges: np.ndarray
    attributes: np.ndarray

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphValidationError("node_count must be positive")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        attrs = np.asarray(self.attributes, dtype=np.int8).ravel()
        if attrs.shape[0] != self.node_count:
            raise GraphValidationError(
                f"attributes has length {attrs.shape[0]}, expected {self.node_count}"
            )
        if attrs.size and not np.isin(attrs, (0, 1)).all():
            raise GraphValidationError("attributes must be 0 or 1")
        if edges.size:
            if (edges < 0).any() or (edges >= self.node_count).any():
                raise GraphValidationError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise GraphValidationError("self-loops are not allowed")
            if (edges[:, 0] > edges[:, 1]).any():
                raise GraphValidationError("edges must be stored with u < v")
            keys = edges[:, 0] * self.node_count + edges[:, 1]
            if (np.diff(keys) <= 0).any():
                raise GraphValidationError("edges must be sorted and unique")
        object.__setattr__(self, "edges", _frozen(edges.copy()))
        object.__setattr__(self, "attributes", _frozen(attrs.copy()))

    @classmethod
    def from_edges(cls, node_count, edges, attributes=None):
        """Build a graph from any iterable of pairs, normalising orientation.

        Duplicate undirected pairs are collapsed; self-loops are rejected.
        Missing attributes default to all zeros.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr[:, 0] == arr[:, 1]).any():
            raise GraphValidationError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        if arr.size:
            arr = np.unique(arr, axis=0)
        if attributes is None:
            attributes = np.zeros(node_count, dtype=np.int8)
        return cls(int(node_count), arr, attributes)

    @property
    def edge_count(self):
        return int(self.edges.shape[0])

    def with_attributes(self, attributes):
        return AttributedGraph(self.node_count, self.edges, attributes)

    def adjacency(self):
        """Dense symmetric 0/1 adjacency matrix."""
        a = np.zeros((self.node_count, self.node_count), dtype=np.int8)
        if self.edge_count:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.attributes, other.attributes))

    __hash__ = None

    def permuted(self, perm):
        """Relabel node ``i`` as ``perm[i]``, carrying attributes along."""
        perm = np.asarray(perm, dtype=np.int64)
        attrs = np.empty_like(self.attributes)
        attrs[perm] = self.attributes
        return AttributedGraph.from_edges(self.node_count, perm[self.edges], attrs)


@dataclass(frozen=True)
class EdgeLabelCounts:
    m00: int
    m01: int
    m11: int

    @property
    def total(self):
        return self.m00 + self.m01 + self.m11


@dataclass(frozen=True)
class BetaSummary:
    """Edge-label fractions ``(beta1, beta2, beta3)`` for ``(00, 01, 11)``."""

    beta1: float
    beta2: float
    beta3: float
    edge_total: int

    def __post_init__(self):
        parts = (self.beta1, self.beta2, self.beta3)
        if any(b < 0.0 or b > 1.0 for b in parts):
            raise GraphValidationError("beta fractions must lie in [0, 1]")
        if abs(sum(parts) - 1.0) > 1e-12:
            raise GraphValidationError("beta fractions must sum to 1")

    @property
    def phi(self):
        return rho_from_beta(self.beta1, self.beta3)

    def counts(self):
        """Edge counts per label implied by the fractions (may be non-integer)."""
        return np.array([self.beta1, self.beta2, self.beta3]) * self.edge_total


@dataclass(frozen=True)
class ContingencyTable:
    """Ordered-pair 2x2 table; ``n10`` counts (first=1, second=0)."""

    n11: float
    n10: float
    n01: float
    n00: float

    @property
    def margins(self):
        """``(n1., n0., n.1, n.0)``."""
        return (
            self.n11 + self.n10,
            self.n01 + self.n00,
            self.n11 + self.n01,
            self.n10 + self.n00,
        )


def edge_labels(graph):
    """Label code (0, 1 or 2) of every edge of ``graph``."""
    if not graph.edge_count:
        return np.zeros(0, dtype=np.int8)
    x = graph.attributes
    return (x[graph.edges[:, 0]] + x[graph.edges[:, 1]]).astype(np.int8)


def classify_edge_labels(graph):
    counts = np.bincount(edge_labels(graph), minlength=3)
    return EdgeLabelCounts(int(counts[0]), int(counts[1]), int(counts[2]))


def beta_summary(counts):
    total = counts.total
    if total == 0:
        raise EmptyGraphError("beta fractions are undefined on a graph with no edges")
    return BetaSummary(counts.m00 / total, counts.m01 / total, counts.m11 / total, total)


def table_from_beta(beta):
    half = beta.beta2 * beta.edge_total / 2.0
    return ContingencyTable(
        n11=beta.beta3 * beta.edge_total,
        n10=half,
        n01=half,
        n00=beta.beta1 * beta.edge_total,
    )


def phi_from_table(t):
    m1r, m0r, m1c, m0c = t.margins
    if min(m1r, m0r, m1c, m0c) <= 0:
        raise DegenerateMarginError("contingency table has an empty margin")
    return (t.n11 * t.n00 - t.n10 * t.n01) / np.sqrt(m1r * m0r * m1c * m0c)


def _check_simplex(beta1, beta3):
    if not (0.0 <= beta1 <= 1.0 and 0.0 <= beta3 <= 1.0) or beta1 + beta3 > 1.0 + 1e-12:
        raise GraphValidationError(
            f"(beta1, beta3) = ({beta1}, {beta3}) is outside the simplex"
        )


def positive_fraction(beta1, beta3):
    """Share of endpoint slots carrying attribute 1: ``beta3 + beta2 / 2``."""
    return beta3 + (1.0 - beta1 - beta3) / 2.0


def rho_from_beta(beta1, beta3):
    """Correlation of the endpoint attributes from the 00 and 11 fractions."""
    _check_simplex(beta1, beta3)
    p = positive_fraction(beta1, beta3)
    if p <= 0.0 or p >= 1.0:
        raise DegenerateMarginError(
            f"attribute 1 occurs at a fraction {p} of endpoints; correlation undefined"
        )
    return (beta3 - p * p) / (p * (1.0 - p))


def rho_from_beta_polynomial(beta1, beta3):
    """Same correlation written as a ratio of polynomials in the fractions."""
    _check_simplex(beta1, beta3)
    den = (1.0 - beta1 + beta3) * (1.0 + beta1 - beta3)
    if den <= 0.0:
        raise DegenerateMarginError("correlation undefined at this corner of the simplex")
    num = (2 * beta1 * beta3 + 2 * beta1 + 2 * beta3
           - beta1 ** 2 - beta3 ** 2 - 1.0)
    return num / den


def rho_grid(beta1, beta3):
    """Vectorised :func:`rho_from_beta`; NaN where the margins degenerate."""
    b1 = np.asarray(beta1, dtype=float)
    b3 = np.asarray(beta3, dtype=float)
    p = b3 + (1.0 - b1 - b3) / 2.0
    den = p * (1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (b3 - p * p) / den
    return np.where(den > 0, out, np.nan)


def phi_from_label_counts(m00, m01, m11):
    """Vectorised phi from per-label edge counts; NaN when undefined."""
    m00 = np.asarray(m00, dtype=float)
    m01 = np.asarray(m01, dtype=float)
    m11 = np.asarray(m11, dtype=float)
    den = (2 * m11 + m01) * (2 * m00 + m01)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (4 * m00 * m11 - m01 * m01) / den
    return np.where(den > 0, out, np.nan)


def phi_of_graph(graph):
    beta = beta_summary(classify_edge_labels(graph))
    return rho_from_beta(beta.beta1, beta.beta3)

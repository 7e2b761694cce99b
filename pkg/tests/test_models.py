import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attrgof.errors import DomainError, GraphValidationError
from attrgof.graph import AttributedGraph
from attrgof.models import (
    EdgeProbabilityModel,
    cluster_blocks,
    er_model,
    factorize,
    fit_er,
    fit_sbm,
    gf_model,
    quantize,
    sbm_log_likelihood,
    sbm_model,
)


def two_cliques(a=3, b=3):
    edges = list(itertools.combinations(range(a), 2))
    edges += list(itertools.combinations(range(a, a + b), 2))
    return AttributedGraph.from_edges(a + b, edges, [0] * (a + b))


def brute_block_density(n, edge_set, z, k):
    """Edge density per block pair by enumerating every node pair."""
    hits = np.zeros((k, k))
    tot = np.zeros((k, k))
    for u, v in itertools.combinations(range(n), 2):
        a, b = sorted((z[u], z[v]))
        tot[a, b] += 1
        hits[a, b] += (u, v) in edge_set
    theta = np.divide(hits, tot, out=np.zeros_like(hits), where=tot > 0)
    return np.triu(theta) + np.triu(theta, 1).T


# --- model container --------------------------------------------------------

def test_model_validation():
    with pytest.raises(GraphValidationError):
        EdgeProbabilityModel(2, np.array([[0, 0.5], [0.4, 0]]))
    with pytest.raises(GraphValidationError):
        EdgeProbabilityModel(2, np.array([[0.1, 0.5], [0.5, 0]]))
    with pytest.raises(GraphValidationError):
        EdgeProbabilityModel(2, np.array([[0, 1.5], [1.5, 0]]))
    with pytest.raises(DomainError):
        EdgeProbabilityModel(2, np.zeros((2, 2)), kind="XYZ")


def test_er_model_examples():
    m = er_model(4, 0.5)
    np.testing.assert_array_equal(m.pair_probs(), np.full(6, 0.5))
    assert er_model(2, 1.0).pair_probs().tolist() == [1.0]
    big = er_model(1600, 0.3)
    assert big.node_count == 1600 and big.expected_edges == pytest.approx(0.3 * 1600 * 1599 / 2)
    with pytest.raises(DomainError):
        er_model(4, 1.2)


def test_fit_er_examples():
    g = AttributedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)], [0] * 4)
    assert fit_er(g).params["p"] == 0.5
    k4 = AttributedGraph.from_edges(4, list(itertools.combinations(range(4), 2)), [0] * 4)
    assert fit_er(k4).params["p"] == 1.0
    assert fit_er(AttributedGraph.from_edges(4, [], [0] * 4)).params["p"] == 0.0


# --- factorization ----------------------------------------------------------

def test_factorize_er_example():
    f = factorize(er_model(4, 0.5), [1, 1, 0, 0])
    assert f.kappa == 1
    assert f.counts[:, 0].tolist() == [1, 4, 1]
    assert f.n.tolist() == [6]
    assert f.r[0] == pytest.approx(2 / 6)


def test_factorize_sbm_and_empty():
    f = factorize(sbm_model([0, 0, 1, 1], [[0.7, 0.2], [0.2, 0.7]]), [0, 1, 0, 1])
    assert f.kappa == 2
    np.testing.assert_allclose(f.unique_probs, [0.2, 0.7])
    empty = factorize(EdgeProbabilityModel(3, np.zeros((3, 3))), [0, 1, 0])
    assert empty.kappa == 0 and empty.counts.shape == (3, 0)
    assert empty.expected_edges == 0


def test_quantize_groups_rounding_noise():
    vals = np.array([0.1, 0.1 + 1e-15, 0.3, 0.0])
    q = quantize(vals)
    assert q[0] == q[1] and q[3] == 0
    assert np.unique(q).size == 3


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.data())
def test_factorization_reconstructs_model(n, data):
    k = data.draw(st.integers(1, 3))
    z = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    vals = data.draw(st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 1.0]),
                              min_size=k * k, max_size=k * k))
    theta = np.array(vals).reshape(k, k)
    theta = np.triu(theta) + np.triu(theta, 1).T
    x = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    m = sbm_model(z, theta)
    f = factorize(m, x)
    np.testing.assert_array_equal(f.reconstruct(), m.prob)
    assert f.counts.sum() == int((m.pair_probs() > 0).sum())
    np.testing.assert_allclose(f.expected_edges, m.expected_edges, rtol=1e-12)
    for i, j in itertools.product(range(3), range(f.kappa)):
        pos = f.positions(i, j)
        assert pos.shape[0] == f.counts[i, j]
        assert all(x[u] + x[v] == i for u, v in pos)


# --- SBM fitting ------------------------------------------------------------

def test_fit_sbm_two_cliques():
    m = fit_sbm(two_cliques(), [0, 0, 0, 1, 1, 1], 2)
    np.testing.assert_array_equal(m.params["theta"], [[1, 0], [0, 1]])


def test_fit_sbm_four_nodes_matches_enumeration():
    g = AttributedGraph.from_edges(4, [(0, 1), (2, 3), (0, 2)], [0] * 4)
    z = [0, 0, 1, 1]
    m = fit_sbm(g, z, 2)
    oracle = brute_block_density(4, {(0, 1), (2, 3), (0, 2)}, z, 2)
    np.testing.assert_allclose(m.params["theta"], oracle, atol=1e-15)
    np.testing.assert_allclose(m.params["theta"], [[1, 0.25], [0.25, 1]])


def test_fit_sbm_errors():
    g = two_cliques()
    with pytest.raises(DomainError):
        fit_sbm(g, [0] * 6, 7)
    with pytest.raises(DomainError):
        fit_sbm(g, [0, 0, 0, 1, 1, 2], 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 8), st.data())
def test_fit_sbm_is_local_mle(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    k = data.draw(st.integers(1, 3))
    z = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    g = AttributedGraph.from_edges(n, edges, [0] * n)
    theta = np.array(fit_sbm(g, z, k).params["theta"])
    np.testing.assert_allclose(theta, brute_block_density(n, set(edges), z, k), atol=1e-14)
    best = sbm_log_likelihood(g, z, theta)
    rng = np.random.default_rng(n)
    for _ in range(10):
        step = rng.normal(scale=0.05, size=(k, k))
        alt = np.clip(theta + (step + step.T) / 2, 1e-9, 1 - 1e-9)
        assert sbm_log_likelihood(g, z, alt) <= best + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 8), st.data())
def test_fit_sbm_equivariant_under_relabeling(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    z = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    perm = np.array(data.draw(st.permutations(range(n))))
    g = AttributedGraph.from_edges(n, edges, [0] * n)
    h = g.permuted(perm)
    # node v of g is node perm[v] of h
    zh = np.empty_like(z)
    zh[perm] = z
    p_g = fit_sbm(g, z, 2).prob
    p_h = fit_sbm(h, zh, 2).prob
    np.testing.assert_allclose(p_h[np.ix_(perm, perm)], p_g, atol=1e-15)


# --- spectral clustering ----------------------------------------------------

def test_cluster_blocks_examples():
    g = two_cliques(4, 5)
    assert cluster_blocks(g, 1).tolist() == [0] * 9
    z = cluster_blocks(g, 2, seed=3)
    assert z.tolist() == [0] * 4 + [1] * 5
    np.testing.assert_array_equal(cluster_blocks(g, 2, seed=3), z)
    with pytest.raises(DomainError):
        cluster_blocks(g, 10)


def test_cluster_blocks_never_leaves_a_block_empty():
    g = two_cliques(3, 3)
    z = cluster_blocks(g, 5, seed=0)
    assert sorted(set(z.tolist())) == list(range(5))


# --- GF ---------------------------------------------------------------------

def test_gf_model_valid_and_deterministic():
    a = gf_model(0.5, 1.0, 3.0, 2000, 300, seed=7)
    b = gf_model(0.5, 1.0, 3.0, 2000, 300, seed=7)
    assert a.node_count == 300 and a.kind == "GF"
    np.testing.assert_array_equal(a.prob, b.prob)
    assert 0 < a.expected_edges < 300 * 299 / 2
    c = gf_model(0.5, 1.0, 3.0, 2000, 300, seed=8)
    assert not np.array_equal(a.prob, c.prob)


def test_gf_model_full_size():
    m = gf_model(0.5, 1.0, 3.0, 2000, 1600, seed=0)
    assert m.node_count == 1600
    assert np.all((m.pair_probs() >= 0) & (m.pair_probs() <= 1))


@pytest.mark.parametrize("kw", [
    dict(iterations=0), dict(alpha=1.0), dict(alpha=-0.1), dict(beta=-0.6),
    dict(gamma=0.0), dict(n=1),
])
def test_gf_model_domain_errors(kw):
    args = dict(alpha=0.5, beta=1.0, gamma=3.0, iterations=10, n=20)
    args.update(kw)
    with pytest.raises(DomainError):
        gf_model(**args)

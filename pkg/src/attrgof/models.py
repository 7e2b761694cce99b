"""Edge-probability models (ER, SBM, GF) and their parameter factorisation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GraphValidationError

KINDS = ("ER", "SBM", "GF", "CUSTOM")

# Significant decimal digits kept when grouping probabilities into unique values.
QUANT_DIGITS = 12

DEFAULT_GF_TRUNCATION = 5000


@dataclass(frozen=True)
class EdgeProbabilityModel:
    """Symmetric matrix of independent edge probabilities plus metadata."""

    node_count: int
    prob: np.ndarray
    kind: str = "CUSTOM"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        p = np.array(self.prob, dtype=float)
        n = self.node_count
        if p.shape != (n, n):
            raise GraphValidationError(f"prob must be {n}x{n}, got {p.shape}")
        if not np.array_equal(p, p.T):
            raise GraphValidationError("prob must be symmetric")
        if np.any(np.diag(p) != 0):
            raise GraphValidationError("prob must have a zero diagonal")
        if np.any(p < 0) or np.any(p > 1) or np.isnan(p).any():
            raise GraphValidationError("probabilities must lie in [0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "prob", p)

    def pair_probs(self):
        """Upper-triangle probabilities in ``np.triu_indices(n, 1)`` order."""
        iu, ju = np.triu_indices(self.node_count, 1)
        return self.prob[iu, ju]

    @property
    def expected_edges(self):
        return float(self.pair_probs().sum())


def quantize(values, digits=QUANT_DIGITS):
    """Round to ``digits`` significant decimal digits (zeros stay zero)."""
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(v)
    nz = v != 0
    if nz.any():
        mag = np.floor(np.log10(np.abs(v[nz])))
        scale = 10.0 ** (digits - 1 - mag)
        out[nz] = np.round(v[nz] * scale) / scale
    return out


@dataclass(frozen=True)
class Factorization:
    """Unique edge probabilities and the (label, probability) cell of every pair.

    ``counts[i, j]`` is the number of candidate pairs with edge label ``i``
    (0=00, 1=01, 2=11) and probability ``unique_probs[j]``. Zero-probability
    pairs are left out.
    """

    node_count: int
    unique_probs: np.ndarray
    pair_u: np.ndarray
    pair_v: np.ndarray
    pair_label: np.ndarray
    pair_param: np.ndarray
    counts: np.ndarray

    @property
    def kappa(self):
        return int(self.unique_probs.shape[0])

    @property
    def n(self):
        """Candidate pairs per unique probability."""
        return self.counts.sum(axis=0)

    @property
    def r(self):
        """Fraction of candidate pairs per probability whose label is 00 or 11."""
        n = self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(n > 0, (self.counts[0] + self.counts[2]) / n, np.nan)

    @property
    def expected_edges(self):
        return float((self.n * self.unique_probs).sum())

    def label_availability(self):
        """Candidate pairs per label summed over probabilities."""
        return self.counts.sum(axis=1)

    def expected_label_edges(self):
        """Expected sampled edges per label, ``sum_j N_ij * pi_j``."""
        return self.counts @ self.unique_probs

    def positions(self, label, j):
        """Node pairs in cell ``(label, j)`` as an ``(N_ij, 2)`` array."""
        sel = (self.pair_label == label) & (self.pair_param == j)
        return np.column_stack([self.pair_u[sel], self.pair_v[sel]])

    def reconstruct(self):
        """Dense probability matrix rebuilt from the unique values and cells."""
        p = np.zeros((self.node_count, self.node_count))
        vals = self.unique_probs[self.pair_param]
        p[self.pair_u, self.pair_v] = vals
        p[self.pair_v, self.pair_u] = vals
        return p


def factorize(model, attributes):
    x = np.asarray(attributes, dtype=np.int64).ravel()
    if x.shape[0] != model.node_count:
        raise GraphValidationError("attributes length must equal node_count")
    iu, ju = np.triu_indices(model.node_count, 1)
    q = quantize(model.prob[iu, ju])
    keep = q > 0
    iu, ju, q = iu[keep], ju[keep], q[keep]
    uniq, inv = np.unique(q, return_inverse=True)
    labels = (x[iu] + x[ju]).astype(np.int8)
    counts = np.zeros((3, uniq.shape[0]), dtype=np.int64)
    np.add.at(counts, (labels, inv), 1)
    return Factorization(
        node_count=model.node_count,
        unique_probs=uniq,
        pair_u=iu,
        pair_v=ju,
        pair_label=labels,
        pair_param=inv.astype(np.int64),
        counts=counts,
    )


def er_model(n, p):
    if n < 2:
        raise DomainError("ER model needs at least 2 nodes")
    if not 0.0 <= p <= 1.0:
        raise DomainError("ER edge probability must lie in [0, 1]")
    prob = np.full((n, n), float(p))
    np.fill_diagonal(prob, 0.0)
    return EdgeProbabilityModel(n, prob, "ER", {"p": float(p)})


def fit_er(graph):
    n = graph.node_count
    if n < 2:
        raise DomainError("ER fit needs at least 2 nodes")
    return er_model(n, graph.edge_count / (n * (n - 1) / 2))


def sbm_model(assignment, theta):
    """SBM probability matrix ``P[u, v] = theta[z[u], z[v]]``."""
    z = np.asarray(assignment, dtype=np.int64)
    theta = np.asarray(theta, dtype=float)
    k = theta.shape[0]
    if theta.shape != (k, k) or not np.allclose(theta, theta.T, rtol=0, atol=0):
        raise DomainError("theta must be a symmetric square matrix")
    if z.size and (z.min() < 0 or z.max() >= k):
        raise DomainError("block ids must lie in [0, K)")
    prob = theta[np.ix_(z, z)].copy()
    np.fill_diagonal(prob, 0.0)
    return EdgeProbabilityModel(
        int(z.shape[0]), prob, "SBM", {"z": z.tolist(), "theta": theta.tolist()}
    )


def block_pair_counts(graph, assignment, k):
    """Observed edges and available pairs between every pair of blocks."""
    z = np.asarray(assignment, dtype=np.int64)
    sizes = np.bincount(z, minlength=k).astype(float)
    pairs = np.outer(sizes, sizes)
    pairs[np.diag_indices(k)] = sizes * (sizes - 1) / 2
    edges = np.zeros((k, k))
    if graph.edge_count:
        a = z[graph.edges[:, 0]]
        b = z[graph.edges[:, 1]]
        np.add.at(edges, (a, b), 1.0)
        off = a != b
        np.add.at(edges, (b[off], a[off]), 1.0)
    return edges, pairs


def fit_sbm(graph, assignment, k):
    """Maximum-likelihood block matrix for a fixed block assignment."""
    z = np.asarray(assignment, dtype=np.int64)
    if k > graph.node_count:
        raise DomainError(f"K={k} exceeds node_count={graph.node_count}")
    if z.shape[0] != graph.node_count:
        raise DomainError("assignment length must equal node_count")
    if z.size and (z.min() < 0 or z.max() >= k):
        raise DomainError("block ids must lie in [0, K)")
    edges, pairs = block_pair_counts(graph, z, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(pairs > 0, edges / pairs, 0.0)
    theta = (theta + theta.T) / 2
    return sbm_model(z, theta)


def sbm_log_likelihood(graph, assignment, theta):
    """Bernoulli log-likelihood of ``graph`` under block matrix ``theta``."""
    k = np.asarray(theta).shape[0]
    edges, pairs = block_pair_counts(graph, assignment, k)
    iu = np.triu_indices(k)
    e, m, t = edges[iu], pairs[iu], np.asarray(theta, dtype=float)[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = np.where(e > 0, e * np.log(t), 0.0) + np.where(
            m - e > 0, (m - e) * np.log1p(-t), 0.0
        )
    return float(ll.sum())


def _canonical_labels(z):
    """Relabel blocks in order of first appearance."""
    mapping = {}
    out = np.empty_like(z)
    for i, b in enumerate(z):
        if b not in mapping:
            mapping[b] = len(mapping)
        out[i] = mapping[b]
    return out


def cluster_blocks(graph, k, seed=0):
    """Spectral block assignment: top-``k`` adjacency eigenvectors + k-means."""
    from sklearn.cluster import KMeans

    n = graph.node_count
    if k < 1 or k > n:
        raise DomainError(f"K={k} must lie in [1, {n}]")
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    evals, evecs = np.linalg.eigh(graph.adjacency().astype(float))
    emb = evecs[:, np.argsort(evals)[::-1][:k]]
    km = KMeans(n_clusters=k, n_init=10, random_state=seed)
    z = km.fit_predict(emb).astype(np.int64)
    z = _fill_empty_blocks(z, emb, km.cluster_centers_, k)
    return _canonical_labels(z)


def _fill_empty_blocks(z, emb, centers, k):
    z = z.copy()
    for b in range(k):
        if np.any(z == b):
            continue
        sizes = np.bincount(z, minlength=k)
        donor = int(np.argmax(sizes))
        members = np.flatnonzero(z == donor)
        dist = np.linalg.norm(emb[members] - centers[donor], axis=1)
        # stable pick: farthest member, lowest index on ties
        z[members[np.argmax(dist)]] = b
    return z


def _beta_process_weights(alpha, beta, gamma, truncation, rng):
    """Atom weights of a three-parameter beta process by stick breaking.

    Round ``i`` contributes ``Poisson(gamma)`` atoms, each with weight
    ``V_i * prod_{l<i} (1 - V_l)`` where ``V_l ~ Beta(1 - alpha, beta + l*alpha)``.
    Rounds are generated until ``truncation`` atoms exist.
    """
    weights = []
    total = 0
    i = 0
    while total < truncation:
        i += 1
        c = int(rng.poisson(gamma))
        if c == 0:
            continue
        c = min(c, truncation - total)
        ls = np.arange(1, i + 1)
        v = rng.beta(1.0 - alpha, beta + ls * alpha, size=(c, i))
        w = v[:, -1] * np.prod(1.0 - v[:, :-1], axis=1)
        weights.append(w)
        total += c
    return np.concatenate(weights)


def gf_model(alpha, beta, gamma, iterations, n, seed=0, truncation=DEFAULT_GF_TRUNCATION):
    """Binarised graph-frequency model driven by a three-parameter beta process.

    ``alpha`` is the discount, ``beta`` the concentration and ``gamma`` the
    mass. The ``n`` heaviest atoms of a truncated draw become the nodes, each
    pair has rate ``w_u * w_v`` per iteration, and a pair is linked when it
    occurs at least once: ``P = 1 - exp(-iterations * w_u * w_v)``.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError("discount alpha must lie in [0, 1)")
    if beta <= -alpha:
        raise DomainError("concentration beta must exceed -alpha")
    if gamma <= 0:
        raise DomainError("mass gamma must be positive")
    if iterations < 1:
        raise DomainError("iterations must be at least 1")
    if n < 2:
        raise DomainError("GF model needs at least 2 nodes")
    if truncation < n:
        raise DomainError("truncation must be at least n")
    rng = np.random.default_rng(seed)
    w = _beta_process_weights(alpha, beta, gamma, truncation, rng)
    w = np.sort(w)[::-1][:n]
    prob = -np.expm1(-iterations * np.outer(w, w))
    np.fill_diagonal(prob, 0.0)
    prob = (prob + prob.T) / 2
    params = {
        "alpha": float(alpha), "beta": float(beta), "gamma": float(gamma),
        "iterations": int(iterations), "seed": int(seed), "truncation": int(truncation),
    }
    return EdgeProbabilityModel(n, prob, "GF", params)

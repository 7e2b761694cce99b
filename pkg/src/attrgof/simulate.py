"""Monte-Carlo sampling of attributed graphs and bound verification.

Sampling follows the two-stage scheme: draw node attributes, then draw every
pair independently with its model probability. Independent-edge models need
no acceptance step, so every candidate graph is kept.

Each trial owns a generator derived from ``(seed, trial)``; results do not
depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import (
    boundedness_check,
    correlation_ceiling,
    delta_from_totals,
    delta_random,
    representation_probability,
    sample_rng,
)
from .errors import DomainError
from .graph import AttributedGraph, beta_summary, classify_edge_labels, phi_from_label_counts
from .models import factorize

ATTRIBUTE_STREAM = 0
REFERENCE_STREAM = 2


def sample_attributes(n, p_x, rng):
    if not 0.0 <= p_x <= 1.0:
        raise DomainError("attribute marginal must lie in [0, 1]")
    return (rng.random(n) < p_x).astype(np.int8)


def sample_graph(model, rng, attributes=None):
    """Draw one graph; every pair is included independently."""
    iu, ju = np.triu_indices(model.node_count, 1)
    keep = rng.random(iu.shape[0]) < model.prob[iu, ju]
    edges = np.column_stack([iu[keep], ju[keep]])
    return AttributedGraph(model.node_count, edges,
                           np.zeros(model.node_count, np.int8) if attributes is None else attributes)


@dataclass(frozen=True)
class SimulationConfig:
    """``p_x=None`` reuses the fixed ``attributes`` in every trial."""

    model: object
    trials: int
    seed: int = 0
    p_x: float | None = None
    attributes: np.ndarray | None = None
    eps1: float = 0.05
    eps3: float = 0.05

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if self.p_x is None and self.attributes is None:
            raise DomainError("give either p_x or fixed attributes")


class _PairSampler:
    def __init__(self, model, attributes=None):
        self.n = model.node_count
        self.iu, self.ju = np.triu_indices(self.n, 1)
        self.probs = model.prob[self.iu, self.ju]
        self.labels = None
        if attributes is not None:
            x = np.asarray(attributes, dtype=np.int8)
            self.labels = (x[self.iu] + x[self.ju]).astype(np.int8)

    def label_counts(self, rng, p_x=None):
        labels = self.labels
        if p_x is not None:
            x = sample_attributes(self.n, p_x, rng)
            labels = (x[self.iu] + x[self.ju]).astype(np.int8)
        keep = rng.random(self.probs.shape[0]) < self.probs
        return np.bincount(labels[keep], minlength=3)


def _run_trials(fn, trials, threads):
    out = np.zeros((trials, 3), dtype=np.int64)
    if threads <= 1 or trials < 2:
        for t in range(trials):
            out[t] = fn(t)
        return out
    chunks = np.array_split(np.arange(trials), min(threads * 4, trials))

    def work(idx):
        for t in idx:
            out[t] = fn(int(t))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, chunks))
    return out


def simulate_label_counts(model, trials, seed=0, p_x=None, attributes=None,
                          threads=1, stream=ATTRIBUTE_STREAM):
    """Per-trial sampled edge counts ``(m00, m01, m11)`` as a ``(trials, 3)`` array."""
    sampler = _PairSampler(model, None if p_x is not None else attributes)
    if p_x is None and sampler.labels is None:
        raise DomainError("give either p_x or fixed attributes")
    return _run_trials(
        lambda t: sampler.label_counts(sample_rng(seed, t, stream), p_x), trials, threads
    )


def phi_from_count_rows(counts):
    counts = np.asarray(counts)
    return phi_from_label_counts(counts[:, 0], counts[:, 1], counts[:, 2])


@dataclass(frozen=True)
class RhoDistribution:
    values: np.ndarray
    undefined_count: int
    trials: int

    @property
    def mean(self):
        return float(self.values.mean()) if self.values.size else float("nan")

    @property
    def max(self):
        return float(self.values.max()) if self.values.size else float("nan")

    def quantiles(self, qs=(0.05, 0.25, 0.5, 0.75, 0.95)):
        if not self.values.size:
            return {q: float("nan") for q in qs}
        return {q: float(v) for q, v in zip(qs, np.quantile(self.values, qs))}


def rho_out_distribution(config, threads=1):
    counts = simulate_label_counts(config.model, config.trials, config.seed,
                                   config.p_x, config.attributes, threads)
    phi = phi_from_count_rows(counts)
    defined = ~np.isnan(phi)
    return RhoDistribution(phi[defined], int((~defined).sum()), config.trials)


@dataclass(frozen=True)
class CoverageReport:
    empirical_freq: float
    lower_bound: float
    sigma: float
    passed: bool
    vacuous: bool
    delta: float
    epsilon: float
    rho_in: float
    defined_trials: int
    undefined_trials: int
    mode: str = "constant"

    @property
    def status(self):
        if self.vacuous:
            return "pass-vacuous"
        return "pass" if self.passed else "fail"


def _coverage(hits, report_delta, epsilon, rho_in, undefined, mode):
    t = int(hits.shape[0])
    freq = float(hits.mean()) if t else float("nan")
    sigma = math.sqrt(freq * (1 - freq) / t) if t else float("nan")
    lower = 1.0 - report_delta
    vacuous = report_delta >= 1.0
    passed = vacuous or (t > 0 and freq >= lower - 3 * sigma)
    return CoverageReport(freq, lower, sigma, bool(passed), bool(vacuous), report_delta,
                          epsilon, rho_in, t, undefined, mode)


def verify_bound(graph, model, eps1, eps3, trials, seed=0, mode="constant",
                 form="plus", threads=1, mc_samples=1000):
    """Compare the bound ``1 - delta`` with the simulated coverage frequency.

    ``constant`` mode keeps the reference graph (and its attributes) fixed and
    samples graphs from ``model``. ``random`` mode draws a fresh reference
    graph from the model in every trial, matching the random-target bound.
    Trials whose phi is undefined are left out of the frequency.
    """
    if mode == "constant":
        rep = representation_probability(graph, model, eps1, eps3, form)
        counts = simulate_label_counts(model, trials, seed, attributes=graph.attributes,
                                       threads=threads)
        phi = phi_from_count_rows(counts)
        defined = ~np.isnan(phi)
        hits = np.abs(rep.rho_in - phi[defined]) < rep.epsilon
    elif mode == "random":
        beta = beta_summary(classify_edge_labels(graph))
        f = factorize(model, graph.attributes)
        rep = delta_random(f, beta, eps1, eps3, mc_samples, seed, form)
        out = phi_from_count_rows(simulate_label_counts(
            model, trials, seed, attributes=graph.attributes, threads=threads))
        ref = phi_from_count_rows(simulate_label_counts(
            model, trials, seed, attributes=graph.attributes, threads=threads,
            stream=REFERENCE_STREAM))
        defined = ~(np.isnan(out) | np.isnan(ref))
        hits = np.abs(ref[defined] - out[defined]) < rep.epsilon
    else:
        raise DomainError("mode must be 'constant' or 'random'")
    return _coverage(hits, rep.delta, rep.epsilon, rep.rho_in,
                     int((~defined).sum()), mode)


def ceiling_experiment(model, attributes, trials, seed=0, threads=1):
    """Sampled phi next to the best phi reachable with the same edge count.

    Returns ``(phi, ceiling, verdicts)``; entries are NaN for degenerate draws.
    """
    f = factorize(model, attributes)
    available = f.label_availability()
    counts = simulate_label_counts(model, trials, seed, attributes=attributes,
                                   threads=threads)
    phi = phi_from_count_rows(counts)
    cache = {}
    ceiling = np.empty(trials)
    for t, y in enumerate(counts.sum(axis=1)):
        y = int(y)
        if y not in cache:
            cache[y] = correlation_ceiling(y, available)
        ceiling[t] = cache[y]
    return phi, ceiling, boundedness_check(f)


@dataclass(frozen=True)
class LandscapeRow:
    m11: int
    m01: int
    m00: int
    phi: float
    sampling_probability: float
    feasible: bool


def landscape_m00(f):
    """Number of 00 edges held fixed across a landscape.

    The expected 00 edge count under the model, clipped to the available 00
    pairs, so that a row at the expected ++ and +- counts has the expected
    total edge count.
    """
    avail = f.label_availability()
    return int(min(max(round(float(f.expected_label_edges()[0])), 0), avail[0]))


def default_grid(available, num, start=0):
    hi = int(available)
    if hi < start:
        return np.array([], dtype=np.int64)
    return np.unique(np.round(np.linspace(start, hi, num)).astype(np.int64))


def landscape(model, attributes, m11_values=None, m01_values=None, eps1=0.05, eps3=0.05,
              form="plus", num=41):
    """phi and sampling probability over a grid of ++ and +- edge counts.

    The 00 count is fixed by :func:`landscape_m00`. The sampling probability is
    ``1 - delta`` of the constant-count bound with the grid counts as the
    observed label totals.
    """
    f = factorize(model, attributes)
    avail = f.label_availability()
    mu = f.expected_edges
    # default axes stop where the total edge count is well past its expectation
    reach = int(math.ceil(1.5 * mu))
    if m11_values is None:
        m11_values = default_grid(min(avail[2], reach), num, start=1)
    if m01_values is None:
        m01_values = default_grid(min(avail[1], reach), num)
    m00 = landscape_m00(f)
    rows = []
    for m11 in (int(v) for v in m11_values):
        for m01 in (int(v) for v in m01_values):
            total = m00 + m01 + m11
            phi = float(phi_from_label_counts(m00, m01, m11))
            ok = (0 <= m11 <= avail[2] and 0 <= m01 <= avail[1]
                  and total > 0 and mu > 0 and not math.isnan(phi))
            prob = 0.0
            if ok:
                delta, _ = delta_from_totals(mu, m00, m11, m00 / total, m11 / total,
                                             eps1, eps3, form)
                prob = 1.0 - delta
            rows.append(LandscapeRow(m11, m01, m00, phi, prob, bool(ok)))
    return rows


def max_correlation_from_rows(rows, delta_threshold=0.95):
    vals = [r.phi for r in rows if r.feasible and r.sampling_probability >= delta_threshold]
    return max(vals) if vals else float("nan")


def max_correlation(model, attributes, delta_threshold=0.95, **landscape_kwargs):
    """Largest phi among landscape rows sampled with probability >= threshold."""
    return max_correlation_from_rows(landscape(model, attributes, **landscape_kwargs),
                                     delta_threshold)

"""Goodness-of-fit bounds on the sampled phi of an edge-probability model.

The pieces are

* the Bernoulli KL divergence and the per-probability boundedness verdicts
  that decide whether a model is forced to place edges on ``01`` pairs;
* the largest phi change produced by shifting the 00 and 11 edge fractions
  by at most ``eps1`` and ``eps3`` (attained at a corner of the box because
  phi is monotone in both fractions);
* Chernoff-type lower bounds ``1 - delta`` on the probability that a sampled
  graph stays within that phi distance of the reference graph, with the
  per-cell sampled counts either fixed or random.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GraphValidationError
from .graph import beta_summary, classify_edge_labels, phi_from_label_counts, rho_from_beta
from .models import factorize

KL_THRESHOLD = 23.03
CORRELATION_CEILING = 1.0 - 1e-10

BELOW = "BELOW"
ABOVE = "ABOVE"
NONE = "NONE"

DELTA_FORMS = ("plus", "minus")


def kl_bernoulli(a, b):
    """KL divergence between Bernoulli(a) and Bernoulli(b), using 0 log 0 = 0."""
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"first argument {a} must lie in [0, 1]")
    if not 0.0 < b < 1.0:
        raise DomainError(f"second argument {b} must lie in (0, 1)")
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return max(out, 0.0)


@dataclass(frozen=True)
class BoundednessVerdict:
    param_index: int
    pi: float
    r: float
    n: int
    kl: float
    triggered: bool
    regime: str
    ceiling: float
    exempt: bool = False


def boundedness_check(f):
    """One verdict per unique probability of the factorisation.

    A probability is flagged when ``n_j * KL(r_j || pi_j) >= 23.03`` and
    ``r_j`` lies strictly inside (0, 1). If the same-label share is below
    ``pi_j`` the sampled phi is capped just below 1. Probabilities equal to one
    are deterministic and exempt.
    """
    if f.kappa < 1:
        raise DomainError("factorisation has no positive probabilities")
    verdicts = []
    for j, (pi, r, n) in enumerate(zip(f.unique_probs, f.r, f.n)):
        pi, r, n = float(pi), float(r), int(n)
        if pi >= 1.0:
            verdicts.append(BoundednessVerdict(j, pi, r, n, 0.0, False, NONE, 1.0, True))
            continue
        kl = kl_bernoulli(r, pi)
        if 0.0 < r < pi:
            regime = BELOW
        elif pi < r < 1.0:
            regime = ABOVE
        else:
            regime = NONE
        triggered = regime != NONE and n * kl >= KL_THRESHOLD
        ceiling = CORRELATION_CEILING if triggered and regime == BELOW else 1.0
        verdicts.append(BoundednessVerdict(j, pi, r, n, kl, triggered, regime, ceiling))
    return verdicts


def overall_ceiling(verdicts):
    return min((v.ceiling for v in verdicts), default=1.0)


def correlation_ceiling(n_edges, available):
    """Largest phi reachable by placing ``n_edges`` edges on the available pairs.

    ``available`` holds the candidate pair counts ``(N00, N01, N11)``. Every
    feasible split ``(m00, m01, m11)`` is scored. Returns NaN when every
    placement has a degenerate margin.
    """
    a00, a01, a11 = (int(x) for x in available)
    y = int(n_edges)
    if y > a00 + a01 + a11:
        raise DomainError("more edges than candidate pairs")
    best = float("nan")
    for m01 in range(max(0, y - a00 - a11), min(a01, y) + 1):
        same = y - m01
        m11 = np.arange(max(0, same - a00), min(a11, same) + 1)
        phi = phi_from_label_counts(same - m11, m01, m11)
        if not np.isnan(phi).all():
            top = float(np.nanmax(phi))
            best = top if math.isnan(best) else max(best, top)
    return best


def _corner(beta1, beta3):
    if beta1 < 0 or beta3 < 0 or beta1 + beta3 > 1.0 + 1e-12:
        raise DomainError(f"corner ({beta1}, {beta3}) leaves the simplex")
    return rho_from_beta(beta1, min(beta3, 1.0 - beta1))


def max_epsilon(beta1, beta3, eps1, eps3):
    """Largest ``|rho(b) - rho(beta)|`` over the box ``|b_i - beta_i| <= eps_i``."""
    if eps1 < 0 or eps3 < 0:
        raise DomainError("epsilon components must be non-negative")
    base = rho_from_beta(beta1, beta3)
    if eps1 == 0 and eps3 == 0:
        return 0.0
    try:
        up = _corner(beta1 + eps1, beta3 + eps3)
        down = _corner(beta1 - eps1, beta3 - eps3)
    except (GraphValidationError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    return max(up - base, base - down, 0.0)


def shifted_p_epsilon(beta1, beta3, eps1, eps3):
    """Closed form that shifts only ``p`` and keeps ``beta3`` in the numerator.

    Equals :func:`max_epsilon`'s upper-corner difference only when ``eps3`` is
    zero; kept to document that gap.
    """
    p = beta3 + (1 - beta1 - beta3) / 2
    dp = eps3 + (-eps1 - eps3) / 2
    q = p + dp
    return (beta3 - q * q) / (q * (1 - q)) - (beta3 - p * p) / (p * (1 - p))


def tail_terms(mu, label_total, beta_i, eps_i):
    """Upper and lower Chernoff terms for one edge-label fraction.

    The sampled fraction ``S / X`` drops below ``beta_i - eps_i`` only when the
    total edge count ``X`` exceeds ``S / (beta_i - eps_i)``, and rises above
    ``beta_i + eps_i`` only when ``X`` falls below ``S / (beta_i + eps_i)``.
    A term whose threshold lies on the wrong side of ``mu`` is vacuous (1). If
    ``beta_i <= eps_i`` the fraction cannot fall below the interval and the
    upper term is 0.
    """
    if beta_i - eps_i > 0:
        a = label_total / (beta_i - eps_i)
        upper = math.exp(-((a - mu) ** 2) / (3 * mu)) if a > mu else 1.0
    else:
        upper = 0.0
    b = label_total / (beta_i + eps_i)
    lower = math.exp(-((mu - b) ** 2) / (2 * mu)) if b < mu else 1.0
    return upper, lower


def combine_delta(tau1, tau3, form="plus"):
    if form == "plus":
        d = tau1 + tau3 + tau1 * tau3
    elif form == "minus":
        d = tau1 + tau3 - tau1 * tau3
    else:
        raise DomainError(f"delta form must be one of {DELTA_FORMS}")
    return min(1.0, max(0.0, d))


def delta_from_totals(mu, s00, s11, beta1, beta3, eps1, eps3, form="plus"):
    """``(delta, (tau1, tau3))`` from label totals of the sampled counts."""
    if mu <= 0:
        raise DomainError("expected sampled edge total is zero")
    tau1 = sum(tail_terms(mu, s00, beta1, eps1))
    tau3 = sum(tail_terms(mu, s11, beta3, eps3))
    return combine_delta(tau1, tau3, form), (tau1, tau3)


@dataclass(frozen=True)
class RepresentationReport:
    rho_in: float
    epsilon: float
    delta: float
    probability_lower_bound: float
    verdicts: tuple
    tau: tuple
    mu: float
    eps1: float
    eps3: float
    form: str = "plus"
    valid_range: bool | None = None
    delta_stderr: float | None = None
    expectations: dict = field(default_factory=dict)

    @property
    def ceiling(self):
        return overall_ceiling(self.verdicts)

    @property
    def vacuous(self):
        return self.delta >= 1.0


def expected_chi(f):
    """Expected sampled edges per cell, ``N_ij * pi_j``."""
    return f.counts * f.unique_probs[None, :]


def _validate_delta_inputs(f, beta, eps1, eps3, chi):
    if beta.beta1 - eps1 <= 0 or beta.beta3 - eps3 <= 0:
        raise DomainError("need beta1 > eps1 and beta3 > eps3")
    if chi is not None:
        chi = np.asarray(chi, dtype=float)
        if chi.shape != f.counts.shape:
            raise DomainError(f"chi must have shape {f.counts.shape}")
        if np.any(chi > f.counts + 1e-9) or np.any(chi < 0):
            raise DomainError("chi must satisfy 0 <= chi_ij <= N_ij")
    return chi


def delta_constant(f, beta, eps1, eps3, chi=None, form="plus"):
    """Representation bound with fixed per-cell sampled counts ``chi``.

    ``chi`` defaults to the expected counts ``N_ij * pi_j``; pass observed
    per-cell counts for a post-hoc report.
    """
    chi = _validate_delta_inputs(f, beta, eps1, eps3, chi)
    if chi is None:
        chi = expected_chi(f)
    mu = f.expected_edges
    delta, tau = delta_from_totals(
        mu, chi[0].sum(), chi[2].sum(), beta.beta1, beta.beta3, eps1, eps3, form
    )
    return RepresentationReport(
        rho_in=rho_from_beta(beta.beta1, beta.beta3),
        epsilon=max_epsilon(beta.beta1, beta.beta3, eps1, eps3),
        delta=delta,
        probability_lower_bound=1.0 - delta,
        verdicts=tuple(boundedness_check(f)) if f.kappa else (),
        tau=tau,
        mu=mu,
        eps1=eps1,
        eps3=eps3,
        form=form,
    )


def sample_rng(seed, index, stream=0):
    """Generator for draw ``index``; independent of how draws are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def _binomial_label_totals(f, rng):
    draws = rng.binomial(f.counts, f.unique_probs[None, :])
    return draws.sum(axis=1)


def delta_random(f, beta, eps1, eps3, mc_samples=1000, seed=0, form="plus", sampler=None):
    """Representation bound with random per-cell counts ``chi_ij``.

    The expectations of the label totals are estimated from ``mc_samples``
    seeded draws ``chi_ij ~ Bin(N_ij, pi_j)`` (or ``sampler(f, rng)``, which
    must return the three label totals). ``valid_range`` reports whether every
    expected threshold lies within ``mu +- sqrt(mu)``, the range where the
    Chernoff terms are concave.
    """
    if mc_samples < 100:
        raise DomainError("mc_samples must be at least 100")
    _validate_delta_inputs(f, beta, eps1, eps3, None)
    draw = sampler or _binomial_label_totals
    totals = np.array(
        [np.asarray(draw(f, sample_rng(seed, k, stream=1)), dtype=float)
         for k in range(mc_samples)]
    )
    mean = totals.mean(axis=0)
    var = totals.var(axis=0, ddof=1)
    mu = f.expected_edges

    def _delta(s00, s11):
        return delta_from_totals(mu, s00, s11, beta.beta1, beta.beta3, eps1, eps3, form)

    delta, tau = _delta(mean[0], mean[2])
    # delta-method standard error; the two label totals are independent
    grad = []
    for idx in (0, 2):
        h = max(1e-6, 1e-4 * math.sqrt(var[idx] / mc_samples))
        lo, hi = mean.copy(), mean.copy()
        lo[idx] -= h
        hi[idx] += h
        grad.append((_delta(hi[0], hi[2])[0] - _delta(lo[0], lo[2])[0]) / (2 * h))
    stderr = math.sqrt(sum(g * g * var[i] / mc_samples for g, i in zip(grad, (0, 2))))

    expectations = {
        "upper_00": mean[0] / (beta.beta1 - eps1),
        "lower_00": mean[0] / (beta.beta1 + eps1),
        "upper_11": mean[2] / (beta.beta3 - eps3),
        "lower_11": mean[2] / (beta.beta3 + eps3),
    }
    root = math.sqrt(mu)
    valid = all(abs(v - mu) <= root for v in expectations.values())
    return RepresentationReport(
        rho_in=rho_from_beta(beta.beta1, beta.beta3),
        epsilon=max_epsilon(beta.beta1, beta.beta3, eps1, eps3),
        delta=delta,
        probability_lower_bound=1.0 - delta,
        verdicts=tuple(boundedness_check(f)) if f.kappa else (),
        tau=tau,
        mu=mu,
        eps1=eps1,
        eps3=eps3,
        form=form,
        valid_range=valid,
        delta_stderr=stderr,
        expectations=expectations,
    )


def representation_probability(graph, model, eps1, eps3, form="plus"):
    """A-priori representation report of ``graph`` under ``model``."""
    if graph.node_count != model.node_count:
        raise DomainError(
            f"graph has {graph.node_count} nodes but model has {model.node_count}"
        )
    beta = beta_summary(classify_edge_labels(graph))
    f = factorize(model, graph.attributes)
    return delta_constant(f, beta, eps1, eps3, form=form)

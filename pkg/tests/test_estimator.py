import itertools

import numpy as np
import pytest

from motifht.census import enumerate_copies
from motifht.errors import DomainError
from motifht.estimator import (EstimateReport, confidence_interval,
                               consistency_diagnostic, estimate, ht_estimate,
                               normal_quantile, observed_count, sample_vertices,
                               truncated_statistic_eps, truncated_statistic_m,
                               variance_estimate)
from motifht.generators import star
from motifht.graphs import Graph
from motifht.moments import exact_variance
from motifht.motifs import parse_motif

from _oracles import all_masks, mask_probs, mask_sigma2_single, observed_matrix

EDGE = parse_motif("edge")
TRI = parse_motif("triangle")


def _k(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


# -- sampling ---------------------------------------------------------------

def test_p_domain():
    with pytest.raises(DomainError):
        sample_vertices(5, 0.0, 1)
    with pytest.raises(DomainError):
        sample_vertices(5, 1.0, 1)
    mask = sample_vertices(5, 1.0 - 1e-9, 1)
    assert mask.sample_size == 5


def test_mask_deterministic():
    a = sample_vertices(1000, 0.3, seed=42)
    b = sample_vertices(1000, 0.3, seed=42)
    assert np.array_equal(a.sampled, b.sampled)
    c = sample_vertices(1000, 0.3, seed=43)
    assert not np.array_equal(a.sampled, c.sampled)


def test_mask_binomial_band():
    n, p, reps = 10_000, 0.03, 60
    mean = n * p
    sd = (n * p * (1 - p)) ** 0.5
    for s in range(reps):
        k = sample_vertices(n, p, seed=s).sample_size
        assert abs(k - mean) < 6 * sd


# -- observed count ----------------------------------------------------------

def test_observed_count_extremes():
    g = _k(5)
    copies = enumerate_copies(g, TRI)
    assert observed_count(copies, np.ones(5, bool)) == len(copies) == 10
    assert observed_count(copies, np.zeros(5, bool)) == 0


def test_observed_count_star_structure():
    g = star(6)
    copies = enumerate_copies(g, EDGE)
    mask = np.zeros(7, bool)
    mask[[1, 2, 3]] = True          # center missing
    assert observed_count(copies, mask) == 0
    mask[0] = True                   # center present: one edge per sampled leaf
    assert observed_count(copies, mask) == 3


def test_observed_count_equals_induced_subgraph_count():
    g = _k(6)
    copies = enumerate_copies(g, TRI)
    rng = np.random.default_rng(5)
    for _ in range(10)        :
        mask = rng.random(6) < 0.6
        kept = [v for v in range(6) if mask[v]]
        sub_edges = [(u, v) for u, v in g.edges if mask[u] and mask[v]]
        relabel = {v: i for i, v in enumerate(kept)}
        sub = Graph(len(kept), [(relabel[u], relabel[v]) for u, v in sub_edges])
        from motifht.census import motif_count
        assert observed_count(copies, mask) == motif_count(sub, TRI)


# -- point estimate ----------------------------------------------------------

def test_ht_estimate_values():
    assert ht_estimate(2, 0.5, 2).n_hat == 8.0
    assert ht_estimate(0, 0.3, 3).n_hat == 0.0
    with pytest.raises(DomainError):
        ht_estimate(-1, 0.5, 2)


def test_unbiased_exhaustive_k3():
    copies = enumerate_copies(_k(3), TRI)
    p = 0.5
    masks = all_masks(3)
    probs = mask_probs(masks, p)
    t = observed_matrix(copies, masks).sum(axis=1)
    assert abs(float(probs @ t) / p ** 3 - 1.0) < 1e-12


# -- variance estimator -------------------------------------------------------

def test_variance_estimate_single_copy():
    copies = enumerate_copies(_k(3), TRI)
    p = 0.4
    q = p ** 3
    assert variance_estimate(copies, np.ones(3, bool), p) == pytest.approx((1 - q) ** 2)
    mask = np.array([True, True, False])
    assert variance_estimate(copies, mask, p) == pytest.approx(q ** 2)


def test_variance_estimate_matches_pair_definition():
    g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 5)])
    copies = enumerate_copies(g, EDGE)
    rng = np.random.default_rng(7)
    for _ in range(25):
        mask = rng.random(6) < 0.5
        p = float(rng.uniform(0.1, 0.9))
        assert variance_estimate(copies, mask, p) == pytest.approx(
            mask_sigma2_single(copies, mask, p), rel=1e-10, abs=1e-12)


def test_variance_estimator_unbiased_exhaustive():
    g = Graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)])
    copies = enumerate_copies(g, EDGE)
    p = 0.3
    masks = all_masks(5)
    probs = mask_probs(masks, p)
    total = sum(float(pr) * variance_estimate(copies, mask, p)
                for pr, mask in zip(probs, masks))
    assert total == pytest.approx(float(exact_variance(copies, p)), rel=1e-10)


def test_sigma2_k3_mean_is_7_64():
    copies = enumerate_copies(_k(3), TRI)
    p = 0.5
    masks = all_masks(3)
    probs = mask_probs(masks, p)
    total = sum(float(pr) * variance_estimate(copies, mask, p)
                for pr, mask in zip(probs, masks))
    assert total == pytest.approx(7 / 64, abs=1e-14)


# -- intervals ----------------------------------------------------------------

def test_normal_quantile_value():
    assert normal_quantile(1 - 0.32 / 2) == pytest.approx(0.99446, abs=1e-4)


def test_ci_degenerate_when_variance_nonpositive():
    rep = EstimateReport(t=3, p=0.5, h=2, n_hat=12.0, sigma2_hat=-0.5, sigma_plus=0.0)
    assert confidence_interval(rep, 0.05) == (12.0, 12.0)


def test_ci_halfwidth():
    rep = EstimateReport(t=3, p=0.5, h=2, n_hat=12.0, sigma2_hat=1.0, sigma_plus=1.0)
    lo, hi = confidence_interval(rep, 0.32)
    assert hi - rep.n_hat == pytest.approx(0.99446 / 0.25, abs=1e-3)
    with pytest.raises(DomainError):
        confidence_interval(rep, 1.5)


def test_estimate_full_report():
    g = _k(6)
    copies = enumerate_copies(g, TRI)
    mask = sample_vertices(g, 0.6, seed=3)
    rep = estimate(copies, mask, 0.6, alpha=0.1)
    assert rep.ci_lo <= rep.n_hat <= rep.ci_hi
    assert rep.sigma_plus >= 0.0


# -- consistency diagnostics ---------------------------------------------------

def test_diagnostic_star_flags_center():
    n = 40
    g = star(n)
    copies = enumerate_copies(g, EDGE)
    rep = consistency_diagnostic(copies, 0.5, 0.5)
    assert rep.condition_value == pytest.approx(1.0)
    assert ((0,), n) in rep.flagged_sets
    leaves_flagged = [s for s, _ in rep.flagged_sets if s != (0,)]
    assert not leaves_flagged


def test_diagnostic_disjoint_edges_clean():
    b = 50
    g = Graph(2 * b, [(2 * i, 2 * i + 1) for i in range(b)])
    copies = enumerate_copies(g, EDGE)
    rep = consistency_diagnostic(copies, 0.5, 0.5)
    assert rep.condition_value == 0.0
    assert rep.flagged_sets == []


def test_diagnostic_epsilon_large_vanishes():
    copies = enumerate_copies(star(10), EDGE)
    rep = consistency_diagnostic(copies, 0.5, 1e9)
    assert rep.condition_value == 0.0


def test_diagnostic_bounded_by_subset_total():
    copies = enumerate_copies(_k(6), TRI)
    for eps in (1e-6, 0.01, 0.5):
        rep = consistency_diagnostic(copies, 0.2, eps)
        assert 0.0 <= rep.condition_value <= 2 ** 3 - 1 + 1e-12


def test_diagnostic_empty_motif_domain_error():
    copies = enumerate_copies(Graph(3, [(0, 1)]), TRI)
    with pytest.raises(DomainError):
        consistency_diagnostic(copies, 0.5, 0.5)


# -- truncated statistics -------------------------------------------------------

def test_truncation_eps_limits():
    g = star(20)
    copies = enumerate_copies(g, EDGE)
    mask = sample_vertices(g, 0.5, seed=1)
    t = observed_count(copies, mask)
    assert truncated_statistic_eps(copies, mask, 0.5, 1e9) == t
    assert truncated_statistic_eps(copies, mask, 0.5, 1e-9) == 0
    # every copy passes through the flagged hub
    assert truncated_statistic_eps(copies, mask, 0.5, 0.5) == 0


def test_truncation_eps_monotone():
    g = Graph(7, [(0, 1), (0, 2), (0, 3), (1, 2), (4, 5), (5, 6)])
    copies = enumerate_copies(g, EDGE)
    mask = sample_vertices(g, 0.6, seed=2)
    values = [truncated_statistic_eps(copies, mask, 0.6, e)
              for e in (0.001, 0.01, 0.1, 1.0, 10.0, 1e9)]
    assert values == sorted(values)
    assert values[-1] == observed_count(copies, mask)


def test_truncation_m_limits_and_monotone():
    g = _k(4)
    copies = enumerate_copies(g, TRI)
    p = 0.2
    var = float(exact_variance(copies, p))
    mask = sample_vertices(g, p, seed=9)
    t = observed_count(copies, mask)
    reports = [truncated_statistic_m(copies, mask, p, m, var)
               for m in (1e-9, 0.5, 1.0, 10.0, 1e12)]
    values = [r.t_trunc for r in reports]
    assert values == sorted(values)
    assert values[0] == 0 or t == 0
    assert values[-1] == t
    with pytest.raises(DomainError):
        truncated_statistic_m(copies, mask, p, 1.0, 0.0)


def test_truncation_m_mismatch_bound_exhaustive():
    # mismatch probability against its analytic bound, on all 16 masks
    g = _k(4)
    copies = enumerate_copies(g, TRI)
    p = 0.2
    var = float(exact_variance(copies, p))
    masks = all_masks(4)
    probs = mask_probs(masks, p)
    for m in (1.0, 4.0, 16.0):
        mismatch = 0.0
        for pr, mask in zip(probs, masks):
            rep = truncated_statistic_m(copies, mask, p, m, var)
            mismatch += float(pr) * (rep.t_trunc != rep.t_observed)
        assert mismatch <= (2 ** 3 - 1) / (m * (1 - p)) + 1e-12

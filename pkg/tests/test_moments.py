import itertools
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifht.census import enumerate_copies
from motifht.errors import DomainError, ResourceCapError
from motifht.generators import erdos_renyi
from motifht.graphs import Graph
from motifht.moments import (abs_moment, exact_variance, expected_quadruple_weight,
                             fourth_moment, fourth_moment_mc, moment_report,
                             signed_moment, variance_bracket, wasserstein_ratio,
                             _connected_supports, _overlap_matrix)
from motifht.motifs import parse_motif

from _oracles import (all_masks, connected_quadruples_naive, mask_expectations,
                      mask_probs, mask_quadruple_weight, overlap_matrix_naive,
                      variance_by_pairs)

EDGE = parse_motif("edge")
TRI = parse_motif("triangle")


def _k(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


# -- scalar centered moments ---------------------------------------------------

def test_signed_moment_basics():
    assert signed_moment([[0, 1, 2]], 0.3) == pytest.approx(0.0)
    q = 0.3 ** 2
    assert signed_moment([[0, 1], [0, 1]], 0.3) == pytest.approx(q * (1 - q))
    assert signed_moment([[0, 1], [2, 3]], 0.3) == pytest.approx(0.0)


def test_abs_moment_basics():
    q = 0.5 ** 2
    assert abs_moment([[0, 1]], 0.5) == pytest.approx(2 * q * (1 - q))
    # identical pair by two-pattern enumeration: q(1-q)^2 + (1-q)q^2
    expect = q * (1 - q) ** 2 + (1 - q) * q ** 2
    assert abs_moment([[0, 1], [0, 1]], 0.5) == pytest.approx(expect)


def test_moments_fraction_exact():
    p = Fraction(1, 5)
    val = signed_moment([[0, 1], [1, 2]], p)
    assert isinstance(val, Fraction)
    assert val == p ** 3 - p ** 4
    a = abs_moment([[0, 1], [1, 2]], p)
    assert isinstance(a, Fraction)


@st.composite
def _set_systems(draw):
    length = draw(st.integers(1, 4))
    sets = [draw(st.sets(st.integers(0, 6), min_size=1, max_size=4))
            for _ in range(length)]
    p = draw(st.sampled_from([0.1, 0.25, 0.5, 0.8]))
    return sets, p


@given(_set_systems())
@settings(max_examples=60, deadline=None)
def test_moments_match_mask_oracle(case):
    sets, p = case
    n = 7
    masks = all_masks(n)
    probs = mask_probs(masks, p)
    ind = [masks[:, sorted(s)].all(axis=1).astype(np.float64) for s in sets]
    centered = [x - p ** len(s) for x, s in zip(ind, sets)]
    prod = np.ones(len(masks))
    absprod = np.ones(len(masks))
    for c in centered:
        prod = prod * c
        absprod = absprod * np.abs(c)
    assert signed_moment(sets, p) == pytest.approx(float(probs @ prod), abs=1e-12)
    assert abs_moment(sets, p) == pytest.approx(float(probs @ absprod), abs=1e-12)


def test_signed_two_overlapping_nonnegative():
    # centered pair expectation is at least p^|union| (1-p) when sets overlap
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = set(rng.choice(8, size=rng.integers(1, 4), replace=False).tolist())
        b = set(rng.choice(8, size=rng.integers(1, 4), replace=False).tolist())
        if not a & b:
            b.add(next(iter(a)))
        p = float(rng.uniform(0.05, 0.9))
        val = signed_moment([a, b], p)
        assert val >= p ** len(a | b) * (1 - p) - 1e-12


def test_abs_moment_upper_bound():
    rng = np.random.default_rng(1)
    for _ in range(50):
        length = int(rng.integers(1, 5))
        sets = [set(rng.choice(9, size=rng.integers(1, 4), replace=False).tolist())
                for _ in range(length)]
        p = float(rng.uniform(0.02, 0.5))
        union = set().union(*sets)
        assert abs_moment(sets, p) <= factorial(length + 2) * p ** len(union) + 1e-12


def test_moment_set_count_domain():
    with pytest.raises(DomainError):
        signed_moment([[0]] * 5, 0.5)
    with pytest.raises(DomainError):
        abs_moment([], 0.5)


# -- exact variance -------------------------------------------------------------

def test_exact_variance_single_and_disjoint():
    p = 0.37
    single = enumerate_copies(_k(3), TRI)
    q = p ** 3
    assert float(exact_variance(single, p)) == pytest.approx(q * (1 - q))
    two = enumerate_copies(Graph(6, [(0, 1), (2, 3)]), EDGE)
    qe = p ** 2
    assert float(exact_variance(two, p)) == pytest.approx(2 * qe * (1 - qe))


def test_exact_variance_vs_masks_and_pairs(corpus, corpus_motifs):
    p = 0.2
    for name, g in corpus[:12]:
        for motif in corpus_motifs.values():
            copies = enumerate_copies(g, motif)
            got = float(exact_variance(copies, p))
            assert got == pytest.approx(variance_by_pairs(copies, p), rel=1e-10,
                                        abs=1e-12), name
            if g.n <= 9:
                oracle = mask_expectations(copies, p)
                assert got == pytest.approx(oracle["var_t"], rel=1e-9,
                                            abs=1e-12), name


def test_variance_bracket_fraction_exact():
    copies = enumerate_copies(_k(4), TRI)
    for p in (Fraction(1, 20), Fraction(1, 5), Fraction(1, 2)):
        br = variance_bracket(copies, p)
        assert isinstance(br.variance, Fraction)
        assert br.lower <= br.variance <= br.upper
        assert br.holds


def test_bracket_empty_graph():
    copies = enumerate_copies(Graph(4, [(0, 1)]), TRI)
    br = variance_bracket(copies, 0.3)
    assert br.square_weight == 0 and br.variance == 0 and br.holds


# -- connected quadruple machinery ----------------------------------------------

def test_connected_supports_match_naive():
    g = Graph(7, [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (1, 3)])
    copies = enumerate_copies(g, EDGE)
    ov = _overlap_matrix(copies)
    assert np.array_equal(ov, overlap_matrix_naive(copies))
    supports = _connected_supports(ov)
    naive = connected_quadruples_naive(overlap_matrix_naive(copies))
    # regroup the naive ordered quadruples by support set
    from collections import Counter
    naive_supports = Counter(frozenset(qd) for qd in naive)
    expected_counts = {1: 1, 2: 14, 3: 36, 4: 24}
    got = {k: {frozenset(row) for row in supports[k]} for k in supports}
    for sup, cnt in naive_supports.items():
        assert cnt == expected_counts[len(sup)]
        assert sup in got[len(sup)]
    assert sum(len(v) for v in got.values()) == len(naive_supports)


def test_quadruple_weight_single_copy():
    copies = enumerate_copies(_k(3), TRI)
    p = 0.2
    expect = abs_moment([[0, 1, 2]] * 4, p) / 6 ** 4
    assert expected_quadruple_weight(copies, p) == pytest.approx(expect, rel=1e-12)


def test_quadruple_weight_two_disjoint_copies():
    g = Graph(4, [(0, 1), (2, 3)])
    copies = enumerate_copies(g, EDGE)
    p = 0.3
    expect = (abs_moment([[0, 1]] * 4, p) + abs_moment([[2, 3]] * 4, p)) / 2 ** 4
    assert expected_quadruple_weight(copies, p) == pytest.approx(expect, rel=1e-12)


def test_quadruple_weight_vs_mask_oracle():
    g = _k(4)
    copies = enumerate_copies(g, TRI)
    p = 0.2
    quads = connected_quadruples_naive(overlap_matrix_naive(copies))
    oracle = mask_quadruple_weight(copies, p, quads)
    assert expected_quadruple_weight(copies, p) == pytest.approx(oracle, rel=1e-10)


def test_quadruple_cap():
    g = erdos_renyi(40, 0.5, seed=3)
    copies = enumerate_copies(g, EDGE)
    with pytest.raises(ResourceCapError) as err:
        expected_quadruple_weight(copies, 0.1, cap=10)
    assert "Monte Carlo" in str(err.value)


# -- fourth moment ----------------------------------------------------------------

def test_fourth_moment_single_copy_closed_form():
    copies = enumerate_copies(_k(3), TRI)
    for p in (0.05, 0.2, 0.5):
        q = p ** 3
        expect = (1 - 3 * q + 3 * q * q) / (q * (1 - q))
        got, _ = fourth_moment(copies, p, mode="exact")
        assert got == pytest.approx(expect, rel=1e-10)


def test_fourth_moment_vs_mask_oracle(corpus, corpus_motifs):
    p = 0.2
    for name, g in corpus[:10]:
        if g.n > 8:
            continue
        for motif in corpus_motifs.values():
            copies = enumerate_copies(g, motif)
            if not len(copies):
                continue
            oracle = mask_expectations(copies, p)
            got, _ = fourth_moment(copies, p, mode="exact")
            assert got == pytest.approx(oracle["e_z4"], rel=1e-9), (name, motif.name)


def test_fourth_moment_mc_agrees_with_exact():
    copies = enumerate_copies(_k(4), TRI)
    p = 0.2
    exact, _ = fourth_moment(copies, p, mode="exact")
    mc, se = fourth_moment_mc(copies, p, reps=200_000, seed=12)
    assert abs(mc - exact) < 4 * se


def test_fourth_moment_mc_er_approaches_three():
    # above the detection threshold the standardized count's fourth moment
    # sits a little above 3 and falls toward it as sampling grows
    g = erdos_renyi(500, 0.3, seed=7)
    copies = enumerate_copies(g, EDGE)
    lo, se_lo = fourth_moment_mc(copies, 0.05, reps=40_000, seed=8)
    mid, se_mid = fourth_moment_mc(copies, 0.1, reps=40_000, seed=8)
    hi, se_hi = fourth_moment_mc(copies, 0.3, reps=40_000, seed=8)
    assert abs(mid - 3.0) < 0.6
    assert hi - 3.0 < mid - 3.0 < lo - 3.0
    assert abs(hi - 3.0) < 0.25


def test_fourth_moment_empty_domain():
    copies = enumerate_copies(Graph(3, [(0, 1)]), TRI)
    with pytest.raises(DomainError):
        fourth_moment(copies, 0.2)


# -- ratio and report --------------------------------------------------------------

def test_wasserstein_ratio():
    assert wasserstein_ratio(4.0, 2.0) == pytest.approx(1.0)
    assert wasserstein_ratio(4.0, 20.0) < wasserstein_ratio(4.0, 2.0)
    with pytest.raises(DomainError):
        wasserstein_ratio(1.0, 0.0)


def test_moment_report_exact_fields():
    copies = enumerate_copies(_k(4), TRI)
    rep = moment_report(copies, 0.05)
    assert rep.mode == "exact" and rep.bracket_holds
    assert rep.quadruple_weight > 0 and rep.fourth_moment > 3
    d = rep.to_json_dict()
    assert d["wass_ratio"] == pytest.approx(
        (rep.quadruple_weight / rep.var_t ** 2) ** 0.5)


def test_moment_report_mc_fields():
    copies = enumerate_copies(_k(4), TRI)
    rep = moment_report(copies, 0.2, mode="monte_carlo", reps=5000, seed=4)
    assert rep.mc_reps == 5000 and rep.mc_std_error > 0
    assert rep.quadruple_weight is None

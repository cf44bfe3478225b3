from fractions import Fraction
import itertools

import pytest

from motifht.errors import DomainError, ValidationError
from motifht.motifs import (Motif, automorphism_count, balancedness,
                            parse_motif)


@pytest.mark.parametrize("spec,expected", [
    ("edge", 2), ("triangle", 6), ("wedge", 2), ("path4", 2),
    ("cycle4", 8), ("clique4", 24), ("star_4", 24),
])
def test_automorphism_counts(spec, expected):
    assert parse_motif(spec).aut == expected


def test_wedge_aut_by_full_enumeration():
    # all 6 permutations of 3 vertices, checked directly
    edges = {(0, 1), (0, 2)}
    good = 0
    for perm in itertools.permutations(range(3)):
        mapped = {tuple(sorted((perm[u], perm[v]))) for u, v in edges}
        good += mapped == edges
    assert good == 2 == automorphism_count(3, edges)


@pytest.mark.parametrize("spec,expected", [
    ("edge", Fraction(1, 2)), ("triangle", Fraction(1, 1)),
    ("wedge", Fraction(2, 3)), ("path4", Fraction(3, 4)),
    ("cycle4", Fraction(1, 1)), ("clique4", Fraction(3, 2)),
])
def test_balancedness(spec, expected):
    m = parse_motif(spec)
    assert m.density_max == expected
    assert m.density_max >= Fraction(m.n_edges, m.h)


def test_balancedness_brute_force_agrees():
    # unbalanced example: 4-clique with a pendant vertex
    m = parse_motif("0-1,0-2,0-3,1-2,1-3,2-3,3-4")
    best = Fraction(0)
    for size in range(1, 6):
        for sub in itertools.combinations(range(5), size):
            e = sum(1 for u, v in m.edges if u in sub and v in sub)
            best = max(best, Fraction(e, size))
    assert m.density_max == best == Fraction(3, 2)
    assert not m.is_balanced()


def test_aut_divides_factorial_and_positive():
    for spec in ["edge", "wedge", "triangle", "path4", "cycle4", "clique4", "star_5"]:
        m = parse_motif(spec)
        import math
        assert m.aut >= 1 and math.factorial(m.h) % m.aut == 0


def test_disconnected_rejected():
    with pytest.raises(ValidationError):
        parse_motif("0-1,2-3")


def test_too_many_vertices_rejected():
    with pytest.raises(DomainError):
        parse_motif("star_8")  # 9 vertices
    assert parse_motif("star_7").h == 8


def test_inline_parse_matches_preset():
    assert parse_motif("0-1,1-2,0-2").edges == parse_motif("triangle").edges


def test_unknown_motif():
    with pytest.raises(ValidationError):
        parse_motif("pentagon")


def test_motif_self_loop_rejected():
    with pytest.raises(ValidationError):
        Motif.from_edges("bad", 2, [(0, 0)])

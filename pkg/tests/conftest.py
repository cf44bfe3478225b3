import itertools

import pytest

from motifht.generators import erdos_renyi
from motifht.graphs import Graph
from motifht.motifs import parse_motif


def _named_graphs():
    path = lambda k: [(i, i + 1) for i in range(k - 1)]
    cycle = lambda k: [(i, (i + 1) % k) for i in range(k)]
    clique = lambda k: list(itertools.combinations(range(k), 2))
    star = lambda k: [(0, i) for i in range(1, k + 1)]
    entries = [
        ("edge", Graph(2, path(2))),
        ("path3", Graph(3, path(3))),
        ("triangle", Graph(3, cycle(3))),
        ("path4", Graph(4, path(4))),
        ("cycle4", Graph(4, cycle(4))),
        ("k4", Graph(4, clique(4))),
        ("k4_minus_edge", Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])),
        ("star4", Graph(5, star(4))),
        ("cycle5", Graph(5, cycle(5))),
        ("bull", Graph(5, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4)])),
        ("house", Graph(5, cycle(5) + [(0, 2)])),
        ("bowtie", Graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])),
        ("k23", Graph(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)])),
        ("prism", Graph(6, cycle(3) + [(3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)])),
        ("cycle6", Graph(6, cycle(6))),
        ("grid2x3", Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)])),
        ("two_triangles", Graph(6, cycle(3) + [(3, 4), (4, 5), (3, 5)])),
        ("triangle_plus_path", Graph(6, cycle(3) + [(3, 4), (4, 5)])),
        ("wheel5", Graph(6, [(5, i) for i in range(5)] + cycle(5))),
        ("caterpillar7", Graph(7, path(5) + [(1, 5), (3, 6)])),
        ("star6", Graph(7, star(6))),
        ("cube", Graph(8, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6),
                           (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)])),
    ]
    entries.append(("er9", erdos_renyi(9, 0.33, seed=901)))
    entries.append(("er10", erdos_renyi(10, 0.28, seed=902)))
    entries.append(("er12_sparse", erdos_renyi(12, 0.17, seed=903)))
    entries.append(("star11", Graph(12, star(11))))
    return entries


CORPUS = _named_graphs()
CORPUS_MOTIFS = ["edge", "wedge", "triangle", "path4", "cycle4"]


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def corpus_motifs():
    return {name: parse_motif(name) for name in CORPUS_MOTIFS}

"""Motif patterns: small connected graphs with precomputed symmetry data.

A motif is limited to at most 8 vertices, which keeps the brute-force
automorphism count and the subgraph-density maximum cheap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, ValidationError

MAX_MOTIF_VERTICES = 8


def _normalize_edges(h: int, edges) -> tuple[tuple[int, int], ...]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValidationError(f"motif self-loop at vertex {u}")
        if not (0 <= u < h and 0 <= v < h):
            raise ValidationError(f"motif edge ({u},{v}) out of range for {h} vertices")
        out.add((min(u, v), max(u, v)))
    return tuple(sorted(out))


def _is_connected(h: int, edges) -> bool:
    if h == 0:
        return False
    adj = {v: set() for v in range(h)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == h


def automorphism_count(h: int, edges) -> int:
    """Number of vertex permutations preserving the edge set, by exhaustive
    check over all h! permutations (h <= 8)."""
    if h > MAX_MOTIF_VERTICES:
        raise DomainError(f"motif has {h} > {MAX_MOTIF_VERTICES} vertices")
    edges = _normalize_edges(h, edges)
    if not _is_connected(h, edges):
        raise ValidationError("motif must be connected")
    eset = set(edges)
    count = 0
    for perm in itertools.permutations(range(h)):
        if all((min(perm[u], perm[v]), max(perm[u], perm[v])) in eset for u, v in edges):
            # edge-preserving injections of an equal-size edge set are bijections
            count += 1
    return count


def automorphisms(h: int, edges) -> list[tuple[int, ...]]:
    """All edge-preserving vertex permutations, as tuples sigma with
    sigma[i] = image of vertex i."""
    edges = _normalize_edges(h, edges)
    eset = set(edges)
    out = []
    for perm in itertools.permutations(range(h)):
        if all((min(perm[u], perm[v]), max(perm[u], perm[v])) in eset for u, v in edges):
            out.append(perm)
    return out


def balancedness(h: int, edges) -> Fraction:
    """Maximum edge-to-vertex ratio over all nonempty vertex subsets, using
    all edges induced inside the subset (dropping edges never helps).
    """
    edges = _normalize_edges(h, edges)
    best = Fraction(0)
    for size in range(1, h + 1):
        for subset in itertools.combinations(range(h), size):
            sset = set(subset)
            e_in = sum(1 for u, v in edges if u in sset and v in sset)
            ratio = Fraction(e_in, size)
            if ratio > best:
                best = ratio
    return best


@dataclass(frozen=True)
class Motif:
    """A connected pattern graph with its symmetry count and density maximum."""

    name: str
    h: int
    edges: tuple[tuple[int, int], ...]
    aut: int = field(compare=False)
    density_max: Fraction = field(compare=False)

    @staticmethod
    def from_edges(name: str, h: int, edges) -> "Motif":
        edges = _normalize_edges(h, edges)
        if h < 2:
            raise ValidationError("motif needs at least 2 vertices")
        if h > MAX_MOTIF_VERTICES:
            raise DomainError(f"motif has {h} > {MAX_MOTIF_VERTICES} vertices")
        if not _is_connected(h, edges):
            raise ValidationError("motif must be connected")
        return Motif(name=name, h=h, edges=edges,
                     aut=automorphism_count(h, edges),
                     density_max=balancedness(h, edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_balanced(self) -> bool:
        return self.density_max == Fraction(self.n_edges, self.h)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def __repr__(self) -> str:
        return f"Motif({self.name}, h={self.h}, edges={len(self.edges)}, aut={self.aut})"


def _star_edges(k: int):
    return [(0, i) for i in range(1, k + 1)]


def _path_edges(k: int):
    return [(i, i + 1) for i in range(k - 1)]


def _cycle_edges(k: int):
    return [(i, (i + 1) % k) for i in range(k)]


def _clique_edges(k: int):
    return list(itertools.combinations(range(k), 2))


def parse_motif(spec: str) -> Motif:
    """Resolve a CLI motif spec: a named preset (edge, wedge, triangle, path4,
    cycle4, clique4, star_k) or an inline edge list like "0-1,1-2"."""
    s = spec.strip().lower()
    presets = {
        "edge": ("edge", 2, _path_edges(2)),
        "k2": ("edge", 2, _path_edges(2)),
        "wedge": ("wedge", 3, _star_edges(2)),
        "triangle": ("triangle", 3, _cycle_edges(3)),
        "k3": ("triangle", 3, _cycle_edges(3)),
        "path4": ("path4", 4, _path_edges(4)),
        "cycle4": ("cycle4", 4, _cycle_edges(4)),
        "c4": ("cycle4", 4, _cycle_edges(4)),
        "clique4": ("clique4", 4, _clique_edges(4)),
        "k4": ("clique4", 4, _clique_edges(4)),
    }
    if s in presets:
        return Motif.from_edges(*presets[s])
    if s.startswith("star_"):
        try:
            k = int(s.split("_", 1)[1])
        except ValueError:
            raise ValidationError(f"bad star spec {spec!r}") from None
        if k < 1:
            raise ValidationError("star_k needs k >= 1")
        return Motif.from_edges(s, k + 1, _star_edges(k))
    if "-" in s:
        pairs = []
        for part in s.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                u, v = part.split("-")
                pairs.append((int(u), int(v)))
            except ValueError:
                raise ValidationError(f"bad inline motif edge {part!r}") from None
        if not pairs:
            raise ValidationError(f"empty inline motif {spec!r}")
        h = max(max(u, v) for u, v in pairs) + 1
        return Motif.from_edges(spec, h, pairs)
    raise ValidationError(f"unknown motif {spec!r}")


EDGE = parse_motif("edge")
WEDGE = parse_motif("wedge")
TRIANGLE = parse_motif("triangle")
PATH4 = parse_motif("path4")
CYCLE4 = parse_motif("cycle4")
CLIQUE4 = parse_motif("clique4")

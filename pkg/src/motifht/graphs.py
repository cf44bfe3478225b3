"""Simple undirected graphs: representation, validation, and I/O.

Vertices are dense integers 0..n-1.  A :class:`Graph` is immutable after
construction, so it can be shared freely across worker threads.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError, ValidationError

# Packed adjacency rows cost n*n/8 bytes; past this limit the enumeration
# code falls back to sorted-neighbor intersections.
BITSET_VERTEX_LIMIT = 16384


class Graph:
    """Simple undirected labeled graph with O(1) edge queries.

    Adjacency is stored as sorted per-vertex neighbor arrays (CSR layout)
    plus, for graphs with at most ``BITSET_VERTEX_LIMIT`` vertices, packed
    bit rows used by the enumeration inner loops.
    """

    __slots__ = ("n", "m", "edges", "_indptr", "_neighbors", "_degrees", "_bits")

    def __init__(self, n: int, edges) -> None:
        if n < 0:
            raise ValidationError(f"vertex count must be nonnegative, got {n}")
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                bad = edges[(edges < 0).any(1) | (edges >= n).any(1)][0]
                raise ValidationError(f"edge {tuple(bad)} out of range for n={n}")
            if (edges[:, 0] == edges[:, 1]).any():
                v = int(edges[edges[:, 0] == edges[:, 1]][0, 0])
                raise ValidationError(f"self-loop at vertex {v} not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.unique(np.column_stack([lo, hi]), axis=0)
        else:
            edges = edges.reshape(0, 2)
        self.n = int(n)
        self.m = int(len(edges))
        self.edges = edges
        both = np.concatenate([edges, edges[:, ::-1]]) if self.m else edges
        order = np.lexsort((both[:, 1], both[:, 0])) if self.m else np.array([], dtype=np.int64)
        sorted_pairs = both[order] if self.m else both
        self._degrees = np.bincount(sorted_pairs[:, 0], minlength=n).astype(np.int64) \
            if self.m else np.zeros(n, dtype=np.int64)
        self._indptr = np.concatenate([[0], np.cumsum(self._degrees)])
        self._neighbors = sorted_pairs[:, 1].copy() if self.m else np.array([], dtype=np.int64)
        self._bits = None

    # -- queries ---------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self._degrees[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor array of v (a read-only view)."""
        return self._neighbors[self._indptr[v]:self._indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def bit_rows(self) -> np.ndarray:
        """Packed adjacency, shape (n, ceil(n/64)) uint64; bit j of word w on
        row v is set iff (v, 64*w + j) is an edge."""
        if self._bits is None:
            if self.n > BITSET_VERTEX_LIMIT:
                raise ValidationError(
                    f"bit rows unavailable for n={self.n} > {BITSET_VERTEX_LIMIT}")
            words = max(1, (self.n + 63) // 64)
            bits = np.zeros((self.n, words), dtype=np.uint64)
            if self.m:
                e = self.edges
                for u, v in ((e[:, 0], e[:, 1]), (e[:, 1], e[:, 0])):
                    np.bitwise_or.at(bits, (u, v // 64),
                                     np.uint64(1) << (v % 64).astype(np.uint64))
            self._bits = bits
        return self._bits

    # -- invariant helpers -----------------------------------------------

    def degree_sequence(self) -> list[int]:
        """Per-vertex degrees; their sum equals 2m (handshake)."""
        return [int(d) for d in self._degrees]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph) and self.n == other.n
                and self.m == other.m and bool((self.edges == other.edges).all()))

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [[int(u), int(v)] for u, v in self.edges]}

    def to_edge_list_text(self) -> str:
        lines = [str(self.n)]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> Graph:
    """Parse the plain edge-list format: a header line with the vertex count,
    then one "u v" pair per line.  Duplicate edges are allowed and deduplicated;
    self-loops are rejected.
    """
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if n is None:
            if len(toks) != 1:
                raise ParseError(f"line {lineno}: header must be a single vertex count")
            try:
                n = int(toks[0])
            except ValueError:
                raise ParseError(f"line {lineno}: bad vertex count {toks[0]!r}") from None
            if n < 0:
                raise ParseError(f"line {lineno}: vertex count must be nonnegative")
            continue
        if len(toks) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer endpoint in {raw!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"line {lineno}: endpoint out of range 0..{n - 1}")
        if u == v:
            raise ValidationError(f"line {lineno}: self-loop at vertex {u}")
        pairs.append((u, v))
    if n is None:
        raise ParseError("empty input: missing header line")
    return Graph(n, pairs)


def load_edge_list_file(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh.read())


def save_edge_list_file(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph.to_edge_list_text())


def from_json_dict(obj: dict) -> Graph:
    try:
        return Graph(int(obj["n"]), obj.get("edges", []))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad JSON graph object: {exc}") from None


def load_json_file(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))


def save_json_file(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph.to_json_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> Graph:
    """Load a graph from a path, dispatching on the .json suffix."""
    path = str(path)
    if path.endswith(".json"):
        return load_json_file(path)
    return load_edge_list_file(path)


def from_labeled_edges(pairs) -> tuple[Graph, dict]:
    """Build a graph from edges over arbitrary hashable labels.

    Labels are remapped to dense integers in first-seen order; the mapping
    is returned so external IDs can be recovered.
    """
    mapping: dict = {}
    edges = []
    for a, b in pairs:
        for x in (a, b):
            if x not in mapping:
                mapping[x] = len(mapping)
        if a == b:
            raise ValidationError(f"self-loop at label {a!r} not allowed")
        edges.append((mapping[a], mapping[b]))
    return Graph(len(mapping), edges), mapping

"""Exact motif counting: copy enumeration, local counts, and subset profiles.

A copy of a motif H in a graph G is a subgraph of G isomorphic to H, i.e. a
(vertex set, mapped edge set) pair; two wedges on the same three vertices are
distinct copies.  Copies are stored as embedding rows in motif-vertex order,
with exactly one row per copy (the lexicographically least among the
automorphism-equivalent embeddings).
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .errors import DomainError, ResourceCapError, ValidationError
from .graphs import BITSET_VERTEX_LIMIT, Graph
from .motifs import Motif, automorphisms

DEFAULT_COPY_CAP = 10_000_000


def _cap_error(found: int, cap: int) -> ResourceCapError:
    return ResourceCapError(
        f"copy count exceeds the configured cap of {cap} (found at least {found}); "
        f"raise the cap explicitly to proceed")


def _pack_width(n: int) -> int:
    return max(1, (max(n, 2) - 1).bit_length())


def pack_rows(rows: np.ndarray, n: int):
    """Pack sorted k-column vertex rows into uint64 keys, or None if the
    packed width would exceed 64 bits."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    k = rows.shape[1]
    bits = _pack_width(n)
    if k * bits > 64:
        return None
    key = np.zeros(len(rows), dtype=np.uint64)
    shift = np.uint64(bits)
    for j in range(k):
        key = (key << shift) | rows[:, j].astype(np.uint64)
    return key


def unpack_keys(keys: np.ndarray, k: int, n: int) -> np.ndarray:
    bits = _pack_width(n)
    mask = np.uint64((1 << bits) - 1)
    out = np.empty((len(keys), k), dtype=np.int64)
    shift = np.uint64(bits)
    cur = keys.astype(np.uint64)
    for j in range(k - 1, -1, -1):
        out[:, j] = (cur & mask).astype(np.int64)
        cur = cur >> shift
    return out


class LocalCountProfile:
    """Counts, for every vertex subset A with 1 <= |A| <= h, how many copies
    contain A.  Only subsets of some copy's vertex set appear."""

    def __init__(self, n: int, h: int):
        self.n = n
        self.h = h
        self._packed: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._dicts: dict[int, dict[tuple, int]] = {}

    @staticmethod
    def build(vertex_sets: np.ndarray, n: int, h: int) -> "LocalCountProfile":
        prof = LocalCountProfile(n, h)
        n_copies = len(vertex_sets)
        for k in range(1, h + 1):
            combos = list(itertools.combinations(range(h), k))
            packed_ok = k * _pack_width(n) <= 64
            if packed_ok and n_copies:
                keys = np.concatenate(
                    [pack_rows(vertex_sets[:, c], n) for c in combos])
                uniq, counts = np.unique(keys, return_counts=True)
                prof._packed[k] = (uniq, counts.astype(np.int64))
            elif packed_ok:
                prof._packed[k] = (np.empty(0, dtype=np.uint64),
                                   np.empty(0, dtype=np.int64))
            else:
                d: dict[tuple, int] = {}
                for row in vertex_sets:
                    for c in combos:
                        key = tuple(int(row[j]) for j in c)
                        d[key] = d.get(key, 0) + 1
                prof._dicts[k] = d
        return prof

    def counts_of_size(self, k: int) -> np.ndarray:
        if k in self._packed:
            return self._packed[k][1]
        return np.array(sorted(self._dicts[k].values()), dtype=np.int64) \
            if self._dicts.get(k) else np.empty(0, dtype=np.int64)

    def sum_counts(self, k: int) -> int:
        return int(self.counts_of_size(k).sum())

    def sum_squared(self, k: int) -> int:
        c = self.counts_of_size(k)
        return int((c.astype(object) ** 2).sum()) if len(c) else 0

    def total(self) -> int:
        return sum(self.sum_counts(k) for k in range(1, self.h + 1))

    def lookup_rows(self, rows: np.ndarray, k: int) -> np.ndarray:
        """Local counts for sorted k-subset rows (0 where absent)."""
        if k in self._packed:
            keys = pack_rows(rows, self.n)
            uniq, counts = self._packed[k]
            pos = np.searchsorted(uniq, keys)
            pos_c = np.clip(pos, 0, max(len(uniq) - 1, 0))
            hit = (pos < len(uniq))
            if len(uniq):
                hit &= uniq[pos_c] == keys
            out = np.where(hit, counts[pos_c] if len(uniq) else 0, 0)
            return out.astype(np.int64)
        d = self._dicts[k]
        return np.array([d.get(tuple(int(x) for x in r), 0) for r in rows],
                        dtype=np.int64)

    def lookup(self, subset) -> int:
        subset = tuple(sorted(int(v) for v in subset))
        k = len(subset)
        if not (1 <= k <= self.h):
            raise DomainError(f"subset size {k} outside 1..{self.h}")
        return int(self.lookup_rows(np.array([subset]), k)[0])

    def items_of_size(self, k: int):
        """Iterate (sorted vertex tuple, count) for subsets of size k."""
        if k in self._packed:
            uniq, counts = self._packed[k]
            if len(uniq):
                rows = unpack_keys(uniq, k, self.n)
                for row, c in zip(rows, counts):
                    yield tuple(int(x) for x in row), int(c)
        else:
            yield from self._dicts.get(k, {}).items()

    def items(self):
        for k in range(1, self.h + 1):
            yield from self.items_of_size(k)


class CopyList:
    """All copies of a motif in a graph, with derived indexes built lazily."""

    def __init__(self, graph: Graph, motif: Motif, embeddings: np.ndarray):
        self.graph = graph
        self.motif = motif
        self.n = graph.n
        emb = np.asarray(embeddings, dtype=np.int64).reshape(-1, motif.h)
        self.embeddings = emb
        self._vertex_sets = None
        self._index = None
        self._profile = None
        self._overlap_degrees = None
        self._max_local = None
        self._masks = None

    def __len__(self) -> int:
        return len(self.embeddings)

    @property
    def count(self) -> int:
        return len(self.embeddings)

    @property
    def vertex_sets(self) -> np.ndarray:
        """Sorted vertex rows, one per copy."""
        if self._vertex_sets is None:
            self._vertex_sets = np.sort(self.embeddings, axis=1)
        return self._vertex_sets

    def edge_list(self, i: int) -> list[tuple[int, int]]:
        """Mapped edge set of copy i, as sorted vertex pairs."""
        row = self.embeddings[i]
        return sorted((min(int(row[u]), int(row[v])), max(int(row[u]), int(row[v])))
                      for u, v in self.motif.edges)

    def vertex_index(self):
        """CSR index: copy ids containing each vertex."""
        if self._index is None:
            vs = self.vertex_sets
            flat = vs.ravel()
            ids = np.repeat(np.arange(len(vs), dtype=np.int64), self.motif.h)
            order = np.argsort(flat, kind="stable")
            counts = np.bincount(flat, minlength=self.n)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            self._index = (indptr, ids[order])
        return self._index

    def copies_containing(self, v: int) -> np.ndarray:
        indptr, ids = self.vertex_index()
        return ids[indptr[v]:indptr[v + 1]]

    def profile(self) -> LocalCountProfile:
        if self._profile is None:
            self._profile = LocalCountProfile.build(self.vertex_sets, self.n, self.motif.h)
        return self._profile

    def bit_masks(self) -> np.ndarray:
        """Per-copy vertex bitmasks, shape (N, ceil(n/64)) uint64.  Meant for
        the exact moment oracles; refuse absurd widths."""
        if self._masks is None:
            words = (self.n + 63) // 64
            if len(self) * words > 50_000_000:
                raise ResourceCapError("copy bitmask table would be too large")
            masks = np.zeros((len(self), max(words, 1)), dtype=np.uint64)
            vs = self.vertex_sets
            for j in range(self.motif.h):
                col = vs[:, j]
                np.bitwise_or.at(masks, (np.arange(len(vs)), col // 64),
                                 np.uint64(1) << (col % 64).astype(np.uint64))
            self._masks = masks
        return self._masks

    def overlap_degrees(self) -> np.ndarray:
        """For each copy, the number of copies sharing at least one vertex
        with it (itself included), by inclusion-exclusion over its subsets."""
        if self._overlap_degrees is None:
            prof = self.profile()
            h = self.motif.h
            vs = self.vertex_sets
            total = np.zeros(len(vs), dtype=np.int64)
            for k in range(1, h + 1):
                sign = 1 if k % 2 == 1 else -1
                for c in itertools.combinations(range(h), k):
                    total += sign * prof.lookup_rows(vs[:, c], k)
            self._overlap_degrees = total
        return self._overlap_degrees

    def max_local_by_size(self) -> np.ndarray:
        """(N, h) array: entry [i, k-1] is the largest local count among the
        size-k subsets of copy i's vertex set."""
        if self._max_local is None:
            prof = self.profile()
            h = self.motif.h
            vs = self.vertex_sets
            out = np.zeros((len(vs), h), dtype=np.int64)
            for k in range(1, h + 1):
                best = np.zeros(len(vs), dtype=np.int64)
                for c in itertools.combinations(range(h), k):
                    np.maximum(best, prof.lookup_rows(vs[:, c], k), out=best)
                out[:, k - 1] = best
            self._max_local = out
        return self._max_local


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _above_masks(n: int) -> np.ndarray:
    """Row v masks the vertices strictly greater than v."""
    words = max(1, (n + 63) // 64)
    full = np.zeros((n + 1, words), dtype=np.uint64)
    idx = np.arange(n, dtype=np.int64)
    np.bitwise_or.at(full, (np.zeros(n, dtype=np.int64) , idx // 64),
                     np.uint64(1) << (idx % 64).astype(np.uint64))
    # full[0] now has all vertex bits; build suffix masks cumulatively
    out = np.zeros((n, words), dtype=np.uint64)
    acc = np.zeros(words, dtype=np.uint64)
    for v in range(n - 1, -1, -1):
        out[v] = acc
        acc[v // 64] |= np.uint64(1) << np.uint64(v % 64)
    return out


def _extract_bits(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Set-bit positions of packed rows: returns (row_ids, bit_positions)."""
    nrows, words = block.shape
    as_bytes = block.view(np.uint8).reshape(nrows, words * 8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    rows, cols = np.nonzero(bits)
    return rows, cols


def _enumerate_edges(graph: Graph, cap: int) -> np.ndarray:
    if graph.m > cap:
        raise _cap_error(graph.m, cap)
    return graph.edges.copy()


def _enumerate_stars(graph: Graph, k: int, cap: int) -> np.ndarray:
    degs = graph.degrees
    total = sum(comb(int(d), k) for d in degs)
    if total > cap:
        raise _cap_error(total, cap)
    rows = []
    for v in range(graph.n):
        nb = graph.neighbors(v)
        if len(nb) < k:
            continue
        if k == 2:
            i, j = np.triu_indices(len(nb), 1)
            chunk = np.column_stack([np.full(len(i), v), nb[i], nb[j]])
        else:
            combos = np.array(list(itertools.combinations(nb.tolist(), k)), dtype=np.int64)
            chunk = np.column_stack([np.full(len(combos), v), combos])
        rows.append(chunk)
    if not rows:
        return np.empty((0, k + 1), dtype=np.int64)
    return np.concatenate(rows).astype(np.int64)


def _enumerate_triangles(graph: Graph, cap: int) -> np.ndarray:
    n, m = graph.n, graph.m
    if m == 0:
        return np.empty((0, 3), dtype=np.int64)
    if n <= BITSET_VERTEX_LIMIT:
        bits = graph.bit_rows()
        above = _above_masks(n)
        out = []
        total = 0
        chunk = max(1, 20_000_000 // max(1, bits.shape[1] * 64))
        for lo in range(0, m, chunk):
            e = graph.edges[lo:lo + chunk]
            common = bits[e[:, 0]] & bits[e[:, 1]] & above[e[:, 1]]
            rows, ws = _extract_bits(common)
            total += len(rows)
            if total > cap:
                raise _cap_error(total, cap)
            out.append(np.column_stack([e[rows, 0], e[rows, 1], ws]))
        return np.concatenate(out).astype(np.int64) if out else np.empty((0, 3), dtype=np.int64)
    # neighbor-merge fallback for very large vertex sets
    rows = []
    total = 0
    for u, v in graph.edges:
        common = np.intersect1d(graph.neighbors(u), graph.neighbors(v), assume_unique=True)
        common = common[common > v]
        total += len(common)
        if total > cap:
            raise _cap_error(total, cap)
        if len(common):
            rows.append(np.column_stack([np.full(len(common), u),
                                         np.full(len(common), v), common]))
    return np.concatenate(rows).astype(np.int64) if rows else np.empty((0, 3), dtype=np.int64)


def _enumerate_paths4(graph: Graph, cap: int) -> np.ndarray:
    """Paths a-b-c-d keyed by their oriented interior edge; kept iff a < d,
    so each path appears exactly once."""
    rows = []
    total = 0
    for b, c in itertools.chain(graph.edges, graph.edges[:, ::-1]):
        first = graph.neighbors(b)
        first = first[first != c]
        last = graph.neighbors(c)
        last = last[last != b]
        if not len(first) or not len(last):
            continue
        keep_a, keep_d = np.nonzero(first[:, None] < last[None, :])
        total += len(keep_a)
        if total > cap:
            raise _cap_error(total, cap)
        if len(keep_a):
            rows.append(np.column_stack([
                first[keep_a],
                np.full(len(keep_a), b),
                np.full(len(keep_a), c),
                last[keep_d]]))
    return np.concatenate(rows).astype(np.int64) if rows else np.empty((0, 4), dtype=np.int64)


def _enumerate_cycles4(graph: Graph, cap: int) -> np.ndarray:
    """Cycles u-x-v-y keyed by the diagonal pair (u, v); the representative
    has u < v, x < y, and u below the other diagonal (u < x)."""
    n = graph.n
    if n <= BITSET_VERTEX_LIMIT:
        bits = graph.bit_rows()
        above = _above_masks(n)
        rows = []
        total = 0
        for u in range(n):
            if graph.degree(u) < 2:
                continue
            block = bits[u] & bits[u + 1:] & above[u]
            cnt = np.bitwise_count(block).sum(axis=1)
            for off in np.nonzero(cnt >= 2)[0]:
                v = u + 1 + int(off)
                _, ws = _extract_bits(block[off:off + 1])
                i, j = np.triu_indices(len(ws), 1)
                total += len(i)
                if total > cap:
                    raise _cap_error(total, cap)
                rows.append(np.column_stack([
                    np.full(len(i), u), ws[i], np.full(len(i), v), ws[j]]))
        return np.concatenate(rows).astype(np.int64) if rows else np.empty((0, 4), dtype=np.int64)
    raise ResourceCapError(
        f"4-cycle enumeration needs packed adjacency (n <= {BITSET_VERTEX_LIMIT})")


def _enumerate_cliques(graph: Graph, k: int, cap: int) -> np.ndarray:
    if k == 2:
        return _enumerate_edges(graph, cap)
    if k == 3:
        return _enumerate_triangles(graph, cap)
    tris = _enumerate_triangles(graph, cap)
    cur = tris
    for size in range(4, k + 1):
        rows = []
        total = 0
        bits = graph.bit_rows()
        above = _above_masks(graph.n)
        for row in cur:
            block = bits[row[0]].copy()
            for v in row[1:]:
                block &= bits[v]
            block &= above[row[-1]]
            _, ws = _extract_bits(block[None, :])
            total += len(ws)
            if total > cap:
                raise _cap_error(total, cap)
            for w in ws:
                rows.append(np.concatenate([row, [w]]))
        cur = np.array(rows, dtype=np.int64).reshape(-1, size)
    return cur


def _greedy_order(motif: Motif) -> list[int]:
    adj = {v: set() for v in range(motif.h)}
    for u, v in motif.edges:
        adj[u].add(v)
        adj[v].add(u)
    deg = {v: len(adj[v]) for v in range(motif.h)}
    order = [max(range(motif.h), key=lambda v: deg[v])]
    placed = set(order)
    while len(order) < motif.h:
        best = max((v for v in range(motif.h) if v not in placed),
                   key=lambda v: (len(adj[v] & placed), deg[v]))
        order.append(best)
        placed.add(best)
    return order


def _enumerate_generic(graph: Graph, motif: Motif, cap: int) -> np.ndarray:
    order = _greedy_order(motif)
    adj = {v: set() for v in range(motif.h)}
    for u, v in motif.edges:
        adj[u].add(v)
        adj[v].add(u)
    back = [[j for j in range(i) if order[j] in adj[order[i]]] for i in range(motif.h)]
    motif_deg = [motif.degree(order[i]) for i in range(motif.h)]
    auts = automorphisms(motif.h, motif.edges)
    degs = graph.degrees
    found: list[tuple[int, ...]] = []
    assigned = [0] * motif.h

    def accept(assignment: list[int]) -> None:
        row = [0] * motif.h
        for i, g in enumerate(assignment):
            row[order[i]] = g
        rep = min(tuple(row[s[j]] for j in range(motif.h)) for s in auts)
        if tuple(row) == rep:
            found.append(tuple(row))
            if len(found) > cap:
                raise _cap_error(len(found), cap)

    def extend(pos: int) -> None:
        if pos == motif.h:
            accept(assigned)
            return
        if back[pos]:
            dom = graph.neighbors(assigned[back[pos][0]])
            for j in back[pos][1:]:
                dom = np.intersect1d(dom, graph.neighbors(assigned[j]), assume_unique=True)
        else:
            dom = np.arange(graph.n)
        used = set(assigned[:pos])
        need = motif_deg[pos]
        for v in dom:
            v = int(v)
            if v in used or degs[v] < need:
                continue
            assigned[pos] = v
            extend(pos + 1)

    extend(0)
    return np.array(found, dtype=np.int64).reshape(-1, motif.h)


def _is_star(motif: Motif):
    degs = [motif.degree(v) for v in range(motif.h)]
    if motif.n_edges == motif.h - 1 and max(degs) == motif.h - 1:
        return degs.index(motif.h - 1)
    return None


def _is_clique(motif: Motif) -> bool:
    return motif.n_edges == motif.h * (motif.h - 1) // 2


def _is_path(motif: Motif) -> bool:
    if motif.n_edges != motif.h - 1:
        return False
    degs = sorted(motif.degree(v) for v in range(motif.h))
    return degs[:2] == [1, 1] and all(d == 2 for d in degs[2:])


def _is_cycle(motif: Motif) -> bool:
    return (motif.n_edges == motif.h
            and all(motif.degree(v) == 2 for v in range(motif.h)))


def enumerate_copies(graph: Graph, motif: Motif, cap: int = DEFAULT_COPY_CAP) -> CopyList:
    """Enumerate every copy of the motif in the graph.

    The per-copy records are canonical, so the result has exactly one entry
    per copy; a ResourceCapError is raised as soon as the count would exceed
    ``cap``.
    """
    if motif.h > graph.n:
        return CopyList(graph, motif, np.empty((0, motif.h), dtype=np.int64))
    star_center = _is_star(motif)
    if motif.h == 2:
        emb = _enumerate_edges(graph, cap)
    elif star_center is not None:
        emb = _enumerate_stars(graph, motif.h - 1, cap)
        if star_center != 0:
            # reorder columns so column j holds the image of motif vertex j
            perm = _star_column_order(motif, star_center)
            emb = emb[:, perm]
    elif _is_clique(motif):
        emb = _enumerate_cliques(graph, motif.h, cap)
    elif motif.h == 4 and _is_path(motif):
        emb = _enumerate_paths4(graph, cap)
        emb = emb[:, _path4_column_order(motif)]
    elif motif.h == 4 and _is_cycle(motif):
        emb = _enumerate_cycles4(graph, cap)
        emb = emb[:, _cycle4_column_order(motif)]
    else:
        emb = _enumerate_generic(graph, motif, cap)
    return CopyList(graph, motif, emb)


def _star_column_order(motif: Motif, center: int) -> list[int]:
    leaves = [v for v in range(motif.h) if v != center]
    src = [center] + leaves          # column layout produced by the enumerator
    perm = [0] * motif.h
    for col, v in enumerate(src):
        perm[v] = col
    return perm


def _path4_column_order(motif: Motif) -> list[int]:
    # enumerator emits columns (end, mid, mid, end) along the path
    adj = {v: [] for v in range(4)}
    for u, v in motif.edges:
        adj[u].append(v)
        adj[v].append(u)
    start = min(v for v in range(4) if len(adj[v]) == 1)
    path = [start, adj[start][0]]
    while len(path) < 4:
        nxt = [w for w in adj[path[-1]] if w != path[-2]]
        path.append(nxt[0])
    perm = [0] * 4
    for col, v in enumerate(path):
        perm[v] = col
    return perm


def _cycle4_column_order(motif: Motif) -> list[int]:
    adj = {v: [] for v in range(4)}
    for u, v in motif.edges:
        adj[u].append(v)
        adj[v].append(u)
    cyc = [0, adj[0][0]]
    while len(cyc) < 4:
        nxt = [w for w in adj[cyc[-1]] if w != cyc[-2]]
        cyc.append(nxt[0])
    perm = [0] * 4
    for col, v in enumerate(cyc):
        perm[v] = col
    return perm


def motif_count(graph: Graph, motif: Motif, cap: int = DEFAULT_COPY_CAP) -> int:
    """Number of copies of the motif, with closed forms for edges and stars."""
    if motif.h == 2:
        return graph.m
    center = _is_star(motif)
    if center is not None:
        k = motif.h - 1
        return int(sum(comb(int(d), k) for d in graph.degrees))
    return len(enumerate_copies(graph, motif, cap))


def local_count(copies: CopyList, subset) -> int:
    """Number of copies whose vertex set contains the given vertices; the
    empty set yields the total copy count."""
    vs = tuple(sorted(set(int(v) for v in subset)))
    if len(vs) > copies.motif.h:
        raise DomainError(
            f"subset size {len(vs)} exceeds motif order {copies.motif.h}")
    if not vs:
        return len(copies)
    ids = copies.copies_containing(vs[0])
    for v in vs[1:]:
        ids = np.intersect1d(ids, copies.copies_containing(v), assume_unique=True)
    return int(len(ids))


def local_count_profile(copies: CopyList) -> dict[tuple, int]:
    """Map every nonempty subset with a positive local count to that count.

    The values sum to (2^h - 1) times the copy count, since each copy
    contributes each of its 2^h - 1 nonempty vertex subsets once.
    """
    return dict(copies.profile().items())

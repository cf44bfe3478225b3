"""Graph ensembles: random models and the deterministic counterexample
constructions used by the experiment recipes.

All generators are seed-deterministic; a generator consumes its own RNG
stream and never global state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceCapError, ValidationError
from .graphs import Graph

REGULAR_RESTART_BUDGET = 10_000


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _decode_pair_index(k: np.ndarray, n: int) -> np.ndarray:
    """Map linear indices over the u<v pairs of range(n), in lexicographic
    order by u, back to (u, v)."""
    k = k.astype(np.float64)
    u = np.floor(((2 * n - 1) - np.sqrt((2 * n - 1) ** 2 - 8 * k)) / 2).astype(np.int64)
    # guard the float root against off-by-one at block boundaries
    off = u * (2 * n - u - 1) // 2
    while True:
        too_high = off > k.astype(np.int64)
        if not too_high.any():
            break
        u[too_high] -= 1
        off = u * (2 * n - u - 1) // 2
    nxt = (u + 1) * (2 * n - u - 2) // 2
    too_low = k.astype(np.int64) >= nxt
    while too_low.any():
        u[too_low] += 1
        off = u * (2 * n - u - 1) // 2
        nxt = (u + 1) * (2 * n - u - 2) // 2
        too_low = k.astype(np.int64) >= nxt
    v = k.astype(np.int64) - off + u + 1
    return np.column_stack([u, v])


def _sample_pair_indices(total: int, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of kept pairs among `total`, each kept independently with
    probability `prob`, via geometric gap skipping (O(expected hits))."""
    if prob <= 0 or total == 0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1:
        return np.arange(total, dtype=np.int64)
    log1m = np.log1p(-prob)
    out = []
    pos = -1
    expected = max(16, int(total * prob * 1.2) + 64)
    while pos < total - 1:
        u = rng.random(expected)
        gaps = np.floor(np.log(u) / log1m).astype(np.int64) + 1
        idx = pos + np.cumsum(gaps)
        take = idx[idx < total]
        out.append(take)
        if len(take) < len(idx):
            break
        pos = int(idx[-1])
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def erdos_renyi(n: int, q: float, seed) -> Graph:
    """Each unordered vertex pair is an edge independently with probability q."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"edge probability must lie in [0,1], got {q}")
    total = n * (n - 1) // 2
    idx = _sample_pair_indices(total, q, _rng(seed))
    if not len(idx):
        return Graph(n, [])
    return Graph(n, _decode_pair_index(idx, n))


def random_regular(n: int, d: int, seed) -> Graph:
    """Uniform simple d-regular graph via the pairing model with full
    restarts on any self-loop or repeated edge."""
    if not (1 <= d <= n - 1):
        raise DomainError(f"degree must lie in 1..{n - 1}, got {d}")
    if (n * d) % 2 != 0:
        raise DomainError(f"n*d must be even, got n={n}, d={d}")
    rng = _rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(REGULAR_RESTART_BUDGET):
        perm = rng.permutation(len(stubs))
        pairs = stubs[perm].reshape(-1, 2)
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        if (lo == hi).any():
            continue
        packed = lo * n + hi
        if len(np.unique(packed)) != len(packed):
            continue
        return Graph(n, np.column_stack([lo, hi]))
    raise ResourceCapError(
        f"pairing model failed to produce a simple graph in "
        f"{REGULAR_RESTART_BUDGET} restarts; try a smaller degree")


def sbm(sizes, probs, seed) -> Graph:
    """Stochastic block model: edge (u,v) present independently with
    probability probs[block(u)][block(v)]."""
    sizes = [int(s) for s in sizes]
    if any(s < 0 for s in sizes) or sum(sizes) < 1:
        raise DomainError("block sizes must be nonnegative and sum to >= 1")
    probs = np.asarray(probs, dtype=np.float64)
    k = len(sizes)
    if probs.shape != (k, k):
        raise ValidationError(f"probability matrix must be {k}x{k}")
    if not np.array_equal(probs, probs.T):
        raise ValidationError("probability matrix must be symmetric")
    if probs.min() < 0 or probs.max() > 1:
        raise DomainError("probabilities must lie in [0,1]")
    rng = _rng(seed)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n = int(starts[-1])
    chunks = []
    for a in range(k):
        sa = sizes[a]
        idx = _sample_pair_indices(sa * (sa - 1) // 2, probs[a, a], rng)
        if len(idx):
            chunks.append(_decode_pair_index(idx, sa) + starts[a])
        for b in range(a + 1, k):
            sb = sizes[b]
            idx = _sample_pair_indices(sa * sb, probs[a, b], rng)
            if len(idx):
                u = idx // sb + starts[a]
                v = idx % sb + starts[b]
                chunks.append(np.column_stack([u, v]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges)


def graphon_sample(w_grid, n: int, seed) -> Graph:
    """W-random graph from a piecewise-constant symmetric kernel: draw a
    uniform coordinate per vertex, connect with the grid cell probability."""
    w = np.asarray(w_grid, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationError("graphon grid must be square")
    if not np.array_equal(w, w.T):
        raise ValidationError("graphon grid must be symmetric")
    if w.min() < 0 or w.max() > 1:
        raise DomainError("graphon values must lie in [0,1]")
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = _rng(seed)
    k = w.shape[0]
    coords = rng.random(n)
    blocks = np.minimum((coords * k).astype(np.int64), k - 1)
    order = np.argsort(blocks, kind="stable")
    sizes = np.bincount(blocks, minlength=k)
    grouped = sbm(sizes.tolist(), w, rng.integers(0, 2 ** 63 - 1))
    # grouped vertex i is the i-th original vertex in block-sorted order
    edges = order[grouped.edges] if grouped.m else []
    return Graph(n, edges)


def star(n: int) -> Graph:
    """Star with n leaves on vertex 0 (n+1 vertices)."""
    if n < 1:
        raise DomainError("star needs at least one leaf")
    return Graph(n + 1, [(0, i) for i in range(1, n + 1)])


def stars_plus_cliques(r: int, a: int, b: int) -> Graph:
    """r disjoint a-leaf stars followed by r disjoint b-cliques."""
    if min(r, a, b) < 1:
        raise DomainError("r, a, b must be positive")
    edges = []
    off = 0
    for _ in range(r):
        edges.extend((off, off + i) for i in range(1, a + 1))
        off += a + 1
    for _ in range(r):
        for i in range(b):
            for j in range(i + 1, b):
                edges.append((off + i, off + j))
        off += b
    return Graph(off, edges)


def star_plus_matching(a: int, b: int) -> Graph:
    """Disjoint union of an a-leaf star and b independent edges."""
    if a < 1 or b < 0:
        raise DomainError("need a >= 1 and b >= 0")
    edges = [(0, i) for i in range(1, a + 1)]
    off = a + 1
    for i in range(b):
        edges.append((off + 2 * i, off + 2 * i + 1))
    return Graph(a + 1 + 2 * b, edges)


@dataclass
class EnsembleSpec:
    """Serializable recipe for one graph draw."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "seed": self.seed}

    @staticmethod
    def from_json_dict(obj: dict) -> "EnsembleSpec":
        try:
            return EnsembleSpec(kind=str(obj["kind"]),
                                params=dict(obj.get("params", {})),
                                seed=int(obj.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad ensemble spec: {exc}") from None

    def generate(self, seed=None) -> Graph:
        s = self.seed if seed is None else seed
        p = self.params
        kind = self.kind
        if kind == "erdos_renyi":
            return erdos_renyi(int(p["n"]), float(p["q"]), s)
        if kind == "random_regular":
            return random_regular(int(p["n"]), int(p["d"]), s)
        if kind == "sbm":
            return sbm(p["sizes"], p["probs"], s)
        if kind == "graphon":
            return graphon_sample(p["grid"], int(p["n"]), s)
        if kind == "star":
            return star(int(p["n"]))
        if kind == "stars_plus_cliques":
            return stars_plus_cliques(int(p["r"]), int(p["a"]), int(p["b"]))
        if kind == "star_plus_matching":
            return star_plus_matching(int(p["a"]), int(p["b"]))
        raise ValidationError(f"unknown ensemble kind {kind!r}")

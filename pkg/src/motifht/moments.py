"""Exact distributional quantities for the sampled motif count.

These are the brute-force-grade oracles: the exact variance of the observed
count, centered product moments of sampling indicators by inclusion-exclusion,
the connected-quadruple weight that controls the normal-approximation error,
and the exact fourth moment of the standardized count.  Scalar entry points
accept `fractions.Fraction` sampling ratios and then return exact rationals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial
from typing import Optional

import numpy as np

from .census import CopyList
from .errors import DomainError, ResourceCapError

DEFAULT_QUADRUPLE_CAP = 300


# ---------------------------------------------------------------------------
# scalar inclusion-exclusion moments (Fraction-friendly)
# ---------------------------------------------------------------------------


def _as_vertex_sets(sets):
    out = [frozenset(int(v) for v in s) for s in sets]
    if not (1 <= len(out) <= 4):
        raise DomainError(f"need between 1 and 4 vertex sets, got {len(out)}")
    if any(not s for s in out):
        raise DomainError("vertex sets must be nonempty")
    return out


def signed_moment(sets, p):
    """E[prod_i (X_i - p^|V_i|)] where X_i indicates that all of V_i is
    sampled; exact inclusion-exclusion over the subsets of the collection."""
    vs = _as_vertex_sets(sets)
    length = len(vs)
    total = 0
    for picked in range(1 << length):
        union = frozenset()
        coef = 1
        for i in range(length):
            if picked >> i & 1:
                union = union | vs[i]
            else:
                coef = coef * (-(p ** len(vs[i])))
        total = total + coef * p ** len(union)
    return total


def abs_moment(sets, p):
    """E[prod_i |X_i - p^|V_i||], exact: enumerate the joint on/off patterns
    of the distinct sets, with pattern probabilities by inclusion-exclusion."""
    vs = _as_vertex_sets(sets)
    distinct: list = []
    mult: list = []
    for s in vs:
        if s in distinct:
            mult[distinct.index(s)] += 1
        else:
            distinct.append(s)
            mult.append(1)
    d = len(distinct)
    total = 0
    for pattern in range(1 << d):
        ones_union = frozenset()
        zeros = []
        for i in range(d):
            if pattern >> i & 1:
                ones_union = ones_union | distinct[i]
            else:
                zeros.append(i)
        prob = 0
        for picked in range(1 << len(zeros)):
            union = ones_union
            sign = 1
            for j, i in enumerate(zeros):
                if picked >> j & 1:
                    union = union | distinct[i]
                    sign = -sign
            prob = prob + sign * p ** len(union)
        value = 1
        for i in range(d):
            q = p ** len(distinct[i])
            value = value * ((1 - q) if pattern >> i & 1 else q) ** mult[i]
        total = total + prob * value
    return total


# ---------------------------------------------------------------------------
# variance and its subset-weight bracket
# ---------------------------------------------------------------------------


def _pair_intersection_counts(copies: CopyList) -> list[int]:
    """counts[k] = ordered copy pairs sharing exactly k vertices, k=1..h,
    derived from the subset profile by binomial inversion."""
    prof = copies.profile()
    h = copies.motif.h
    squared = [prof.sum_squared(k) for k in range(1, h + 1)]
    out = []
    for k in range(1, h + 1):
        val = 0
        for j in range(k, h + 1):
            sign = 1 if (j - k) % 2 == 0 else -1
            val += sign * comb(j, k) * squared[j - 1]
        out.append(val)
    return out


def exact_variance(copies: CopyList, p):
    """Var of the observed count under vertex sampling.

    Equals the sum over ordered overlapping copy pairs of
    p^|V1 union V2| - p^2h, grouped here by shared-vertex count so the cost
    is one pass over the subset profile.  Exact for Fraction p.
    """
    h = copies.motif.h
    by_k = _pair_intersection_counts(copies)
    total = 0
    for k in range(1, h + 1):
        total = total + p ** (2 * h - k) * (1 - p ** k) * by_k[k - 1]
    return total


@dataclass
class VarianceBracket:
    """Two-sided bracket of the exact variance by the squared-local-count
    weight: (1-p) w / (2^h - 1) <= Var <= w."""

    square_weight: object
    lower: object
    upper: object
    variance: object
    holds: bool

    def to_json_dict(self) -> dict:
        return {"square_weight": float(self.square_weight),
                "lower": float(self.lower), "upper": float(self.upper),
                "variance": float(self.variance), "holds": self.holds}


def variance_bracket(copies: CopyList, p) -> VarianceBracket:
    prof = copies.profile()
    h = copies.motif.h
    weight = 0
    for k in range(1, h + 1):
        weight = weight + p ** (2 * h - k) * prof.sum_squared(k)
    var = exact_variance(copies, p)
    lower = (1 - p) * weight / (2 ** h - 1)
    return VarianceBracket(square_weight=weight, lower=lower, upper=weight,
                           variance=var, holds=bool(lower <= var <= weight))


# ---------------------------------------------------------------------------
# connected quadruples of copies
# ---------------------------------------------------------------------------


def _overlap_matrix(copies: CopyList) -> np.ndarray:
    masks = copies.bit_masks()
    c = len(copies)
    ov = np.zeros((c, c), dtype=bool)
    for w in range(masks.shape[1]):
        col = masks[:, w]
        ov |= (col[:, None] & col[None, :]) != 0
    return ov


def _connected_supports(ov: np.ndarray) -> dict[int, np.ndarray]:
    """Sets of 1..4 distinct copies whose pairwise-overlap graph is connected.
    Every connected 4-set contains a connected 3-subset, so extension from
    smaller supports is exhaustive."""
    c = len(ov)
    ovd = ov.copy()
    np.fill_diagonal(ovd, False)
    out = {1: np.arange(c, dtype=np.int64)[:, None]}
    pairs = np.argwhere(np.triu(ovd, 1))
    out[2] = pairs.astype(np.int64)
    base = np.int64(max(c, 1))

    def grow(rows: np.ndarray, k: int) -> np.ndarray:
        if not len(rows):
            return np.empty((0, k + 1), dtype=np.int64)
        cand = ovd[rows[:, 0]]
        for j in range(1, k):
            cand = cand | ovd[rows[:, j]]
        for j in range(k):
            cand[np.arange(len(rows)), rows[:, j]] = False
        rid, new = np.nonzero(cand)
        grown = np.sort(np.column_stack([rows[rid], new]), axis=1)
        keys = grown[:, 0]
        for j in range(1, k + 1):
            keys = keys * base + grown[:, j]
        _, first = np.unique(keys, return_index=True)
        return grown[first]

    out[3] = grow(out[2], 2)
    out[4] = grow(out[3], 3)
    return out


def _subset_union_popcounts(masks: np.ndarray) -> np.ndarray:
    """masks: (M, k, W) uint64 -> (M, 2^k) popcounts of subset unions."""
    m, k, w = masks.shape
    unions = np.zeros((m, 1 << k, w), dtype=np.uint64)
    for s in range(1, 1 << k):
        low = s & -s
        rest = s ^ low
        j = low.bit_length() - 1
        if rest:
            unions[:, s] = unions[:, rest] | masks[:, j]
        else:
            unions[:, s] = masks[:, j]
    return np.bitwise_count(unions).sum(axis=2).astype(np.int64)


def _pattern_probabilities(pc: np.ndarray, p: float) -> np.ndarray:
    """pc: (M, 2^k) union popcounts -> (M, 2^k) pattern probabilities;
    column b is P(exactly the sets in b fully sampled)."""
    m, npat = pc.shape
    k = npat.bit_length() - 1
    pows = np.power(float(p), pc)
    probs = np.zeros_like(pows)
    full = npat - 1
    for b in range(npat):
        zeros = full ^ b
        acc = np.zeros(m)
        s = zeros
        while True:
            sign = 1.0 if bin(s).count("1") % 2 == 0 else -1.0
            acc += sign * pows[:, b | s]
            if s == 0:
                break
            s = (s - 1) & zeros
        probs[:, b] = acc
    return probs


_MULTIPLICITY_CLASSES = {
    1: [(4,)],
    2: [(3, 1), (2, 2), (1, 3)],
    3: [(2, 1, 1), (1, 2, 1), (1, 1, 2)],
    4: [(1, 1, 1, 1)],
}


def _quadruple_sums(copies: CopyList, p: float, cap: int,
                    chunk: int = 65536) -> tuple[float, float]:
    """Sums over ordered connected copy quadruples (c1..c4) of
    E|Z1 Z2 Z3 Z4| and E[Z1 Z2 Z3 Z4], with Z the centered sampling
    indicator of a copy's vertex set."""
    if len(copies) > cap:
        raise ResourceCapError(
            f"exact quadruple enumeration capped at {cap} copies "
            f"(have {len(copies)}); use the Monte Carlo fourth-moment mode")
    if len(copies) == 0:
        return 0.0, 0.0
    q = float(p) ** copies.motif.h
    masks = copies.bit_masks()
    supports = _connected_supports(_overlap_matrix(copies))
    total_abs = 0.0
    total_signed = 0.0
    for k, mult_list in _MULTIPLICITY_CLASSES.items():
        rows = supports[k]
        for lo in range(0, len(rows), chunk):
            part = rows[lo:lo + chunk]
            pc = _subset_union_popcounts(masks[part])
            probs = _pattern_probabilities(pc, p)
            for mults in mult_list:
                orderings = factorial(4) // np.prod([factorial(x) for x in mults])
                w_abs = np.empty(1 << k)
                w_sgn = np.empty(1 << k)
                for b in range(1 << k):
                    va, vs_ = 1.0, 1.0
                    for i in range(k):
                        if b >> i & 1:
                            va *= (1.0 - q) ** mults[i]
                            vs_ *= (1.0 - q) ** mults[i]
                        else:
                            va *= q ** mults[i]
                            vs_ *= (-q) ** mults[i]
                    w_abs[b] = va
                    w_sgn[b] = vs_
                total_abs += orderings * float((probs @ w_abs).sum())
                total_signed += orderings * float((probs @ w_sgn).sum())
    return total_abs, total_signed


def expected_quadruple_weight(copies: CopyList, p: float,
                              cap: int = DEFAULT_QUADRUPLE_CAP) -> float:
    """Expected sum, over ordered connected quadruples of copies, of the
    absolute product of centered sampling indicators, divided by the fourth
    power of the motif's automorphism count."""
    total_abs, _ = _quadruple_sums(copies, p, cap)
    return total_abs / copies.motif.aut ** 4


def _pair_terms(copies: CopyList, p: float):
    """Ordered overlapping pairs: covariances E[Z1 Z2] and union masks."""
    masks = copies.bit_masks()
    ov = _overlap_matrix(copies)
    i, j = np.nonzero(ov)
    unions = masks[i] | masks[j]
    pc = np.bitwise_count(unions).sum(axis=1).astype(np.int64)
    q = float(p) ** copies.motif.h
    cov = np.power(float(p), pc) - q * q
    return cov, unions


def fourth_moment_exact(copies: CopyList, p: float,
                        cap: int = DEFAULT_QUADRUPLE_CAP,
                        var_t: Optional[float] = None) -> float:
    """E[Z^4] for Z the standardized observed count, computed exactly.

    Splits the centered fourth moment over quadruple index patterns: the
    connected part is summed directly; the remaining nonvanishing patterns
    are products over two overlapping pairs with disjoint unions, handled
    through the complement of the pair-pair intersection sum.
    """
    if len(copies) == 0:
        raise DomainError("motif absent; standardized count undefined")
    var = float(exact_variance(copies, p)) if var_t is None else float(var_t)
    if var <= 0:
        raise DomainError("variance is zero; standardized count undefined")
    _, s_conn = _quadruple_sums(copies, p, cap)
    cov, unions = _pair_terms(copies, p)
    r_sum = 0.0
    chunk = max(1, 20_000_000 // max(1, len(unions)))
    for lo in range(0, len(unions), chunk):
        block = unions[lo:lo + chunk]
        inter = np.zeros((len(block), len(unions)), dtype=bool)
        for w in range(unions.shape[1]):
            inter |= (block[:, w][:, None] & unions[None, :, w]) != 0
        r_sum += float(cov[lo:lo + chunk] @ (inter @ cov))
    return 3.0 + (s_conn - 3.0 * r_sum) / var ** 2


def fourth_moment_mc(copies: CopyList, p: float, reps: int, seed,
                     var_t: Optional[float] = None,
                     chunk: int = 4096) -> tuple[float, float]:
    """Monte Carlo E[Z^4] with its standard error, standardizing by the
    exact variance."""
    if reps < 2:
        raise DomainError("need at least 2 replications")
    if len(copies) == 0:
        raise DomainError("motif absent; standardized count undefined")
    var = float(exact_variance(copies, p)) if var_t is None else float(var_t)
    if var <= 0:
        raise DomainError("variance is zero; standardized count undefined")
    q = float(p) ** copies.motif.h
    mean_t = q * len(copies)
    sigma = var ** 0.5
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    emb = copies.embeddings
    s4 = 0.0
    s8 = 0.0
    done = 0
    while done < reps:
        b = min(chunk, reps - done)
        sampled = rng.random((b, copies.n)) < p
        obs = sampled[:, emb[:, 0]]
        for col in range(1, copies.motif.h):
            obs &= sampled[:, emb[:, col]]
        z = (obs.sum(axis=1) - mean_t) / sigma
        s4 += float((z ** 4).sum())
        s8 += float((z ** 8).sum())
        done += b
    mean4 = s4 / reps
    se = ((s8 / reps - mean4 ** 2) / reps) ** 0.5
    return mean4, se


def fourth_moment(copies: CopyList, p: float, mode: str = "exact",
                  reps: int = 100_000, seed=0,
                  cap: int = DEFAULT_QUADRUPLE_CAP):
    """Dispatch between the exact and Monte Carlo fourth-moment routes."""
    if mode == "exact":
        return fourth_moment_exact(copies, p, cap=cap), None
    if mode in ("mc", "monte_carlo"):
        return fourth_moment_mc(copies, p, reps, seed)
    raise DomainError(f"unknown fourth-moment mode {mode!r}")


def wasserstein_ratio(quadruple_weight: float, var_t: float) -> float:
    """sqrt(expected quadruple weight / Var^2): the unscaled trend covariate
    of the normal-approximation error (constants are not certified)."""
    if var_t <= 0:
        raise DomainError("variance must be positive")
    return float(np.sqrt(quadruple_weight / var_t ** 2))


@dataclass
class MomentReport:
    """Exact (or Monte Carlo) distributional summary of the observed count."""

    n_copies: int
    p: float
    var_t: float
    square_weight: float
    bracket_lower: float
    bracket_upper: float
    bracket_holds: bool
    mode: str
    quadruple_weight: Optional[float] = None
    wass_ratio: Optional[float] = None
    fourth_moment: Optional[float] = None
    mc_reps: Optional[int] = None
    mc_std_error: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "n_copies": self.n_copies, "p": self.p, "var_t": self.var_t,
            "square_weight": self.square_weight,
            "bracket_lower": self.bracket_lower,
            "bracket_upper": self.bracket_upper,
            "bracket_holds": self.bracket_holds,
            "mode": self.mode,
            "quadruple_weight": self.quadruple_weight,
            "wass_ratio": self.wass_ratio,
            "fourth_moment": self.fourth_moment,
            "mc_reps": self.mc_reps, "mc_std_error": self.mc_std_error,
        }


def moment_report(copies: CopyList, p: float, mode: str = "exact",
                  reps: int = 100_000, seed=0,
                  cap: int = DEFAULT_QUADRUPLE_CAP) -> MomentReport:
    bracket = variance_bracket(copies, p)
    var = float(bracket.variance)
    rep = MomentReport(
        n_copies=len(copies), p=float(p), var_t=var,
        square_weight=float(bracket.square_weight),
        bracket_lower=float(bracket.lower), bracket_upper=float(bracket.upper),
        bracket_holds=bracket.holds, mode=mode)
    if len(copies) == 0 or var <= 0:
        return rep
    if mode == "exact":
        rep.quadruple_weight = expected_quadruple_weight(copies, p, cap=cap)
        rep.wass_ratio = wasserstein_ratio(rep.quadruple_weight, var)
        rep.fourth_moment = fourth_moment_exact(copies, p, cap=cap, var_t=var)
    else:
        value, se = fourth_moment_mc(copies, p, reps, seed, var_t=var)
        rep.fourth_moment = value
        rep.mc_reps = reps
        rep.mc_std_error = se
    return rep

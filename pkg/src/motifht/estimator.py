"""Vertex sampling and inverse-probability estimation of motif counts.

Every vertex is kept independently with probability p and only copies whose
vertices are all kept are observed.  Dividing the observed count by p^h
(h = motif order) gives an unbiased estimate of the true count; the variance
estimator below is exactly unbiased for Var of the observed count, which is
what makes the normal confidence intervals honest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .census import CopyList, pack_rows
from .errors import DomainError

P_UPPER = 1.0 - 1e-9
# Normality results assume small sampling ratios; warn past this point.
P_SMALL_SAMPLE_BOUND = 1.0 / 20.0


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 < p <= P_UPPER):
        raise DomainError(f"sampling ratio must lie in (0, 1-1e-9], got {p}")
    return p


@dataclass(frozen=True)
class SampleMask:
    """Indicator vector of sampled vertices plus the seed that produced it."""

    sampled: np.ndarray
    p: float
    seed: object = None

    @property
    def n(self) -> int:
        return len(self.sampled)

    @property
    def sample_size(self) -> int:
        return int(np.count_nonzero(self.sampled))


def sample_vertices(graph_or_n, p: float, seed) -> SampleMask:
    """Draw i.i.d. Bernoulli(p) vertex indicators, reproducible from seed.

    ``seed`` may be anything np.random.SeedSequence accepts (an int or a
    tuple of ints); equal seeds give equal masks.
    """
    p = _check_p(p)
    n = graph_or_n if isinstance(graph_or_n, (int, np.integer)) else graph_or_n.n
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return SampleMask(sampled=rng.random(int(n)) < p, p=p, seed=seed)


def observed_vector(copies: CopyList, mask) -> np.ndarray:
    """Boolean vector: copy i is observed iff all of its vertices are sampled."""
    sampled = mask.sampled if isinstance(mask, SampleMask) else np.asarray(mask, dtype=bool)
    if len(sampled) != copies.n:
        raise DomainError(f"mask length {len(sampled)} != vertex count {copies.n}")
    emb = copies.embeddings
    if not len(emb):
        return np.zeros(0, dtype=bool)
    obs = sampled[emb[:, 0]]
    for j in range(1, copies.motif.h):
        obs = obs & sampled[emb[:, j]]
    return obs


def observed_count(copies: CopyList, mask) -> int:
    """Number of copies visible in the induced sampled subgraph."""
    return int(np.count_nonzero(observed_vector(copies, mask)))


@dataclass
class EstimateReport:
    """Point estimate and, when filled in, the variance and interval parts.

    n_hat is computed as t / p**h in double precision; with exact arithmetic
    it would be exactly t * p^-h.
    """

    t: int
    p: float
    h: int
    n_hat: float
    sigma2_hat: Optional[float] = None
    sigma_plus: Optional[float] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    alpha: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "t": self.t, "p": self.p, "h": self.h, "n_hat": self.n_hat,
            "sigma2_hat": self.sigma2_hat, "sigma_plus": self.sigma_plus,
            "ci_lo": self.ci_lo, "ci_hi": self.ci_hi, "alpha": self.alpha,
        }


def ht_estimate(t: int, p: float, h: int) -> EstimateReport:
    """Inverse-probability estimate from an observed count."""
    p = _check_p(p)
    if t < 0:
        raise DomainError("observed count must be nonnegative")
    return EstimateReport(t=int(t), p=p, h=int(h), n_hat=t / p ** h)


def normal_quantile(prob: float) -> float:
    """Standard normal quantile (scipy's ndtri; good far beyond 1e-6)."""
    return float(ndtri(prob))


def confidence_interval(report: EstimateReport, alpha: float) -> tuple[float, float]:
    """Two-sided normal interval around the estimate at level 1 - alpha."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    if report.sigma_plus is None:
        raise DomainError("variance part missing from the estimate report")
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * report.sigma_plus / report.p ** report.h
    return report.n_hat - half, report.n_hat + half


def variance_estimate(copies: CopyList, mask, p: float) -> float:
    """Unbiased estimate of Var[observed count].

    Sums (X1 - p^h)(X2 - p^h) over ordered pairs of copies sharing at least
    one vertex (the pair of a copy with itself included), where X is the
    copy's all-vertices-sampled indicator.  May be negative; the interval
    code clamps through sigma_plus.
    """
    p = _check_p(p)
    obs = observed_vector(copies, mask)
    return _variance_estimate_from_obs(copies, obs, p)


def _observed_pair_overlap(copies: CopyList, obs_ids: np.ndarray) -> int:
    """Ordered pairs of observed copies sharing >= 1 vertex, by
    inclusion-exclusion over shared subsets."""
    h = copies.motif.h
    vs = copies.vertex_sets[obs_ids]
    total = 0
    for k in range(1, h + 1):
        sign = 1 if k % 2 == 1 else -1
        combos = list(itertools.combinations(range(h), k))
        packed = pack_rows(vs[:, combos[0]], copies.n) if len(vs) else None
        if len(vs) == 0:
            continue
        if packed is not None:
            keys = np.concatenate([pack_rows(vs[:, c], copies.n) for c in combos])
            _, counts = np.unique(keys, return_counts=True)
        else:
            rows = np.concatenate([vs[:, c] for c in combos])
            _, counts = np.unique(rows, axis=0, return_counts=True)
        total += sign * int((counts.astype(np.int64) ** 2).sum())
    return total


def _variance_estimate_from_obs(copies: CopyList, obs: np.ndarray, p: float) -> float:
    q = float(p) ** copies.motif.h
    ov = copies.overlap_degrees()
    o_total = int(ov.sum())
    obs_ids = np.nonzero(obs)[0]
    p11 = _observed_pair_overlap(copies, obs_ids)
    s1 = int(ov[obs_ids].sum())
    return p11 - 2.0 * q * s1 + q * q * o_total


def estimate(copies: CopyList, mask, p: float, alpha: float = 0.05) -> EstimateReport:
    """Full estimation pass: count, estimate, variance, and interval."""
    p = _check_p(p)
    h = copies.motif.h
    obs = observed_vector(copies, mask)
    t = int(np.count_nonzero(obs))
    rep = ht_estimate(t, p, h)
    rep.sigma2_hat = _variance_estimate_from_obs(copies, obs, p)
    rep.sigma_plus = float(np.sqrt(max(0.0, rep.sigma2_hat)))
    rep.alpha = float(alpha)
    rep.ci_lo, rep.ci_hi = confidence_interval(rep, alpha)
    return rep


# ---------------------------------------------------------------------------
# truncation diagnostics
# ---------------------------------------------------------------------------


@dataclass
class TruncationReport:
    """Diagnostics for one truncation parameter (a local-count tolerance
    epsilon, or a variance-scaled threshold m)."""

    kind: str                      # "epsilon" or "m_threshold"
    value: float
    n_copies: int
    kept_copies: int
    flagged_sets: list = field(default_factory=list)
    condition_value: Optional[float] = None
    variance_condition: Optional[float] = None
    t_trunc: Optional[int] = None
    t_observed: Optional[int] = None
    expected_t_trunc: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind, "value": self.value,
            "n_copies": self.n_copies, "kept_copies": self.kept_copies,
            "flagged_sets": [list(a) for a, _ in self.flagged_sets]
            if self.flagged_sets and isinstance(self.flagged_sets[0], tuple)
            else self.flagged_sets,
            "condition_value": self.condition_value,
            "variance_condition": self.variance_condition,
            "t_trunc": self.t_trunc, "t_observed": self.t_observed,
            "expected_t_trunc": self.expected_t_trunc,
        }


def local_fraction_thresholds(copies: CopyList, p: float) -> np.ndarray:
    """Per-copy smallest epsilon at which the copy survives the local-count
    truncation: max over nonempty subsets A of t(A) / (p^|A| N)."""
    p = _check_p(p)
    n_copies = len(copies)
    if n_copies == 0:
        return np.zeros(0)
    ml = copies.max_local_by_size().astype(np.float64)
    ks = np.arange(1, copies.motif.h + 1, dtype=np.float64)
    return (ml * np.power(p, -ks)[None, :]).max(axis=1) / n_copies


def variance_scaled_numerators(copies: CopyList, p: float) -> np.ndarray:
    """Per-copy max over nonempty subsets A of t(A)^2 p^(2h-2|A|); the copy
    survives the variance-scaled truncation at m iff this is <= m * Var[T]."""
    p = _check_p(p)
    h = copies.motif.h
    ml = copies.max_local_by_size().astype(np.float64)
    ks = np.arange(1, h + 1, dtype=np.float64)
    return (ml ** 2 * np.power(p, 2 * h - 2 * ks)[None, :]).max(axis=1)


def consistency_diagnostic(copies: CopyList, p: float, epsilon: float,
                           collect_flagged: bool = True,
                           max_flagged: int = 10_000) -> TruncationReport:
    """Evaluate the exact consistency condition at one epsilon.

    condition_value is the fraction of the total copy count contributed by
    vertex subsets whose local count exceeds epsilon * p^|A| * N; the
    estimator is consistent along a graph sequence iff this vanishes for
    every fixed epsilon.  Also reports the simpler second-moment condition
    value sum(t(A)^2 / p^|A|) / N^2.
    """
    p = _check_p(p)
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    n_copies = len(copies)
    if n_copies == 0:
        raise DomainError("motif absent; estimand degenerate")
    prof = copies.profile()
    h = copies.motif.h
    cond_sum = 0.0
    var_sum = 0.0
    flagged = []
    for k in range(1, h + 1):
        counts = prof.counts_of_size(k)
        thr = epsilon * p ** k * n_copies
        over = counts[counts > thr]
        cond_sum += float(over.sum())
        var_sum += float((counts.astype(np.float64) ** 2).sum()) / p ** k
        if collect_flagged and len(over):
            for subset, t in prof.items_of_size(k):
                if t > thr:
                    flagged.append((subset, int(t)))
                    if len(flagged) >= max_flagged:
                        collect_flagged = False
                        break
    kept = int(np.count_nonzero(local_fraction_thresholds(copies, p) <= epsilon))
    return TruncationReport(
        kind="epsilon", value=float(epsilon), n_copies=n_copies,
        kept_copies=kept, flagged_sets=flagged,
        condition_value=cond_sum / n_copies,
        variance_condition=var_sum / n_copies ** 2)


def truncated_statistic_eps(copies: CopyList, mask, p: float, epsilon: float) -> int:
    """Observed count restricted to copies none of whose vertex subsets has a
    local count above epsilon * p^|A| * N; never exceeds the plain count."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    obs = observed_vector(copies, mask)
    if not len(obs):
        return 0
    kept = local_fraction_thresholds(copies, p) <= epsilon
    return int(np.count_nonzero(obs & kept))


def truncated_statistic_m(copies: CopyList, mask, p: float, m: float,
                          var_t: float) -> TruncationReport:
    """Observed count restricted to copies whose subsets all pass the
    variance-scaled threshold test at level m; monotone nondecreasing in m.
    """
    p = _check_p(p)
    if var_t <= 0:
        raise DomainError("var_t must be positive for the variance-scaled truncation")
    if m <= 0:
        raise DomainError("m must be positive")
    obs = observed_vector(copies, mask)
    q = p ** copies.motif.h
    if not len(obs):
        return TruncationReport(kind="m_threshold", value=float(m), n_copies=0,
                                kept_copies=0, t_trunc=0, t_observed=0,
                                expected_t_trunc=0.0)
    kept = variance_scaled_numerators(copies, p) <= m * var_t
    kept_count = int(np.count_nonzero(kept))
    return TruncationReport(
        kind="m_threshold", value=float(m), n_copies=len(copies),
        kept_copies=kept_count,
        t_trunc=int(np.count_nonzero(obs & kept)),
        t_observed=int(np.count_nonzero(obs)),
        expected_t_trunc=q * kept_count)

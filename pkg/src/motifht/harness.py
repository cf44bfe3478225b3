"""Monte Carlo experiment driver.

A fixed graph is drawn once per experiment (the estimand conditions on the
realized network); sampling replications are then embarrassingly parallel,
with per-replication seeds derived from (master_seed, stream, index) so the
output is identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import stats
from .census import DEFAULT_COPY_CAP, CopyList, enumerate_copies
from .errors import DomainError, ValidationError
from .estimator import (P_SMALL_SAMPLE_BOUND, _check_p, normal_quantile,
                        variance_scaled_numerators,
                        _variance_estimate_from_obs, observed_vector)
from .generators import EnsembleSpec
from .graphs import Graph, load_graph
from .moments import exact_variance
from .motifs import Motif, parse_motif

GRAPH_STREAM = 101
REP_STREAM = 202
POINT_STREAM = 303

DEFAULT_EPSILON_GRID = (0.01, 0.05, 0.1, 0.5, 1.0)
DEFAULT_M_GRID = (1.0, 4.0, 16.0, 64.0, 256.0)

KNOWN_STATISTICS = ("ratio", "z", "variance", "truncation", "wasserstein",
                    "tv_poisson", "histogram")


@dataclass
class ExperimentSpec:
    """One experiment: an ensemble (or graph file), a motif, a sampling
    ratio, and the statistics to collect."""

    motif: str
    p: float
    reps: int = 1000
    master_seed: int = 0
    ensemble: Optional[EnsembleSpec] = None
    graph_path: Optional[str] = None
    alpha: float = 0.05
    statistics: tuple = ("ratio", "z")
    epsilon_grid: tuple = DEFAULT_EPSILON_GRID
    m_grid: tuple = DEFAULT_M_GRID
    regenerate_per_rep: bool = False
    threads: int = 1
    copy_cap: int = DEFAULT_COPY_CAP

    def validate(self) -> None:
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if not self.epsilon_grid or not self.m_grid:
            raise ValidationError("statistic grids must be non-empty")
        unknown = set(self.statistics) - set(KNOWN_STATISTICS)
        if unknown:
            raise ValidationError(f"unknown statistics {sorted(unknown)}")
        if self.ensemble is None and self.graph_path is None:
            raise ValidationError("experiment needs an ensemble or a graph file")
        _check_p(self.p)

    def to_json_dict(self) -> dict:
        d = {
            "motif": self.motif, "p": self.p, "reps": self.reps,
            "master_seed": self.master_seed,
            "ensemble": self.ensemble.to_json_dict() if self.ensemble else None,
            "graph_path": self.graph_path, "alpha": self.alpha,
            "statistics": list(self.statistics),
            "epsilon_grid": list(self.epsilon_grid),
            "m_grid": list(self.m_grid),
            "regenerate_per_rep": self.regenerate_per_rep,
            "copy_cap": self.copy_cap,
        }
        return d

    @staticmethod
    def from_json_dict(obj: dict) -> "ExperimentSpec":
        ens = obj.get("ensemble")
        return ExperimentSpec(
            motif=obj["motif"], p=float(obj["p"]), reps=int(obj.get("reps", 1000)),
            master_seed=int(obj.get("master_seed", 0)),
            ensemble=EnsembleSpec.from_json_dict(ens) if ens else None,
            graph_path=obj.get("graph_path"),
            alpha=float(obj.get("alpha", 0.05)),
            statistics=tuple(obj.get("statistics", ("ratio", "z"))),
            epsilon_grid=tuple(obj.get("epsilon_grid", DEFAULT_EPSILON_GRID)),
            m_grid=tuple(obj.get("m_grid", DEFAULT_M_GRID)),
            regenerate_per_rep=bool(obj.get("regenerate_per_rep", False)),
            copy_cap=int(obj.get("copy_cap", DEFAULT_COPY_CAP)))


@dataclass
class ReplicationSummary:
    """Per-replication observables and their aggregates for one experiment."""

    spec: dict
    n: int
    m: int
    n_copies: int
    var_t: float
    z_standardization: str
    warnings: list = field(default_factory=list)
    # per-rep arrays (parallel, indexed by replication)
    t: list = field(default_factory=list)
    ratio: Optional[list] = None
    z: Optional[list] = None
    sigma2_hat: Optional[list] = None
    ci_cover: Optional[list] = None
    t_trunc: Optional[dict] = None          # str(m) -> per-rep counts
    # aggregates
    mean_ratio: Optional[float] = None
    sd_ratio: Optional[float] = None
    mean_z2: Optional[float] = None
    mean_z4: Optional[float] = None
    ks_normal: Optional[float] = None
    ks_fitted_normal: Optional[float] = None
    wasserstein: Optional[float] = None
    tv_poisson: Optional[float] = None
    histogram: Optional[dict] = None
    coverage: Optional[float] = None
    zero_fraction: Optional[float] = None
    truncated: Optional[dict] = None        # str(m) -> {moments, mismatch, bound}

    def to_json_dict(self, include_reps: bool = True) -> dict:
        d = {
            "spec": self.spec, "n": self.n, "m": self.m,
            "n_copies": self.n_copies, "var_t": self.var_t,
            "z_standardization": self.z_standardization,
            "warnings": self.warnings,
            "mean_ratio": self.mean_ratio, "sd_ratio": self.sd_ratio,
            "mean_z2": self.mean_z2, "mean_z4": self.mean_z4,
            "ks_normal": self.ks_normal,
            "ks_fitted_normal": self.ks_fitted_normal,
            "wasserstein": self.wasserstein, "tv_poisson": self.tv_poisson,
            "histogram": self.histogram, "coverage": self.coverage,
            "zero_fraction": self.zero_fraction, "truncated": self.truncated,
        }
        if include_reps:
            d["per_rep"] = {
                "t": self.t, "ratio": self.ratio, "z": self.z,
                "sigma2_hat": self.sigma2_hat, "ci_cover": self.ci_cover,
                "t_trunc": self.t_trunc,
            }
        return d


def _resolve_graph(spec: ExperimentSpec, seed_tuple) -> Graph:
    if spec.graph_path is not None:
        return load_graph(spec.graph_path)
    return spec.ensemble.generate(seed=seed_tuple)


def _rep_seed(master_seed: int, rep: int) -> tuple:
    return (master_seed, REP_STREAM, rep)


def run_experiment(spec: ExperimentSpec) -> ReplicationSummary:
    """Run the replications described by the spec and aggregate."""
    spec.validate()
    graph = _resolve_graph(spec, (spec.master_seed, GRAPH_STREAM))
    motif = parse_motif(spec.motif)
    copies = enumerate_copies(graph, motif, cap=spec.copy_cap)
    return run_on_graph(spec, graph, copies)


def run_on_graph(spec: ExperimentSpec, graph: Graph,
                 copies: Optional[CopyList] = None) -> ReplicationSummary:
    spec.validate()
    motif = parse_motif(spec.motif)
    if copies is None:
        copies = enumerate_copies(graph, motif, cap=spec.copy_cap)
    p = float(spec.p)
    h = motif.h
    q = p ** h
    n_copies = len(copies)
    want = set(spec.statistics)
    warnings = []
    if p > P_SMALL_SAMPLE_BOUND:
        warnings.append(
            f"sampling ratio {p} exceeds the small-sample bound "
            f"{P_SMALL_SAMPLE_BOUND}; normal-approximation guarantees assume "
            f"ratios at or below it")
    if ("ratio" in want or "z" in want) and n_copies == 0:
        raise DomainError("motif absent from the graph; ratio statistics undefined")

    var_t = float(exact_variance(copies, p)) if n_copies else 0.0
    sigma = var_t ** 0.5 if var_t > 0 else None
    if "z" in want and sigma is None:
        raise DomainError("variance is zero; standardized statistics undefined")

    kept_by_m = {}
    expected_trunc = {}
    if "truncation" in want:
        if var_t <= 0:
            raise DomainError("variance is zero; truncation thresholds undefined")
        nums = variance_scaled_numerators(copies, p)
        for m in spec.m_grid:
            kept = nums <= float(m) * var_t
            kept_by_m[float(m)] = kept
            expected_trunc[float(m)] = q * int(np.count_nonzero(kept))
    if "variance" in want:
        copies.overlap_degrees()  # build shared cache before threading
    z_alpha = normal_quantile(1.0 - spec.alpha / 2.0)

    def one_rep(rep: int):
        rng = np.random.default_rng(np.random.SeedSequence(_rep_seed(spec.master_seed, rep)))
        if spec.regenerate_per_rep and spec.graph_path is None:
            g_rep = spec.ensemble.generate(seed=(spec.master_seed, GRAPH_STREAM, rep))
            c_rep = enumerate_copies(g_rep, motif, cap=spec.copy_cap)
        else:
            g_rep, c_rep = graph, copies
        sampled = rng.random(g_rep.n) < p
        obs = observed_vector(c_rep, sampled)
        t_val = int(np.count_nonzero(obs))
        out = {"t": t_val}
        if "variance" in want:
            s2 = _variance_estimate_from_obs(c_rep, obs, p)
            out["sigma2_hat"] = s2
            half = z_alpha * max(0.0, s2) ** 0.5 / q
            n_hat = t_val / q
            out["cover"] = bool(n_hat - half <= len(c_rep) <= n_hat + half)
        if "truncation" in want:
            out["t_trunc"] = {m: int(np.count_nonzero(obs & kept))
                              for m, kept in kept_by_m.items()}
        return out

    if spec.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=spec.threads) as pool:
            rep_results = list(pool.map(one_rep, range(spec.reps)))
    else:
        rep_results = [one_rep(i) for i in range(spec.reps)]

    t_arr = np.array([r["t"] for r in rep_results], dtype=np.float64)
    summary = ReplicationSummary(
        spec=spec.to_json_dict(), n=graph.n, m=graph.m, n_copies=n_copies,
        var_t=var_t, z_standardization="exact_variance", warnings=warnings,
        t=[int(v) for v in t_arr])
    summary.zero_fraction = float(np.mean(t_arr == 0))

    if "ratio" in want:
        ratio = t_arr / (q * n_copies)
        summary.ratio = [float(v) for v in ratio]
        summary.mean_ratio = float(ratio.mean())
        summary.sd_ratio = float(ratio.std(ddof=1)) if spec.reps > 1 else 0.0
        if "histogram" in want:
            summary.histogram = stats.histogram_summary(ratio)
    if "z" in want:
        z = (t_arr - q * n_copies) / sigma
        summary.z = [float(v) for v in z]
        summary.mean_z2 = float(np.mean(z ** 2))
        summary.mean_z4 = float(np.mean(z ** 4))
        summary.ks_normal = stats.ks_to_standard_normal(z)
        summary.ks_fitted_normal = stats.ks_to_fitted_normal(z)
        if "wasserstein" in want:
            summary.wasserstein = stats.empirical_wasserstein(z)
        if "tv_poisson" in want:
            summary.tv_poisson = stats.tv_to_poisson(z, lam=1.0, shift=1)
    if "variance" in want:
        summary.sigma2_hat = [float(r["sigma2_hat"]) for r in rep_results]
        summary.ci_cover = [bool(r["cover"]) for r in rep_results]
        summary.coverage = float(np.mean([r["cover"] for r in rep_results]))
    if "truncation" in want:
        summary.t_trunc = {}
        summary.truncated = {}
        h_pow = 2 ** h - 1
        for m in (float(x) for x in spec.m_grid):
            tm = np.array([r["t_trunc"][m] for r in rep_results], dtype=np.float64)
            summary.t_trunc[str(m)] = [int(v) for v in tm]
            zm = (tm - expected_trunc[m]) / sigma
            summary.truncated[str(m)] = {
                "mean_z2": float(np.mean(zm ** 2)),
                "mean_z4": float(np.mean(zm ** 4)),
                "mismatch_fraction": float(np.mean(tm != t_arr)),
                "mismatch_bound": h_pow / (m * (1.0 - p)),
                "kept_copies": int(np.count_nonzero(kept_by_m[m])),
                "expected_t_trunc": expected_trunc[m],
            }
    return summary


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def threshold_sweep(spec: ExperimentSpec, grid_kind: str, grid) -> dict:
    """Run the experiment at each grid point.

    grid_kind "p" varies the sampling ratio on one fixed graph; "q" redraws
    an Erdos-Renyi graph per point; "diag" redraws a 2-block model per
    diagonal probability.  Each point reports the theory covariates.
    """
    spec.validate()
    grid = [float(x) for x in grid]
    if not grid or sorted(grid) != grid:
        raise ValidationError("grid must be non-empty and sorted")
    motif = parse_motif(spec.motif)
    points = []
    if grid_kind == "p":
        graph = _resolve_graph(spec, (spec.master_seed, GRAPH_STREAM))
        copies = enumerate_copies(graph, motif, cap=spec.copy_cap)
        for i, pval in enumerate(grid):
            pt_spec = ExperimentSpec(**{**_spec_kwargs(spec), "p": pval,
                                        "master_seed": _point_seed(spec, i)})
            points.append(_sweep_point(pt_spec, graph, copies, motif,
                                       {"p": pval}))
    elif grid_kind in ("q", "diag"):
        for i, gval in enumerate(grid):
            ens = _ensemble_at(spec, grid_kind, gval)
            pt_spec = ExperimentSpec(**{**_spec_kwargs(spec), "ensemble": ens,
                                        "master_seed": _point_seed(spec, i)})
            graph = ens.generate(seed=(pt_spec.master_seed, GRAPH_STREAM))
            copies = enumerate_copies(graph, motif, cap=spec.copy_cap)
            points.append(_sweep_point(pt_spec, graph, copies, motif,
                                       {grid_kind: gval}))
    else:
        raise ValidationError(f"unknown grid kind {grid_kind!r}")
    return {"grid_kind": grid_kind, "grid": grid, "points": points}


def _spec_kwargs(spec: ExperimentSpec) -> dict:
    return dict(motif=spec.motif, p=spec.p, reps=spec.reps,
                master_seed=spec.master_seed, ensemble=spec.ensemble,
                graph_path=spec.graph_path, alpha=spec.alpha,
                statistics=spec.statistics, epsilon_grid=spec.epsilon_grid,
                m_grid=spec.m_grid, regenerate_per_rep=spec.regenerate_per_rep,
                threads=spec.threads, copy_cap=spec.copy_cap)


def _point_seed(spec: ExperimentSpec, index: int) -> int:
    return int(np.random.SeedSequence((spec.master_seed, POINT_STREAM, index))
               .generate_state(1)[0])


def _ensemble_at(spec: ExperimentSpec, grid_kind: str, value: float) -> EnsembleSpec:
    if spec.ensemble is None:
        raise ValidationError("graph-parameter sweeps need an ensemble spec")
    ens = EnsembleSpec(kind=spec.ensemble.kind,
                       params=dict(spec.ensemble.params), seed=spec.ensemble.seed)
    if grid_kind == "q":
        if ens.kind != "erdos_renyi":
            raise ValidationError("q-grid sweeps require the erdos_renyi ensemble")
        ens.params["q"] = value
    else:
        if ens.kind != "sbm":
            raise ValidationError("diag-grid sweeps require the sbm ensemble")
        probs = [row[:] for row in ens.params["probs"]]
        for i in range(len(probs)):
            probs[i][i] = value
        ens.params["probs"] = probs
    return ens


def _sweep_point(spec: ExperimentSpec, graph: Graph, copies, motif: Motif,
                 at: dict) -> dict:
    n_copies = len(copies)
    point = {"at": at, "n_copies": n_copies,
             "expected_observed": spec.p ** motif.h * n_copies}
    if spec.ensemble is not None and spec.ensemble.kind == "erdos_renyi":
        qv = float(spec.ensemble.params["q"])
        point["er_covariate"] = graph.n * spec.p * qv ** float(motif.density_max)
    if n_copies == 0:
        point["degenerate"] = True
        point["summary"] = None
        return point
    point["degenerate"] = False
    summary = run_on_graph(spec, graph, copies)
    point["summary"] = summary.to_json_dict(include_reps=False)
    point["sd_ratio"] = summary.sd_ratio
    point["mean_ratio"] = summary.mean_ratio
    point["mean_z4"] = summary.mean_z4
    point["ks_normal"] = summary.ks_normal
    point["zero_fraction"] = summary.zero_fraction
    return point


def truncated_moment_report(spec: ExperimentSpec, m_grid=None) -> dict:
    """Per-threshold truncated second/fourth moments and the observed
    mismatch fraction against its analytic bound."""
    m_grid = tuple(m_grid) if m_grid is not None else spec.m_grid
    run_spec = ExperimentSpec(**{**_spec_kwargs(spec),
                                 "m_grid": m_grid,
                                 "statistics": tuple(set(spec.statistics) |
                                                     {"z", "truncation"})})
    summary = run_experiment(run_spec)
    return {
        "variance_source": "exact",
        "var_t": summary.var_t,
        "per_m": summary.truncated,
        "spec": run_spec.to_json_dict(),
    }


# ---------------------------------------------------------------------------
# canned reproduction recipes
# ---------------------------------------------------------------------------


def _recipe_specs() -> dict:
    return {
        "ex51": dict(
            note="inconsistent regime: a single hub carries every copy; the "
                 "ratio settles on the two-point law at 0 and 2",
            spec=ExperimentSpec(
                motif="edge", p=0.5, reps=5000, master_seed=51,
                ensemble=EnsembleSpec("star", {"n": 5000}),
                statistics=("ratio", "z", "histogram"))),
        "ex52": dict(
            note="consistent but non-normal: standardized count approaches "
                 "Poisson(1) minus one",
            spec=ExperimentSpec(
                motif="edge", p=1.0 / 50.0, reps=5000, master_seed=52,
                ensemble=EnsembleSpec("stars_plus_cliques",
                                      {"r": 50, "a": 5000, "b": 100}),
                statistics=("ratio", "z", "tv_poisson"))),
        "ex53": dict(
            note="large sampling ratio tuned so the fourth moment matches the "
                 "normal value while the law stays non-normal",
            spec=ExperimentSpec(
                motif="edge", p=0.39, reps=5000, master_seed=53,
                ensemble=EnsembleSpec("star_plus_matching",
                                      {"a": 2000, "b": 100_000}),
                statistics=("ratio", "z", "histogram"))),
        "ex54": dict(
            note="normal limit despite a diverging fourth moment; truncation "
                 "restores the moment diagnostics",
            spec=ExperimentSpec(
                motif="edge", p=0.005, reps=5000, master_seed=54,
                ensemble=EnsembleSpec("star_plus_matching",
                                      {"a": 2000, "b": 100_000}),
                statistics=("ratio", "z", "truncation"))),
        "fig2": dict(
            note="dense random graph, edge motif: ratio histogram centered "
                 "at one with a normal profile",
            spec=ExperimentSpec(
                motif="edge", p=0.05, reps=2000, master_seed=2,
                ensemble=EnsembleSpec("erdos_renyi", {"n": 2000, "q": 0.5}),
                statistics=("ratio", "z", "histogram"))),
    }


def reproduce(name: str, reps: Optional[int] = None, threads: int = 1,
              master_seed: Optional[int] = None) -> dict:
    """Run a canned experiment by name (ex51, ex52, ex53, ex54, fig1, fig2)."""
    name = name.lower()
    if name == "fig1":
        base = ExperimentSpec(
            motif="triangle", p=0.03, reps=300,
            master_seed=1 if master_seed is None else master_seed,
            ensemble=EnsembleSpec("sbm", {
                "sizes": [1000, 1000],
                "probs": [[0.0, 0.5], [0.5, 0.0]]}),
            statistics=("ratio", "z"), threads=threads)
        if reps is not None:
            base.reps = reps
        grid = [0.0, 0.002, 0.004, 0.006, 0.008, 0.01]
        sweep = threshold_sweep(base, "diag", grid)
        return {"name": "fig1",
                "note": "two-block model, triangle motif: the ratio error bars "
                        "shrink as the diagonal probability grows",
                "recipe": base.to_json_dict(), "sweep": sweep}
    recipes = _recipe_specs()
    if name not in recipes:
        raise ValidationError(
            f"unknown recipe {name!r}; choose from "
            f"{sorted(recipes) + ['fig1']}")
    entry = recipes[name]
    spec: ExperimentSpec = entry["spec"]
    if reps is not None:
        spec.reps = reps
    if master_seed is not None:
        spec.master_seed = master_seed
    spec.threads = threads
    summary = run_experiment(spec)
    return {"name": name, "note": entry["note"],
            "recipe": spec.to_json_dict(),
            "summary": summary.to_json_dict(include_reps=False)}

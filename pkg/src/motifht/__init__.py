"""Motif-count estimation from vertex-sampled graphs.

The observable is the induced subgraph on an i.i.d. Bernoulli(p) vertex
sample; the estimand is the number of copies of a small connected pattern in
the full graph.  The package provides exact counting, the inverse-probability
estimator with a variance estimate and normal confidence intervals,
truncation-based consistency/normality diagnostics, exact small-instance
moment oracles, graph ensembles, and a reproducible Monte Carlo harness.
"""

from .census import (CopyList, DEFAULT_COPY_CAP, enumerate_copies, local_count,
                     local_count_profile, motif_count)
from .errors import (DomainError, MotifHTError, ParseError, ResourceCapError,
                     ValidationError)
from .estimator import (EstimateReport, SampleMask, TruncationReport,
                        confidence_interval, consistency_diagnostic, estimate,
                        ht_estimate, observed_count, sample_vertices,
                        truncated_statistic_eps, truncated_statistic_m,
                        variance_estimate)
from .generators import (EnsembleSpec, erdos_renyi, graphon_sample,
                         random_regular, sbm, star, star_plus_matching,
                         stars_plus_cliques)
from .graphs import Graph, from_labeled_edges, load_edge_list, load_graph
from .harness import (ExperimentSpec, ReplicationSummary, reproduce,
                      run_experiment, threshold_sweep, truncated_moment_report)
from .moments import (MomentReport, abs_moment, exact_variance,
                      expected_quadruple_weight, fourth_moment, moment_report,
                      signed_moment, variance_bracket, wasserstein_ratio)
from .motifs import Motif, automorphism_count, balancedness, parse_motif
from .stats import empirical_wasserstein, ks_to_standard_normal, tv_to_poisson

__version__ = "0.1.0"

"""Multiresolution nonparametric Bayes tests for differential event rates.

Two groups of sparse counts over ordered positions are modelled with a
spike-and-slab Dirichlet-process mixture of Poissons (Gamma base measure).
A collapsed Gibbs sampler estimates per-position posterior probabilities
of a rate difference, and a balanced binary tree over the coordinate span
is searched coarse-to-fine, pruning intervals whose global null survives.
"""

from .model import (
    CountTrack,
    Hyperparams,
    MixtureState,
    PosteriorSummary,
    cluster_predictive_logprob,
    log_marginal_likelihood,
)
from .sampler import SamplerConfig, gibbs_sweep, initial_state, run_chain
from .decision import global_null_probability, local_rejections, prune_decision
from .multires import IntervalNode, MultiresResult, full_scan, run_multiscale
from .ebayes import estimate_gamma_hyperparams

__version__ = "0.1.0"

__all__ = [
    "CountTrack",
    "Hyperparams",
    "MixtureState",
    "PosteriorSummary",
    "SamplerConfig",
    "IntervalNode",
    "MultiresResult",
    "cluster_predictive_logprob",
    "log_marginal_likelihood",
    "gibbs_sweep",
    "initial_state",
    "run_chain",
    "global_null_probability",
    "local_rejections",
    "prune_decision",
    "full_scan",
    "run_multiscale",
    "estimate_gamma_hyperparams",
]

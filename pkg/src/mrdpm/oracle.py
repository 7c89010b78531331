"""Exact posterior by enumeration, and a numeric check of KL joint convexity.

Used as ground truth for the sampler on instances with at most eight
observation slots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, rel_entr

from .errors import DomainError, SizeError
from .model import CountTrack, Hyperparams, MixtureState, log_marginal_likelihood

MAX_SLOTS = 8


def set_partitions(n: int):
    """Yield every partition of ``n`` items as a restricted growth string."""
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i, n_blocks):
        if i == n:
            yield tuple(labels)
            return
        for b in range(n_blocks + 1):
            labels[i] = b
            yield from rec(i + 1, max(n_blocks, b + 1))

    yield from rec(1, 1)


def log_crp_prior(labels, dp_precision: float) -> float:
    """Log CRP probability of a partition given as a label sequence."""
    sizes = np.bincount(np.asarray(labels))
    n = len(labels)
    m = dp_precision
    return float(
        len(sizes) * math.log(m)
        + np.sum(gammaln(sizes))
        - (gammaln(m + n) - gammaln(m))
    )


def canonical_key(gammas, assignments) -> tuple:
    """Hashable configuration key with labels renumbered by first appearance."""
    relabel = {}
    flat = []
    for k in np.asarray(assignments).ravel():
        flat.append(relabel.setdefault(int(k), len(relabel)))
    return tuple(int(g) for g in gammas), tuple(flat)


@dataclass
class Enumeration:
    keys: list
    gammas: np.ndarray
    distinct: np.ndarray  # 1 where the pair's labels differ
    log_prior: np.ndarray
    log_post: np.ndarray  # normalised

    @property
    def prior_mass(self) -> float:
        return float(np.exp(logsumexp(self.log_prior)))


def enumerate_posterior(track: CountTrack, hp: Hyperparams) -> Enumeration:
    """Every reachable (gamma, partition) with its prior and posterior weight."""
    n = len(track)
    if 2 * n > MAX_SLOTS:
        raise SizeError(f"{2 * n} observation slots exceed the enumeration limit of {MAX_SLOTS}")
    keys, gam_rows, diff_rows, log_prior, log_joint = [], [], [], [], []
    log_pi, log_1mpi = math.log(hp.spike_prob), math.log1p(-hp.spike_prob)
    for gammas in itertools.product((0, 1), repeat=n):
        # each differential position is two draws from the DP, a shared one is one
        owners = []
        for i, g in enumerate(gammas):
            owners.extend([(i, 0), (i, 1)] if g else [(i, None)])
        lp_gamma = sum(log_pi if g else log_1mpi for g in gammas)
        for part in set_partitions(len(owners)):
            s = np.empty((n, 2), dtype=np.int64)
            for (i, j), label in zip(owners, part):
                if j is None:
                    s[i, :] = label
                else:
                    s[i, j] = label
            state = MixtureState.from_assignments(track, s, gammas)
            lp = lp_gamma + log_crp_prior(part, hp.dp_precision)
            keys.append(canonical_key(gammas, s))
            gam_rows.append(gammas)
            diff_rows.append(s[:, 0] != s[:, 1])
            log_prior.append(lp)
            log_joint.append(lp + log_marginal_likelihood(state, track, hp))
    log_joint = np.array(log_joint)
    return Enumeration(
        keys=keys,
        gammas=np.array(gam_rows, dtype=np.int8).reshape(len(keys), n),
        distinct=np.array(diff_rows, dtype=np.int8).reshape(len(keys), n),
        log_prior=np.array(log_prior),
        log_post=log_joint - logsumexp(log_joint),
    )


def exact_omegas(track: CountTrack, hp: Hyperparams) -> np.ndarray:
    """Exact ``P(lambda_i1 != lambda_i2 | y)``: mass of configurations with split labels."""
    enum = enumerate_posterior(track, hp)
    return np.exp(enum.log_post) @ enum.distinct


def exact_gamma_probs(track: CountTrack, hp: Hyperparams) -> np.ndarray:
    """Exact ``P(gamma_i = 1 | y)``."""
    enum = enumerate_posterior(track, hp)
    return np.exp(enum.log_post) @ enum.gammas


def _check_pmf(p, name):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DomainError(f"{name} is not a valid PMF")
    if abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def kl_divergence(f, g) -> float:
    return float(np.sum(rel_entr(f, g)))


def kl_convexity_gap(pmf_pairs, weights) -> float:
    """``sum_p w_p D(f_p || g_p) - D(sum w_p f_p || sum w_p g_p)``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) != len(pmf_pairs) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise DomainError("weights must be a probability vector matching the pairs")
    fs = np.array([_check_pmf(f, "f") for f, _ in pmf_pairs])
    gs = np.array([_check_pmf(g, "g") for _, g in pmf_pairs])
    if fs.shape != gs.shape:
        raise DomainError("each pair must share a support")
    rhs = float(sum(wp * kl_divergence(f, g) for wp, f, g in zip(w, fs, gs)))
    lhs = kl_divergence(w @ fs, w @ gs)
    if np.isinf(rhs):
        return math.inf
    return rhs - lhs


def kl_convexity_check(pmf_pairs, weights, tol: float = 1e-12) -> bool:
    """True when the mixed divergence does not exceed the mixed divergences."""
    return kl_convexity_gap(pmf_pairs, weights) >= -tol

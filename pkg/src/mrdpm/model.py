"""Domain types and the Poisson-Gamma conjugate likelihood.

Counts at position ``i`` in group ``j`` are modelled as
``Y_ij ~ Poisson(N_ij * lambda_ij)`` where ``N_ij`` is a known exposure.
Integrating the rates out against a ``Gamma(alpha, beta)`` base measure
gives a product of negative-binomial terms, one per cluster of rates.
Everything here is computed in log space from log-Gamma primitives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidInputError, InvalidStateError


@dataclass(frozen=True)
class CountTrack:
    """Paired per-position counts for two groups.

    Attributes:
        positions: strictly increasing integer coordinates.
        counts1, counts2: non-negative event counts for group 1 and 2.
        exposures1, exposures2: positive rate multipliers (default 1.0).
    """

    positions: np.ndarray
    counts1: np.ndarray
    counts2: np.ndarray
    exposures1: np.ndarray = None
    exposures2: np.ndarray = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        c1 = np.asarray(self.counts1)
        c2 = np.asarray(self.counts2)
        n = pos.shape[0] if pos.ndim == 1 else -1
        if n < 1:
            raise InvalidInputError("a track needs at least one position")
        e1 = np.ones(n) if self.exposures1 is None else np.asarray(self.exposures1, dtype=float)
        e2 = np.ones(n) if self.exposures2 is None else np.asarray(self.exposures2, dtype=float)
        for name, arr in (("counts1", c1), ("counts2", c2), ("exposures1", e1), ("exposures2", e2)):
            if arr.shape != (n,):
                raise InvalidInputError(f"{name} has shape {arr.shape}, expected ({n},)")
        if np.any(np.diff(pos) <= 0):
            raise InvalidInputError("positions must be strictly increasing")
        for name, arr in (("counts1", c1), ("counts2", c2)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr != np.round(arr)):
                raise InvalidInputError(f"{name} must hold non-negative integers")
        for name, arr in (("exposures1", e1), ("exposures2", e2)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise InvalidInputError(f"{name} must be strictly positive")

        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "counts1", c1.astype(np.int64))
        object.__setattr__(self, "counts2", c2.astype(np.int64))
        object.__setattr__(self, "exposures1", e1)
        object.__setattr__(self, "exposures2", e2)

    def __len__(self):
        return self.positions.shape[0]

    def subset(self, index) -> "CountTrack":
        """Return the track restricted to ``index`` (an integer index array)."""
        index = np.asarray(index, dtype=np.int64)
        return CountTrack(
            self.positions[index],
            self.counts1[index],
            self.counts2[index],
            self.exposures1[index],
            self.exposures2[index],
        )

    @property
    def total_counts(self) -> int:
        return int(self.counts1.sum() + self.counts2.sum())


@dataclass(frozen=True)
class Hyperparams:
    """Prior hyperparameters and the decision threshold.

    ``spike_prob`` is the prior probability that a position is differential
    (``gamma_i = 1``); ``threshold`` is the posterior cut-off ``xi``.
    """

    alpha: float = 1.0
    beta: float = 1.0
    dp_precision: float = 1.0
    spike_prob: float = 0.5
    threshold: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "beta", "dp_precision"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value!r}")
        for name in ("spike_prob", "threshold"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InvalidInputError(f"{name} must lie in (0, 1), got {value!r}")

    def with_gamma(self, alpha: float, beta: float) -> "Hyperparams":
        return Hyperparams(alpha, beta, self.dp_precision, self.spike_prob, self.threshold)


@dataclass
class MixtureState:
    """Cluster configuration of the collapsed sampler.

    ``assignments[i, j]`` is the cluster label (``0..J-1``) of the rate of
    group ``j`` at position ``i``. A position with ``gammas[i] == 0`` is a
    single draw from the Dirichlet process shared by both groups; it adds
    both counts and both exposures to one cluster and counts once in
    ``cluster_sizes``. A differential position is two separate draws.
    """

    assignments: np.ndarray
    gammas: np.ndarray
    cluster_sums: np.ndarray
    cluster_exposures: np.ndarray
    cluster_sizes: np.ndarray = field(default=None)

    @property
    def num_clusters(self) -> int:
        return int(self.cluster_sums.shape[0])

    @classmethod
    def from_assignments(cls, track: CountTrack, assignments, gammas) -> "MixtureState":
        """Build a state and its sufficient statistics from labels alone."""
        s = np.asarray(assignments, dtype=np.int64).reshape(len(track), 2)
        g = np.asarray(gammas, dtype=np.int8).reshape(len(track))
        if np.any((g == 0) & (s[:, 0] != s[:, 1])):
            raise InvalidStateError("gamma_i = 0 requires equal labels for the pair")
        labels = np.unique(s)
        if labels.size == 0 or labels[0] != 0 or labels[-1] != labels.size - 1:
            raise InvalidStateError("cluster labels must be contiguous from 0")
        n_clusters = labels.size
        sums = np.zeros(n_clusters)
        exposures = np.zeros(n_clusters)
        sizes = np.zeros(n_clusters, dtype=np.int64)
        for i in range(len(track)):
            if g[i] == 0:
                k = s[i, 0]
                sums[k] += track.counts1[i] + track.counts2[i]
                exposures[k] += track.exposures1[i] + track.exposures2[i]
                sizes[k] += 1
            else:
                for j, (y, e) in enumerate(
                    ((track.counts1[i], track.exposures1[i]), (track.counts2[i], track.exposures2[i]))
                ):
                    sums[s[i, j]] += y
                    exposures[s[i, j]] += e
                    sizes[s[i, j]] += 1
        return cls(s, g, sums, exposures, sizes)

    def check(self, track: CountTrack) -> None:
        """Raise :class:`InvalidStateError` unless every invariant holds."""
        if self.assignments.shape != (len(track), 2) or self.gammas.shape != (len(track),):
            raise InvalidStateError(
                f"state covers {self.assignments.shape[0]} positions, track has {len(track)}"
            )
        ref = MixtureState.from_assignments(track, self.assignments, self.gammas)
        if ref.num_clusters != self.num_clusters:
            raise InvalidStateError("num_clusters disagrees with the labels in use")
        if not np.allclose(ref.cluster_sums, self.cluster_sums, rtol=0, atol=1e-9):
            raise InvalidStateError("cluster_sums disagree with assignments")
        if not np.allclose(ref.cluster_exposures, self.cluster_exposures, rtol=1e-12, atol=1e-9):
            raise InvalidStateError("cluster_exposures disagree with assignments")
        if self.cluster_sizes is not None and not np.array_equal(ref.cluster_sizes, self.cluster_sizes):
            raise InvalidStateError("cluster_sizes disagree with assignments")


@dataclass(frozen=True)
class PosteriorSummary:
    """Monte Carlo output of one chain.

    ``omegas`` estimates ``P(lambda_i1 != lambda_i2 | y)``; ``gamma_probs``
    estimates ``P(gamma_i = 1 | y)``, the posterior of the slab indicator.
    """

    omegas: np.ndarray
    global_null_prob: float
    n_sweeps: int
    n_burnin: int
    mean_num_clusters: float
    gamma_probs: np.ndarray | None = None


def _log_nb_terms(alpha, beta, total, exposure):
    return gammaln(alpha + total) - (alpha + total) * np.log(beta + exposure)


def log_marginal_likelihood(state: MixtureState, track: CountTrack, hp: Hyperparams) -> float:
    """Log probability of all counts given the cluster configuration.

    Sums ``-log y!`` and ``y log N`` over every observation and, for each
    cluster ``j`` with total count ``S_j`` and total exposure ``E_j``,
    ``alpha log beta - log Gamma(alpha) + log Gamma(alpha + S_j)
    - (alpha + S_j) log(beta + E_j)``.
    """
    s = np.asarray(state.assignments)
    g = np.asarray(state.gammas)
    if s.shape != (len(track), 2) or g.shape != (len(track),):
        raise InvalidStateError(
            f"state has assignments {s.shape} and gammas {g.shape} for a track of {len(track)}"
        )
    ref = MixtureState.from_assignments(track, s, g)
    y = np.concatenate([track.counts1, track.counts2]).astype(float)
    e = np.concatenate([track.exposures1, track.exposures2])
    obs = float(np.sum(y * np.log(e) - gammaln(y + 1.0)))
    a, b = hp.alpha, hp.beta
    n_clusters = ref.num_clusters
    prior = n_clusters * (a * np.log(b) - gammaln(a))
    return obs + float(prior) + float(np.sum(_log_nb_terms(a, b, ref.cluster_sums, ref.cluster_exposures)))


def cluster_predictive_logprob(
    y, exposure, cluster_sum, cluster_exposure, hp: Hyperparams
) -> float:
    """Log negative-binomial predictive of one count joining a cluster.

    Use ``cluster_sum = cluster_exposure = 0`` for a fresh cluster.
    """
    if y < 0 or cluster_sum < 0 or cluster_exposure < 0:
        raise DomainError("counts and cluster statistics must be non-negative")
    if not exposure > 0:
        raise DomainError(f"exposure must be positive, got {exposure!r}")
    a = hp.alpha + cluster_sum
    b = hp.beta + cluster_exposure
    return float(
        gammaln(a + y)
        - gammaln(a)
        - gammaln(y + 1.0)
        - a * np.log1p(exposure / b)
        + y * (np.log(exposure) - np.log(b + exposure))
    )

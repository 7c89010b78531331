"""Collapsed Gibbs sampler over cluster labels and differential indicators."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .decision import global_null_probability
from .errors import InvalidInputError, InvalidStateError
from .model import CountTrack, Hyperparams, MixtureState, PosteriorSummary

logger = logging.getLogger(__name__)

PI_FIXED = "fixed"
PI_BETA = "beta-conjugate"

# cap on the per-block uniform buffer (number of float64s)
_BLOCK_FLOATS = 1 << 21


@dataclass(frozen=True)
class SamplerConfig:
    n_sweeps: int = 10_000
    n_burnin: int = 2_000
    seed: int = 0
    pi_update: str = PI_FIXED
    debug: bool = False

    def __post_init__(self):
        if self.n_sweeps < 1:
            raise InvalidInputError("n_sweeps must be positive")
        if not 0 <= self.n_burnin < self.n_sweeps:
            raise InvalidInputError("n_burnin must satisfy 0 <= n_burnin < n_sweeps")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if self.pi_update not in (PI_FIXED, PI_BETA):
            raise InvalidInputError(f"pi_update must be {PI_FIXED!r} or {PI_BETA!r}")


class _Chain:
    """Mutable kernel-side arrays for one chain."""

    def __init__(self, track: CountTrack, state: MixtureState):
        n = len(track)
        cap = 2 * n
        self.y1 = track.counts1.astype(np.float64)
        self.y2 = track.counts2.astype(np.float64)
        self.e1 = np.ascontiguousarray(track.exposures1, dtype=np.float64)
        self.e2 = np.ascontiguousarray(track.exposures2, dtype=np.float64)
        self.gam = np.array(state.gammas, dtype=np.int8)
        self.s = np.array(state.assignments, dtype=np.int64).reshape(n, 2)
        j = state.num_clusters
        self.csum = np.zeros(cap)
        self.cexp = np.zeros(cap)
        self.csize = np.zeros(cap, dtype=np.int64)
        self.csum[:j] = state.cluster_sums
        self.cexp[:j] = state.cluster_exposures
        self.csize[:j] = state.cluster_sizes
        self.active = np.zeros(cap, dtype=np.int64)
        self.where = np.full(cap, -1, dtype=np.int64)
        self.free = np.zeros(cap, dtype=np.int64)
        self.meta = np.zeros(2, dtype=np.int64)
        self.active[:j] = np.arange(j)
        self.where[:j] = np.arange(j)
        self.free[: cap - j] = np.arange(cap - 1, j - 1, -1)
        self.meta[:] = (j, cap - j)

    def sweep(self, hp, pi, uniforms, accumulate, gamma_acc, diff_acc, cluster_acc):
        _kernel.run_sweeps(
            self.y1, self.y2, self.e1, self.e2, self.gam, self.s,
            self.csum, self.cexp, self.csize, self.active, self.where, self.free, self.meta,
            float(hp.alpha), float(hp.beta), float(hp.dp_precision), float(pi),
            uniforms, gamma_acc, diff_acc, accumulate, cluster_acc,
        )

    def state(self) -> MixtureState:
        j = int(self.meta[0])
        return MixtureState(
            self.s.copy(),
            self.gam.copy(),
            self.csum[:j].copy(),
            self.cexp[:j].copy(),
            self.csize[:j].copy(),
        )


def initial_state(track: CountTrack) -> MixtureState:
    """Deterministic start: every position differential, equal observations pooled.

    Observations with the same (count, exposure) share a starting cluster,
    which keeps the first sweep linear in the number of positions on long
    sparse tracks.
    """
    keys = {}
    labels = np.empty((len(track), 2), dtype=np.int64)
    obs = ((track.counts1, track.exposures1), (track.counts2, track.exposures2))
    for i in range(len(track)):
        for j, (y, e) in enumerate(obs):
            key = (int(y[i]), float(e[i]))
            labels[i, j] = keys.setdefault(key, len(keys))
    return MixtureState.from_assignments(track, labels, np.ones(len(track), dtype=np.int8))


def gibbs_sweep(state: MixtureState, track: CountTrack, hp: Hyperparams, rng) -> MixtureState:
    """One systematic scan over all positions; returns the new state.

    ``rng`` is a :class:`numpy.random.Generator`; the input state is not
    modified.
    """
    state.check(track)
    chain = _Chain(track, state)
    uniforms = rng.random((1, len(track), 3))
    scratch = np.zeros(len(track), dtype=np.int64)
    chain.sweep(
        hp, hp.spike_prob, uniforms, np.zeros(1, dtype=np.bool_),
        scratch, scratch.copy(), np.zeros(1, dtype=np.int64),
    )
    return chain.state()


def iterate_states(track: CountTrack, hp: Hyperparams, state: MixtureState, n_sweeps: int, rng):
    """Yield the state after each of ``n_sweeps`` sweeps started from ``state``."""
    state.check(track)
    chain = _Chain(track, state)
    n = len(track)
    scratch = np.zeros(n, dtype=np.int64)
    no_acc = np.zeros(1, dtype=np.bool_)
    for _ in range(n_sweeps):
        chain.sweep(hp, hp.spike_prob, rng.random((1, n, 3)), no_acc, scratch, scratch, scratch[:1])
        yield chain.state()


def run_chain(track: CountTrack, hp: Hyperparams, cfg: SamplerConfig) -> PosteriorSummary:
    """Run one chain and estimate the posterior probability of a difference.

    The estimate for position ``i`` is the fraction of post-burn-in sweeps
    in which the two groups' rates sit in different clusters, i.e.
    ``P(lambda_i1 != lambda_i2 | y)``. The fraction with ``gamma_i = 1`` is
    reported alongside as ``gamma_probs``; it is never below ``omegas``
    because a fresh draw for group 2 may land on group 1's atom. Identical
    inputs give bit-identical output.
    """
    if track is None or len(track) == 0:
        raise InvalidInputError("cannot run a chain on an empty track")
    n = len(track)
    rng = np.random.default_rng(int(cfg.seed))
    chain = _Chain(track, initial_state(track))
    gamma_acc = np.zeros(n, dtype=np.int64)
    diff_acc = np.zeros(n, dtype=np.int64)
    cluster_acc = np.zeros(1, dtype=np.int64)
    pi = hp.spike_prob

    per_sweep = cfg.debug or cfg.pi_update == PI_BETA
    block = 1 if per_sweep else max(1, min(256, _BLOCK_FLOATS // (3 * n)))
    done = 0
    while done < cfg.n_sweeps:
        b = min(block, cfg.n_sweeps - done)
        uniforms = rng.random((b, n, 3))
        accumulate = np.arange(done, done + b) >= cfg.n_burnin
        chain.sweep(hp, pi, uniforms, accumulate, gamma_acc, diff_acc, cluster_acc)
        done += b
        if cfg.debug:
            try:
                chain.state().check(track)
            except InvalidStateError:
                logger.error("state invariant broken after sweep %d", done)
                raise
        if cfg.pi_update == PI_BETA:
            k = int(chain.gam.sum())
            pi = float(np.clip(rng.beta(1.0 + k, 1.0 + n - k), 1e-12, 1.0 - 1e-12))

    kept = cfg.n_sweeps - cfg.n_burnin
    omegas = diff_acc / kept
    return PosteriorSummary(
        omegas=omegas,
        gamma_probs=gamma_acc / kept,
        global_null_prob=global_null_probability(omegas),
        n_sweeps=cfg.n_sweeps,
        n_burnin=cfg.n_burnin,
        mean_num_clusters=float(cluster_acc[0]) / kept,
    )

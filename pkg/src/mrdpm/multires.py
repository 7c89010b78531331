"""Coarse-to-fine search over a balanced binary tree with global-null pruning.

The coordinate span of the track is halved at each level. Every non-empty
node runs its own chain; a node whose global null survives is pruned
together with its subtree, otherwise its children are visited at the next
level. Leaves apply the per-position rule.

An internal node holding more than ``node_bins`` positions is tested on
``node_bins`` equal-width sub-intervals of its span (counts and exposures
summed per sub-interval), so the cost of a node does not grow with its
size. Leaves always test individual positions.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .decision import (
    EXPAND,
    local_rejections,
    log_global_null_probability,
    log_prune_threshold,
    prune_decision,
)
from .ebayes import estimate_gamma_hyperparams
from .errors import InvalidInputError
from .model import CountTrack, Hyperparams, PosteriorSummary
from .sampler import SamplerConfig, run_chain

logger = logging.getLogger(__name__)

THREADS_ENV = "MRDPM_THREADS"
MIN_NODE_SIZE = 2
NODE_BINS = 64
# nodes smaller than this fall back to the whole-track Gamma fit
MIN_EBAYES_SIZE = 10


class NodeStatus(str, Enum):
    PENDING = "pending"
    PRUNED = "pruned"
    EXPANDED = "expanded"
    LEAF = "leaf"
    EMPTY = "empty"


@dataclass
class IntervalNode:
    level: int
    index: int  # 1-based within its level
    span: tuple  # half-open coordinate interval [lo, hi)
    members: np.ndarray  # indices into the full track
    status: NodeStatus = NodeStatus.PENDING
    summary: PosteriorSummary | None = None
    hyperparams: Hyperparams | None = None
    n_tested: int | None = None  # units in the node's chain: positions or sub-intervals
    log_null: float | None = None
    log_threshold: float | None = None
    children: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return int(self.members.size)

    def split(self, positions: np.ndarray) -> list:
        lo, hi = self.span
        mid = 0.5 * (lo + hi)
        pos = positions[self.members]
        left = self.members[pos < mid]
        right = self.members[pos >= mid]
        return [
            IntervalNode(self.level + 1, 2 * self.index - 1, (lo, mid), left),
            IntervalNode(self.level + 1, 2 * self.index, (mid, hi), right),
        ]

    def record(self) -> dict:
        """One decision-log entry."""
        null = None if self.log_null is None else float(np.exp(self.log_null))
        return {
            "level": self.level,
            "index": self.index,
            "span": [float(self.span[0]), float(self.span[1])],
            "m": self.m,
            "n_tested": self.n_tested,
            "global_null_prob": null,
            "log_global_null_prob": _finite_or_none(self.log_null),
            "log_threshold": _finite_or_none(self.log_threshold),
            "decision": self.status.value,
        }


def _finite_or_none(x):
    if x is None:
        return None
    return float(x) if np.isfinite(x) else ("-inf" if x < 0 else "inf")


@dataclass
class MultiresResult:
    tree: list
    flagged: list  # (position, omega) pairs from surviving leaves
    leaf_omegas: list  # (position, omega) for every position in a surviving leaf
    stats: dict

    @property
    def flagged_positions(self) -> set:
        return {p for p, _ in self.flagged}

    def decision_log_lines(self) -> list:
        return [json.dumps(node.record(), sort_keys=True) for node in self.tree]

    def node(self, level: int, index: int) -> IntervalNode | None:
        for nd in self.tree:
            if nd.level == level and nd.index == index:
                return nd
        return None


def node_seed(master_seed: int, level: int, index: int) -> int:
    """Stream seed for a node, derived from the master seed and its tree address."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(level, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def bin_track(track: CountTrack, span, n_bins: int) -> CountTrack:
    """Aggregate a track onto ``n_bins`` equal-width sub-intervals of ``span``.

    Empty sub-intervals are dropped; positions become sub-interval indices.
    """
    lo, hi = span
    idx = np.floor((track.positions - lo) / (hi - lo) * n_bins).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    used = np.unique(idx)
    def agg(values):
        return np.bincount(idx, weights=values, minlength=n_bins)[used]
    return CountTrack(
        used,
        np.rint(agg(track.counts1.astype(float))).astype(np.int64),
        np.rint(agg(track.counts2.astype(float))).astype(np.int64),
        agg(track.exposures1),
        agg(track.exposures2),
    )


def _thread_count(n_threads):
    if n_threads is None:
        n_threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(n_threads))


def run_multiscale(
    track: CountTrack,
    hp: Hyperparams,
    cfg: SamplerConfig,
    max_depth: int,
    xi: float | None = None,
    *,
    min_node_size: int = MIN_NODE_SIZE,
    node_bins: int | None = NODE_BINS,
    estimate_hyperparams: bool = True,
    n_threads: int | None = None,
) -> MultiresResult:
    """Visit the tree level by level down to ``max_depth`` and prune.

    ``node_bins=None`` runs every internal node on its raw positions.

    Nodes at one level run concurrently on ``n_threads`` threads (default
    from ``MRDPM_THREADS``); each has its own seed, so output does not
    depend on scheduling.
    """
    if max_depth < 0:
        raise InvalidInputError("max_depth must be non-negative")
    if track is None or len(track) == 0:
        raise InvalidInputError("cannot search an empty track")
    xi = hp.threshold if xi is None else xi
    if not 0.0 < xi < 1.0:
        raise InvalidInputError(f"xi must lie in (0, 1), got {xi!r}")
    if node_bins is not None and node_bins < 1:
        raise InvalidInputError("node_bins must be positive")

    global_hp = hp
    if estimate_hyperparams:
        global_hp = hp.with_gamma(*estimate_gamma_hyperparams(track))

    positions = track.positions
    root = IntervalNode(
        0, 1, (float(positions[0]), float(positions[-1]) + 1.0), np.arange(len(track))
    )
    tree = []
    flagged = []
    leaf_omegas = []
    per_level = {}
    sampler_calls = 0
    frontier = [root]
    threads = _thread_count(n_threads)

    def is_leaf(node):
        return node.level >= max_depth or node.m <= min_node_size

    def process(node: IntervalNode) -> IntervalNode:
        sub = track.subset(node.members)
        if node_bins is not None and not is_leaf(node) and node.m > node_bins:
            sub = bin_track(sub, node.span, node_bins)
        node.n_tested = len(sub)
        node_hp = global_hp
        if estimate_hyperparams and node.m >= MIN_EBAYES_SIZE:
            node_hp = hp.with_gamma(*estimate_gamma_hyperparams(sub))
        node_cfg = replace(cfg, seed=node_seed(cfg.seed, node.level, node.index))
        node.hyperparams = node_hp
        node.summary = run_chain(sub, node_hp, node_cfg)
        node.log_null = log_global_null_probability(node.summary)
        node.log_threshold = log_prune_threshold(node.n_tested, xi)
        return node

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while frontier:
            level = frontier[0].level
            counts = per_level.setdefault(
                level, {s.value: 0 for s in NodeStatus if s is not NodeStatus.PENDING}
            )
            busy = [nd for nd in frontier if nd.m > 0]
            for nd in frontier:
                if nd.m == 0:
                    nd.status = NodeStatus.EMPTY
            if pool is not None and len(busy) > 1:
                list(pool.map(process, busy))
            else:
                for nd in busy:
                    process(nd)
            sampler_calls += len(busy)

            next_frontier = []
            for nd in frontier:
                if nd.status is NodeStatus.EMPTY:
                    pass
                elif is_leaf(nd):
                    nd.status = NodeStatus.LEAF
                    omegas = nd.summary.omegas
                    for i in sorted(local_rejections(nd.summary, xi)):
                        flagged.append((int(positions[nd.members[i]]), float(omegas[i])))
                    leaf_omegas.extend(
                        (int(positions[idx]), float(w)) for idx, w in zip(nd.members, omegas)
                    )
                elif prune_decision(nd.summary, xi) == EXPAND:
                    nd.status = NodeStatus.EXPANDED
                    nd.children = nd.split(positions)
                    next_frontier.extend(nd.children)
                else:
                    nd.status = NodeStatus.PRUNED
                counts[nd.status.value] += 1
                tree.append(nd)
                logger.debug(
                    "level %d node %d span %s m=%d -> %s", nd.level, nd.index, nd.span, nd.m, nd.status.value
                )
            frontier = next_frontier
    finally:
        if pool is not None:
            pool.shutdown()

    flagged.sort()
    leaf_omegas.sort()
    stats = {"per_level": per_level, "sampler_calls": sampler_calls, "visited": len(tree)}
    return MultiresResult(tree=tree, flagged=flagged, leaf_omegas=leaf_omegas, stats=stats)


def full_scan(
    track: CountTrack,
    hp: Hyperparams,
    cfg: SamplerConfig,
    xi: float | None = None,
    *,
    estimate_hyperparams: bool = True,
) -> list:
    """Single chain over the whole track followed by the per-position rule.

    Returns sorted ``(position, omega)`` pairs for the rejected positions.
    """
    res = run_multiscale(
        track, hp, cfg, 0, xi, min_node_size=0, estimate_hyperparams=estimate_hyperparams
    )
    return res.flagged

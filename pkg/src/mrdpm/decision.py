"""Local and interval-level decisions from posterior difference probabilities."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

PRUNE = "prune"
EXPAND = "expand"


def _omegas(summary_or_omegas) -> np.ndarray:
    omegas = getattr(summary_or_omegas, "omegas", summary_or_omegas)
    return np.asarray(omegas, dtype=float)


def _check_xi(xi):
    if not 0.0 < xi < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {xi!r}")


def local_rejections(summary, xi: float) -> set:
    """Indices (0-based) of positions whose probability strictly exceeds ``xi``."""
    _check_xi(xi)
    return {int(i) for i in np.flatnonzero(_omegas(summary) > xi)}


def log_global_null_probability(summary) -> float:
    """``sum(log(1 - omega_i))``; ``-inf`` when any ``omega_i == 1``."""
    omegas = _omegas(summary)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log1p(-omegas)))


def global_null_probability(summary) -> float:
    """Probability that no position is differential, assuming independence."""
    omegas = _omegas(summary)
    if omegas.size == 0:
        raise DomainError("need at least one position")
    return float(math.exp(log_global_null_probability(omegas)))


def log_prune_threshold(m: int, xi: float) -> float:
    return float(m * np.log1p(-xi))


def prune_decision(summary, xi: float) -> str:
    """Expand iff ``prod(1 - omega_i) < (1 - xi) ** m``; compared in log space."""
    _check_xi(xi)
    omegas = _omegas(summary)
    if omegas.size == 0:
        raise DomainError("need at least one position")
    if log_global_null_probability(omegas) < log_prune_threshold(omegas.size, xi):
        return EXPAND
    return PRUNE

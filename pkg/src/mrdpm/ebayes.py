"""Moment-matched Gamma base measure for the rate mixture."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .model import CountTrack

CLAMP_LO = 1e-3
CLAMP_HI = 1e3
VAR_FLOOR = 1e-8


def estimate_gamma_hyperparams(track: CountTrack, offset: float = 0.5) -> tuple:
    """Return ``(alpha, beta)`` matching the mean and variance of crude rates.

    Each of the ``2n`` observations gives a rate ``(y + offset) / exposure``.
    With mean ``mu`` and sample variance ``v`` (floored), ``alpha = mu**2 / v``
    and ``beta = mu / v``. If either exceeds the upper clamp both are scaled
    down together, so the prior mean ``alpha / beta`` survives clamping.
    """
    if track is None or len(track) == 0:
        raise InvalidInputError("cannot estimate hyperparameters from an empty track")
    y = np.concatenate([track.counts1, track.counts2]).astype(float)
    e = np.concatenate([track.exposures1, track.exposures2])
    rates = (y + offset) / e
    mu = float(rates.mean())
    var = float(rates.var(ddof=1)) if rates.size > 1 else 0.0
    var = max(var, VAR_FLOOR)
    if mu <= 0.0:
        return CLAMP_LO, CLAMP_HI
    alpha = mu * mu / var
    beta = mu / var
    top = max(alpha, beta)
    if top > CLAMP_HI:
        alpha *= CLAMP_HI / top
        beta *= CLAMP_HI / top
    return float(np.clip(alpha, CLAMP_LO, CLAMP_HI)), float(np.clip(beta, CLAMP_LO, CLAMP_HI))

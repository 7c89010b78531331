"""Inhomogeneous Poisson processes by thinning, and grid binning of events."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import CountTrack

DEFAULT_DOMAIN = (0.0, 70.0)


@dataclass(frozen=True)
class IntensitySpec:
    """Sum of Gaussian bumps ``a * exp(-((x - c) / w) ** 2)`` on ``[lo, hi]``.

    ``components`` holds ``(amplitude, center, width)`` triples.
    """

    components: tuple
    domain: tuple = DEFAULT_DOMAIN

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        for a, _, w in comps:
            if a < 0 or w <= 0:
                raise InvalidInputError("amplitudes must be >= 0 and widths > 0")
        lo, hi = (float(v) for v in self.domain)
        if not lo < hi:
            raise InvalidInputError("domain must satisfy lo < hi")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "domain", (lo, hi))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, c, w in self.components:
            out += a * np.exp(-(((x - c) / w) ** 2))
        return out

    @property
    def upper_bound(self) -> float:
        return float(sum(a for a, _, _ in self.components))


TWO_PEAK_LAMBDA1 = IntensitySpec(((2.0, 50.0, 10.0), (20.0, 10.0, 10.0)))
TWO_PEAK_LAMBDA2 = IntensitySpec(((20.0, 50.0, 10.0), (2.0, 10.0, 10.0)))


def sample_poisson_process(spec: IntensitySpec, n_replicates: int, rng) -> list:
    """Draw ``n_replicates`` independent realisations by thinning.

    Candidates come from a homogeneous process at the summed amplitude and
    are kept with probability ``lambda(x) / lambda_max``. Each realisation is
    a sorted array of event coordinates.
    """
    lo, hi = spec.domain
    lam_max = spec.upper_bound
    out = []
    for _ in range(n_replicates):
        if lam_max == 0.0:
            out.append(np.empty(0))
            continue
        n = rng.poisson(lam_max * (hi - lo))
        x = rng.uniform(lo, hi, size=n)
        keep = rng.random(n) * lam_max < spec(x)
        out.append(np.sort(x[keep]))
    return out


def grid_edges(k: int, domain=DEFAULT_DOMAIN) -> np.ndarray:
    """Edges of the ``k + 1`` equal bins cut by ``k`` interior grid points."""
    if k < 1:
        raise InvalidInputError("grid needs at least one point")
    lo, hi = domain
    return np.linspace(lo, hi, k + 2)


def bin_centers(k: int, domain=DEFAULT_DOMAIN) -> np.ndarray:
    edges = grid_edges(k, domain)
    return 0.5 * (edges[:-1] + edges[1:])


def bin_counts(events, k: int, domain=DEFAULT_DOMAIN) -> np.ndarray:
    """Total events per bin over all replicates.

    Bins are half-open ``[left, right)`` except the last, which is closed.
    """
    edges = grid_edges(k, domain)
    lo, hi = edges[0], edges[-1]
    counts = np.zeros(k + 1, dtype=np.int64)
    for rep in events:
        rep = np.asarray(rep, dtype=float)
        if rep.size and (rep.min() < lo or rep.max() > hi):
            raise InvalidInputError(f"events fall outside the domain [{lo}, {hi}]")
        counts += np.histogram(rep, bins=edges)[0]
    return counts


def make_paired_track(spec1, spec2, k: int, m: int, rngs) -> CountTrack:
    """Bin ``m`` replicates of each process on a ``k``-point grid.

    ``rngs`` is a pair of generators, one per group. Positions are bin
    indices ``0..k``; use :func:`bin_centers` for coordinates.
    """
    if spec1.domain != spec2.domain:
        raise InvalidInputError("both intensities must share a domain")
    rng1, rng2 = rngs
    c1 = bin_counts(sample_poisson_process(spec1, m, rng1), k, spec1.domain)
    c2 = bin_counts(sample_poisson_process(spec2, m, rng2), k, spec2.domain)
    return CountTrack(np.arange(k + 1), c1, c2)


def make_section4_tracks(k: int, m: int, rng) -> CountTrack:
    """The two-peak experiment: peaks at 10 and 50 with heights swapped."""
    rng1, rng2 = rng.spawn(2)
    return make_paired_track(TWO_PEAK_LAMBDA1, TWO_PEAK_LAMBDA2, k, m, (rng1, rng2))


def make_hotspot_track(
    n_positions: int,
    hotspot_start: int,
    hotspot_width: int,
    rng,
    background: float = 0.05,
    hot_rate: float = 2.0,
) -> CountTrack:
    """Dense unit-exposure track with one region where group 1 is elevated."""
    if not 0 <= hotspot_start and hotspot_start + hotspot_width <= n_positions:
        raise InvalidInputError("hotspot must lie inside the track")
    lam1 = np.full(n_positions, background)
    lam1[hotspot_start : hotspot_start + hotspot_width] = hot_rate
    lam2 = np.full(n_positions, background)
    return CountTrack(np.arange(n_positions), rng.poisson(lam1), rng.poisson(lam2))

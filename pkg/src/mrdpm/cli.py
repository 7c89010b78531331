"""Command-line interface: ``mrdpm test | simulate | oracle-check``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .errors import MrdpmError
from .model import CountTrack, Hyperparams
from .multires import NODE_BINS, THREADS_ENV, run_multiscale
from .sampler import PI_BETA, PI_FIXED, SamplerConfig, run_chain
from .simulate import make_section4_tracks

logger = logging.getLogger("mrdpm")


def _unit_interval(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return value


def _non_negative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrdpm",
        description="Multiresolution Dirichlet-process tests for differential event rates.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run the multiresolution test on a track file")
    t.add_argument("--input", required=True, help="track file (position,count1,count2[,exposure1,exposure2])")
    t.add_argument("--depth", type=_non_negative, default=10, help="maximum tree depth L (default 10)")
    t.add_argument("--xi", type=_unit_interval, default=0.5, help="decision threshold (default 0.5)")
    t.add_argument("--sweeps", type=_positive, default=10_000)
    t.add_argument("--burnin", type=_non_negative, default=2_000)
    t.add_argument("--seed", type=_seed, default=0)
    t.add_argument("--pi", type=_unit_interval, default=0.5, help="prior probability of a difference")
    t.add_argument("--pi-update", choices=(PI_FIXED, PI_BETA), default=PI_FIXED)
    t.add_argument("--dp-precision", type=float, default=1.0)
    t.add_argument("--node-bins", type=_non_negative, default=NODE_BINS,
                   help="sub-intervals per internal node; 0 tests raw positions")
    t.add_argument("--threads", type=_positive, default=None,
                   help=f"worker threads per tree level (default ${THREADS_ENV} or 1)")
    t.add_argument("--full-scan", action="store_true", help="single chain over the whole track")
    t.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("simulate", help="write a two-peak simulated track")
    s.add_argument("--k", type=_positive, default=35, help="number of grid points (track has k+1 bins)")
    s.add_argument("--replicates", type=_positive, default=100)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", required=True, help="output track file")

    o = sub.add_parser("oracle-check", help="compare the sampler with exact enumeration")
    o.add_argument("--instances", type=_positive, default=20)
    o.add_argument("--sweeps", type=_positive, default=50_000)
    o.add_argument("--burnin", type=_non_negative, default=5_000)
    o.add_argument("--seed", type=_seed, default=0)
    o.add_argument("--tol", type=float, default=0.03)
    return parser


def _cmd_test(args) -> int:
    if args.burnin >= args.sweeps:
        raise MrdpmError("--burnin must be smaller than --sweeps")
    track = io.read_track(args.input)
    hp = Hyperparams(dp_precision=args.dp_precision, spike_prob=args.pi, threshold=args.xi)
    cfg = SamplerConfig(args.sweeps, args.burnin, args.seed, args.pi_update)
    if args.full_scan:
        result = run_multiscale(track, hp, cfg, 0, args.xi, min_node_size=0)
    else:
        result = run_multiscale(
            track, hp, cfg, args.depth, args.xi,
            node_bins=args.node_bins or None, n_threads=args.threads,
        )
    paths = io.write_results(result, track, args.out)
    logger.info("flagged %d positions; wrote %s", len(result.flagged), ", ".join(sorted(paths)))
    return 0


def _cmd_simulate(args) -> int:
    track = make_section4_tracks(args.k, args.replicates, np.random.default_rng(args.seed))
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    io.write_track(track, args.out)
    return 0


def random_oracle_instance(rng):
    """A small random instance: up to 3 positions, counts up to 3, unit exposure."""
    k = int(rng.integers(1, 4))
    track = CountTrack(np.arange(k), rng.integers(0, 4, k), rng.integers(0, 4, k))
    hp = Hyperparams(
        alpha=float(rng.uniform(0.5, 3.0)),
        beta=float(rng.uniform(0.3, 2.0)),
        dp_precision=float(rng.uniform(0.3, 3.0)),
        spike_prob=float(rng.uniform(0.2, 0.8)),
    )
    return track, hp


def _cmd_oracle_check(args) -> int:
    from .oracle import exact_omegas

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for n in range(args.instances):
        track, hp = random_oracle_instance(rng)
        exact = exact_omegas(track, hp)
        est = run_chain(track, hp, SamplerConfig(args.sweeps, args.burnin, seed=args.seed + n)).omegas
        err = float(np.max(np.abs(exact - est)))
        worst = max(worst, err)
        print(f"instance {n}: K={len(track)} max|error|={err:.4f}")
    ok = worst <= args.tol
    print(f"{'PASS' if ok else 'FAIL'}: worst error {worst:.4f} (tolerance {args.tol})")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"test": _cmd_test, "simulate": _cmd_simulate, "oracle-check": _cmd_oracle_check}
    try:
        return handlers[args.command](args)
    except (MrdpmError, OSError) as exc:
        print(f"mrdpm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

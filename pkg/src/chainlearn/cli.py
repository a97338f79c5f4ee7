"""Command-line entry point.

Subcommands:
  run             execute a named experiment from a JSON config
  verify-chain    revalidate a persisted chain file block by block
  invert          run the gradient-inversion batching study, emit PGMs + CSV
  collusion-prob  Monte Carlo the zero-noise collusion attack over a grid
  krum-bench      cross-check the update filter against brute force and time it
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chainlearn",
        description="Ledger-coordinated peer-to-peer training experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named experiment")
    p_run.add_argument("--config", type=Path, default=None, help="JSON experiment config")
    p_run.add_argument("--experiment", default=None, help="override the experiment name")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed")
    p_run.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    p_verify = sub.add_parser("verify-chain", help="revalidate a chain file")
    p_verify.add_argument("chain", type=Path)
    p_verify.add_argument("--backend", default="exponent", choices=["exponent", "pairing"])
    p_verify.add_argument("--dump", action="store_true", help="print one line per block")

    p_invert = sub.add_parser("invert", help="gradient inversion batching study")
    p_invert.add_argument("--seed", type=int, default=0)
    p_invert.add_argument("--out", type=Path, default=Path("out"))

    p_coll = sub.add_parser("collusion-prob", help="zero-noise collusion Monte Carlo")
    p_coll.add_argument("--trials", type=int, default=10_000)
    p_coll.add_argument("--seed", type=int, default=0)
    p_coll.add_argument("--noisers", type=int, nargs="+", default=[3, 5, 10])
    p_coll.add_argument(
        "--stake-fractions", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
    )
    p_coll.add_argument("--out", type=Path, default=None, help="optional CSV path")

    p_bench = sub.add_parser("krum-bench", help="filter oracle check and timing")
    p_bench.add_argument("--cases", type=int, default=1000)
    p_bench.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify-chain":
        return _cmd_verify_chain(args)
    if args.command == "invert":
        return _cmd_invert(args)
    if args.command == "collusion-prob":
        return _cmd_collusion(args)
    if args.command == "krum-bench":
        return _cmd_krum_bench(args)
    raise ValueError(f"unknown command {args.command}")


def _cmd_run(args) -> int:
    from .config import ExperimentSpec, load_spec
    from .experiments import run_named_experiment

    spec = load_spec(args.config) if args.config else ExperimentSpec()
    if args.experiment:
        spec = dataclasses.replace(spec, name=args.experiment)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    started = time.time()
    summary = run_named_experiment(spec, args.out)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    print(f"wrote {args.out}/ in {time.time() - started:.1f}s")
    return 0


def _cmd_verify_chain(args) -> int:
    from .groups import get_backend
    from .ledger import block_hash, load_chain

    backend = get_backend(args.backend)
    ledger = load_chain(args.chain, backend)
    if args.dump:
        print(f"genesis {ledger.genesis.hash().hex()[:16]} peers={len(ledger.genesis.peer_pubkeys)}")
        for block in ledger.blocks:
            print(
                f"iteration {block.iteration:4d}  {block_hash(block, backend).hex()[:16]}  "
                f"updates={len(block.commitments)}"
            )
    print(
        f"{args.chain}: OK, {ledger.height} blocks, tip iteration "
        f"{ledger.tip_iteration()}, tip {ledger.tip_hash().hex()[:16]}"
    )
    return 0


def _cmd_invert(args) -> int:
    from .attacks import write_pgm
    from .experiments import inversion_batching_experiment

    args.out.mkdir(parents=True, exist_ok=True)
    results, images = inversion_batching_experiment(seed=args.seed)
    for count, image in images.items():
        write_pgm(args.out / f"inverted_batch{count:02d}.pgm", image)
    with open(args.out / "similarity.csv", "w", encoding="utf-8") as fh:
        fh.write("batch_count,nearest_cosine\n")
        for count, sim in results:
            fh.write(f"{count},{sim:.6f}\n")
    for count, sim in results:
        print(f"batch {count:3d}: nearest-image cosine {sim:.3f}")
    return 0


def _cmd_collusion(args) -> int:
    from .attacks import collusion_violation_probability

    rows = []
    for noisers in args.noisers:
        for frac in args.stake_fractions:
            p = collusion_violation_probability(frac, noisers, args.trials, args.seed)
            rows.append((noisers, frac, p))
            print(f"noisers={noisers:3d} malicious_stake={frac:.2f}: violation probability {p:.6f}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("noisers,malicious_stake_fraction,violation_probability\n")
            for noisers, frac, p in rows:
                fh.write(f"{noisers},{frac},{p:.6f}\n")
    return 0


def _cmd_krum_bench(args) -> int:
    import random

    from .krum import KrumConfig, krum_scores, max_tolerable_f, multi_krum_select

    rng = random.Random(args.seed)
    mismatches = 0
    for _ in range(args.cases):
        R = rng.randint(4, 8)
        f = rng.randint(0, max_tolerable_f(R))
        X = [[rng.uniform(-5, 5) for _ in range(rng.randint(1, 4))] for _ in range(R)]
        dim = min(len(row) for row in X)
        X = np.array([row[:dim] for row in X])
        cfg = KrumConfig(R, f)
        got = multi_krum_select(X, cfg)
        want = _brute_force(X.tolist(), R, f)
        if got != want:
            mismatches += 1
    print(f"oracle agreement: {args.cases - mismatches}/{args.cases}")

    big = np.random.default_rng(args.seed).normal(size=(70, 100))
    cfg = KrumConfig(70, max_tolerable_f(70))
    started = time.time()
    for _ in range(20):
        krum_scores(big, cfg)
    per_call = (time.time() - started) / 20
    print(f"scoring 70x100 floats: {per_call * 1e3:.2f} ms per call")
    return 0 if mismatches == 0 else 1


def _brute_force(updates, R, f):
    scores = []
    for i in range(R):
        dists = sorted(
            sum((a - b) ** 2 for a, b in zip(updates[i], updates[j]))
            for j in range(R)
            if j != i
        )
        scores.append(sum(dists[: R - f - 2]))
    order = sorted(range(R), key=lambda i: (scores[i], i))
    return sorted(order[: R - f])


if __name__ == "__main__":
    sys.exit(main())

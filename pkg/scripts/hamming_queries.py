#!/usr/bin/env python3
"""
Compare simulated mean query counts of GND and GCD on the Hamming [7,4] code over a BSC
with their closed forms p0 + 35 p1 and p0 + 17 p1.

Usage:
    python scripts/hamming_queries.py --p 0.01 --p 0.05 --frames 100000
"""

import os
import sys

# Add parent directory to path to import gcdkit modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Load environment variables from .env file
from dotenv import load_dotenv

load_dotenv()

import argparse

import numpy as np
from tabulate import tabulate

from gcdkit.core.config import settings
from gcdkit.models.channel import ChannelSpec
from gcdkit.services.analysis import hamming_query_curves
from gcdkit.services.channel import receive_llrs
from gcdkit.services.codes import hamming_code
from gcdkit.services.decoders import gcd_decode, gnd_decode
from gcdkit.utils.logger import setup_logging


def simulate(p: float, frames: int, seed: int):
    """Mean and standard error of the query counts of both decoders"""
    code = hamming_code(3)
    ch = ChannelSpec.bsc(p)
    gnd_q = np.empty(frames)
    gcd_q = np.empty(frames)
    for f in range(frames):
        rng = np.random.default_rng((seed, f))
        sent = code.encode(rng.integers(0, 2, size=code.k, dtype=np.uint8))
        r = receive_llrs(sent, ch, rng)
        gnd_q[f] = gnd_decode(r, code, 1).queries
        gcd_q[f] = gcd_decode(r, code, 1).queries
    sem = lambda x: x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else 0.0  # noqa: E731
    return gnd_q.mean(), sem(gnd_q), gcd_q.mean(), sem(gcd_q)


def main():
    parser = argparse.ArgumentParser(description="Hamming [7,4] query counts: GND vs GCD")
    parser.add_argument("--p", type=float, action="append", help="BSC crossover probability")
    parser.add_argument("--frames", type=int, default=100_000, help="Frames per probability")
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Master seed")
    args = parser.parse_args()

    setup_logging()
    crossovers = args.p or [0.01, 0.02, 0.05, 0.1]

    rows = []
    failed = False
    for p in crossovers:
        if not 0 < p < 0.5:
            print(f"[ERROR] crossover probability must lie in (0, 1/2), got {p}")
            sys.exit(1)
        gnd_cf, gcd_cf = hamming_query_curves(p)
        gnd_mean, gnd_sem, gcd_mean, gcd_sem = simulate(p, args.frames, args.seed)
        ok = all(
            abs(mean - cf) <= 3 * sem + 1e-12
            for mean, sem, cf in ((gnd_mean, gnd_sem, gnd_cf), (gcd_mean, gcd_sem, gcd_cf))
        )
        failed |= not ok
        rows.append(
            [
                p,
                f"{gnd_cf:.4f}",
                f"{gnd_mean:.4f} ± {gnd_sem:.4f}",
                f"{gcd_cf:.4f}",
                f"{gcd_mean:.4f} ± {gcd_sem:.4f}",
                "yes" if ok else "NO",
            ]
        )

    headers = [
        "p",
        "GND closed form",
        "GND simulated",
        "GCD closed form",
        "GCD simulated",
        "within 3σ",
    ]
    print(tabulate(rows, headers=headers, tablefmt="grid"))
    if failed:
        print("[ERROR] simulated means outside 3 standard errors of the closed forms")
        sys.exit(1)
    print("[OK] simulated means match the closed forms")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the pure-Python kernel against the compiled one.

Runs the hot paths (word multiplication, ball enumeration, window scans) with
both implementations in-process, then times one end-to-end certificate in
subprocesses so each run picks its kernel at import.

Usage: python benchmarks/bench_kernels.py [--skip-e2e]
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import tempfile
import time

from wreathcert import _purekernel, groups

try:
    from wreathcert import _speedups
except ImportError:
    _speedups = None


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_mul(impl, pairs):
    mul = impl.free_mul
    for a, b in pairs:
        mul(a, b)


def bench_ball(impl):
    impl.free_ball(4, 10)


def bench_scan(impl, table, factors, trues):
    impl.free_window_scan(4, 10, factors, trues, table.mul_flat, table.order, table.identity)


def e2e_certify(pure: bool) -> float:
    env = dict(os.environ)
    if pure:
        env["WREATHCERT_PURE"] = "1"
    else:
        env.pop("WREATHCERT_PURE", None)
    with tempfile.TemporaryDirectory() as tmp:
        state = os.path.join(tmp, "s.json")
        cert = os.path.join(tmp, "c.json")
        base = [sys.executable, "-m", "wreathcert.cli", "--state", state]
        subprocess.run(
            base + ["init", "--ambient", "free:2", "--table", "s3"],
            check=True, capture_output=True, env=env,
        )
        t0 = time.perf_counter()
        subprocess.run(
            base + ["certify", "--radius", "2", "--out", cert],
            check=True, capture_output=True, env=env,
        )
        subprocess.run(
            base + ["verify", "--cert", cert],
            check=True, capture_output=True, env=env,
        )
        return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--skip-e2e", action="store_true")
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernel not built; showing pure timings only")
    impls = [("pure", _purekernel)] + ([("compiled", _speedups)] if _speedups else [])

    rng = random.Random(0)
    ball6 = _purekernel.free_ball(4, 6)
    pairs = [(rng.choice(ball6), rng.choice(ball6)) for _ in range(200_000)]
    table = groups.preset_table("s3")
    # balanced contributions: the product is the identity everywhere, so the
    # scan has to sweep the whole ball (the worst case)
    factors = [
        (b"", 1, table.gen_b),
        (b"", 1, table.gen_b),
        (b"\x00", 1, table.gen_b),
        (b"\x00", 1, table.gen_b),
        (b"\x01\x02", 0, table.gen_a),
        (b"\x01\x02", 0, table.inv[table.gen_a]),
    ]
    trues = frozenset([b"\x00\x00\x01\x02\x03\x02\x00\x00", b"\x02\x03\x02\x01\x00\x00\x01\x01"])

    rows = []
    cases = [
        ("free_mul x200k (len<=6)", lambda impl: bench_mul(impl, pairs)),
        ("free_ball radius 10", bench_ball),
        ("window scan R=10, 6 factors", lambda impl: bench_scan(impl, table, factors, trues)),
    ]
    for name, fn in cases:
        times = {label: timed(lambda impl=impl: fn(impl)) for label, impl in impls}
        rows.append((name, times))

    if not args.skip_e2e:
        times = {"pure": e2e_certify(True)}
        if _speedups is not None:
            times["compiled"] = e2e_certify(False)
        rows.append(("certify+verify r=2 (subprocess)", times))

    width = max(len(r[0]) for r in rows) + 2
    header = f"{'case':<{width}}{'pure':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, times in rows:
        pure_t = times["pure"]
        comp_t = times.get("compiled")
        if comp_t is not None:
            print(f"{name:<{width}}{pure_t:>11.3f}s{comp_t:>11.3f}s{pure_t / comp_t:>9.1f}x")
        else:
            print(f"{name:<{width}}{pure_t:>11.3f}s{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()

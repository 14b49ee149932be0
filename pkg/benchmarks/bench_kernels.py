"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Both backends get identical inputs; outputs are compared before timing so a
fast but wrong kernel cannot win.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from shiftprimes import kernels
from shiftprimes.characters import all_characters, build_basis, character_table
from shiftprimes.charsums import unit_roots
from shiftprimes.ntcore import log_integral
from shiftprimes.sieve import base_primes, prime_array, prime_power_arrays


def sieve_case(scale):
    lo = 10**9
    hi = lo + int(2**22 * scale)
    return "sieve_segment", (lo, hi, base_primes(math.isqrt(hi)))


def scan_case(scale):
    q, x = 101, int(10**6 * scale)
    n, lam = prime_power_arrays(x)
    b = build_basis(q)
    table_t = np.ascontiguousarray(character_table(b, all_characters(q)).T, dtype=np.int32)
    c, s = unit_roots(b.exponent)
    return "prefix_char_scan", (np.ascontiguousarray(n % q), np.ascontiguousarray(lam), table_t, c, s)


def pair_case(scale):
    q = int(211 * max(scale, 0.1))
    b = build_basis(q)
    table = np.ascontiguousarray(character_table(b, all_characters(q))[:, b.units])
    return "pair_histograms", (table, 0, b.exponent)


def bv_case(scale):
    x, q = int(10**6 * scale), 30
    primes = prime_array(x)
    li_at = log_integral(primes.astype(float))
    before = primes.astype(float) - 1
    li_before = np.full(len(primes), np.nan)
    li_before[before >= 2] = log_integral(before[before >= 2])
    units = build_basis(q).unit_mask
    idx = np.full(q, -1, dtype=np.int64)
    idx[units] = np.arange(int(units.sum()))
    return "bv_scan", (np.ascontiguousarray(primes % q), idx, int(units.sum()), li_at, li_before,
                       float(log_integral(x)), int(units.sum()))


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(u, v) for u, v in zip(a, b))
    return bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-9, atol=1e-6, equal_nan=True))


def best_time(fn, args, repeat):
    out = None
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="input size multiplier")
    args = ap.parse_args(argv)

    backends = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(sorted(backends))}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in sorted(backends)) + f"{'speedup':>10}")
    for make in (sieve_case, scan_case, pair_case, bv_case):
        name, inputs = make(args.scale)
        times, outs = {}, {}
        for bname in sorted(backends):
            times[bname], outs[bname] = best_time(getattr(backends[bname], name), inputs, args.repeat)
        if len(outs) == 2 and not same(outs["cython"], outs["python"]):
            raise SystemExit(f"{name}: backends disagree")
        speed = f"{times['python'] / times['cython']:.1f}x" if "cython" in times else "-"
        print(f"{name:<18}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in sorted(times)) + f"{speed:>10}")


if __name__ == "__main__":
    main()

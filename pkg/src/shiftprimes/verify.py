"""Property suites run by ``shiftprimes verify``.

Each check returns a :class:`CheckResult`; the first counterexample found is
kept verbatim so a failure can be reproduced by hand.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .characters import all_characters, build_basis, character_table
from .charsums import scan_characters, unit_roots
from .cyclotomic import histogram_value
from .ntcore import Modulus, is_prime, moebius
from .pi2 import (
    Pi2Instance,
    brun_titchmarsh_check,
    char_decomposition,
    least_goldbach,
    pi2_bruteforce,
    pi2_exact,
    t1_chi0_check,
    verify_goldbach,
)
from .sieve import SieveRange, base_primes, prime_array, residue_counts

SUITES = ("identities", "oracles", "inequalities", "all")


@dataclass
class CheckResult:
    name: str
    passed: bool
    counterexample: str | None = None
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}{extra} [{self.seconds:.2f}s]"


def orthogonality_counterexample(q: int, mode: str = "exact") -> str | None:
    """Check ``sum_chi chi(m) conj(chi(l)) = phi(q) [m = l]`` for every unit pair.

    Exact mode decides equality in Z[zeta_E]; fast mode compares complex sums
    at tolerance ``1e-9 * phi(q)``.
    """
    m = Modulus.of(q)
    basis = build_basis(m)
    chars = all_characters(m)
    units = basis.units
    table = np.ascontiguousarray(character_table(basis, chars)[:, units])
    E, phi = basis.exponent, m.phi
    nunits = len(units)
    cos_t, sin_t = unit_roots(E)
    known: dict[bytes, int | None] = {}
    for li in range(nunits):
        hist = kernels.pair_histograms(table, li, E)
        expect = np.zeros(nunits, dtype=np.int64)
        expect[li] = phi
        if mode == "exact":
            # identical histograms have identical values: reduce each distinct one once
            keys = np.ascontiguousarray(hist).view(np.dtype((np.void, hist.dtype.itemsize * E))).ravel()
            uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
            values = np.empty(len(uniq), dtype=object)
            for j, (key, i0) in enumerate(zip(uniq, first)):
                kb = key.tobytes()
                if kb not in known:
                    known[kb] = histogram_value(hist[i0])
                values[j] = known[kb]
            got = values[np.ravel(inverse)]
            bad = np.flatnonzero(got != expect)
            if bad.size:
                mi = int(bad[0])
                return f"q={q} m={units[mi]} l={units[li]}: sum={got[mi]}, expected {expect[mi]}"
        else:
            hf = hist.astype(float)
            re, im = hf @ cos_t, hf @ sin_t
            bad = np.flatnonzero((np.abs(re - expect) > 1e-9 * phi) | (np.abs(im) > 1e-9 * phi))
            if bad.size:
                mi = int(bad[0])
                return f"q={q} m={units[mi]} l={units[li]}: sum={complex(re[mi], im[mi])}, expected {expect[mi]}"
    return None


def _timed(name: str, fn: Callable[[], tuple[bool, str | None, str]]) -> CheckResult:
    t = time.perf_counter()
    ok, cex, detail = fn()
    return CheckResult(name, ok, cex, detail, time.perf_counter() - t)


def _random_instances(rng: random.Random, n: int, qmax: int, xmax: int) -> list[Pi2Instance]:
    out = []
    while len(out) < n:
        q = rng.randint(1, qmax)
        a, l = rng.randint(1, max(q, 2) * 3), rng.randint(1, max(q, 2) * 3)
        if math.gcd(a, q) != 1 or math.gcd(l, q) != 1:
            continue
        out.append(Pi2Instance.make(q, rng.randint(0, xmax), rng.randint(0, xmax), a, l))
    return out


def check_orthogonality(qmax: int) -> CheckResult:
    def run():
        for q in range(1, qmax + 1):
            cex = orthogonality_counterexample(q)
            if cex:
                return False, cex, ""
        return True, None, f"q <= {qmax}"

    return _timed("orthogonality (exact)", run)


def check_decomposition(instances: list[Pi2Instance]) -> CheckResult:
    def run():
        for inst in instances:
            exact = pi2_exact(inst)
            d = char_decomposition(inst, "exact")
            if d.R2_exact is None or d.M2_exact + d.R2_exact != exact:
                return False, f"{inst}: M2={d.M2_exact} R2={d.R2_exact} count={exact}", ""
            f = char_decomposition(inst, "fast")
            if abs(f.M2 + f.R2.real - exact) > 1e-6 or abs(f.R2.imag) > 1e-6:
                return False, f"{inst}: fast M2+R2={f.M2 + f.R2.real} imag={f.R2.imag} count={exact}", ""
        return True, None, f"{len(instances)} instances"

    return _timed("character decomposition M2 + R2 = count", run)


def check_inclusion_exclusion(qmax: int, xmax: int) -> CheckResult:
    def run():
        primes = prime_array(xmax)
        for q in range(1, qmax + 1):
            m = Modulus.of(q)
            divs = [(d, moebius(d)) for d in m.divisors()]
            for a in build_basis(q).units:
                a = int(a)
                direct = np.cumsum(np.gcd(primes + a, q) == 1)
                ie = np.zeros(primes.shape[0], dtype=np.int64)
                for d, mu in divs:
                    if mu:
                        ie += mu * np.cumsum(primes % d == (d - a % d) % d)
                bad = np.flatnonzero(direct != ie)
                if bad.size:
                    x2 = int(primes[bad[0]])
                    return False, f"q={q} a={a} x2={x2}: direct={direct[bad[0]]} incl_excl={ie[bad[0]]}", ""
                d0, ie0 = t1_chi0_check(xmax, a, m)
                if d0 != ie0:
                    return False, f"q={q} a={a} x2={xmax}: {d0} != {ie0}", ""
        return True, None, f"q <= {qmax}, every x2 <= {xmax}"

    return _timed("principal shifted sum by inclusion-exclusion", run)


def check_pi2_oracle(instances: list[Pi2Instance]) -> CheckResult:
    def run():
        for inst in instances:
            a, b = pi2_exact(inst), pi2_bruteforce(inst)
            if a != b:
                return False, f"{inst}: convolution={a} bruteforce={b}", ""
        return True, None, f"{len(instances)} instances"

    return _timed("pair count: class convolution = brute force", run)


def check_sieve_oracle(xmax: int) -> CheckResult:
    def run():
        seg = SieveRange(2, xmax, segment_size=1 << 12).primes()
        plain = base_primes(xmax)
        if not np.array_equal(seg, plain):
            diff = sorted(set(seg.tolist()) ^ set(plain.tolist()))
            return False, f"segmented and plain sieves differ at {diff[:5]}", ""
        return True, None, f"[2, {xmax}]"

    return _timed("segmented sieve = plain sieve", run)


def check_prefix_max_oracle(qmax: int, x: int) -> CheckResult:
    def run():
        for q in range(1, qmax + 1):
            chars = all_characters(q)
            got = scan_characters(chars, x, "prime-indicator")
            for chi, (_, r) in zip(chars, got):
                s, best = 0j, 0.0
                for y in range(2, x + 1):
                    if is_prime(y):
                        s += complex(chi(y))
                    best = max(best, abs(s))
                if abs(best - r.max_abs) > 1e-9 * x:
                    return False, f"{chi}: jump-point max={r.max_abs}, dense max={best}", ""
        return True, None, f"q <= {qmax}, x = {x}"

    return _timed("prefix maximum at jump points = dense scan", run)


def check_conductor_oracle(qmax: int) -> CheckResult:
    def run():
        for q in range(1, qmax + 1):
            units = [n for n in range(1, q + 1) if math.gcd(n, q) == 1]
            for chi in all_characters(q):
                d = next(d for d in Modulus.of(q).divisors()
                         if all(chi(n).phase == 0 for n in units if n % d == 1 % d))
                if d != chi.conductor().d:
                    return False, f"{chi}: definitional conductor {d}, computed {chi.conductor().d}", ""
                prim = chi.induced_primitive()
                if any(prim(n) != chi(n) for n in units):
                    return False, f"{chi}: induced primitive disagrees", ""
        return True, None, f"q <= {qmax}"

    return _timed("conductor = definitional minimum", run)


def check_brun_titchmarsh(qmax: int, xs: list[int]) -> CheckResult:
    def run():
        count = 0
        for x in xs:
            for q in range(1, qmax + 1):
                if q > x:
                    continue
                for a in build_basis(q).units:
                    r = brun_titchmarsh_check(x, q, int(a))
                    count += 1
                    if not r.holds:
                        return False, f"x={x} q={q} a={a}: {r.lhs} > {r.rhs}", ""
        return True, None, f"{count} cases"

    return _timed("Brun-Titchmarsh bound", run)


def check_goldbach(qmax: int) -> CheckResult:
    def run():
        count = 0
        for q in range(1, qmax + 1, 2):
            for l in build_basis(q).units:
                g = least_goldbach(q, int(l))
                count += 1
                if not verify_goldbach(q, int(l), g):
                    return False, f"q={q} l={l}: {g}", ""
        return True, None, f"{count} classes"

    return _timed("least Goldbach numbers verified", run)


def check_residue_marginals(rng: random.Random, n: int) -> CheckResult:
    def run():
        for _ in range(n):
            x, q = rng.randint(2, 10**5), rng.randint(1, 200)
            t = residue_counts(x, q)
            if t.total != len(prime_array(x)):
                return False, f"x={x} q={q}: {t.total} != {len(prime_array(x))}", ""
        return True, None, f"{n} tables"

    return _timed("residue table marginals = pi(x)", run)


def run_suite(name: str, scale: str = "quick", seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    full = scale == "full"
    rng = random.Random(seed)
    out: list[CheckResult] = []
    if name in ("identities", "all"):
        out.append(check_orthogonality(300 if full else 60))
        out.append(check_decomposition(_random_instances(rng, 500 if full else 60, 50, 2000)))
        out.append(check_inclusion_exclusion(100 if full else 30, 10**4 if full else 2000))
    if name in ("oracles", "all"):
        out.append(check_pi2_oracle(_random_instances(rng, 500 if full else 60, 50, 2000)))
        out.append(check_sieve_oracle(10**6 if full else 10**5))
        out.append(check_prefix_max_oracle(8, 200))
        out.append(check_conductor_oracle(100 if full else 40))
        out.append(check_residue_marginals(rng, 50 if full else 10))
    if name in ("inequalities", "all"):
        xs = [10**3, 10**4, 10**5, 10**6] if full else [10**3, 10**4, 10**5]
        out.append(check_brun_titchmarsh(100, xs))
        out.append(check_goldbach(199 if full else 61))
    return out

"""Integer and multiplicative-function arithmetic.

Everything here is exact except :func:`log_integral` and :func:`alpha_window`,
which go through logarithms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterator, Sequence

import numpy as np
from scipy import special

INT64_MAX = 2**63 - 1
TRIAL_LIMIT = 10**6
HALF = Fraction(1, 2)
FIVE_SIXTHS = Fraction(5, 6)

# Deterministic Miller-Rabin witnesses for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class OverflowGuardError(OverflowError):
    """An intermediate result left the signed 64-bit range."""


class GuardError(RuntimeError):
    """A desk-scale computation guard was exceeded."""

    def __init__(self, guard: str, message: str):
        super().__init__(f"{guard}: {message}")
        self.guard = guard


def checked_int64(value: int, what: str = "value") -> int:
    if not -INT64_MAX - 1 <= value <= INT64_MAX:
        raise OverflowGuardError(f"{what}={value} does not fit in signed 64 bits")
    return value


@lru_cache(maxsize=1)
def _small_primes() -> np.ndarray:
    n = TRIAL_LIMIT
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def is_prime(n: int) -> bool:
    """Deterministic primality test for ``n < 2**64``."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    """Return a nontrivial factor of the odd composite ``n``."""
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split_large(n: int, out: dict[int, int], rng: random.Random) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n, rng)
    _split_large(d, out, rng)
    _split_large(n // d, out, rng)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as ascending ``(prime, exponent)`` pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    def value(self) -> int:
        return reduce(lambda acc, pe: acc * pe[0] ** pe[1], self.pairs, 1)


def factorize(n: int) -> Factorization:
    """Factor ``1 <= n <= 2**63 - 1``.

    Trial division by primes up to 10**6 handles every desk-scale modulus; a
    leftover cofactor is split with Pollard-Brent.
    """
    n = int(n)
    if not 1 <= n <= INT64_MAX:
        raise ValueError(f"factorize expects 1 <= n <= 2**63-1, got {n}")
    out: dict[int, int] = {}
    m = n
    small = _small_primes()
    if n < 1 << 20:
        small = small[: int(np.searchsorted(small, math.isqrt(n), side="right"))]
    for p in small[np.int64(n) % small == 0].tolist():
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        out[p] = e
    if m > 1:
        if m < TRIAL_LIMIT**2 or is_prime(m):
            out[m] = out.get(m, 0) + 1
        else:
            _split_large(m, out, random.Random(m))
    return Factorization(tuple(sorted(out.items())))


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result = result // p * (p - 1)
    return result


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisors_from(fact: Factorization) -> list[int]:
    divs = [1]
    for p, e in fact:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisors(n: int) -> list[int]:
    return divisors_from(factorize(n))


@dataclass(frozen=True)
class Modulus:
    """A modulus ``q`` together with its cached arithmetic data.

    >>> Modulus.of(12).phi, Modulus.of(12).theta
    (4, Fraction(1, 2))
    """

    q: int
    factorization: Factorization = field(repr=False)
    phi: int
    cube_free: bool
    theta: Fraction

    @classmethod
    def of(cls, q: int) -> "Modulus":
        return _modulus_cached(int(q))

    @property
    def primes(self) -> tuple[int, ...]:
        return self.factorization.primes

    @property
    def is_prime(self) -> bool:
        return len(self.factorization) == 1 and self.factorization.pairs[0][1] == 1

    def divisors(self) -> list[int]:
        return divisors_from(self.factorization)

    def __int__(self) -> int:
        return self.q


@lru_cache(maxsize=4096)
def _modulus_cached(q: int) -> Modulus:
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    fact = factorize(q)
    phi = 1
    for p, e in fact:
        phi *= p ** (e - 1) * (p - 1)
    cube_free = all(e <= 2 for _, e in fact)
    return Modulus(q, fact, phi, cube_free, HALF if cube_free else FIVE_SIXTHS)


def as_modulus(m: Modulus | int) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus.of(m)


def theta_kappa(m: Modulus | int, eps: Fraction | int | str = 0) -> tuple[Fraction, Fraction]:
    """Return ``(theta, kappa0)`` with ``kappa0 = 1/(5/2 + theta + eps)``."""
    m = as_modulus(m)
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return m.theta, 1 / (Fraction(5, 2) + m.theta + eps)


@dataclass(frozen=True)
class AlphaWindow:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __contains__(self, alpha: float) -> bool:
        return self.lo <= alpha <= self.hi

    def __iter__(self):
        return iter((self.lo, self.hi))


def alpha_window_from_ratio(ratio: float, theta: Fraction | float, eps: Fraction | float = 0) -> AlphaWindow:
    """Window for ``alpha`` given ``ratio = ln q / ln x``."""
    return AlphaWindow((float(theta) + float(eps)) * ratio, 1.0 - 2.5 * ratio)


def alpha_window(m: Modulus | int, x: float, eps: Fraction | float = 0) -> AlphaWindow:
    m = as_modulus(m)
    if m.q < 2:
        raise ValueError("alpha window needs q >= 2")
    if x <= m.q:
        raise ValueError(f"alpha window needs x > q, got x={x}, q={m.q}")
    return alpha_window_from_ratio(math.log(m.q) / math.log(x), m.theta, eps)


_LI2 = float(special.expi(math.log(2.0)))


def log_integral(x):
    """Offset logarithmic integral ``int_2^x dt / ln t``.

    Accepts a scalar or an array; uses ``li(x) = Ei(ln x)``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 2):
        raise ValueError("log_integral is defined here for x >= 2")
    out = special.expi(np.log(arr)) - _LI2
    out = np.where(arr == 2.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def lcm(values: Sequence[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)

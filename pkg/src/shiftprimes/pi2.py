"""Exact counts of prime pairs with ``p1 (p2 + a) = l (mod q)`` and their diagnostics.

Besides the count itself this module evaluates the predicted main term, the
split of the count into principal and non-principal character parts, the
inclusion-exclusion form of the principal shifted sum, the Brun-Titchmarsh
bound and least Goldbach numbers in residue classes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .characters import all_characters, build_basis, character_table
from .charsums import unit_roots
from .cyclotomic import reduce_histogram
from .ntcore import (
    GuardError,
    Modulus,
    as_modulus,
    checked_int64,
    euler_phi,
    is_prime,
    log_integral,
    moebius,
    theta_kappa,
)
from .sieve import prime_array, residue_counts

BRUTEFORCE_GUARD = 10**9


class InstanceError(ValueError):
    """An instance violates a named precondition."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


@dataclass(frozen=True)
class Pi2Instance:
    m: Modulus
    x1: int
    x2: int
    a: int
    l: int

    @classmethod
    def make(cls, q, x1, x2, a, l) -> "Pi2Instance":
        inst = cls(as_modulus(q), int(x1), int(x2), int(a), int(l))
        inst.validate()
        return inst

    @property
    def q(self) -> int:
        return self.m.q

    def validate(self) -> None:
        q = self.m.q
        if math.gcd(self.a, q) != 1:
            raise InstanceError("gcd(a,q)=1", f"a={self.a}, q={q}")
        if math.gcd(self.l, q) != 1:
            raise InstanceError("gcd(l,q)=1", f"l={self.l}, q={q}")
        if self.x1 < 0 or self.x2 < 0:
            raise InstanceError("x1,x2>=0", f"x1={self.x1}, x2={self.x2}")


def _unit_inverses(q: int) -> np.ndarray:
    inv = np.zeros(q, dtype=np.int64)
    for u in build_basis(q).units:
        inv[u] = pow(int(u), -1, q) if q > 1 else 0
    return inv


def pi2_exact(inst: Pi2Instance, threads: int = 1) -> int:
    """Count pairs by convolving the residue-class counts of both prime sets.

    For each class ``s`` of ``p2`` with ``s + a`` a unit, ``p1`` must lie in the
    single class ``l (s + a)^(-1)``.
    """
    inst.validate()
    q = inst.q
    if inst.x1 < 2 or inst.x2 < 2:
        return 0
    c1 = residue_counts(inst.x1, q, threads).counts
    c2 = residue_counts(inst.x2, q, threads).counts
    checked_int64(int(c1.sum()) * int(c2.sum()), "pi(x1)*pi(x2)")
    t = (np.arange(q) + inst.a) % q
    live = build_basis(q).unit_mask[t]
    r1 = (inst.l % q) * _unit_inverses(q)[t[live]] % q
    return int(np.dot(c2[live], c1[r1]))


def pi2_bruteforce(inst: Pi2Instance) -> int:
    """Literal check of every prime pair; guarded to ``x1 * x2 <= 10**9``."""
    inst.validate()
    if inst.x1 * inst.x2 > BRUTEFORCE_GUARD:
        raise GuardError("bruteforce", f"x1*x2={inst.x1 * inst.x2} exceeds {BRUTEFORCE_GUARD}")
    q = inst.q
    p1 = prime_array(inst.x1) % q
    p2 = (prime_array(inst.x2) + inst.a) % q
    total = 0
    for r in p1:
        total += int(np.count_nonzero((int(r) * p2) % q == inst.l % q))
    return total


def singular_product(m: Modulus | int) -> Fraction:
    """``prod_{p | q} (1 - 1/(p - 1))``; zero whenever q is even."""
    out = Fraction(1)
    for p in as_modulus(m).primes:
        out *= 1 - Fraction(1, p - 1)
    return out


def main_term(inst: Pi2Instance) -> float:
    """``prod_{p|q}(1 - 1/(p-1)) Li(x1) Li(x2) / phi(q)``."""
    if inst.x1 < 2 or inst.x2 < 2:
        return 0.0
    s = singular_product(inst.m)
    return float(s) / inst.m.phi * log_integral(inst.x1) * log_integral(inst.x2)


def main_term_flags(inst: Pi2Instance) -> list[str]:
    flags = []
    if inst.q % 2 == 0:
        flags.append("even-modulus: singular product vanishes")
    return flags


@dataclass(frozen=True)
class Decomposition:
    """``count = M2 + R2``; ``R2`` is real for a correct implementation."""

    M2: float
    R2: complex
    mode: str
    M2_exact: Fraction | None = None
    R2_exact: Fraction | None = None

    @property
    def total(self) -> float:
        return self.M2 + self.R2.real


def _chunks(n: int, threads: int) -> list[np.ndarray]:
    return [c for c in np.array_split(np.arange(n), max(1, min(threads, n))) if c.size]


def char_decomposition(inst: Pi2Instance, mode: str = "fast", threads: int = 1) -> Decomposition:
    """Principal and non-principal parts of the character expansion of the count.

    ``M2 = T1(chi0) S(chi0) / phi(q)`` and
    ``R2 = sum_{chi != chi0} T1(chi) conj(chi(l)) S(chi) / phi(q)`` with
    ``T1(chi) = sum_{p <= x2} chi(p + a)`` and ``S(chi) = sum_{p <= x1} chi(p)``.
    """
    inst.validate()
    m = inst.m
    q, phi = m.q, m.phi
    chars = all_characters(m)
    basis = build_basis(m)
    E = basis.exponent
    c1 = residue_counts(max(inst.x1, 0), q).counts
    c2 = np.roll(residue_counts(max(inst.x2, 0), q).counts, inst.a % q)
    table = character_table(basis, chars)
    l_exp = table[:, inst.l % q].astype(np.int64)

    if mode == "fast":
        cos_t, sin_t = unit_roots(E)

        def run(idx):
            # fsum per character: each value is independent of how characters are chunked
            out = np.empty(len(idx), dtype=complex)
            for j, c in enumerate(idx):
                row = table[c]
                live = row >= 0
                kk = row[live]
                cr, sr = cos_t[kk], sin_t[kk]
                w2, w1 = c2[live].astype(float), c1[live].astype(float)
                t1 = complex(math.fsum(w2 * cr), math.fsum(w2 * sr))
                s1 = complex(math.fsum(w1 * cr), math.fsum(w1 * sr))
                lk = (-int(l_exp[c])) % E
                out[j] = t1 * s1 * complex(cos_t[lk], sin_t[lk])
            return out

        chunks = _chunks(len(chars), threads)
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as pool:
                terms = np.concatenate(list(pool.map(run, chunks)))
        else:
            terms = np.concatenate([run(c) for c in chunks])
        M2 = float(terms[0].real) / phi
        rest = terms[1:]
        R2 = complex(math.fsum(rest.real), math.fsum(rest.imag)) / phi
        return Decomposition(M2, R2, mode)

    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    # Exact: integer histograms over exponents, products in Z[Z/E], reduced mod Phi_E.
    nchar = len(chars)
    live = table >= 0
    offs = E * np.arange(nchar)[:, None]
    ht = np.zeros(nchar * E, dtype=np.int64)
    hs = np.zeros(nchar * E, dtype=np.int64)
    np.add.at(ht, (table + offs)[live], np.broadcast_to(c2, table.shape)[live])
    np.add.at(hs, (table + offs)[live], np.broadcast_to(c1, table.shape)[live])
    ht, hs = ht.reshape(nchar, E), hs.reshape(nchar, E)
    bound = int(c1.sum()) * int(c2.sum()) * E
    checked_int64(bound, "histogram product bound")
    idx = (np.arange(E)[:, None] - np.arange(E)[None, :]) % E
    total = np.zeros(E, dtype=object)
    for c in range(1, nchar):
        prod = ht[c] @ hs[c][idx].T  # cyclic convolution
        total += np.roll(prod, -int(l_exp[c])).astype(object)
    coords = reduce_histogram(total)
    M2_exact = Fraction(int(ht[0].sum()) * int(hs[0].sum()), phi)
    R2_exact = Fraction(coords[0], phi) if not any(coords[1:]) else None
    if R2_exact is not None:
        R2 = complex(float(R2_exact), 0.0)
    else:
        cos_t, sin_t = unit_roots(E)
        tf = total.astype(float)
        R2 = complex(math.fsum(tf * cos_t), math.fsum(tf * sin_t)) / phi
    return Decomposition(float(M2_exact), R2, mode, M2_exact, R2_exact)


def t1_chi0_check(x2: int, a: int, m: Modulus | int) -> tuple[int, int]:
    """``#{p <= x2 : (p + a, q) = 1}`` directly and by inclusion-exclusion over ``d | q``."""
    m = as_modulus(m)
    if math.gcd(a, m.q) != 1:
        raise ValueError(f"gcd(a, q) = gcd({a}, {m.q}) > 1")
    primes = prime_array(x2)
    direct = int(np.count_nonzero(np.gcd(primes + a, m.q) == 1))
    incl_excl = 0
    for d in m.divisors():
        mu = moebius(d)
        if mu:
            incl_excl += mu * residue_counts(x2, d)[(d - a % d) % d]
    return direct, incl_excl


@dataclass(frozen=True)
class T1Split:
    """``T1(x2, chi0) = Li(x2) * prod + R1 + R2`` split at ``d <= threshold``."""

    direct: int
    main: float
    R1: float
    R2: float
    threshold: float
    product: Fraction


def t1_chi0_split(x2: int, a: int, m: Modulus | int, A: float, x: float | None = None) -> T1Split:
    """Principal shifted sum split into main part and small/large divisor remainders.

    The divisor threshold is ``sqrt(x) (ln x)^(-A-3.5)`` with ``x = x2`` unless given.
    """
    m = as_modulus(m)
    direct, _ = t1_chi0_check(x2, a, m)
    li = log_integral(x2)
    x = x2 if x is None else x
    thr = math.sqrt(x) * math.log(x) ** (-A - 3.5)
    prod = sum((Fraction(moebius(d), euler_phi(d)) for d in m.divisors()), Fraction(0))
    small, large = [], []
    for d in m.divisors():
        mu = moebius(d)
        if not mu:
            continue
        dev = mu * (residue_counts(x2, d)[(d - a % d) % d] - li / euler_phi(d))
        (small if d <= thr else large).append(dev)
    return T1Split(direct, li * float(prod), math.fsum(small), math.fsum(large), thr, prod)


def log_delta_budget(x1: float, x2: float, q: int) -> float:
    """Natural log of the remainder budget

    ``((ln x1q)^-31 + x1^-1/5 q^1/2 + x1^-1/2 q) (ln x1q)^33 ln x1 ln x2 exp(-0.6 sqrt(ln q))``.
    """
    L1 = math.log(x1 * q)
    lq = math.log(q)
    inner = [-31 * math.log(L1), -0.2 * math.log(x1) + 0.5 * lq, -0.5 * math.log(x1) + lq]
    top = max(inner)
    log_inner = top + math.log(math.fsum(math.exp(v - top) for v in inner))
    return log_inner + 33 * math.log(L1) + math.log(math.log(x1)) + math.log(math.log(x2)) - 0.6 * math.sqrt(lq)


def log_delta_bound(x1: float, x2: float, q: int) -> float:
    """Log of the simplified bound ``(ln x1q)^33 ln x1 ln x2 exp(-0.6 sqrt(ln q))``."""
    L1 = math.log(x1 * q)
    return 33 * math.log(L1) + math.log(math.log(x1)) + math.log(math.log(x2)) - 0.6 * math.sqrt(math.log(q))


def _safe_exp(v: float) -> float:
    return math.exp(v) if v < 709 else math.inf


@dataclass(frozen=True)
class RemainderDiagnostics:
    abs_error: float
    target_error: float | None
    ratio: float | None
    delta_budget: float
    log_delta_budget: float
    delta_bound: float
    t1: T1Split


def remainder_diagnostics(inst: Pi2Instance, A: float = 1.0, exact: int | None = None) -> RemainderDiagnostics:
    """Observed error against the target error shape and the remainder budget."""
    exact = pi2_exact(inst) if exact is None else exact
    mt = main_term(inst)
    err = abs(exact - mt)
    q = inst.q
    target = ratio = None
    if q > 1 and inst.x1 > 2 and inst.x2 > 2:
        target = inst.x1 * inst.x2 / (inst.m.phi * math.log(inst.x1) * math.log(inst.x2) * math.log(q) ** A)
        ratio = err / target
    ldb = log_delta_budget(inst.x1, inst.x2, q) if q > 1 else -math.inf
    lbd = log_delta_bound(inst.x1, inst.x2, q) if q > 1 else -math.inf
    split = t1_chi0_split(inst.x2, inst.a, inst.m, A)
    return RemainderDiagnostics(err, target, ratio, _safe_exp(ldb), ldb, _safe_exp(lbd), split)


@dataclass(frozen=True)
class WindowCheck:
    x: float
    alpha: float
    alpha_lo: float
    alpha_hi: float
    kappa0: Fraction
    kappa_ok: bool
    alpha_ok: bool
    normalization_ok: bool

    @property
    def ok(self) -> bool:
        return self.kappa_ok and self.alpha_ok and self.normalization_ok


def window_check(inst: Pi2Instance, eps: Fraction | float = Fraction(1, 100)) -> WindowCheck:
    """Parameter conditions of the asymptotic formula, with ``x = x1 * x2``.

    Checks ``q <= x^kappa0``, ``alpha = ln x2 / ln x`` inside its window and the
    lower ends ``x1 >= q^(5/2)``, ``x2 >= q^(theta + eps)``.
    """
    eps = Fraction(eps).limit_denominator(10**6)
    theta, kappa = theta_kappa(inst.m, eps)
    q = inst.q
    if inst.x1 < 2 or inst.x2 < 2:
        return WindowCheck(0.0, 0.0, 0.0, 0.0, kappa, False, False, False)
    lx = math.log(inst.x1) + math.log(inst.x2)
    lq = math.log(q)
    alpha = math.log(inst.x2) / lx
    lo = (float(theta) + float(eps)) * lq / lx
    hi = 1 - 2.5 * lq / lx
    norm = math.log(inst.x1) >= 2.5 * lq and math.log(inst.x2) >= (float(theta) + float(eps)) * lq
    return WindowCheck(math.exp(lx) if lx < 709 else math.inf, alpha, lo, hi, kappa,
                       lq <= float(kappa) * lx, lo <= alpha <= hi, norm)


@dataclass(frozen=True)
class Pi2Report:
    q: int
    x1: int
    x2: int
    a: int
    l: int
    exact: int
    main_term: float
    char_main: float
    char_remainder: complex
    ratio: float | None
    window_ok: bool
    theta_used: Fraction
    delta_budget: float
    flags: tuple[str, ...] = field(default=())

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "x1": self.x1,
            "x2": self.x2,
            "a": self.a,
            "l": self.l,
            "exact": self.exact,
            "main_term": float(self.main_term),
            "M2": float(self.char_main),
            "R2_re": float(self.char_remainder.real),
            "R2_im": float(self.char_remainder.imag),
            "ratio": self.ratio,
            "window_ok": self.window_ok,
            "theta": str(self.theta_used),
            "delta_budget": self.delta_budget,
            "flags": list(self.flags),
        }


def pi2_report(inst: Pi2Instance, eps: Fraction | float = Fraction(1, 100), mode: str = "fast", threads: int = 1) -> Pi2Report:
    exact = pi2_exact(inst, threads)
    mt = main_term(inst)
    dec = char_decomposition(inst, mode, threads)
    win = window_check(inst, eps)
    flags = main_term_flags(inst)
    if not win.ok:
        flags.append("outside-window")
    budget = _safe_exp(log_delta_budget(inst.x1, inst.x2, inst.q)) if inst.q > 1 and inst.x1 > 1 and inst.x2 > 1 else 0.0
    return Pi2Report(inst.q, inst.x1, inst.x2, inst.a, inst.l, exact, mt, dec.M2, dec.R2,
                     exact / mt if mt > 0 else None, win.ok, inst.m.theta, budget, tuple(flags))


@dataclass(frozen=True)
class BrunTitchmarsh:
    lhs: int
    rhs: float
    holds: bool


def brun_titchmarsh_check(x: int, m: Modulus | int, a: int) -> BrunTitchmarsh:
    """``pi(x; q, a) <= 2x / (phi(q) ln(2x/q))`` for ``q <= x``."""
    m = as_modulus(m)
    if m.q > x:
        raise ValueError(f"need q <= x, got q={m.q}, x={x}")
    if math.gcd(a, m.q) != 1:
        raise ValueError(f"gcd(a, q) = gcd({a}, {m.q}) > 1")
    lhs = residue_counts(x, m.q)[a]
    rhs = 2 * x / (m.phi * math.log(2 * x / m.q))
    return BrunTitchmarsh(lhs, rhs, lhs <= rhs)


class GoldbachCapExceeded(RuntimeError):
    """No Goldbach number was found below the search cap (existence not decided)."""


class NoGoldbachNumber(ValueError):
    """The residue class contains no even integers."""


@dataclass(frozen=True)
class GoldbachNumber:
    n: int
    p: int
    p_prime: int


def goldbach_cap(q: int) -> int:
    return max(q * q * 64, 64)


def least_goldbach(m: Modulus | int, l: int) -> GoldbachNumber:
    """Least ``n = l (mod q)`` that is a sum of two odd primes, with its smallest-``p`` split."""
    m = as_modulus(m)
    q = m.q
    if not 0 <= l < q:
        raise ValueError(f"need 0 <= l < q, got l={l}, q={q}")
    if q % 2 == 0 and l % 2 == 1:
        raise NoGoldbachNumber(f"class {l} mod {q} has only odd members")
    cap = goldbach_cap(q)
    step = q if q % 2 == 0 else 2 * q
    n = l if (q % 2 == 0 or l % 2 == 0) else l + q
    if n < 6:
        n += ((6 - n) + step - 1) // step * step
    flags = np.zeros(cap + 1, dtype=bool)
    odd_primes = prime_array(cap)[1:]
    flags[odd_primes] = True
    while n <= cap:
        for p in odd_primes[: np.searchsorted(odd_primes, n // 2, side="right")]:
            if flags[n - p]:
                return GoldbachNumber(int(n), int(p), int(n - p))
        n += step
    raise GoldbachCapExceeded(f"no Goldbach number = {l} mod {q} up to {cap}")


def verify_goldbach(m: Modulus | int, l: int, g: GoldbachNumber) -> bool:
    q = as_modulus(m).q
    return (g.n % q == l % q and g.n % 2 == 0 and g.n >= 6 and g.p + g.p_prime == g.n
            and g.p % 2 == 1 and g.p_prime % 2 == 1 and is_prime(g.p) and is_prime(g.p_prime))


@dataclass(frozen=True)
class JutilaRow:
    q: int
    max_goldbach: int | None
    argmax_l: int | None
    ratio: float | None
    note: str = ""


def jutila_ratio_scan(qs) -> list[JutilaRow]:
    """``max_{(l,q)=1} G(q, l) / q^(11/8)`` for odd prime moduli, ascending in q."""
    rows = []
    for q in sorted({as_modulus(v).q for v in qs}):
        m = Modulus.of(q)
        if not (m.is_prime and q % 2 == 1):
            rows.append(JutilaRow(q, None, None, None, "skipped: not an odd prime"))
            continue
        best, arg = -1, None
        for l in range(1, q):
            g = least_goldbach(m, l).n
            if g > best:
                best, arg = g, l
        rows.append(JutilaRow(q, best, arg, best / q ** 1.375))
    return rows

"""Dirichlet characters with exact root-of-unity values.

The unit group ``(Z/qZ)*`` is split by CRT into cyclic pieces: one primitive
root per odd prime power, ``-1`` for ``4 | q``, and ``-1, 5`` for ``8 | q``. A
character is an exponent vector ``exps`` on those generators:
``chi(g_i) = exp(2 pi i exps[i] / order_i)``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .ntcore import FIVE_SIXTHS, HALF, GuardError, Modulus, as_modulus, factorize, lcm

MAX_CHARACTERS = 10**6
LOG_TABLE_LIMIT = 10**7


@dataclass(frozen=True)
class CharValue:
    """Either zero or ``exp(2 pi i * phase)`` with ``phase`` in ``[0, 1)``."""

    phase: Fraction | None

    @classmethod
    def root(cls, k: int, m: int) -> "CharValue":
        return cls(Fraction(k % m, m))

    @property
    def is_zero(self) -> bool:
        return self.phase is None

    @property
    def k(self) -> int:
        if self.phase is None:
            raise ValueError("Zero has no root-of-unity exponent")
        return self.phase.numerator

    @property
    def m(self) -> int:
        if self.phase is None:
            raise ValueError("Zero has no root-of-unity order")
        return self.phase.denominator

    def __mul__(self, other: "CharValue") -> "CharValue":
        if self.phase is None or other.phase is None:
            return ZERO
        return CharValue((self.phase + other.phase) % 1)

    def conjugate(self) -> "CharValue":
        return self if self.phase is None else CharValue((-self.phase) % 1)

    def __complex__(self) -> complex:
        if self.phase is None:
            return 0j
        if self.phase.denominator <= 2 or self.phase.denominator == 4:
            # exact for +-1 and +-i
            return [1 + 0j, 1j, -1 + 0j, -1j][int(self.phase * 4)]
        ang = 2 * math.pi * float(self.phase)
        return complex(math.cos(ang), math.sin(ang))

    def __repr__(self) -> str:
        if self.phase is None:
            return "Zero"
        return f"RootOfUnity({self.k}/{self.m})"


ZERO = CharValue(None)
ONE = CharValue(Fraction(0))


@dataclass(frozen=True)
class Generator:
    g: int  # CRT lift to Z/qZ
    order: int
    prime: int
    kind: str  # "cyclic", "minus_one" or "five"


def _primitive_root_lifting(p: int) -> int:
    """Smallest primitive root mod ``p`` that is also primitive mod ``p**2``."""
    ps = factorize(p - 1).primes
    for g in range(2, p + 1):
        if all(pow(g, (p - 1) // r, p) != 1 for r in ps) and (p == 2 or pow(g, p - 1, p * p) != 1):
            return g
    raise ArithmeticError(f"no primitive root for {p}")


def _power_table(g: int, order: int, mod: int) -> np.ndarray:
    """Discrete-log lookup: ``tbl[g**j % mod] = j``, ``-1`` elsewhere."""
    tbl = np.full(mod, -1, dtype=np.int64)
    block = min(order, 1 << 14)
    pw = np.empty(block, dtype=np.int64)
    v = 1
    for j in range(block):
        pw[j] = v
        v = v * g % mod
    step = pow(g, block, mod)
    for start in range(0, order, block):
        n = min(block, order - start)
        tbl[pw[:n]] = np.arange(start, start + n)
        pw = pw * step % mod
    return tbl


def _bsgs(g: int, h: int, order: int, mod: int) -> int:
    m = math.isqrt(order) + 1
    baby = {}
    v = 1
    for j in range(m):
        baby.setdefault(v, j)
        v = v * g % mod
    giant = pow(g, -m, mod)
    y = h % mod
    for i in range(m + 1):
        if y in baby:
            return (i * m + baby[y]) % order
        y = y * giant % mod
    raise ValueError(f"{h} is not a power of {g} mod {mod}")


class UnitGroupBasis:
    """Generators of ``(Z/qZ)*`` and discrete logarithms with respect to them."""

    def __init__(self, modulus: Modulus):
        self.modulus = modulus
        q = modulus.q
        gens: list[Generator] = []
        self._local: list[tuple[int, int, int]] = []  # (prime, prime power, base for logs)
        for p, e in modulus.factorization:
            pe = p**e
            rest = q // pe
            lift = lambda r: _crt_pair(r, pe, 1, rest)  # noqa: E731
            if p == 2:
                if e >= 2:
                    gens.append(Generator(lift(pe - 1), 2, 2, "minus_one"))
                    self._local.append((2, pe, -1))
                if e >= 3:
                    gens.append(Generator(lift(5), 2 ** (e - 2), 2, "five"))
                    self._local.append((2, pe, 5))
            else:
                g = _primitive_root_lifting(p)
                gens.append(Generator(lift(g), pe // p * (p - 1), p, "cyclic"))
                self._local.append((p, pe, g))
        self.generators: tuple[Generator, ...] = tuple(gens)
        self.orders: tuple[int, ...] = tuple(g.order for g in gens)
        self.exponent: int = lcm(self.orders)
        self._tables: dict[int, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"UnitGroupBasis(q={self.modulus.q}, gens={[(g.g, g.order) for g in self.generators]})"

    @property
    def q(self) -> int:
        return self.modulus.q

    def _two_power_tables(self, pe: int) -> tuple[np.ndarray, np.ndarray]:
        sign = np.full(pe, -1, dtype=np.int64)
        five = np.full(pe, -1, dtype=np.int64)
        if pe == 4:
            sign[1], sign[3] = 0, 1
            five[1] = five[3] = 0
            return sign, five
        t = _power_table(5, pe // 4, pe)
        units = np.flatnonzero(t >= 0)
        sign[units] = 0
        five[units] = t[units]
        sign[pe - units] = 1
        five[pe - units] = t[units]
        return sign, five

    def _local_table(self, i: int) -> np.ndarray | None:
        if i in self._tables:
            return self._tables[i]
        p, pe, base = self._local[i]
        if pe > LOG_TABLE_LIMIT:
            return None
        if p == 2:
            sign, five = self._two_power_tables(pe)
            for j, (pp, _, b) in enumerate(self._local):
                if pp == 2:
                    self._tables[j] = sign if b == -1 else five
        else:
            self._tables[i] = _power_table(base, self.generators[i].order, pe)
        return self._tables[i]

    def local_log(self, i: int, n: int) -> int:
        p, pe, base = self._local[i]
        r = n % pe
        if math.gcd(r, p) != 1:
            raise ValueError(f"{n} is not a unit mod {self.q}")
        tbl = self._local_table(i)
        if tbl is not None:
            return int(tbl[r])
        if p != 2:
            return _bsgs(base, r, self.generators[i].order, pe)
        sign = 0 if r % 4 == 1 else 1
        if base == -1:
            return sign
        return _bsgs(5, r if sign == 0 else pe - r, pe // 4, pe)

    def dlog(self, n: int) -> tuple[int, ...]:
        """Exponents ``(l_i)`` with ``n = prod g_i**l_i (mod q)``."""
        if math.gcd(n, self.q) != 1:
            raise ValueError(f"{n} is not a unit mod {self.q}")
        return tuple(self.local_log(i, n) for i in range(len(self.generators)))

    @cached_property
    def log_matrix(self) -> np.ndarray:
        """Shape ``(ngens, q)``: local logs of every residue, -1 off the units."""
        q = self.q
        if q > LOG_TABLE_LIMIT:
            raise GuardError("log-table", f"q={q} exceeds {LOG_TABLE_LIMIT}")
        res = np.arange(q, dtype=np.int64)
        out = np.empty((len(self.generators), q), dtype=np.int64)
        for i in range(len(self.generators)):
            out[i] = self._local_table(i)[res % self._local[i][1]]
        out[:, ~self.unit_mask] = -1
        out.setflags(write=False)
        return out

    @cached_property
    def unit_mask(self) -> np.ndarray:
        mask = np.gcd(np.arange(self.q, dtype=np.int64), self.q) == 1
        mask.setflags(write=False)
        return mask

    @cached_property
    def units(self) -> np.ndarray:
        return np.flatnonzero(self.unit_mask)


def _crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    if m2 == 1:
        return r1 % m1
    return (r1 * m2 * pow(m2, -1, m1) + r2 * m1 * pow(m1, -1, m2)) % (m1 * m2)


@lru_cache(maxsize=1024)
def _basis_cached(q: int) -> UnitGroupBasis:
    return UnitGroupBasis(Modulus.of(q))


def build_basis(m: Modulus | int) -> UnitGroupBasis:
    return _basis_cached(as_modulus(m).q)


@dataclass(frozen=True)
class Conductor:
    d: int
    primitive_exps: tuple[int, ...]


class CharacterParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class DirichletCharacter:
    basis: UnitGroupBasis
    exps: tuple[int, ...]

    def __post_init__(self):
        if len(self.exps) != len(self.basis.orders):
            raise ValueError(f"expected {len(self.basis.orders)} exponents, got {len(self.exps)}")
        for e, o in zip(self.exps, self.basis.orders):
            if not 0 <= e < o:
                raise ValueError(f"exponent {e} outside [0, {o})")

    @property
    def q(self) -> int:
        return self.basis.q

    @property
    def modulus(self) -> Modulus:
        return self.basis.modulus

    @property
    def is_principal(self) -> bool:
        return not any(self.exps)

    @property
    def order(self) -> int:
        return lcm([o // math.gcd(e, o) for e, o in zip(self.exps, self.basis.orders)])

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def exponent_of(self, n: int) -> int:
        """``k`` with ``chi(n) = zeta_E**k`` (``E`` = basis exponent), or -1."""
        if math.gcd(n, self.q) != 1:
            return -1
        E = self.basis.exponent
        logs = self.basis.dlog(n)
        return sum(e * l * (E // o) for e, l, o in zip(self.exps, logs, self.basis.orders)) % E

    def __call__(self, n: int) -> CharValue:
        k = self.exponent_of(int(n))
        return ZERO if k < 0 else CharValue.root(k, self.basis.exponent)

    @cached_property
    def table(self) -> np.ndarray:
        """Exponents ``k`` (values ``zeta_E**k``) for every residue; -1 off units."""
        return character_table(self.basis, [self])[0]

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.basis, tuple((-e) % o for e, o in zip(self.exps, self.basis.orders)))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.basis is not self.basis:
            raise ValueError("characters have different moduli")
        return DirichletCharacter(self.basis, tuple((a + b) % o for a, b, o in zip(self.exps, other.exps, self.basis.orders)))

    def conductor(self) -> Conductor:
        return conductor(self)

    def is_primitive(self) -> bool:
        return conductor(self).d == self.q

    def induced_primitive(self) -> "DirichletCharacter":
        c = conductor(self)
        return DirichletCharacter(build_basis(c.d), c.primitive_exps)

    def theta(self) -> Fraction:
        return theta_for_character(self)

    def serialize(self) -> str:
        return f"{self.q}:exps=[{','.join(str(e) for e in self.exps)}]"

    def __str__(self) -> str:
        return self.serialize()


def principal_character(m: Modulus | int) -> DirichletCharacter:
    b = build_basis(m)
    return DirichletCharacter(b, (0,) * len(b.orders))


def iter_characters(m: Modulus | int) -> Iterator[DirichletCharacter]:
    b = build_basis(m)
    for exps in itertools.product(*(range(o) for o in b.orders)):
        yield DirichletCharacter(b, exps)


def all_characters(m: Modulus | int) -> list[DirichletCharacter]:
    """Every character mod ``q``; the principal character comes first."""
    m = as_modulus(m)
    if m.phi > MAX_CHARACTERS:
        raise GuardError("character-count", f"phi({m.q})={m.phi} exceeds {MAX_CHARACTERS}")
    return list(iter_characters(m))


def character_table(basis: UnitGroupBasis, chars: Sequence[DirichletCharacter]) -> np.ndarray:
    """Shape ``(len(chars), q)`` int32 table of value exponents mod ``basis.exponent``."""
    E = basis.exponent
    q = basis.q
    if not chars:
        return np.zeros((0, q), dtype=np.int32)
    if not basis.orders:
        out = np.zeros((len(chars), q), dtype=np.int32)
        out[:, ~basis.unit_mask] = -1
        return out
    scale = np.array([E // o for o in basis.orders], dtype=np.int64)
    X = np.array([c.exps for c in chars], dtype=np.int64) * scale
    L = basis.log_matrix
    K = np.zeros((len(chars), q), dtype=np.int64)
    for i in range(L.shape[0]):
        K = (K + np.outer(X[:, i], L[i])) % E
    K[:, ~basis.unit_mask] = -1
    return K.astype(np.int32)


def evaluate(chi: DirichletCharacter, n: int) -> CharValue:
    return chi(n)


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def conductor(chi: DirichletCharacter) -> Conductor:
    """Conductor from the exponent vector, one prime power at a time."""
    basis = chi.basis
    d = 1
    new_exps: list[int] = []
    i = 0
    for p, e in basis.modulus.factorization:
        if p == 2:
            if e == 1:
                continue
            a = chi.exps[i]
            b = chi.exps[i + 1] if e >= 3 else 0
            i += 2 if e >= 3 else 1
            if b == 0:
                if a:
                    d *= 4
                    new_exps.append(a)
                continue
            v = _vp(b, 2)
            f = e - v
            d *= 2**f
            new_exps.extend([a, b >> v])
        else:
            k = chi.exps[i]
            i += 1
            if k == 0:
                continue
            v = min(_vp(k, p), e - 1)
            f = e - v
            d *= p**f
            new_exps.append(k // p**v)
    return Conductor(d, tuple(new_exps))


def is_primitive(chi: DirichletCharacter) -> bool:
    return chi.is_primitive()


def induced_primitive(chi: DirichletCharacter) -> DirichletCharacter:
    return chi.induced_primitive()


def theta_for_character(chi: DirichletCharacter) -> Fraction:
    """1/2 when the conductor is cube-free, 5/6 otherwise."""
    return HALF if Modulus.of(conductor(chi).d).cube_free else FIVE_SIXTHS


def primitive_characters(m: Modulus | int) -> list[DirichletCharacter]:
    return [c for c in all_characters(m) if c.is_primitive()]


_CHAR_RE = re.compile(r"\s*(\d+)\s*:\s*exps\s*=\s*\[")


def parse_character(text: str) -> DirichletCharacter:
    """Inverse of :meth:`DirichletCharacter.serialize`, e.g. ``"12:exps=[1,0]"``."""
    m = _CHAR_RE.match(text)
    if not m:
        pos = len(text) - len(text.lstrip())
        if not text[pos : pos + 1].isdigit():
            raise CharacterParseError("expected modulus digits", pos)
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        raise CharacterParseError("expected ':exps=['", pos)
    q = int(m.group(1))
    if q < 1:
        raise CharacterParseError("modulus must be >= 1", m.start(1))
    pos = m.end()
    close = text.find("]", pos)
    if close < 0:
        raise CharacterParseError("missing ']'", len(text))
    if text[close + 1 :].strip():
        raise CharacterParseError("trailing characters", close + 1)
    body = text[pos:close]
    exps: list[int] = []
    if body.strip():
        offset = pos
        for part in body.split(","):
            tok = part.strip()
            if not re.fullmatch(r"\d+", tok):
                raise CharacterParseError(f"bad exponent {tok!r}", offset + len(part) - len(part.lstrip()))
            exps.append(int(tok))
            offset += len(part) + 1
    basis = build_basis(q)
    if len(exps) != len(basis.orders):
        raise CharacterParseError(f"modulus {q} needs {len(basis.orders)} exponents, got {len(exps)}", pos)
    for e, o in zip(exps, basis.orders):
        if e >= o:
            raise CharacterParseError(f"exponent {e} not below generator order {o}", pos)
    return DirichletCharacter(basis, tuple(exps))

"""Character sums over primes, prime powers and shifted primes.

Two accumulation modes are available everywhere:

``"exact"``
    Terms are binned by the exponent ``k`` of ``chi(n) = zeta_E**k``. With the
    prime-indicator kernel the bins hold integers, so identities can be checked
    in Z[zeta_E] (see :mod:`shiftprimes.cyclotomic`).
``"fast"``
    Complex double accumulation, compensated in the compiled kernel.

Sums over a fixed range are reduced to residue-class counts first, so the cost
of one more character is O(q) rather than O(pi(x)).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .characters import (
    DirichletCharacter,
    MAX_CHARACTERS,
    all_characters,
    build_basis,
    character_table,
    primitive_characters,
    theta_for_character,
)
from .cyclotomic import histogram_value
from .ntcore import GuardError, Modulus, as_modulus, euler_phi, log_integral
from .sieve import prime_array, prime_power_arrays, residue_counts

KERNELS = ("von-mangoldt", "prime-indicator")
MODES = ("exact", "fast")


def unit_roots(order: int) -> tuple[np.ndarray, np.ndarray]:
    """cos/sin of ``2 pi k / order``, exact at multiples of a quarter turn."""
    k = np.arange(order)
    ang = 2 * np.pi * k / order
    c, s = np.cos(ang), np.sin(ang)
    quarter = (4 * k) % order == 0
    idx = (4 * k[quarter]) // order
    c[quarter] = np.array([1.0, 0.0, -1.0, 0.0])[idx]
    s[quarter] = np.array([0.0, 1.0, 0.0, -1.0])[idx]
    return c, s


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


@dataclass
class SumAccumulator:
    """Accumulates ``sum w * zeta_order**k``.

    In exact mode the per-exponent histogram is kept; with integer weights it
    is exact. Merging is plain addition, so partial accumulators from disjoint
    ranges combine in any order.
    """

    order: int
    mode: str = "fast"
    histogram: np.ndarray = field(default=None)
    value: complex = 0j
    terms: int = 0
    _comp: complex = 0j

    def __post_init__(self):
        _check_mode(self.mode)
        if self.histogram is None:
            self.histogram = np.zeros(self.order, dtype=np.int64)
        self._cos, self._sin = unit_roots(self.order)

    def add_many(self, exponents, weights=None) -> None:
        exponents = np.asarray(exponents, dtype=np.int64)
        live = exponents >= 0
        ks = exponents[live]
        w = np.ones(ks.shape[0], dtype=np.int64) if weights is None else np.asarray(weights)[live]
        self.terms += ks.shape[0]
        if self.mode == "exact":
            if w.dtype.kind in "iu" and self.histogram.dtype.kind in "iu":
                self.histogram = self.histogram + _int_bincount(ks, w, self.order)
            else:
                self.histogram = self.histogram.astype(float) + np.bincount(ks, weights=w.astype(float), minlength=self.order)
        else:
            wf = w.astype(float)
            re = math.fsum(wf * self._cos[ks])
            im = math.fsum(wf * self._sin[ks])
            self._add(complex(re, im))

    def _add(self, z: complex) -> None:
        t = self.value + z
        # Neumaier, per component
        re = (self.value.real - t.real) + z.real if abs(self.value.real) >= abs(z.real) else (z.real - t.real) + self.value.real
        im = (self.value.imag - t.imag) + z.imag if abs(self.value.imag) >= abs(z.imag) else (z.imag - t.imag) + self.value.imag
        self._comp += complex(re, im)
        self.value = t

    def merge(self, other: "SumAccumulator") -> "SumAccumulator":
        if other.order != self.order or other.mode != self.mode:
            raise ValueError("cannot merge accumulators of different order or mode")
        out = SumAccumulator(self.order, self.mode)
        out.histogram = self.histogram + other.histogram
        out.terms = self.terms + other.terms
        out.value = self.value
        out._comp = self._comp
        out._add(other.value + other._comp)
        return out

    def result(self) -> complex:
        if self.mode == "exact":
            h = self.histogram.astype(float)
            return complex(math.fsum(h * self._cos), math.fsum(h * self._sin))
        return self.value + self._comp

    def exact_value(self) -> int | None:
        """The exact integer value, if the histogram is integral and rational."""
        if self.mode != "exact" or self.histogram.dtype.kind not in "iu":
            return None
        return histogram_value(self.histogram)


def _int_bincount(ks: np.ndarray, w: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order, dtype=np.int64)
    np.add.at(out, ks, w.astype(np.int64))
    return out


@dataclass(frozen=True)
class MaxOverPrefix:
    """``max_abs = max_{y <= x} |partial sum up to y|``; ``argmax_y = 1`` if all prefixes vanish."""

    x: int
    argmax_y: int
    max_abs: float


def _terms(kernel: str, y: int) -> tuple[np.ndarray, np.ndarray]:
    if kernel == "von-mangoldt":
        return prime_power_arrays(int(y))
    if kernel == "prime-indicator":
        p = prime_array(int(y))
        return p, np.ones(p.shape[0])
    raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")


def class_sums(chars: Sequence[DirichletCharacter], weights_by_residue, mode: str = "fast"):
    """``sum_r w[r] chi(r)`` for each character; ``w`` indexed by residue mod q.

    Returns ``(values, histograms)``; ``histograms`` is None in fast mode.
    """
    _check_mode(mode)
    if not chars:
        return np.zeros(0, dtype=complex), None
    basis = chars[0].basis
    E = basis.exponent
    w = np.asarray(weights_by_residue)
    table = character_table(basis, chars)
    live = table >= 0
    if mode == "fast":
        c, s = unit_roots(E)
        kk = np.where(live, table, 0)
        wf = w.astype(float)
        re = np.where(live, c[kk], 0.0) @ wf
        im = np.where(live, s[kk], 0.0) @ wf
        return re + 1j * im, None
    nchar = len(chars)
    flat = (table + E * np.arange(nchar)[:, None])[live]
    wl = np.broadcast_to(w, table.shape)[live]
    if w.dtype.kind in "iu":
        hist = np.zeros(nchar * E, dtype=np.int64)
        np.add.at(hist, flat, wl.astype(np.int64))
    else:
        hist = np.bincount(flat, weights=wl.astype(float), minlength=nchar * E)
    hist = hist.reshape(nchar, E)
    c, s = unit_roots(E)
    hf = hist.astype(float)
    return hf @ c + 1j * (hf @ s), hist


def _residue_weights(n: np.ndarray, w: np.ndarray, q: int) -> np.ndarray:
    if np.all(w == 1.0):
        return np.bincount(n % q, minlength=q).astype(np.int64)
    return np.bincount(n % q, weights=w, minlength=q)


def psi_chi(y: int, chi: DirichletCharacter, mode: str = "fast") -> complex:
    """Chebyshev function ``sum_{n <= y} Lambda(n) chi(n)``."""
    n, lam = _terms("von-mangoldt", y)
    vals, _ = class_sums([chi], _residue_weights(n, lam, chi.q), mode)
    return complex(vals[0])


def prime_char_sum(y: int, chi: DirichletCharacter, mode: str = "fast") -> complex:
    """``sum_{p <= y} chi(p)``."""
    vals, _ = class_sums([chi], residue_counts(y, chi.q).counts, mode)
    return complex(vals[0])


def _exact_prefix_scan(ks: np.ndarray, weights: np.ndarray, order: int, block: int = 2048):
    """Prefix maxima from per-class running totals (the exact-mode path)."""
    c, s = unit_roots(order)
    live = ks >= 0
    integral = np.all(weights == np.round(weights))
    running = np.zeros(order, dtype=np.int64 if integral else float)
    best, arg = 0.0, -1
    n = ks.shape[0]
    for b0 in range(0, n, block):
        kb = ks[b0 : b0 + block]
        lb = live[b0 : b0 + block]
        wb = np.where(lb, weights[b0 : b0 + block], 0)
        onehot = np.zeros((kb.shape[0], order), dtype=running.dtype)
        onehot[np.arange(kb.shape[0])[lb], kb[lb]] = wb[lb].astype(running.dtype)
        cum = np.cumsum(onehot, axis=0) + running
        running = cum[-1].copy()
        cf = cum.astype(float)
        mag = (cf @ c) ** 2 + (cf @ s) ** 2
        i = int(np.argmax(mag))
        if mag[i] > best:
            best, arg = float(mag[i]), b0 + i
    rf = running.astype(float)
    return complex(math.fsum(rf * c), math.fsum(rf * s)), math.sqrt(best), arg, running


def scan_characters(chars: Sequence[DirichletCharacter], x: int, kernel: str = "von-mangoldt",
                    mode: str = "fast", threads: int = 1) -> list[tuple[complex, MaxOverPrefix]]:
    """Final value and prefix maximum for each character, in one pass over the terms."""
    _check_mode(mode)
    if not chars:
        return []
    n, w = _terms(kernel, x)
    basis = chars[0].basis
    q, E = basis.q, basis.exponent
    table = character_table(basis, chars)
    residues = np.ascontiguousarray(n % q, dtype=np.int64)
    weights = np.ascontiguousarray(w, dtype=np.float64)

    def finish(v, best, arg):
        return v, MaxOverPrefix(x, int(n[arg]) if arg >= 0 else 1, float(best))

    if mode == "exact":
        out = []
        for row in table:
            v, best, arg, _ = _exact_prefix_scan(row[residues], weights, E)
            out.append(finish(v, best, arg))
        return out

    cos_t, sin_t = unit_roots(E)
    chunks = np.array_split(np.arange(len(chars)), max(1, min(threads, len(chars))))

    def run(idx):
        tt = np.ascontiguousarray(table[idx].T, dtype=np.int32)
        return kernels.prefix_char_scan(residues, weights, tt, cos_t, sin_t)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(idx) for idx in chunks]
    re = np.concatenate([p[0] for p in parts])
    im = np.concatenate([p[1] for p in parts])
    best = np.concatenate([p[2] for p in parts])
    arg = np.concatenate([p[3] for p in parts])
    return [finish(complex(re[i], im[i]), best[i], int(arg[i])) for i in range(len(chars))]


def max_over_prefix(x: int, chi: DirichletCharacter, kernel: str = "von-mangoldt", mode: str = "fast") -> MaxOverPrefix:
    return scan_characters([chi], x, kernel, mode)[0][1]


def t_sum(x: int, m: Modulus | int, kernel: str = "von-mangoldt", mode: str = "fast", threads: int = 1) -> float:
    """``sum_{chi mod q} max_{y <= x} |partial sum|`` with the chosen kernel."""
    chars = all_characters(as_modulus(m))
    return math.fsum(r.max_abs for _, r in scan_characters(chars, x, kernel, mode, threads))


def T_sum(x: int, Q: int, kernel: str = "von-mangoldt", mode: str = "fast", threads: int = 1) -> float:
    """``sum_{q <= Q} q/phi(q) sum*_chi max_{y <= x} |psi(y, chi)|`` over primitive characters.

    The character mod 1 is counted as primitive, so ``Q = 1`` gives ``psi(x)``.
    """
    total_chars = 0
    for q in range(1, Q + 1):
        total_chars += euler_phi(q)
        if total_chars > MAX_CHARACTERS:
            raise GuardError("character-count", f"more than {MAX_CHARACTERS} characters with modulus <= {Q}")
    parts = []
    for q in range(1, Q + 1):
        prim = primitive_characters(q)
        if not prim:
            continue
        inner = math.fsum(r.max_abs for _, r in scan_characters(prim, x, kernel, mode, threads))
        parts.append(q / euler_phi(q) * inner)
    return math.fsum(parts)


def _shifted_weights(x: int, q: int, a: int) -> np.ndarray:
    """``w[t] = #{p <= x : p + a = t (mod q)}``."""
    return np.roll(residue_counts(x, q).counts, a % q)


def shifted_char_sum(chi: DirichletCharacter, x: int, a: int, mode: str = "fast") -> complex | float:
    """``T(chi, x) = sum_{p <= x} chi(p + a)``; a plain count for the principal character."""
    if math.gcd(a, chi.q) != 1:
        raise ValueError(f"gcd(a, q) = gcd({a}, {chi.q}) > 1")
    w = _shifted_weights(x, chi.q, a)
    vals, _ = class_sums([chi], w, mode)
    if chi.is_principal:
        return float(vals[0].real)
    return complex(vals[0])


def shifted_char_sums(m: Modulus | int, x: int, a: int, mode: str = "fast"):
    """``T(chi, x)`` for every character mod q, as ``(chars, values, histograms)``."""
    m = as_modulus(m)
    if math.gcd(a, m.q) != 1:
        raise ValueError(f"gcd(a, q) = gcd({a}, {m.q}) > 1")
    chars = all_characters(m)
    vals, hist = class_sums(chars, _shifted_weights(x, m.q, a), mode)
    return chars, vals, hist


@dataclass(frozen=True)
class NontrivialityRow:
    exponent: float
    x: int
    max_ratio: float | None
    argmax_character: str | None
    theta: Fraction | None
    above_theta: bool
    note: str = ""


def nontriviality_report(m: Modulus | int, a: int, exponents: Sequence[float], mode: str = "fast") -> list[NontrivialityRow]:
    """For ``x = ceil(q**e)``: ``max_{chi != chi0} |T(chi, x)| / x`` and whether ``e > theta``."""
    m = as_modulus(m)
    if math.gcd(a, m.q) != 1:
        raise ValueError(f"gcd(a, q) = gcd({a}, {m.q}) > 1")
    rows = []
    for e in exponents:
        x = math.ceil(m.q ** float(e))
        if x < 2:
            rows.append(NontrivialityRow(float(e), x, None, None, None, False, "below range"))
            continue
        chars, vals, _ = shifted_char_sums(m, x, a, mode)
        if len(chars) < 2:
            rows.append(NontrivialityRow(float(e), x, None, None, None, False, "no non-principal characters"))
            continue
        mags = np.abs(vals[1:])
        i = int(np.argmax(mags))
        chi = chars[1 + i]
        theta = theta_for_character(chi)
        rows.append(NontrivialityRow(float(e), x, float(mags[i]) / x, chi.serialize(), theta, float(e) > theta))
    return rows


def bv_threshold(x: float, A: float) -> float:
    """Largest modulus in the averaged progression bound, ``sqrt(x) (ln x)^(-A-3.5)``."""
    return math.sqrt(x) * math.log(x) ** (-A - 3.5)


def bv_error_sum(x: int, Qcap: int) -> float:
    """``sum_{q <= Qcap} max_{2 <= y <= x} max_{(l,q)=1} |pi(y;q,l) - Li(y)/phi(q)|``.

    ``y`` runs over integers. Between consecutive primes the deviation is
    monotone, so it is enough to look at each prime, one below each prime,
    and at ``x``.
    """
    x, Qcap = int(x), int(Qcap)
    if Qcap < 1:
        raise ValueError("Qcap must be >= 1")
    primes = prime_array(x)
    li_at = log_integral(primes.astype(float)) if primes.size else np.zeros(0)
    before = primes.astype(float) - 1.0
    li_before = np.full(primes.shape[0], np.nan)
    ok = before >= 2
    if np.any(ok):
        li_before[ok] = log_integral(before[ok])
    li_end = log_integral(float(x))
    parts = []
    for q in range(1, Qcap + 1):
        units = build_basis(q).unit_mask
        unit_index = np.full(q, -1, dtype=np.int64)
        unit_index[units] = np.arange(int(units.sum()))
        parts.append(kernels.bv_scan(np.ascontiguousarray(primes % q), unit_index, int(units.sum()),
                                     li_at, li_before, float(li_end), euler_phi(q)))
    return math.fsum(parts)

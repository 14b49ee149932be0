"""Exact arithmetic in Z[zeta_E] for exponent histograms.

A histogram ``c`` of length ``E`` stands for ``sum_k c[k] * zeta_E**k``. The
representation is not unique; :func:`reduce_histogram` maps it to the power
basis ``1, zeta, ..., zeta**(phi(E)-1)``, where equality is decidable.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .ntcore import divisors


@lru_cache(maxsize=512)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    # x^n - 1 divided by Phi_d for every proper divisor d.
    num = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n):
        if d == n:
            continue
        num = _exact_div(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        coef = num[i + len(den) - 1] // lead
        out[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("non-exact polynomial division")
    return out


@lru_cache(maxsize=512)
def reduction_matrix(order: int) -> np.ndarray:
    """Row ``k`` holds the power-basis coordinates of ``zeta_order**k``.

    Object dtype keeps the later products exact.
    """
    phi = cyclotomic_poly(order)
    deg = len(phi) - 1
    rows = np.zeros((order, deg), dtype=object)
    cur = [0] * deg
    cur[0] = 1
    for k in range(order):
        rows[k, :] = cur
        # multiply by x and reduce with the monic Phi
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:-1])]
    return rows


def reduce_histogram(hist) -> tuple[int, ...]:
    hist = np.asarray(hist)
    red = reduction_matrix(len(hist))
    return tuple(int(v) for v in hist.astype(object) @ red)


def histogram_value(hist):
    """Exact value of a histogram when it is rational, else ``None``.

    Returns an ``int`` (the histograms here have integer weights).
    """
    coords = reduce_histogram(hist)
    if any(coords[1:]):
        return None
    return coords[0]


def convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product in the group ring Z[Z/E] (cyclic convolution), exact."""
    order = len(a)
    out = np.zeros(order, dtype=object)
    aa = a.astype(object)
    for k in np.flatnonzero(b):
        out += np.roll(aa, int(k)) * int(b[k])
    return out


def project(hist, order: int | None = None) -> complex:
    """Floating-point value of a histogram."""
    hist = np.asarray(hist, dtype=float)
    order = order or len(hist)
    ang = 2 * np.pi * np.arange(order) / order
    return complex(hist @ np.cos(ang), hist @ np.sin(ang))

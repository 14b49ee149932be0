"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``_ckernels`` module exactly; see
:mod:`shiftprimes.kernels` for the dispatch.
"""

from __future__ import annotations

import numpy as np

# Upper bound on nchar * nterms elements materialised at once.
_CHUNK_ELEMS = 1 << 22


def sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality flags (uint8) for every integer in ``[lo, hi]``."""
    n = hi - lo + 1
    flags = np.ones(n, dtype=np.uint8)
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo :: p] = 0
    if lo < 2:
        flags[: min(n, 2 - lo)] = 0
    return flags


def prefix_char_scan(residues, weights, table_t, cos_t, sin_t):
    """Final sums and prefix maxima of ``sum_i w_i chi(r_i)`` for many characters.

    ``table_t`` has shape ``(q, nchar)``; entry ``k >= 0`` means the value
    ``exp(2 pi i k / E)``, ``-1`` means zero. Returns ``(re, im, max_abs,
    argmax)`` where ``argmax`` is the term index of the first maximal prefix or
    -1 if every prefix vanishes.
    """
    residues = np.asarray(residues, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    q, nchar = table_t.shape
    n = residues.shape[0]
    re = np.zeros(nchar)
    im = np.zeros(nchar)
    best = np.zeros(nchar)
    arg = np.full(nchar, -1, dtype=np.int64)
    if n == 0 or nchar == 0:
        return re, im, best, arg
    step = max(1, _CHUNK_ELEMS // n)
    for c0 in range(0, nchar, step):
        ks = table_t[residues, c0 : c0 + step].T
        live = ks >= 0
        kk = np.where(live, ks, 0)
        w = np.where(live, weights, 0.0)
        pre_re = np.cumsum(w * cos_t[kk], axis=1)
        pre_im = np.cumsum(w * sin_t[kk], axis=1)
        mag = pre_re * pre_re + pre_im * pre_im
        idx = np.argmax(mag, axis=1)
        rows = np.arange(ks.shape[0])
        top = mag[rows, idx]
        re[c0 : c0 + step] = pre_re[:, -1]
        im[c0 : c0 + step] = pre_im[:, -1]
        best[c0 : c0 + step] = np.sqrt(top)
        arg[c0 : c0 + step] = np.where(top > 0, idx, -1)
    return re, im, best, arg


def pair_histograms(table, l: int, order: int) -> np.ndarray:
    """``hist[m, k] = #{c : table[c, m] - table[c, l] = k (mod order)}``."""
    nchar, nunits = table.shape
    diff = (table - table[:, l : l + 1]) % order
    flat = diff + order * np.arange(nunits)[None, :]
    return np.bincount(flat.ravel(), minlength=nunits * order).reshape(nunits, order).astype(np.int64)


def bv_scan(residues, unit_index, n_units: int, li_at, li_before, li_end: float, phi: int) -> float:
    """Max over integer ``y`` and unit classes of ``|pi(y;q,l) - Li(y)/phi|``.

    ``li_at[i]`` is Li at the i-th prime, ``li_before[i]`` Li one below it
    (NaN when that point is below 2).
    """
    residues = np.asarray(residues, dtype=np.int64)
    cls = unit_index[residues]
    n = cls.shape[0]
    if n == 0:
        return 0.0
    hi_after = np.zeros(n)
    lo_after = np.zeros(n)
    running_hi = np.full(n, -np.inf)
    running_lo = np.full(n, np.inf)
    for u in range(n_units):
        counts = np.cumsum(cls == u)
        np.maximum(running_hi, counts, out=running_hi)
        np.minimum(running_lo, counts, out=running_lo)
    hi_after[:] = running_hi
    lo_after[:] = running_lo
    hi_before = np.concatenate(([0.0], hi_after[:-1]))
    lo_before = np.concatenate(([0.0], lo_after[:-1]))
    at = li_at / phi
    dev = np.maximum(hi_after - at, at - lo_after)
    before = li_before / phi
    ok = ~np.isnan(before)
    dev_b = np.maximum(hi_before[ok] - before[ok], before[ok] - lo_before[ok])
    end = li_end / phi
    dev_end = max(hi_after[-1] - end, end - lo_after[-1])
    out = float(dev.max())
    if dev_b.size:
        out = max(out, float(dev_b.max()))
    return max(out, float(dev_end))

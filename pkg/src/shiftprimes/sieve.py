"""Segmented sieve, von Mangoldt weights and prime counts in residue classes."""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator

import numpy as np

from . import kernels

DEFAULT_SEGMENT = 1 << 20
MAX_SIEVE = 1 << 50
CACHE_MAGIC = b"SPSV1"
_HEADER = struct.Struct("<5sqqq")


@lru_cache(maxsize=4)
def base_primes(limit: int) -> np.ndarray:
    """Primes up to ``limit`` by a plain (unsegmented) sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


class SegmentCache:
    """On-disk cache of sieved segments.

    File layout: magic ``SPSV1``, then ``lo``, ``hi``, ``segment_size`` as
    little-endian int64, then one bit per integer of ``[lo, hi]`` (LSB first).
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, lo: int, hi: int, segment_size: int) -> Path:
        return self.directory / f"seg_{lo}_{hi}_{segment_size}.spsv"

    def load(self, lo: int, hi: int, segment_size: int) -> np.ndarray | None:
        path = self.path(lo, hi, segment_size)
        if not path.exists():
            return None
        return read_segment_file(path, lo, hi)

    def store(self, lo: int, hi: int, segment_size: int, flags: np.ndarray) -> None:
        write_segment_file(self.path(lo, hi, segment_size), lo, hi, segment_size, flags)


def write_segment_file(path: Path, lo: int, hi: int, segment_size: int, flags: np.ndarray) -> None:
    bits = np.packbits(flags.astype(bool), bitorder="little")
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, lo, hi, segment_size))
        fh.write(bits.tobytes())
    tmp.replace(path)


def read_segment_file(path: Path, lo: int | None = None, hi: int | None = None) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, flo, fhi, _ = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if (lo is not None and flo != lo) or (hi is not None and fhi != hi):
        raise ValueError(f"{path}: range [{flo},{fhi}] does not match [{lo},{hi}]")
    n = fhi - flo + 1
    bits = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size)
    if bits.size * 8 < n:
        raise ValueError(f"{path}: bitmap too short")
    return np.unpackbits(bits, count=n, bitorder="little")


@dataclass(frozen=True)
class SieveRange:
    lo: int
    hi: int
    segment_size: int = DEFAULT_SEGMENT

    def __post_init__(self):
        if self.lo < 2:
            object.__setattr__(self, "lo", 2)
        if self.hi > MAX_SIEVE:
            raise ValueError(f"sieving beyond 2**50 is not supported (hi={self.hi})")
        if self.segment_size <= 0 or self.segment_size & (self.segment_size - 1):
            raise ValueError("segment_size must be a power of two")

    @property
    def empty(self) -> bool:
        return self.hi < self.lo

    def segments(self) -> list[tuple[int, int]]:
        if self.empty:
            return []
        s = self.segment_size
        return [(a, min(a + s - 1, self.hi)) for a in range(self.lo, self.hi + 1, s)]

    def _segment_primes(self, seg: tuple[int, int], cache: SegmentCache | None) -> np.ndarray:
        lo, hi = seg
        flags = cache.load(lo, hi, self.segment_size) if cache is not None else None
        if flags is None:
            flags = kernels.sieve_segment(lo, hi, base_primes(math.isqrt(self.hi)))
            if cache is not None:
                cache.store(lo, hi, self.segment_size, flags)
        return np.flatnonzero(flags).astype(np.int64) + lo

    def prime_segments(self, cache: SegmentCache | None = None, threads: int = 1) -> Iterator[np.ndarray]:
        """Primes of each segment, in order. Segments are sieved independently."""
        segs = self.segments()
        if threads > 1 and len(segs) > 1:
            with ThreadPoolExecutor(threads) as pool:
                yield from pool.map(lambda s: self._segment_primes(s, cache), segs)
        else:
            for s in segs:
                yield self._segment_primes(s, cache)

    def primes(self, cache: SegmentCache | None = None, threads: int = 1) -> np.ndarray:
        parts = list(self.prime_segments(cache, threads))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


@lru_cache(maxsize=8)
def _prime_array_cached(x: int) -> np.ndarray:
    arr = SieveRange(2, x).primes()
    arr.setflags(write=False)
    return arr


def prime_array(x: int) -> np.ndarray:
    """All primes ``<= x`` as a read-only int64 array."""
    x = int(x)
    if x < 2:
        return np.zeros(0, dtype=np.int64)
    return _prime_array_cached(x)


def primes_up_to(x: int) -> Iterator[int]:
    """Stream the primes in ``[2, x]`` in ascending order."""
    if x < 2:
        return
    for seg in SieveRange(2, int(x)).prime_segments():
        yield from (int(p) for p in seg)


@lru_cache(maxsize=8)
def prime_power_arrays(y: int) -> tuple[np.ndarray, np.ndarray]:
    """``(n, Lambda(n))`` for every prime power ``n <= y``, sorted by ``n``."""
    primes = prime_array(y)
    ns = [primes]
    logs = [np.log(primes.astype(float))]
    for p in primes[: np.searchsorted(primes, math.isqrt(y), side="right")]:
        p = int(p)
        pk = p * p
        powers = []
        while pk <= y:
            powers.append(pk)
            pk *= p
        ns.append(np.array(powers, dtype=np.int64))
        logs.append(np.full(len(powers), math.log(p)))
    n = np.concatenate(ns)
    lam = np.concatenate(logs)
    order = np.argsort(n, kind="stable")
    n, lam = n[order], lam[order]
    n.setflags(write=False)
    lam.setflags(write=False)
    return n, lam


def von_mangoldt_stream(y: int) -> Iterator[tuple[int, float]]:
    n, lam = prime_power_arrays(int(y))
    for a, b in zip(n.tolist(), lam.tolist()):
        yield a, b


@dataclass(frozen=True)
class ResidueCountTable:
    """``counts[r]`` = number of primes ``p <= x`` with ``p = r (mod q)``."""

    q: int
    x: int
    counts: np.ndarray

    def __getitem__(self, r: int) -> int:
        return int(self.counts[r % self.q])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def residue_counts(x: int, q: int, threads: int = 1) -> ResidueCountTable:
    """Classify the primes up to ``x`` modulo ``q`` in one pass.

    Segments are counted independently and summed, so the result does not
    depend on ``threads``.
    """
    x, q = int(x), int(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    if x < 2:
        return ResidueCountTable(q, x, np.zeros(q, dtype=np.int64))
    if threads > 1:
        parts = [np.bincount(seg % q, minlength=q) for seg in SieveRange(2, x).prime_segments(threads=threads)]
        counts = np.sum(parts, axis=0).astype(np.int64)
    else:
        counts = np.bincount(prime_array(x) % q, minlength=q).astype(np.int64)
    counts.setflags(write=False)
    return ResidueCountTable(q, x, counts)


def prime_count_progression(x: int, q: int, l: int) -> int:
    """``pi(x; q, l)``."""
    return residue_counts(x, q)[l]

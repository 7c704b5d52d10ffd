"""Seeded hashing and index derivation.

Each key is hashed exactly once into a 128-bit master hash (two 64-bit
halves).  Everything downstream — bucket index, class, candidate cell
indices, retrieval equations — is derived from those halves by cheap
multiply-xorshift remixing, so both construction and queries scan the
key bytes a single time and agree bit for bit.

Hash-to-range mapping uses fixed-point multiplication ``(h * m) >> 64``
instead of a modulo; the bias is at most ``m / 2**64``.

Scalar functions operate on Python ints; the ``*_many`` variants are
numpy-vectorized and produce identical values (wrap-around uint64
semantics on both paths).
"""

from __future__ import annotations

import hashlib
from typing import NamedTuple, Sequence

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
MASK32 = 0xFFFFFFFF

# splitmix64 finalizer constants
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
# golden-ratio increment, used to spread seed values
_GOLDEN = 0x9E3779B97F4A7C15
# multiplier folding the high half into the low half for cell derivation
_FOLD = 0xFF51AFD7ED558CCD
_CELL_SALT = 0xD1B54A32D192ED03

#: candidate-cell counts for the three key classes
CLASS_DEGREES = (2, 4, 8)


class MasterHash(NamedTuple):
    """128-bit fingerprint of a key under a fixed global seed."""

    hi: int
    lo: int


def mix64(x: int) -> int:
    """splitmix64 finalizer: bijective, strong avalanche."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def master_hash(key: bytes, seed: int) -> MasterHash:
    """Hash a key into 128 bits, keyed by the 64-bit global seed."""
    d = hashlib.blake2b(
        key, digest_size=16, key=(seed & MASK64).to_bytes(8, "little")
    ).digest()
    return MasterHash(
        int.from_bytes(d[:8], "little"), int.from_bytes(d[8:], "little")
    )


def master_hash_many(
    keys: Sequence[bytes], seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`master_hash`; returns (hi, lo) uint64 arrays."""
    k = (seed & MASK64).to_bytes(8, "little")
    blake2b = hashlib.blake2b
    parts = [blake2b(key, digest_size=16, key=k).digest() for key in keys]
    if not parts:
        e = np.empty(0, dtype=np.uint64)
        return e, e.copy()
    flat = np.frombuffer(b"".join(parts), dtype="<u8").reshape(-1, 2)
    return np.ascontiguousarray(flat[:, 0]), np.ascontiguousarray(flat[:, 1])


# ---------------------------------------------------------------------------
# derivation: bucket / class / cell


def bucket_of(h: MasterHash, num_buckets: int) -> int:
    """Bucket index in [0, num_buckets), uniform, from the high half."""
    return (h.hi * num_buckets) >> 64


def class_thresholds(p1: float, p2: float) -> tuple[int, int]:
    """64-bit comparison thresholds for the class split.

    Quantization error of the fractions is below 2**-32.
    """
    if p1 < 0 or p2 < 0 or p1 + p2 > 1 + 1e-9:
        raise ValueError("class fractions must be non-negative with p1+p2 <= 1")
    t1 = min(int(p1 * 2.0**64), MASK64)
    t2 = min(int((p1 + p2) * 2.0**64), MASK64)
    return t1, max(t1, t2)


def class_of(h: MasterHash, p1: float, p2: float) -> int:
    """Key class as its candidate-cell count: 2, 4, or 8.

    P[2] = p1, P[4] = p2, P[8] = 1 - p1 - p2, from the low half only, so
    the class is independent of the bucket index.
    """
    t1, t2 = class_thresholds(p1, p2)
    if h.lo < t1:
        return 2
    if h.lo < t2:
        return 4
    return 8


def _cell_key(bucket_seed: int, fn_index: int) -> int:
    return (bucket_seed * _GOLDEN + fn_index * _M1 + _CELL_SALT) & MASK64


def fold_hash(h: MasterHash) -> int:
    """Combine both halves into one 64-bit word for cell derivation."""
    return (h.lo ^ ((h.hi * _FOLD) & MASK64)) & MASK64


def cell_of(h: MasterHash, bucket_seed: int, fn_index: int, m: int) -> int:
    """Candidate cell in [0, m) for hash function ``fn_index`` under a seed."""
    z = mix64(fold_hash(h) ^ _cell_key(bucket_seed, fn_index))
    return (z * m) >> 64


# ---------------------------------------------------------------------------
# numpy batch variants (exact same arithmetic, wrap-around uint64)


def mix64_many(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def umulhi(a: np.ndarray, b) -> np.ndarray:
    """High 64 bits of the 64x64 product, elementwise."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    ah = a >> np.uint64(32)
    al = a & np.uint64(MASK32)
    bh = b >> np.uint64(32)
    bl = b & np.uint64(MASK32)
    t = al * bl
    mid1 = ah * bl + (t >> np.uint64(32))
    mid2 = al * bh + (mid1 & np.uint64(MASK32))
    return ah * bh + (mid1 >> np.uint64(32)) + (mid2 >> np.uint64(32))


def bucket_of_many(hi: np.ndarray, num_buckets: int) -> np.ndarray:
    return umulhi(hi, np.uint64(num_buckets))


def class_of_many(lo: np.ndarray, t1: int, t2: int) -> np.ndarray:
    """Degrees (2/4/8) for an array of low halves, given thresholds."""
    deg = np.full(len(lo), 8, dtype=np.uint8)
    deg[lo < np.uint64(t2)] = 4
    deg[lo < np.uint64(t1)] = 2
    return deg


def fold_hash_many(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    return lo ^ (hi * np.uint64(_FOLD))


def cell_of_many(hi: np.ndarray, lo: np.ndarray, bucket_seed, fn_index, m) -> np.ndarray:
    """Vectorized :func:`cell_of`; seed, fn_index, and m may be arrays."""
    # 1-d minimum: 0-d uint64 arithmetic raises overflow warnings
    seed = np.atleast_1d(np.asarray(bucket_seed, dtype=np.uint64))
    fidx = np.atleast_1d(np.asarray(fn_index, dtype=np.uint64))
    key = seed * np.uint64(_GOLDEN) + fidx * np.uint64(_M1) + np.uint64(_CELL_SALT)
    z = mix64_many(fold_hash_many(hi, lo) ^ key)
    return umulhi(z, m)

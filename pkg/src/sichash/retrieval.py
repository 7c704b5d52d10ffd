"""Static r-bit retrieval: an immutable map from a fixed key set to
r-bit values, r in {1, 2, 3}.

Each key is assigned one linear equation over GF(2): a start slot
``s`` in ``[0, num_slots - band_width]`` plus a ``band_width``-bit
coefficient pattern whose first bit is always set, so the pivot search
never leaves the band.  Solving the system in start order keeps
elimination local and nearly linear.  Queries for keys outside the
construction set return an arbitrary (but deterministic) r-bit value,
never an error.

The solution is stored as ``r`` separate bit planes; a query is one
64-bit window fetch and popcount per plane.  Slot count is
``ceil(num_keys * (1 + epsilon))`` (with a one-band floor), so the
payload stays within ``r * num_keys * (1 + epsilon) + O(1)`` bits.

Serialization: ``SHRS0001 | u8 r | u64 num_slots | u64 seed |
u32 band_width | u64 num_keys | r x word array``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._wire import Reader, Writer
from .errors import ConstructionError
from .hashing import (
    MASK64,
    MasterHash,
    fold_hash,
    fold_hash_many,
    mix64,
    mix64_many,
    umulhi,
)

_MAGIC = b"SHRS0001"

# salts separating the start-position and coefficient derivations
_START_SALT = 0xA24BAED4963EE407
_COEFF_SALT = 0x9FB21C651E98DF25

DEFAULT_EPSILON = 0.10
DEFAULT_BAND_WIDTH = 64
DEFAULT_MAX_SEED_RETRIES = 16


def _row_keys(seed: int) -> tuple[int, int]:
    ks = (seed * 0x9E3779B97F4A7C15 + _START_SALT) & MASK64
    kc = (seed * 0xC2B2AE3D27D4EB4F + _COEFF_SALT) & MASK64
    return ks, kc


def _rows_many(
    hi: np.ndarray, lo: np.ndarray, seed: int, num_slots: int, band_width: int
) -> tuple[np.ndarray, np.ndarray]:
    ks, kc = _row_keys(seed)
    starts = umulhi(mix64_many(hi ^ np.uint64(ks)), np.uint64(num_slots - band_width + 1))
    # the coefficient folds in both halves: keys sharing one half must
    # still receive distinct equations
    coeffs = mix64_many(fold_hash_many(hi, lo) ^ np.uint64(kc))
    if band_width < 64:
        coeffs &= np.uint64((1 << band_width) - 1)
    coeffs |= np.uint64(1)
    return starts, coeffs


def _row_scalar(
    hi: int, lo: int, seed: int, num_slots: int, band_width: int
) -> tuple[int, int]:
    ks, kc = _row_keys(seed)
    start = (mix64(hi ^ ks) * (num_slots - band_width + 1)) >> 64
    coeff = mix64(fold_hash(MasterHash(hi, lo)) ^ kc)
    if band_width < 64:
        coeff &= (1 << band_width) - 1
    return start, coeff | 1


@dataclass
class RetrievalStore:
    """Solved retrieval structure; immutable and thread-safe for reads."""

    r: int
    num_slots: int
    seed: int
    band_width: int
    num_keys: int
    planes: list[np.ndarray]  # r word arrays, each padded with one extra word

    @classmethod
    def build(
        cls,
        hashes,
        values,
        r: int,
        *,
        epsilon: float = DEFAULT_EPSILON,
        band_width: int = DEFAULT_BAND_WIDTH,
        base_seed: int = 0,
        max_seed_retries: int = DEFAULT_MAX_SEED_RETRIES,
    ) -> "RetrievalStore":
        """Build a store mapping each hash to its r-bit value.

        ``hashes`` is either a (hi, lo) pair of uint64 arrays or a
        sequence of :class:`MasterHash`.  All hashes must be distinct and
        all values below ``2**r``.  Construction retries with an
        incremented seed when the linear system is unsolvable.
        """
        if r not in (1, 2, 3):
            raise ValueError("r must be 1, 2, or 3")
        if not 1 <= band_width <= 64:
            raise ValueError("band_width must be in [1, 64]")
        hi, lo = _as_hash_arrays(hashes)
        values = np.asarray(values, dtype=np.uint64)
        if len(values) != len(hi):
            raise ValueError("hashes and values must have equal length")
        n = len(hi)
        if n and int(values.max()) >> r:
            raise ValueError("value does not fit in r bits")
        if n:
            pairs = np.stack([hi, lo])
            order = np.lexsort(pairs)
            if np.any(
                (hi[order][1:] == hi[order][:-1]) & (lo[order][1:] == lo[order][:-1])
            ):
                raise ValueError("duplicate key")
        if n == 0:
            return cls(r, 0, base_seed, band_width, 0, [np.zeros(1, np.uint64) for _ in range(r)])

        num_slots = max(band_width, math.ceil(n * (1.0 + epsilon)))
        for attempt in range(max_seed_retries):
            seed = base_seed + attempt
            planes = _solve(hi, lo, values, r, seed, num_slots, band_width)
            if planes is not None:
                return cls(r, num_slots, seed, band_width, n, planes)
        raise ConstructionError(
            "retrieval construction failed after "
            f"{max_seed_retries} seeds (pathological input or epsilon too small)"
        )

    # -- queries ---------------------------------------------------------

    def query(self, h: MasterHash) -> int:
        """Stored value for a construction key; arbitrary value otherwise."""
        if self.num_slots == 0:
            return 0
        s, c = _row_scalar(h.hi, h.lo, self.seed, self.num_slots, self.band_width)
        w0, off = s >> 6, s & 63
        out = 0
        for k, plane in enumerate(self.planes):
            window = (int(plane[w0]) >> off) | ((int(plane[w0 + 1]) << (64 - off)) & MASK64)
            out |= ((window & c).bit_count() & 1) << k
        return out

    def query_many(self, hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`query`."""
        if self.num_slots == 0:
            return np.zeros(len(hi), dtype=np.uint8)
        starts, coeffs = _rows_many(hi, lo, self.seed, self.num_slots, self.band_width)
        w0 = (starts >> np.uint64(6)).astype(np.int64)
        off = starts & np.uint64(63)
        out = np.zeros(len(hi), dtype=np.uint8)
        shift = (np.uint64(64) - off) & np.uint64(63)  # off=0 handled by the mask below
        high_mask = np.where(off == np.uint64(0), np.uint64(0), ~np.uint64(0))
        for k, plane in enumerate(self.planes):
            window = (plane[w0] >> off) | ((plane[w0 + 1] << shift) & high_mask)
            bit = np.bitwise_count(window & coeffs).astype(np.uint8) & np.uint8(1)
            out |= bit << np.uint8(k)
        return out

    # -- accounting and serialization ------------------------------------

    def solution_bits(self) -> int:
        """Bits occupied by the solved bit planes (the dominant payload)."""
        return self.r * self.num_slots

    def bits(self) -> int:
        """Exact serialized size in bits."""
        return len(self.to_bytes()) * 8

    def bits_per_key(self) -> float:
        return self.bits() / self.num_keys if self.num_keys else 0.0

    def write(self, w: Writer) -> None:
        w.magic(_MAGIC)
        w.u8(self.r)
        w.u64(self.num_slots)
        w.u64(self.seed)
        w.u32(self.band_width)
        w.u64(self.num_keys)
        for plane in self.planes:
            w.words(plane)

    @classmethod
    def read(cls, r: Reader) -> "RetrievalStore":
        r.magic(_MAGIC)
        rbits = r.u8()
        num_slots = r.u64()
        seed = r.u64()
        band_width = r.u32()
        num_keys = r.u64()
        planes = [r.words() for _ in range(rbits)]
        return cls(rbits, num_slots, seed, band_width, num_keys, planes)

    def to_bytes(self) -> bytes:
        w = Writer()
        self.write(w)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "RetrievalStore":
        r = Reader(data)
        out = cls.read(r)
        r.expect_end()
        return out


def _as_hash_arrays(hashes) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(hashes, tuple) and len(hashes) == 2:
        hi, lo = hashes
        return np.asarray(hi, dtype=np.uint64), np.asarray(lo, dtype=np.uint64)
    hs = list(hashes)
    hi = np.fromiter((h.hi for h in hs), dtype=np.uint64, count=len(hs))
    lo = np.fromiter((h.lo for h in hs), dtype=np.uint64, count=len(hs))
    return hi, lo


def _solve(
    hi: np.ndarray,
    lo: np.ndarray,
    values: np.ndarray,
    r: int,
    seed: int,
    num_slots: int,
    band_width: int,
) -> list[np.ndarray] | None:
    """Banded on-the-fly Gaussian elimination; None when inconsistent."""
    starts, coeffs = _rows_many(hi, lo, seed, num_slots, band_width)
    order = np.argsort(starts, kind="stable")
    starts_l = starts[order].tolist()
    coeffs_l = coeffs[order].tolist()
    vals_l = values[order].tolist()

    row_coeff = [0] * num_slots  # anchored at pivot: bit 0 is the pivot
    row_value = [0] * num_slots
    for s, c, v in zip(starts_l, coeffs_l, vals_l):
        while c:
            tz = (c & -c).bit_length() - 1
            s += tz
            c >>= tz
            rc = row_coeff[s]
            if rc == 0:
                row_coeff[s] = c
                row_value[s] = v
                break
            c ^= rc
            v ^= row_value[s]
        else:
            if v:
                return None  # inconsistent: identical equation, different value
            # dependent but consistent row: nothing to store

    nwords = num_slots // 64 + 2
    sols = [[0] * nwords for _ in range(r)]
    for p in range(num_slots - 1, -1, -1):
        c = row_coeff[p]
        if c == 0:
            continue
        v = row_value[p]
        w0, off = p >> 6, p & 63
        for k in range(r):
            sk = sols[k]
            window = ((sk[w0] >> off) | (sk[w0 + 1] << (64 - off))) & MASK64
            if ((window & c).bit_count() ^ (v >> k)) & 1:
                sk[w0] |= 1 << off
    return [np.array(s, dtype=np.uint64) for s in sols]

"""Perfect hash functions built from bucketed, overloaded, irregular
cuckoo tables plus per-class retrieval stores.

Construction pipeline: master-hash every key, partition into buckets of
expected size ``bucket_size``, build one small cuckoo table per bucket
(table size ``max(n_i, round(n_i / alpha))``), then store each key's
winning hash-function index in one of three retrieval stores (1, 2, or
3 bits depending on the key's class).  A query re-derives bucket and
class from the master hash, fetches the stored index, and evaluates the
corresponding candidate cell plus the bucket's offset.

Space budget algebra: with retrieval budget ``beta`` bits per key, the
class fractions interpolate between

    p1_min = max(0, 2 - beta),  p1_max = (3 - beta) / 2,
    p1 = p1_min + x * (p1_max - p1_min),  p2 = 3 - 2*p1 - beta,

which keeps ``1*p1 + 2*p2 + 3*p3 = beta`` for all x in [0, 1].

Minimal mode ("minimal perfect") re-maps values >= n onto the unused
values below n ("holes") through an Elias-Fano coded array of length
``m_total - n`` indexed by ``value - n``.

Top-level blob layout (little-endian, crc32 trailer):

    SICPHF01 | u8 flags | f64 alpha,beta,x | u64 bucket_size |
    u64 global_seed | f64 epsilon_r | u64 n | u64 m_total |
    meta blob | u8 store_count | store blobs | u8 has_remap |
    [remap blob] | u32 crc32
"""

from __future__ import annotations

import dataclasses
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._wire import Reader, Writer
from .cuckoo import (
    DEFAULT_MAX_BUCKET_SEEDS,
    BucketInput,
    build_bucket,
)
from .errors import ConstructionError, DeserializationError
from .hashing import (
    MasterHash,
    bucket_of,
    bucket_of_many,
    cell_of,
    cell_of_many,
    class_of_many,
    class_thresholds,
    master_hash,
    master_hash_many,
)
from .retrieval import RetrievalStore
from .succinct import EliasFanoSeq, GolombRiceSeq, rice_parameter

_MAGIC = b"SICPHF01"

_R_BY_DEGREE = {2: 1, 4: 2, 8: 3}


def class_fractions(beta: float, x: float) -> tuple[float, float, float]:
    """Class fractions (p1, p2, p3) for a space budget and interpolation."""
    if not 1.0 <= beta <= 3.0:
        raise ValueError("beta must lie in [1, 3]")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    p1_min = max(0.0, 2.0 - beta)
    p1_max = (3.0 - beta) / 2.0
    p1 = p1_min + x * (p1_max - p1_min)
    p2 = 3.0 - 2.0 * p1 - beta
    p1 = min(max(p1, 0.0), 1.0)
    p2 = min(max(p2, 0.0), 1.0)
    p3 = min(max(1.0 - p1 - p2, 0.0), 1.0)
    return p1, p2, p3


@dataclass(frozen=True)
class PhfConfig:
    """Construction parameters.

    ``alpha`` is the load factor n/m, ``beta`` the retrieval budget in
    bits per key, ``x`` interpolates among the equal-budget class
    mixes.  ``epsilon_r`` is the retrieval slot slack and
    ``compressed_metadata`` switches bucket metadata serialization from
    plain arrays to Elias-Fano offsets plus Golomb-Rice seeds.
    """

    alpha: float
    beta: float = 2.0
    x: float = 0.5
    bucket_size: int = 5000
    global_seed: int = 0
    minimal: bool = False
    epsilon_r: float = 0.10
    compressed_metadata: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.bucket_size < 1:
            raise ValueError("bucket_size must be >= 1")
        if self.epsilon_r < 0:
            raise ValueError("epsilon_r must be non-negative")
        class_fractions(self.beta, self.x)  # validates beta and x

    @property
    def fractions(self) -> tuple[float, float, float]:
        return class_fractions(self.beta, self.x)

    @property
    def p1(self) -> float:
        return self.fractions[0]

    @property
    def p2(self) -> float:
        return self.fractions[1]

    @property
    def p3(self) -> float:
        return self.fractions[2]


@dataclass
class BucketMetaArray:
    """Per-bucket seeds and the exclusive prefix sum of table sizes."""

    seeds: np.ndarray  # uint64, one per bucket
    offsets: np.ndarray  # uint64, num_buckets + 1 entries, offsets[0] == 0
    compressed: bool = False

    def __post_init__(self) -> None:
        self.seeds = np.asarray(self.seeds, dtype=np.uint64)
        self.offsets = np.asarray(self.offsets, dtype=np.uint64)
        if len(self.offsets) != len(self.seeds) + 1:
            raise ValueError("offsets must have one more entry than seeds")
        if len(self.offsets) and int(self.offsets[0]) != 0:
            raise ValueError("offsets must start at 0")
        if np.any(np.diff(self.offsets.astype(np.int64)) < 0):
            raise ValueError("offsets must be non-decreasing")

    @property
    def num_buckets(self) -> int:
        return len(self.seeds)

    @property
    def m_total(self) -> int:
        return int(self.offsets[-1])

    def to_bytes(self) -> bytes:
        w = Writer()
        w.u8(1 if self.compressed else 0)
        if self.compressed:
            gr = GolombRiceSeq.encode(self.seeds, rice_parameter(self.seeds))
            ef = EliasFanoSeq.encode(self.offsets.astype(np.int64))
            gr.write(w)
            ef.write(w)
        else:
            w.words(self.seeds)
            w.words(self.offsets)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BucketMetaArray":
        r = Reader(data)
        mode = r.u8()
        if mode == 1:
            gr = GolombRiceSeq.read(r)
            ef = EliasFanoSeq.read(r)
            out = cls(gr.to_array(), ef.to_array(), compressed=True)
        else:
            seeds = r.words()
            offsets = r.words()
            out = cls(seeds, offsets, compressed=False)
        r.expect_end()
        return out

    def bits(self) -> int:
        return len(self.to_bytes()) * 8


@dataclass
class SpaceBreakdown:
    """Serialized payload sizes by component, in bits."""

    retrieval_bits: int
    metadata_bits: int
    remap_bits: int
    n: int

    @property
    def total_bits(self) -> int:
        return self.retrieval_bits + self.metadata_bits + self.remap_bits

    @property
    def per_object(self) -> float:
        return self.total_bits / self.n

    def as_dict(self) -> dict[str, float]:
        return {
            "retrieval": self.retrieval_bits / self.n,
            "metadata": self.metadata_bits / self.n,
            "remap": self.remap_bits / self.n,
            "total": self.per_object,
        }


class SicHashPhf:
    """An assembled perfect hash function.

    Immutable after construction; safe for unlimited concurrent readers.
    """

    def __init__(
        self,
        config: PhfConfig,
        meta: BucketMetaArray,
        stores: dict[int, RetrievalStore],
        n: int,
        remap: Optional[EliasFanoSeq] = None,
    ):
        self.config = config
        self.meta = meta
        self.stores = stores  # keyed by degree: 2, 4, 8
        self.n = n
        self.remap = remap
        self._thresholds = class_thresholds(config.p1, config.p2)
        self._remap_values: Optional[np.ndarray] = None

    @property
    def m_total(self) -> int:
        return self.meta.m_total

    @property
    def output_range(self) -> int:
        """Size of the value range: n in minimal mode, m_total otherwise."""
        return self.n if self.config.minimal else self.m_total

    # -- evaluation -------------------------------------------------------

    def evaluate(self, key: bytes) -> int:
        h = master_hash(key, self.config.global_seed)
        return self.evaluate_hash(h)

    __call__ = evaluate

    def evaluate_hash(self, h: MasterHash) -> int:
        t1, t2 = self._thresholds
        degree = 2 if h.lo < t1 else (4 if h.lo < t2 else 8)
        b = bucket_of(h, self.meta.num_buckets)
        fn_index = self.stores[degree].query(h)
        off = int(self.meta.offsets[b])
        m_b = int(self.meta.offsets[b + 1]) - off
        value = off + cell_of(h, int(self.meta.seeds[b]), fn_index, m_b)
        if self.config.minimal and value >= self.n:
            value = self.remap.access(value - self.n) if self.remap else value
        return value

    def evaluate_many(self, keys: Sequence[bytes]) -> np.ndarray:
        hi, lo = master_hash_many(keys, self.config.global_seed)
        return self.evaluate_hashes(hi, lo)

    def evaluate_hashes(self, hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
        t1, t2 = self._thresholds
        degrees = class_of_many(lo, t1, t2)
        b = bucket_of_many(hi, self.meta.num_buckets).astype(np.int64)
        fn = np.zeros(len(hi), dtype=np.uint64)
        for degree, store in self.stores.items():
            mask = degrees == degree
            if mask.any():
                fn[mask] = store.query_many(hi[mask], lo[mask])
        offs = self.meta.offsets[b]
        m_b = self.meta.offsets[b + 1] - offs
        values = offs + cell_of_many(hi, lo, self.meta.seeds[b], fn, m_b)
        if self.config.minimal and self.remap is not None:
            if self._remap_values is None:
                self._remap_values = self.remap.to_array()
            over = values >= np.uint64(self.n)
            if over.any():
                values[over] = self._remap_values[
                    (values[over] - np.uint64(self.n)).astype(np.int64)
                ]
        return values

    # -- space accounting -------------------------------------------------

    def _sections(self) -> tuple[bytes, list[bytes], bytes]:
        meta = self.meta.to_bytes()
        stores = [self.stores[d].to_bytes() for d in sorted(self.stores)]
        remap = self.remap.to_bytes() if self.remap is not None else b""
        return meta, stores, remap

    def space_breakdown(self) -> SpaceBreakdown:
        meta, stores, remap = self._sections()
        return SpaceBreakdown(
            retrieval_bits=8 * sum(len(s) for s in stores),
            metadata_bits=8 * len(meta),
            remap_bits=8 * len(remap),
            n=self.n,
        )

    def bits_total(self) -> int:
        """Serialized payload bits (stores + metadata + remap)."""
        return self.space_breakdown().total_bits

    def bits_per_object(self) -> float:
        return self.bits_total() / self.n

    # -- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        w = Writer()
        w.magic(_MAGIC)
        cfg = self.config
        flags = (1 if cfg.minimal else 0) | (2 if cfg.compressed_metadata else 0)
        w.u8(flags)
        w.f64(cfg.alpha)
        w.f64(cfg.beta)
        w.f64(cfg.x)
        w.u64(cfg.bucket_size)
        w.u64(cfg.global_seed)
        w.f64(cfg.epsilon_r)
        w.u64(self.n)
        w.u64(self.m_total)
        meta, stores, remap = self._sections()
        w.blob(meta)
        w.u8(len(stores))
        for s in stores:
            w.blob(s)
        w.u8(1 if remap else 0)
        if remap:
            w.blob(remap)
        payload = w.getvalue()
        return payload + zlib.crc32(payload).to_bytes(4, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "SicHashPhf":
        if len(data) < 12:
            raise DeserializationError("truncated blob")
        payload, crc = data[:-4], data[-4:]
        if zlib.crc32(payload) != int.from_bytes(crc, "little"):
            raise DeserializationError("checksum mismatch")
        r = Reader(payload)
        r.magic(_MAGIC)
        flags = r.u8()
        config = PhfConfig(
            alpha=r.f64(),
            beta=r.f64(),
            x=r.f64(),
            bucket_size=r.u64(),
            global_seed=r.u64(),
            epsilon_r=r.f64(),
            minimal=bool(flags & 1),
            compressed_metadata=bool(flags & 2),
        )
        n = r.u64()
        m_total = r.u64()
        meta = BucketMetaArray.from_bytes(r.blob())
        store_count = r.u8()
        stores: dict[int, RetrievalStore] = {}
        for _ in range(store_count):
            store = RetrievalStore.from_bytes(r.blob())
            stores[{1: 2, 2: 4, 3: 8}[store.r]] = store
        remap = None
        if r.u8():
            remap = EliasFanoSeq.from_bytes(r.blob())
        r.expect_end()
        if meta.m_total != m_total:
            raise DeserializationError("inconsistent table sizes")
        return cls(config, meta, stores, n, remap)


def _round_half_even(x: float) -> int:
    return int(round(x))


def build(
    keys: Sequence[bytes],
    config: PhfConfig,
    *,
    max_bucket_seeds: int = DEFAULT_MAX_BUCKET_SEEDS,
) -> SicHashPhf:
    """Build a perfect hash function over distinct byte-string keys."""
    keys = list(keys)
    n = len(keys)
    if n < 1:
        raise ValueError("key set must be non-empty")
    hi, lo = master_hash_many(keys, config.global_seed)
    phf = build_from_hashes(hi, lo, config, max_bucket_seeds=max_bucket_seeds)
    if config.minimal:
        values = phf.evaluate_hashes(hi, lo)
        return _attach_remap(phf, values)
    return phf


def build_from_hashes(
    hi: np.ndarray,
    lo: np.ndarray,
    config: PhfConfig,
    *,
    max_bucket_seeds: int = DEFAULT_MAX_BUCKET_SEEDS,
) -> SicHashPhf:
    """Build from precomputed master hashes (non-minimal assembly)."""
    n = len(hi)
    if n < 1:
        raise ValueError("key set must be non-empty")
    order = np.lexsort(np.stack([lo, hi]))
    if np.any((hi[order][1:] == hi[order][:-1]) & (lo[order][1:] == lo[order][:-1])):
        raise ValueError("duplicate keys")

    num_buckets = max(1, _round_half_even(n / config.bucket_size))
    buckets = bucket_of_many(hi, num_buckets).astype(np.int64)
    t1, t2 = class_thresholds(config.p1, config.p2)
    degrees = class_of_many(lo, t1, t2)

    order = np.argsort(buckets, kind="stable")
    hi_s, lo_s, deg_s = hi[order], lo[order], degrees[order]
    counts = np.bincount(buckets, minlength=num_buckets)
    bounds = np.concatenate([[0], np.cumsum(counts)])

    seeds = np.zeros(num_buckets, dtype=np.uint64)
    offsets = np.zeros(num_buckets + 1, dtype=np.uint64)
    fn_values = np.zeros(n, dtype=np.uint8)
    alpha = config.alpha
    total = 0
    for b in range(num_buckets):
        a, z = int(bounds[b]), int(bounds[b + 1])
        n_b = z - a
        m_b = max(n_b, _round_half_even(n_b / alpha)) if n_b else 0
        inp = BucketInput(hi_s[a:z], lo_s[a:z], deg_s[a:z], m_b)
        try:
            result = build_bucket(inp, max_seeds=max_bucket_seeds)
        except ConstructionError as exc:
            raise ConstructionError(
                f"construction failed: alpha too aggressive (bucket {b}: {exc})"
            ) from exc
        seeds[b] = result.seed
        fn_values[a:z] = result.assignments
        total += m_b
        offsets[b + 1] = total

    stores: dict[int, RetrievalStore] = {}
    for degree, r in _R_BY_DEGREE.items():
        mask = deg_s == degree
        stores[degree] = RetrievalStore.build(
            (hi_s[mask], lo_s[mask]),
            fn_values[mask],
            r,
            epsilon=config.epsilon_r,
            base_seed=config.global_seed,
        )

    meta = BucketMetaArray(seeds, offsets, compressed=config.compressed_metadata)
    cfg_plain = dataclasses.replace(config, minimal=False)
    return SicHashPhf(cfg_plain, meta, stores, n)


def serialize(phf: SicHashPhf) -> bytes:
    return phf.to_bytes()


def deserialize(blob: bytes) -> SicHashPhf:
    return SicHashPhf.from_bytes(blob)


def minimize(phf: SicHashPhf, keys: Sequence[bytes]) -> SicHashPhf:
    """Convert a perfect hash function into a minimal one (range [0, n)).

    Values at or above n are re-mapped onto the unused values below n
    by rank; the mapping array has one slot per value in [n, m_total)
    and is Elias-Fano coded (don't-care slots repeat the previous entry
    to keep the sequence monotone).
    """
    if phf.config.minimal:
        return phf
    values = phf.evaluate_many(keys)
    return _attach_remap(phf, values)


def _attach_remap(phf: SicHashPhf, values: np.ndarray) -> SicHashPhf:
    n, m = phf.n, phf.m_total
    if m < n:
        raise ValueError("output range smaller than key count")
    values = values.astype(np.int64)
    hit = np.zeros(n, dtype=bool)
    hit[values[values < n]] = True
    holes = np.flatnonzero(~hit).astype(np.int64)
    high = np.sort(values[values >= n]) - n
    if len(high) != len(holes):
        raise ConstructionError("internal error: hole/overflow count mismatch")
    slots = np.full(m - n, -1, dtype=np.int64)
    slots[high] = holes
    slots = np.maximum.accumulate(slots)
    slots[slots < 0] = holes[0] if len(holes) else 0
    remap = EliasFanoSeq.encode(slots)
    cfg = dataclasses.replace(phf.config, minimal=True)
    return SicHashPhf(cfg, phf.meta, phf.stores, n, remap=remap)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sichash.cli import generate_keys
from sichash.errors import ConstructionError, DeserializationError
from sichash.phf import (
    BucketMetaArray,
    PhfConfig,
    SicHashPhf,
    build,
    class_fractions,
    minimize,
)


@pytest.fixture(scope="module")
def keys_20k():
    return generate_keys(20_000, seed=99)


@pytest.fixture(scope="module")
def phf_20k(keys_20k):
    return build(keys_20k, PhfConfig(alpha=0.9, beta=2.0, x=0.5, global_seed=5))


class TestClassFractions:
    def test_budget_identity_on_grid(self):
        betas = np.linspace(1.0, 3.0, 101)
        xs = np.linspace(0.0, 1.0, 101)
        for beta in betas:
            for x in xs:
                p1, p2, p3 = class_fractions(float(beta), float(x))
                assert 0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0 and 0.0 <= p3 <= 1.0
                assert p1 + p2 + p3 == pytest.approx(1.0, abs=1e-9)
                assert p1 + 2 * p2 + 3 * p3 == pytest.approx(beta, abs=1e-9)

    @given(st.floats(1.0, 3.0), st.floats(0.0, 1.0))
    def test_budget_identity_property(self, beta, x):
        p1, p2, p3 = class_fractions(beta, x)
        assert p1 + 2 * p2 + 3 * p3 == pytest.approx(beta, abs=1e-9)

    def test_extremes(self):
        assert class_fractions(1.0, 0.0) == pytest.approx((1.0, 0.0, 0.0))
        assert class_fractions(3.0, 1.0) == pytest.approx((0.0, 0.0, 1.0))
        assert class_fractions(2.0, 0.0) == pytest.approx((0.0, 1.0, 0.0))
        assert class_fractions(2.0, 1.0) == pytest.approx((0.5, 0.0, 0.5))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            class_fractions(0.9, 0.5)
        with pytest.raises(ValueError):
            class_fractions(3.1, 0.5)
        with pytest.raises(ValueError):
            class_fractions(2.0, 1.5)


class TestPhfConfig:
    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            PhfConfig(alpha=0.0)
        with pytest.raises(ValueError):
            PhfConfig(alpha=1.2)

    def test_fraction_properties(self):
        cfg = PhfConfig(alpha=0.9, beta=1.8, x=0.725)
        assert cfg.p1 == pytest.approx(0.49)
        assert cfg.p2 == pytest.approx(0.22)
        assert cfg.p3 == pytest.approx(0.29)


class TestBuild:
    def test_single_key_alpha_one(self):
        phf = build([b"only key"], PhfConfig(alpha=1.0))
        assert phf.m_total == 1
        assert phf.evaluate(b"only key") == 0

    def test_perfect_on_construction_keys(self, keys_20k, phf_20k):
        values = phf_20k.evaluate_many(keys_20k)
        assert int(values.max()) < phf_20k.m_total
        assert len(np.unique(values)) == len(keys_20k)

    def test_empty_keys_rejected(self):
        with pytest.raises(ValueError):
            build([], PhfConfig(alpha=0.9))

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValueError, match="duplicate keys"):
            build([b"k1", b"k2", b"k1"], PhfConfig(alpha=0.9))

    def test_scalar_matches_batch(self, keys_20k, phf_20k):
        values = phf_20k.evaluate_many(keys_20k[:100])
        for k, v in zip(keys_20k[:100], values):
            assert phf_20k.evaluate(k) == int(v)

    def test_unseen_keys_in_range_and_deterministic(self, phf_20k):
        probe = [b"never seen %d" % i for i in range(500)]
        a = phf_20k.evaluate_many(probe)
        b = phf_20k.evaluate_many(probe)
        assert np.array_equal(a, b)
        assert int(a.max()) < phf_20k.m_total

    def test_deterministic_blob(self, keys_20k):
        cfg = PhfConfig(alpha=0.9, beta=2.0, x=0.3, global_seed=11)
        assert build(keys_20k, cfg).to_bytes() == build(keys_20k, cfg).to_bytes()

    def test_offsets_consistent(self, phf_20k):
        offs = phf_20k.meta.offsets.astype(np.int64)
        sizes = np.diff(offs)
        assert offs[0] == 0
        assert (sizes >= 0).all()
        assert offs[-1] == phf_20k.m_total

    def test_alpha_too_aggressive(self):
        keys = generate_keys(120, seed=4)
        with pytest.raises(ConstructionError, match="alpha too aggressive"):
            build(keys, PhfConfig(alpha=0.999, beta=1.0), max_bucket_seeds=32)

    def test_global_seed_changes_function(self, keys_20k):
        a = build(keys_20k[:3000], PhfConfig(alpha=0.9, global_seed=1))
        b = build(keys_20k[:3000], PhfConfig(alpha=0.9, global_seed=2))
        assert a.to_bytes() != b.to_bytes()


class TestSerialization:
    def test_roundtrip_values(self, keys_20k, phf_20k):
        restored = SicHashPhf.from_bytes(phf_20k.to_bytes())
        assert np.array_equal(
            restored.evaluate_many(keys_20k), phf_20k.evaluate_many(keys_20k)
        )

    def test_corrupted_byte_detected(self, phf_20k):
        blob = bytearray(phf_20k.to_bytes())
        blob[len(blob) // 2] ^= 0x10
        with pytest.raises(DeserializationError, match="checksum"):
            SicHashPhf.from_bytes(bytes(blob))

    def test_truncation_detected(self, phf_20k):
        blob = phf_20k.to_bytes()
        with pytest.raises(DeserializationError):
            SicHashPhf.from_bytes(blob[: len(blob) // 2])
        with pytest.raises(DeserializationError):
            SicHashPhf.from_bytes(b"")

    def test_bad_magic(self, phf_20k):
        blob = bytearray(phf_20k.to_bytes())
        blob[0:8] = b"NOTSICPH"
        import zlib

        body = bytes(blob[:-4])
        fixed = body + zlib.crc32(body).to_bytes(4, "little")
        with pytest.raises(DeserializationError, match="magic"):
            SicHashPhf.from_bytes(fixed)

    def test_container_overhead_constant(self, keys_20k):
        a = build(keys_20k[:2000], PhfConfig(alpha=0.9))
        b = build(keys_20k[:11000], PhfConfig(alpha=0.9))
        overhead_a = len(a.to_bytes()) * 8 - a.bits_total()
        overhead_b = len(b.to_bytes()) * 8 - b.bits_total()
        assert overhead_a == overhead_b

    def test_compressed_metadata_same_values(self, keys_20k):
        plain = build(keys_20k, PhfConfig(alpha=0.9, global_seed=5))
        comp = build(
            keys_20k, PhfConfig(alpha=0.9, global_seed=5, compressed_metadata=True)
        )
        assert np.array_equal(
            plain.evaluate_many(keys_20k), comp.evaluate_many(keys_20k)
        )
        restored = SicHashPhf.from_bytes(comp.to_bytes())
        assert np.array_equal(
            restored.evaluate_many(keys_20k), plain.evaluate_many(keys_20k)
        )
        assert restored.config.compressed_metadata


class TestMinimal:
    def test_alpha_one_identity(self, keys_20k):
        # exact fit: every table cell used, so minimal mode has no work.
        # beta=3 keeps the load-1.0 per-bucket searches cheap (8 choices
        # per key); degree-2-heavy mixes are hopeless at exact fit.
        keys = keys_20k[:192]
        phf = build(keys, PhfConfig(alpha=1.0, beta=3.0, x=0.0, bucket_size=48))
        raw = phf.evaluate_many(keys)
        mphf = minimize(phf, keys)
        assert mphf.m_total == len(keys)
        assert np.array_equal(mphf.evaluate_many(keys), raw)
        assert mphf.space_breakdown().remap_bits <= 1024  # empty sequence, headers only

    def test_bijectivity(self, keys_20k):
        phf = build(keys_20k, PhfConfig(alpha=0.95))
        mphf = minimize(phf, keys_20k)
        values = np.sort(mphf.evaluate_many(keys_20k))
        assert np.array_equal(values, np.arange(len(keys_20k), dtype=values.dtype))

    def test_build_flag_equivalent(self, keys_20k):
        direct = build(keys_20k, PhfConfig(alpha=0.95, minimal=True))
        values = np.sort(direct.evaluate_many(keys_20k))
        assert np.array_equal(values, np.arange(len(keys_20k), dtype=values.dtype))

    def test_overflow_keys_land_in_holes(self, keys_20k):
        keys = keys_20k[:9000]
        phf = build(keys, PhfConfig(alpha=0.9))
        raw = phf.evaluate_many(keys)
        mphf = minimize(phf, keys)
        mapped = mphf.evaluate_many(keys)
        n = len(keys)
        over = raw >= n
        assert np.array_equal(mapped[~over], raw[~over])
        holes = np.setdiff1d(np.arange(n), raw[raw < n])
        assert set(mapped[over].tolist()) == set(holes.tolist())

    def test_remap_size_formula(self):
        keys = generate_keys(100_000, seed=12)
        phf = build(keys, PhfConfig(alpha=0.95))
        mphf = minimize(phf, keys)
        m, n = phf.m_total, len(keys)
        formula = (m - n) * (2 + np.ceil(np.log2(n / (m - n))))
        breakdown = mphf.space_breakdown()
        assert breakdown.remap_bits <= formula + mphf.remap.aux_bits() + 512

    def test_serialization_roundtrip(self, keys_20k):
        mphf = build(keys_20k, PhfConfig(alpha=0.95, minimal=True))
        restored = SicHashPhf.from_bytes(mphf.to_bytes())
        assert restored.config.minimal
        assert np.array_equal(
            restored.evaluate_many(keys_20k), mphf.evaluate_many(keys_20k)
        )


class TestSpaceAccounting:
    def test_breakdown_sums(self, phf_20k):
        b = phf_20k.space_breakdown()
        assert b.total_bits == b.retrieval_bits + b.metadata_bits + b.remap_bits
        assert phf_20k.bits_per_object() == pytest.approx(b.per_object)

    def test_metadata_under_budget_at_scale(self, keys_100k):
        phf = build(keys_100k, PhfConfig(alpha=0.9))
        assert phf.space_breakdown().metadata_bits / len(keys_100k) <= 0.04

    def test_retrieval_component_within_slack(self, keys_100k):
        cfg = PhfConfig(alpha=0.9, beta=2.0, x=0.5)
        phf = build(keys_100k, cfg)
        per_obj = phf.space_breakdown().retrieval_bits / len(keys_100k)
        assert 2.0 <= per_obj <= 2.0 * (1 + cfg.epsilon_r) + 0.05


class TestBucketMetaArray:
    def test_validation(self):
        with pytest.raises(ValueError):
            BucketMetaArray(np.array([1]), np.array([0, 5, 3]))
        with pytest.raises(ValueError):
            BucketMetaArray(np.array([1]), np.array([1, 5]))

    def test_plain_roundtrip(self):
        meta = BucketMetaArray(np.array([0, 3, 1]), np.array([0, 10, 25, 30]))
        back = BucketMetaArray.from_bytes(meta.to_bytes())
        assert np.array_equal(back.seeds, meta.seeds)
        assert np.array_equal(back.offsets, meta.offsets)

    def test_compressed_roundtrip(self):
        meta = BucketMetaArray(
            np.array([0, 3, 1, 7]), np.array([0, 10, 25, 30, 44]), compressed=True
        )
        back = BucketMetaArray.from_bytes(meta.to_bytes())
        assert back.compressed
        assert np.array_equal(back.seeds, meta.seeds)
        assert np.array_equal(back.offsets, meta.offsets)

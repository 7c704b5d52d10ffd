import numpy as np
import pytest
from hypothesis import given, strategies as st

from sichash.errors import DeserializationError
from sichash.succinct import (
    BitVector,
    EliasFanoSeq,
    GolombRiceSeq,
    PackedIntArray,
    ef_access,
    ef_encode,
    gr_access,
    gr_encode,
    rice_parameter,
)


class TestBitVector:
    def test_hand_case(self):
        bv = BitVector.from_bits(np.array([1, 0, 1, 1, 0], dtype=np.uint8))
        assert bv.popcount == 3
        assert bv.select1(0) == 0
        assert bv.select1(1) == 2
        assert bv.select1(2) == 3

    def test_rank_exceeds_popcount(self):
        bv = BitVector.from_bits(np.array([1, 0, 1, 1, 0], dtype=np.uint8))
        with pytest.raises(ValueError, match="rank exceeds popcount"):
            bv.select1(3)

    def test_select_against_linear_scan(self):
        rng = np.random.default_rng(42)
        for trial in range(1000):
            n = int(rng.integers(1, 400))
            density = rng.uniform(0.02, 0.98)
            bits = (rng.random(n) < density).astype(np.uint8)
            bv = BitVector.from_bits(bits)
            ones = np.flatnonzero(bits)
            assert bv.popcount == len(ones)
            for i in range(len(ones)):
                assert bv.select1(i) == ones[i]

    def test_select_large_dense_crosses_samples(self):
        rng = np.random.default_rng(7)
        bits = (rng.random(200_000) < 0.5).astype(np.uint8)
        bv = BitVector.from_bits(bits)
        ones = np.flatnonzero(bits)
        probe = np.concatenate(
            [np.arange(0, len(ones), 997), [0, 4095, 4096, 4097, len(ones) - 1]]
        )
        for i in probe:
            assert bv.select1(int(i)) == ones[int(i)]
        assert np.array_equal(bv.all_positions(), ones)

    def test_aux_overhead_budget(self):
        rng = np.random.default_rng(3)
        bits = (rng.random(100_000) < 0.9).astype(np.uint8)
        bv = BitVector.from_bits(bits)
        assert bv.aux_bits() <= 0.25 * bv.bits()

    def test_getitem_and_bounds(self):
        bv = BitVector.from_bits(np.array([0, 1], dtype=np.uint8))
        assert bv[0] == 0 and bv[1] == 1
        with pytest.raises(IndexError):
            bv[2]

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(5)
        bits = (rng.random(777) < 0.3).astype(np.uint8)
        bv = BitVector.from_bits(bits)
        bv2 = BitVector.from_bytes(bv.to_bytes())
        assert len(bv2) == len(bv)
        assert np.array_equal(bv2.words, bv.words)

    def test_bad_magic(self):
        with pytest.raises(DeserializationError, match="bad magic"):
            BitVector.from_bytes(b"XXXXXXXX" + b"\0" * 16)

    def test_truncated(self):
        blob = BitVector.from_bits(np.ones(100, dtype=np.uint8)).to_bytes()
        with pytest.raises(DeserializationError, match="truncated"):
            BitVector.from_bytes(blob[:-3])


class TestPackedIntArray:
    @given(
        st.lists(st.integers(0, 2**17 - 1), max_size=200),
        st.integers(17, 64),
    )
    def test_roundtrip(self, values, width):
        arr = PackedIntArray.pack(np.array(values, dtype=np.uint64), width)
        assert np.array_equal(arr.to_array(), np.array(values, dtype=np.uint64))
        for i, v in enumerate(values):
            assert arr[i] == v

    def test_width_zero(self):
        arr = PackedIntArray.pack(np.zeros(5, dtype=np.uint64), 0)
        assert arr[3] == 0
        assert np.array_equal(arr.to_array(), np.zeros(5, dtype=np.uint64))

    def test_width_64(self):
        vals = np.array([2**64 - 1, 0, 123456789123456789], dtype=np.uint64)
        arr = PackedIntArray.pack(vals, 64)
        assert np.array_equal(arr.to_array(), vals)

    def test_value_too_wide(self):
        with pytest.raises(ValueError):
            PackedIntArray.pack(np.array([8], dtype=np.uint64), 3)


class TestEliasFano:
    def test_empty(self):
        seq = ef_encode([])
        assert len(seq) == 0
        with pytest.raises(IndexError):
            ef_access(seq, 0)

    def test_all_zero(self):
        seq = ef_encode([0, 0, 0])
        assert [ef_access(seq, i) for i in range(3)] == [0, 0, 0]

    def test_hand_case(self):
        seq = ef_encode([3, 7, 20])
        assert ef_access(seq, 1) == 7

    def test_range(self):
        seq = ef_encode(list(range(1000)))
        assert ef_access(seq, 500) == 500

    def test_non_monotone_rejected(self):
        with pytest.raises(ValueError, match="monotone"):
            ef_encode([3, 2])
        with pytest.raises(ValueError, match="monotone"):
            ef_encode([-1, 2])

    def test_out_of_bounds(self):
        seq = ef_encode([1, 2, 3])
        with pytest.raises(IndexError, match="out of bounds"):
            ef_access(seq, 3)

    @given(
        st.lists(st.integers(0, 2**40), min_size=0, max_size=300).map(sorted)
    )
    def test_roundtrip(self, values):
        seq = ef_encode(values)
        assert np.array_equal(seq.to_array(), np.array(values, dtype=np.uint64))
        for i in range(0, len(values), 7):
            assert ef_access(seq, i) == values[i]

    def test_space_bound(self):
        rng = np.random.default_rng(11)
        values = np.sort(rng.integers(0, 10**6, size=10_000))
        seq = ef_encode(values)
        n, u = len(values), int(values[-1])
        bound = 2 * n + n * int(np.ceil(np.log2(u / n)))
        # allow the select index plus padding/constants
        assert seq.bits() <= bound + seq.aux_bits() + 192

    def test_serialization_roundtrip(self):
        values = [0, 5, 5, 9, 100, 4096]
        seq = EliasFanoSeq.from_bytes(ef_encode(values).to_bytes())
        assert [ef_access(seq, i) for i in range(len(values))] == values


class TestGolombRice:
    def test_zeros_k0(self):
        seq = gr_encode([0, 0, 0], 0)
        assert seq.unary.bits() >= 3  # three unary terminators, word-padded
        assert seq.unary.popcount == 3
        assert [gr_access(seq, i) for i in range(3)] == [0, 0, 0]

    def test_hand_case_five(self):
        # 5 = quotient 1, remainder 1 at k_log=2
        seq = gr_encode([5], 2)
        assert seq.unary.popcount == 1
        assert seq.unary.select1(0) == 1  # one zero bit, then the terminator
        assert seq.remainders[0] == 1
        assert gr_access(seq, 0) == 5

    def test_empty(self):
        seq = gr_encode([], 3)
        assert len(seq) == 0

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            gr_encode([1], -1)
        with pytest.raises(ValueError):
            gr_encode([1], 64)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            gr_encode([-2], 1)

    @given(
        st.lists(st.integers(0, 5000), max_size=300),
        st.integers(0, 12),
    )
    def test_roundtrip(self, values, k_log):
        seq = gr_encode(values, k_log)
        assert np.array_equal(seq.to_array(), np.array(values, dtype=np.uint64))
        for i in range(0, len(values), 5):
            assert gr_access(seq, i) == values[i]

    def test_geometric_bulk_roundtrip(self):
        rng = np.random.default_rng(13)
        values = (rng.geometric(0.5, size=10_000) - 1).astype(np.uint64)
        k = rice_parameter(values)
        seq = gr_encode(values, k)
        assert np.array_equal(seq.to_array(), values)

    def test_serialization_roundtrip(self):
        values = [0, 1, 7, 0, 300]
        seq = GolombRiceSeq.from_bytes(gr_encode(values, 2).to_bytes())
        assert [gr_access(seq, i) for i in range(len(values))] == values


def test_rice_parameter():
    assert rice_parameter([]) == 0
    assert rice_parameter([0, 0, 0]) == 0
    assert rice_parameter([7, 7, 7]) == 3

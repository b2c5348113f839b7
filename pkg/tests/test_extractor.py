import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrngsim.extractor import (BitStream, ExtractorConfig, bits_to_codes, codes_to_bits, extract,
                               output_rate)
from qrngsim.whirlpool import whirlpool, whirlpool_many

CFG = ExtractorConfig()


def _random_stream(n_bits, seed=0):
    return BitStream.from_bits(np.random.default_rng(seed).integers(0, 2, n_bits))


def test_codes_to_bits_msb_first():
    s = codes_to_bits([5], 3)
    assert s.bit_len == 3 and s.to_bits().tolist() == [1, 0, 1]


def test_codes_to_bits_keeps_low_bits():
    assert codes_to_bits([0xABC], 4).to_bits().tolist() == [1, 1, 0, 0]


def test_codes_to_bits_length():
    assert codes_to_bits(np.arange(1000) % 4096, 11).bit_len == 11_000


@given(st.lists(st.integers(0, 4095), min_size=1, max_size=200), st.integers(1, 12))
def test_pack_round_trip(codes, k):
    codes = np.asarray(codes)
    back = bits_to_codes(codes_to_bits(codes, k), k)
    assert np.array_equal(back, codes & ((1 << k) - 1))


def test_bits_per_record_domain():
    with pytest.raises(ValueError):
        codes_to_bits([1], 13)
    with pytest.raises(ValueError):
        codes_to_bits([1], 0)


def test_bitstream_tail_must_be_zero():
    with pytest.raises(ValueError):
        BitStream(b"\x01", 7)


def test_reduction_factor():
    assert CFG.reduction_factor == pytest.approx(1.0801, abs=1e-4)


def test_single_block():
    raw = _random_stream(553, 1)
    out = extract(raw, CFG)
    assert out.bit_len == 512
    # the block is zero-padded to 70 octets before hashing
    assert out.data == whirlpool(raw.data)


def test_short_input_rejected():
    with pytest.raises(ValueError, match="553"):
        extract(_random_stream(552), CFG)


@given(st.integers(1, 40), st.integers(0, 552))
@settings(max_examples=20, deadline=None)
def test_length_contract(k, extra):
    res = extract(_random_stream(553 * k + extra, k), CFG, details=True)
    assert res.stream.bit_len == 512 * k
    assert res.blocks == k and res.discarded_bits == extra


def test_blocks_are_independent():
    raw = _random_stream(553 * 4, 2).to_bits().reshape(4, 553)
    perm = [2, 0, 3, 1]
    a = extract(BitStream.from_bits(raw.ravel()), CFG).to_bits().reshape(4, 512)
    b = extract(BitStream.from_bits(raw[perm].ravel()), CFG).to_bits().reshape(4, 512)
    assert np.array_equal(a[perm], b)


def test_workers_and_chunks_do_not_change_output():
    raw = _random_stream(553 * 1000 + 17, 3)
    ref = extract(raw, CFG)
    assert extract(raw, CFG, workers=3).data == ref.data
    assert extract(raw, CFG, chunk_blocks=7).data == ref.data


def test_avalanche():
    rng = np.random.default_rng(4)
    trials = 10_000
    bits = rng.integers(0, 2, (trials, 553)).astype(np.uint8)
    flipped = bits.copy()
    pos = rng.integers(0, 553, trials)
    flipped[np.arange(trials), pos] ^= 1
    a = whirlpool_many(np.packbits(bits, axis=1))
    b = whirlpool_many(np.packbits(flipped, axis=1))
    dist = np.unpackbits(a ^ b, axis=1).sum(axis=1)
    # mean of 1e4 Binomial(512, 1/2) draws: sd 0.113
    assert abs(dist.mean() - 256) < 3 * np.sqrt(128 / trials)


def test_file_round_trip(tmp_path):
    s = _random_stream(1001, 5)
    s.to_file(tmp_path / "a.bits")
    assert (tmp_path / "a.bits").stat().st_size == 16 + 126
    assert BitStream.from_file(tmp_path / "a.bits") == s
    s.to_file(tmp_path / "b.bits", raw=True)
    back = BitStream.from_file(tmp_path / "b.bits", raw=True)
    assert back.bit_len == 1008 and back.data == s.data


def test_file_length_mismatch(tmp_path):
    _random_stream(1000).to_file(tmp_path / "a.bits")
    blob = (tmp_path / "a.bits").read_bytes()
    (tmp_path / "a.bits").write_bytes(blob[:-1])
    with pytest.raises(ValueError, match="header"):
        BitStream.from_file(tmp_path / "a.bits")


def test_output_rate():
    assert output_rate(97.6e6, 12, 1.08) == pytest.approx(1.0844e9, rel=1e-4)
    assert output_rate(97.6e6, 12, 553 / 512) == pytest.approx(1.0843e9, rel=1e-4)
    with pytest.raises(ValueError):
        output_rate(97.6e6, 12, 0)

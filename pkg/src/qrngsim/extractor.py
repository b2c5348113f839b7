"""Bit packing and block-hash randomness extraction.

Raw bits are cut into consecutive ``input_block_bits`` blocks, each block is
zero-padded to whole octets and hashed on its own (no chaining), and the
digests are concatenated. With the default 553-bit blocks and 512-bit
Whirlpool digests the reduction factor is 553/512 = 1.0801.

Bit order everywhere is most-significant bit of each octet first.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .whirlpool import whirlpool_many

BITSTREAM_MAGIC = b"QRNGBITS"
_HEADER = struct.Struct("<8sQ")


@dataclass(frozen=True)
class BitStream:
    data: bytes
    bit_len: int

    def __post_init__(self):
        if self.bit_len < 0 or self.bit_len > 8 * len(self.data):
            raise ValueError("bit_len exceeds the packed data")
        if self.bit_len % 8 and self.data[-1] & (0xFF >> (self.bit_len % 8)):
            raise ValueError("bits past bit_len must be zero")

    def __len__(self):
        return self.bit_len

    @classmethod
    def from_bits(cls, bits) -> BitStream:
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(np.packbits(bits).tobytes(), int(bits.size))

    @classmethod
    def from_bytes(cls, data: bytes) -> BitStream:
        return cls(bytes(data), 8 * len(data))

    def to_bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8), count=self.bit_len)

    def to_file(self, path, raw: bool = False):
        with open(path, "wb") as fh:
            if not raw:
                fh.write(_HEADER.pack(BITSTREAM_MAGIC, self.bit_len))
            fh.write(self.data)

    @classmethod
    def from_file(cls, path, raw: bool | None = None) -> BitStream:
        """Read a bitstream file; ``raw=None`` detects the header by its magic."""
        with open(path, "rb") as fh:
            blob = fh.read()
        has_header = blob[:8] == BITSTREAM_MAGIC if raw is None else not raw
        if has_header:
            if len(blob) < _HEADER.size:
                raise ValueError(f"{path}: truncated bitstream header")
            _, bit_len = _HEADER.unpack_from(blob)
            data = blob[_HEADER.size:]
            if (bit_len + 7) // 8 != len(data):
                raise ValueError(f"{path}: header says {bit_len} bits, file holds {len(data)} octets")
            return cls(data, bit_len)
        return cls.from_bytes(blob)


@dataclass(frozen=True)
class ExtractorConfig:
    digest_bits: int = 512
    input_block_bits: int = 553
    digest: Callable = field(default=whirlpool_many, compare=False, repr=False)

    def __post_init__(self):
        if self.input_block_bits <= self.digest_bits:
            raise ValueError("input blocks must be longer than the digest")

    @property
    def reduction_factor(self) -> float:
        return self.input_block_bits / self.digest_bits


def codes_to_bits(codes, bits_per_record: int, adc_bits: int = 12) -> BitStream:
    """Concatenate the ``bits_per_record`` low bits of each code, MSB first."""
    if not 1 <= bits_per_record <= adc_bits:
        raise ValueError(f"bits_per_record must lie in [1, {adc_bits}]")
    codes = np.asarray(getattr(codes, "code", codes), dtype=np.int64)
    shifts = np.arange(bits_per_record - 1, -1, -1, dtype=np.int64)
    bits = ((codes[:, None] >> shifts) & 1).astype(np.uint8)
    return BitStream.from_bits(bits.ravel())


def bits_to_codes(stream: BitStream, bits_per_record: int) -> np.ndarray:
    bits = stream.to_bits()
    bits = bits[: bits.size - bits.size % bits_per_record].reshape(-1, bits_per_record)
    weights = 1 << np.arange(bits_per_record - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _blocks_to_rows(bits: np.ndarray, block_bits: int) -> np.ndarray:
    """(n, block_bits) bit matrix -> (n, ceil(block_bits/8)) octet rows, zero-padded."""
    return np.packbits(bits.reshape(-1, block_bits), axis=1)


def _extract_range(raw_bytes: np.ndarray, first: int, count: int, cfg: ExtractorConfig, chunk: int) -> bytes:
    out = []
    nb = cfg.input_block_bits
    for start in range(first, first + count, chunk):
        stop = min(start + chunk, first + count)
        lo_bit, hi_bit = start * nb, stop * nb
        lo_byte = lo_bit // 8
        bits = np.unpackbits(raw_bytes[lo_byte:(hi_bit + 7) // 8])
        bits = bits[lo_bit - 8 * lo_byte: lo_bit - 8 * lo_byte + (stop - start) * nb]
        digests = cfg.digest(_blocks_to_rows(bits, nb))
        out.append(np.asarray(digests, dtype=np.uint8).tobytes())
    return b"".join(out)


@dataclass(frozen=True)
class ExtractionResult:
    stream: BitStream
    blocks: int
    discarded_bits: int


def extract(raw: BitStream, cfg: ExtractorConfig = ExtractorConfig(), workers: int = 1,
            chunk_blocks: int = 4096, details: bool = False):
    """Hash ``raw`` block by block.

    Returns a :class:`BitStream` of ``digest_bits * floor(bit_len / input_block_bits)``
    bits, or an :class:`ExtractionResult` with the discarded tail count when
    ``details`` is set. ``workers > 1`` hashes contiguous block ranges on
    threads and concatenates them in order.
    """
    nb = cfg.input_block_bits
    if raw.bit_len < nb:
        raise ValueError(f"need at least {nb} raw bits, got {raw.bit_len}")
    if cfg.digest_bits % 8:
        raise ValueError("digest length must be whole octets")
    n_blocks = raw.bit_len // nb
    raw_bytes = np.frombuffer(raw.data, dtype=np.uint8)
    if workers <= 1:
        data = _extract_range(raw_bytes, 0, n_blocks, cfg, chunk_blocks)
    else:
        bounds = np.linspace(0, n_blocks, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda i: _extract_range(raw_bytes, bounds[i], bounds[i + 1] - bounds[i],
                                                      cfg, chunk_blocks), range(workers))
            data = b"".join(parts)
    stream = BitStream(data, n_blocks * cfg.digest_bits)
    if details:
        return ExtractionResult(stream, n_blocks, raw.bit_len - n_blocks * nb)
    return stream


def output_rate(prf: float, bits_per_pulse: float, reduction: float) -> float:
    """Extracted bit rate, ``prf * bits_per_pulse / reduction``."""
    if prf <= 0 or bits_per_pulse <= 0 or reduction <= 0:
        raise ValueError("all inputs must be positive")
    return prf * bits_per_pulse / reduction

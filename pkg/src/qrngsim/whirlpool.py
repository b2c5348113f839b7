"""Whirlpool hash (ISO/IEC 10118-3, final 2003 version).

The S-box is generated from the E, E^-1 and R 4-bit mini-boxes and the round
tables from the circulant MDS matrix cir(1, 1, 4, 1, 8, 5, 2, 9) over
GF(2^8) mod x^8 + x^4 + x^3 + x^2 + 1, so no large constant tables are
pasted in. The compression function is compiled with numba; the batch entry
point releases the GIL so fixed-size blocks can be hashed from threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DIGEST_BYTES = 64
BLOCK_BYTES = 64
ROUNDS = 10

_E = [0x1, 0xB, 0x9, 0xC, 0xD, 0x6, 0xF, 0x3, 0xE, 0x8, 0x7, 0x4, 0xA, 0x2, 0x5, 0x0]
_R = [0x7, 0xC, 0xB, 0xD, 0xE, 0x4, 0x9, 0xF, 0x6, 0x3, 0x8, 0xA, 0x2, 0x5, 0x1, 0x0]
_EINV = [_E.index(i) for i in range(16)]
_MDS_ROW = (1, 1, 4, 1, 8, 5, 2, 9)


def _gf_mul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
        b >>= 1
    return r


def _sbox() -> list:
    out = []
    for x in range(256):
        hi, lo = _E[x >> 4], _EINV[x & 0xF]
        r = _R[hi ^ lo]
        out.append((_E[hi ^ r] << 4) | _EINV[lo ^ r])
    return out


def _tables():
    sbox = _sbox()
    c = np.zeros((8, 256), dtype=np.uint64)
    for x in range(256):
        word = 0
        for coef in _MDS_ROW:
            word = (word << 8) | _gf_mul(sbox[x], coef)
        for k in range(8):
            rot = ((word >> (8 * k)) | (word << (64 - 8 * k))) & 0xFFFFFFFFFFFFFFFF if k else word
            c[k, x] = rot
    rc = np.zeros(ROUNDS + 1, dtype=np.uint64)
    for r in range(1, ROUNDS + 1):
        word = 0
        for j in range(8):
            word = (word << 8) | sbox[8 * (r - 1) + j]
        rc[r] = word
    return np.array(sbox, dtype=np.uint8), c, rc


SBOX, _C, _RC = _tables()


@njit(cache=True, nogil=True, inline="always")
def _rho(src, key, dst, c):
    for i in range(8):
        acc = key[i]
        for k in range(8):
            acc ^= c[k, (src[(i - k) & 7] >> np.uint64(56 - 8 * k)) & np.uint64(0xFF)]
        dst[i] = acc


@njit(cache=True, nogil=True)
def _compress(h, block, c, rc):
    """Miyaguchi-Preneel step: ``h <- W_h(block) ^ h ^ block`` in place."""
    k = h.copy()
    state = np.empty(8, dtype=np.uint64)
    tmp = np.empty(8, dtype=np.uint64)
    rkey = np.zeros(8, dtype=np.uint64)
    for i in range(8):
        state[i] = block[i] ^ k[i]
    for r in range(1, 11):
        rkey[0] = rc[r]
        _rho(k, rkey, tmp, c)
        for i in range(8):
            k[i] = tmp[i]
        _rho(state, k, tmp, c)
        for i in range(8):
            state[i] = tmp[i]
    for i in range(8):
        h[i] ^= state[i] ^ block[i]


@njit(cache=True, nogil=True)
def _hash_words(words, c, rc):
    """Hash rows of pre-padded big-endian message words, shape (n, 8*blocks)."""
    n, m = words.shape
    out = np.empty((n, 8), dtype=np.uint64)
    h = np.empty(8, dtype=np.uint64)
    for row in range(n):
        h[:] = 0
        for off in range(0, m, 8):
            _compress(h, words[row, off:off + 8], c, rc)
        out[row, :] = h
    return out


def pad(message: bytes) -> bytes:
    """Append the 1 bit, zeros, and the 256-bit big-endian bit length."""
    n = len(message)
    zeros = (32 - (n + 1)) % 64
    return message + b"\x80" + b"\x00" * zeros + (8 * n).to_bytes(32, "big")


def padded_len(n: int) -> int:
    return len(pad(bytes(n)))


def _padded_words(rows: np.ndarray) -> np.ndarray:
    """Pad equal-length messages (uint8 rows) and view them as big-endian words."""
    n, length = rows.shape
    total = padded_len(length)
    buf = np.zeros((n, total), dtype=np.uint8)
    buf[:, :length] = rows
    buf[:, length] = 0x80
    buf[:, -32:] = np.frombuffer((8 * length).to_bytes(32, "big"), dtype=np.uint8)
    return buf.view(">u8").astype(np.uint64)


def whirlpool(message: bytes) -> bytes:
    """512-bit Whirlpool digest of ``message``."""
    data = np.frombuffer(pad(bytes(message)), dtype=">u8").astype(np.uint64)
    digest = _hash_words(data.reshape(1, -1), _C, _RC)
    return digest.astype(">u8").tobytes()


def whirlpool_many(rows: np.ndarray) -> np.ndarray:
    """Digest each row of a ``(n, length)`` uint8 array; returns ``(n, 64)`` uint8."""
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("expected a 2-D array of equal-length messages")
    digests = _hash_words(_padded_words(rows), _C, _RC)
    return digests.astype(">u8").view(np.uint8).reshape(rows.shape[0], DIGEST_BYTES)

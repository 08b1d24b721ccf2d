"""Hamming forward error correction and CRC-16 for LoRa-shaped frames.

Codewords are systematic: the data nibble occupies the top four bits
(``d3 d2 d1 d0``) followed by the parity bits. Decoding is nearest-codeword
over lookup tables built once at import.
"""
import binascii
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.models.chirp import parse_code_rate


def _parity_bits(nibble: int, n_bits: int) -> int:
    d0, d1, d2, d3 = ((nibble >> i) & 1 for i in range(4))
    p0 = d0 ^ d1 ^ d3
    p1 = d0 ^ d2 ^ d3
    p2 = d1 ^ d2 ^ d3
    if n_bits == 5:
        return d0 ^ d1 ^ d2 ^ d3
    if n_bits == 6:
        return (p0 << 1) | p1
    code7 = (p0 << 2) | (p1 << 1) | p2
    if n_bits == 7:
        return code7
    overall = bin((nibble << 3) | code7).count("1") & 1
    return (code7 << 1) | overall


@dataclass(frozen=True)
class _CodeTables:
    n_bits: int
    correctable: int
    encode: Tuple[int, ...]
    decode: Tuple[Tuple[int, int], ...]  # word -> (nibble, distance)


def _build_tables(n_bits: int) -> _CodeTables:
    encode = tuple((d << (n_bits - 4)) | _parity_bits(d, n_bits) for d in range(16))
    codewords = np.array(encode)
    decode = []
    for word in range(1 << n_bits):
        distances = [bin(word ^ int(c)).count("1") for c in codewords]
        best = int(np.argmin(distances))
        tied = distances.count(distances[best]) > 1
        distance = distances[best] if not tied else n_bits
        decode.append((best, distance))
    return _CodeTables(
        n_bits=n_bits,
        correctable=1 if n_bits >= 7 else 0,
        encode=encode,
        decode=tuple(decode),
    )


_TABLES: Dict[int, _CodeTables] = {n: _build_tables(n) for n in (5, 6, 7, 8)}


@dataclass(frozen=True)
class HammingDecodeResult:
    """Decoded nibbles with per-block status flags."""

    nibbles: List[int]
    corrected: List[bool]
    uncorrectable: List[bool]

    @property
    def ok(self) -> bool:
        return not any(self.uncorrectable)


def _tables_for(cr: Fraction) -> _CodeTables:
    return _TABLES[round(4 / parse_code_rate(cr))]


def hamming_encode(nibbles: Sequence[int], cr: Fraction) -> List[int]:
    """Encode 4-bit nibbles into a flat MSB-first codeword bit sequence.

    4/8 is extended Hamming(8,4), 4/7 is Hamming(7,4); 4/6 and 4/5 carry
    two and one parity bits and only detect errors.
    """
    tables = _tables_for(cr)
    bits: List[int] = []
    for nibble in nibbles:
        if not 0 <= nibble < 16:
            raise ValueError(f"nibble out of range: {nibble}")
        word = tables.encode[nibble]
        bits.extend((word >> i) & 1 for i in range(tables.n_bits - 1, -1, -1))
    return bits


def hamming_decode(bits: Sequence[int], cr: Fraction) -> HammingDecodeResult:
    """Decode codeword bits back to nibbles.

    Blocks within the code's correction radius are corrected and flagged
    ``corrected``; anything further is flagged ``uncorrectable`` and the raw
    data bits are returned for it. Trailing bits short of a block are ignored.
    """
    tables = _tables_for(cr)
    n = tables.n_bits
    nibbles: List[int] = []
    corrected: List[bool] = []
    uncorrectable: List[bool] = []
    for start in range(0, len(bits) - n + 1, n):
        word = 0
        for b in bits[start : start + n]:
            word = (word << 1) | (int(b) & 1)
        nibble, distance = tables.decode[word]
        if distance == 0:
            nibbles.append(nibble)
            corrected.append(False)
            uncorrectable.append(False)
        elif distance <= tables.correctable:
            nibbles.append(nibble)
            corrected.append(True)
            uncorrectable.append(False)
        else:
            nibbles.append(word >> (n - 4))
            corrected.append(False)
            uncorrectable.append(True)
    return HammingDecodeResult(nibbles, corrected, uncorrectable)


def crc16(payload: bytes) -> int:
    """CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xorout)."""
    return binascii.crc_hqx(bytes(payload), 0xFFFF)


def bytes_to_nibbles(data: bytes) -> List[int]:
    """Split bytes into nibbles, low nibble first."""
    nibbles: List[int] = []
    for byte in data:
        nibbles.append(byte & 0x0F)
        nibbles.append(byte >> 4)
    return nibbles


def nibbles_to_bytes(nibbles: Sequence[int]) -> bytes:
    """Inverse of :func:`bytes_to_nibbles`; a trailing odd nibble is dropped."""
    pairs = len(nibbles) // 2
    return bytes(
        (nibbles[2 * i] & 0x0F) | ((nibbles[2 * i + 1] & 0x0F) << 4)
        for i in range(pairs)
    )

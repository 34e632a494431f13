"""Bit-string helpers: message bits travel as hex strings plus a bit count."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError


def bits_to_hex(bits: Sequence[int]) -> str:
    """Pack bits most-significant-first; the tail is zero padded to a nibble."""
    bits = [int(b) for b in bits]
    if not bits:
        return ""
    pad = (-len(bits)) % 4
    value = 0
    for b in bits + [0] * pad:
        value = (value << 1) | b
    return format(value, "0{}x".format((len(bits) + pad) // 4))


def hex_to_bits(text: str, nbits: int | None = None) -> list[int]:
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if text and any(ch not in "0123456789abcdef" for ch in text):
        raise FormatError(f"not a hexadecimal string: {text!r}")
    total = 4 * len(text)
    if nbits is None:
        nbits = total
    if nbits > total:
        raise FormatError(f"{nbits} bits requested from {total}-bit hex string")
    if not text:
        return []
    value = int(text, 16)
    out = [(value >> (total - 1 - i)) & 1 for i in range(total)]
    return out[:nbits]


def random_bits(n: int, rng: np.random.Generator) -> list[int]:
    return rng.integers(0, 2, size=n).tolist()


def check_bits(bits: Iterable[int]) -> list[int]:
    out = [int(b) for b in bits]
    if any(b not in (0, 1) for b in out):
        raise ValueError("message bits must be 0 or 1")
    return out

"""Exact integer polynomial kernels.

Polynomials are plain lists of Python ints, lowest degree first.  Products
go through Kronecker substitution: both operands are packed into one big
integer, multiplied once, and unpacked.  Python's big-int multiplication is
subquadratic, so this beats a schoolbook double loop by a wide margin once
degrees reach the thousands.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "trim",
    "add",
    "sub",
    "scale",
    "mul",
    "mul_mod",
    "divmod_monic",
    "shift",
    "is_zero",
]


def trim(a: Sequence[int]) -> list[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def is_zero(a: Sequence[int]) -> bool:
    return all(c == 0 for c in a)


def add(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return out


def sub(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] -= c
    return out


def scale(a: Sequence[int], c: int) -> list[int]:
    return [c * x for x in a]


def shift(a: Sequence[int], k: int) -> list[int]:
    """Multiply by X^k."""
    return [0] * k + list(a)


def _pack(coeffs: Sequence[int], nbytes: int) -> int:
    return int.from_bytes(
        b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little"
    )


def _pack_signed(coeffs: Sequence[int], nbytes: int) -> int:
    pos = _pack([c if c > 0 else 0 for c in coeffs], nbytes)
    neg = _pack([-c if c < 0 else 0 for c in coeffs], nbytes)
    return pos - neg


def _unpack(value: int, nbytes: int, length: int) -> list[int]:
    raw = value.to_bytes(nbytes * length, "little")
    if nbytes == 8:
        return [int(x) for x in np.frombuffer(raw, dtype="<u8")]
    return [
        int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little")
        for i in range(length)
    ]


def _slot_bytes(bound: int) -> int:
    # one spare bit for the sign bias, rounded up to whole bytes
    return (bound.bit_length() + 2 + 7) // 8


def mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Exact product of two integer polynomials."""
    a = trim(a)
    b = trim(b)
    if not a or not b:
        return []
    if len(a) == 1:
        return [a[0] * x for x in b]
    if len(b) == 1:
        return [b[0] * x for x in a]
    ma = max(abs(c) for c in a)
    mb = max(abs(c) for c in b)
    length = len(a) + len(b) - 1
    nbytes = _slot_bytes(ma * mb * min(len(a), len(b)))
    prod = _pack_signed(a, nbytes) * _pack_signed(b, nbytes)
    half = 1 << (8 * nbytes - 1)
    bias = int.from_bytes(
        (b"\x00" * (nbytes - 1) + b"\x80") * length, "little"
    )
    return [c - half for c in _unpack(prod + bias, nbytes, length)]


def mul_mod(a: Sequence[int], b: Sequence[int], modulus: int) -> list[int]:
    """Product of two polynomials with coefficients reduced into [0, modulus)."""
    a = [c % modulus for c in a]
    b = [c % modulus for c in b]
    a = trim(a)
    b = trim(b)
    if not a or not b:
        return []
    length = len(a) + len(b) - 1
    nbytes = _slot_bytes((modulus - 1) ** 2 * min(len(a), len(b)))
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    return [c % modulus for c in _unpack(prod, nbytes, length)]


def divmod_monic(
    a: Sequence[int], m: Sequence[int], modulus: int | None = None
) -> tuple[list[int], list[int]]:
    """Quotient and remainder of ``a`` by the monic polynomial ``m``.

    Sparse divisors are handled efficiently because only the nonzero
    lower coefficients of ``m`` are touched.
    """
    m = trim(m)
    if not m or m[-1] != 1:
        raise ValueError("divisor must be monic")
    dm = len(m) - 1
    rem = list(a)
    if len(rem) <= dm:
        return [], rem + [0] * (dm - len(rem))
    support = [(i, c) for i, c in enumerate(m[:-1]) if c != 0]
    quot = [0] * (len(rem) - dm)
    for k in range(len(rem) - 1, dm - 1, -1):
        q = rem[k]
        if modulus is not None:
            q %= modulus
        if q == 0:
            continue
        quot[k - dm] = q
        base = k - dm
        for i, c in support:
            rem[base + i] -= q * c
        rem[k] = 0
    rem = rem[:dm]
    if modulus is not None:
        rem = [c % modulus for c in rem]
        quot = [c % modulus for c in quot]
    return quot, rem

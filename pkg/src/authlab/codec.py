"""Byte-level conventions: hashing, concatenation, XOR and encodings.

``concat`` is raw concatenation with no separators or length prefixes, so
``concat(["us", "erpw"]) == concat(["user", "pw"])``.  The restricted
username/realm charset keeps that from mattering on the wire.
"""

from __future__ import annotations

import hashlib
import re
from typing import Iterable, Union

from .ecc import CurveParams, Point, validate_point
from .errors import BadUsername, InvalidPoint, MalformedEncoding, ScalarDegenerate

DIGEST_SIZE = 32
TOKEN_RE = re.compile(r"[A-Za-z0-9._-]{1,64}")
_HEX_RE = re.compile(r"(?:[0-9a-f]{2})*")


class Digest(bytes):
    """Exactly 32 bytes of hash output (HPW, HK_S, VPW, h1, h2)."""

    def __new__(cls, value: bytes = b"\x00" * DIGEST_SIZE):
        if len(value) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {len(value)}")
        return super().__new__(cls, value)

    @classmethod
    def fromhex(cls, text: str) -> "Digest":
        raw = from_hex(text)
        if len(raw) != DIGEST_SIZE:
            raise MalformedEncoding(f"digest hex must be {2 * DIGEST_SIZE} characters")
        return cls(raw)

    def __repr__(self):
        return f"Digest({self.hex()})"


ZERO_DIGEST = Digest()


def check_token(value: str, what: str = "username") -> str:
    if not isinstance(value, str) or not TOKEN_RE.fullmatch(value):
        raise BadUsername(f"{what} {value!r} must match [A-Za-z0-9._-]{{1,64}}")
    return value


def hash_bytes(data: bytes) -> Digest:
    return Digest(hashlib.sha256(data).digest())


def concat(parts: Iterable[Union[bytes, str]]) -> bytes:
    return b"".join(p.encode("utf-8") if isinstance(p, str) else bytes(p) for p in parts)


def hash_concat(*parts: Union[bytes, str]) -> Digest:
    """h(part1 || part2 || ...)."""
    return hash_bytes(concat(parts))


def xor_digests(a: Digest, b: Digest) -> Digest:
    return Digest(bytes(x ^ y for x, y in zip(a, b, strict=True)))


def digest_to_scalar(d: bytes, curve: CurveParams) -> int:
    """Big-endian integer value of ``d`` mod n; zero is rejected."""
    k = int.from_bytes(d, "big") % curve.n
    if k == 0:
        raise ScalarDegenerate("digest reduces to zero mod n")
    return k


def to_hex(data: bytes) -> str:
    return bytes(data).hex()


def from_hex(text: str) -> bytes:
    """Strict lowercase, even-length hex with no prefix."""
    if not _HEX_RE.fullmatch(text):
        raise MalformedEncoding(f"bad hex {text[:32]!r}")
    return bytes.fromhex(text)


def encode_point(P: Point, curve: CurveParams) -> bytes:
    """0x00 for infinity, else 0x04 || x || y with fixed-width big-endian coordinates."""
    if P is None:
        return b"\x00"
    if not validate_point(curve, P):
        raise InvalidPoint(f"point {P!r} is not on {curve.name}")
    w = curve.coord_width
    return b"\x04" + P[0].to_bytes(w, "big") + P[1].to_bytes(w, "big")


def decode_point(data: bytes, curve: CurveParams) -> Point:
    if data == b"\x00":
        return None
    w = curve.coord_width
    if len(data) != 1 + 2 * w or data[0] != 0x04:
        raise MalformedEncoding(f"point encoding must be 0x00 or 0x04 plus {2 * w} bytes")
    P = (int.from_bytes(data[1 : 1 + w], "big"), int.from_bytes(data[1 + w :], "big"))
    if not validate_point(curve, P):
        raise InvalidPoint(f"decoded point is not on {curve.name}")
    return P

"""Short-Weierstrass curve arithmetic over a prime field.

Points are plain values: ``None`` is the point at infinity and an affine
point is an ``(x, y)`` tuple of ints.  ``point_add`` uses the affine
chord-tangent law directly; ``scalar_mul`` runs double-and-add on Jacobian
coordinates internally and converts back to affine once at the end.

Nothing here is constant time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import CurveError, InvalidPoint, ScalarDegenerate

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int

Point = Optional[Tuple[int, int]]
INFINITY: Point = None

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with the first twenty primes as witnesses."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class CurveParams:
    """Curve y^2 = x^3 + ax + b over F_p with base point G of prime order n."""

    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    coord_width: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "coord_width", (self.p.bit_length() + 7) // 8)

    @property
    def G(self) -> Tuple[int, int]:
        return (self.gx, self.gy)

    def check(self) -> "CurveParams":
        """Raise CurveError unless every group invariant holds; return self."""
        p, a, b = self.p, self.a, self.b
        if not is_probable_prime(p):
            raise CurveError(f"{self.name}: p is not prime")
        if not (0 <= a < p and 0 <= b < p):
            raise CurveError(f"{self.name}: coefficients must lie in [0, p)")
        if (4 * a**3 + 27 * b**2) % p == 0:
            raise CurveError(f"{self.name}: curve is singular")
        if not validate_point(self, self.G):
            raise CurveError(f"{self.name}: base point is not on the curve")
        if not is_probable_prime(self.n):
            raise CurveError(f"{self.name}: n is not prime")
        if _jacobian_mul(self, self.n, self.G) is not None:
            raise CurveError(f"{self.name}: n * G is not the point at infinity")
        return self


TOY17 = CurveParams(name="toy17", p=17, a=2, b=2, gx=5, gy=1, n=19)

_P256_P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
P256 = CurveParams(
    name="p256",
    p=_P256_P,
    a=_P256_P - 3,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
)

BUILTIN_CURVES = {c.name: c for c in (TOY17, P256)}


def validate_point(curve: CurveParams, P: Point) -> bool:
    if P is None:
        return True
    try:
        x, y = P
    except (TypeError, ValueError):
        return False
    if not (isinstance(x, int) and isinstance(y, int)):
        return False
    p = curve.p
    if not (0 <= x < p and 0 <= y < p):
        return False
    return (y * y - (x * x * x + curve.a * x + curve.b)) % p == 0


def _require(curve: CurveParams, P: Point) -> None:
    if not validate_point(curve, P):
        raise InvalidPoint(f"point {P!r} is not on {curve.name}")


def point_neg(curve: CurveParams, P: Point) -> Point:
    if P is None:
        return None
    return (P[0], (-P[1]) % curve.p)


def point_add(curve: CurveParams, P: Point, Q: Point) -> Point:
    _require(curve, P)
    _require(curve, Q)
    if P is None:
        return Q
    if Q is None:
        return P
    p = curve.p
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + curve.a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def scalar_mul(curve: CurveParams, k: int, P: Point) -> Point:
    """Return k * P; k is reduced mod n first, so k = 0 and k = n give infinity."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    _require(curve, P)
    return _jacobian_mul(curve, k % curve.n, P)


def scalar_inv(curve: CurveParams, k: int) -> int:
    k %= curve.n
    if k == 0:
        raise ScalarDegenerate("zero has no inverse mod n")
    return pow(k, -1, curve.n)


def _jacobian_double(p, a, X, Y, Z):
    if Z == 0 or Y == 0:
        return 1, 1, 0
    YY = Y * Y % p
    S = 4 * X * YY % p
    ZZ = Z * Z % p
    M = (3 * X * X + a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    return X3, Y3, 2 * Y * Z % p


def _jacobian_add_affine(p, a, X, Y, Z, x2, y2):
    if Z == 0:
        return x2, y2, 1
    ZZ = Z * Z % p
    H = (x2 * ZZ - X) % p
    r = (y2 * Z * ZZ - Y) % p
    if H == 0:
        if r == 0:
            return _jacobian_double(p, a, X, Y, Z)
        return 1, 1, 0
    HH = H * H % p
    HHH = H * HH % p
    V = X * HH % p
    X3 = (r * r - HHH - 2 * V) % p
    Y3 = (r * (V - X3) - Y * HHH) % p
    return X3, Y3, Z * H % p


def _jacobian_mul(curve: CurveParams, k: int, P: Point) -> Point:
    # (X, Y, Z) stands for (X/Z^2, Y/Z^3); Z == 0 is infinity.
    if P is None or k == 0:
        return None
    p, a = _mpz(curve.p), _mpz(curve.a)
    px, py = _mpz(P[0]), _mpz(P[1])
    X, Y, Z = px, py, _mpz(1)
    for bit in bin(k)[3:]:
        X, Y, Z = _jacobian_double(p, a, X, Y, Z)
        if bit == "1":
            X, Y, Z = _jacobian_add_affine(p, a, X, Y, Z, px, py)
    if Z == 0:
        return None
    zinv = pow(int(Z), -1, curve.p)
    zinv2 = zinv * zinv % curve.p
    return (int(X) * zinv2 % curve.p, int(Y) * zinv2 * zinv % curve.p)


_CURVE_KEYS = ("p", "a", "b", "gx", "gy", "n")


def _parse_int(text: str) -> int:
    text = text.strip()
    if text.lower().startswith("0x"):
        return int(text[2:], 16)
    return int(text, 10)


def load_curve_file(path) -> CurveParams:
    """Load ``key = value`` lines (p, a, b, Gx, Gy, n; optional name) and validate."""
    values = {}
    name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CurveError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip().lower()
            if key == "name":
                name = value.strip()
                continue
            if key not in _CURVE_KEYS:
                raise CurveError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _parse_int(value)
            except ValueError:
                raise CurveError(f"{path}:{lineno}: bad integer {value.strip()!r}") from None
    missing = [k for k in _CURVE_KEYS if k not in values]
    if missing:
        raise CurveError(f"{path}: missing {', '.join(missing)}")
    return CurveParams(name=name, **values).check()


def resolve_curve(name_or_path: str) -> CurveParams:
    """A built-in curve by name, otherwise a parameter file path."""
    if name_or_path in BUILTIN_CURVES:
        return BUILTIN_CURVES[name_or_path]
    if os.path.exists(name_or_path):
        return load_curve_file(name_or_path)
    raise CurveError(f"unknown curve {name_or_path!r}")

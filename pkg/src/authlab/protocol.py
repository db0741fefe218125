"""Registration and the four-step authentication exchange.

Client side::

    state, request = client_begin(username, password, curve)
    key, response = client_respond(state, challenge)

Server side::

    record = register(username, password, server_key, curve)
    session, challenge = server_challenge(request, record, server_key, realm, curve)
    key = server_verify(session, response)

Everything the scheme sends is sent verbatim; no replay protection or extra
transcript binding is added.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .codec import (
    Digest,
    check_token,
    digest_to_scalar,
    encode_point,
    hash_bytes,
    hash_concat,
    xor_digests,
)
from .ecc import CurveParams, Point, scalar_inv, scalar_mul, validate_point
from .errors import (
    InvalidPoint,
    ServerAuthFailed,
    SessionMismatch,
    UnknownUser,
    UserAuthFailed,
)

_system_rng = secrets.SystemRandom()


def random_scalar(curve: CurveParams, rng=None) -> int:
    """Draw from ``rng.randrange(n)`` until the value is nonzero."""
    rng = rng or _system_rng
    while True:
        k = rng.randrange(curve.n)
        if k != 0:
            return k


@dataclass(frozen=True)
class ServerKey:
    secret: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.secret) < 32:
            raise ValueError("server key must be at least 32 bytes")

    @classmethod
    def generate(cls) -> "ServerKey":
        return cls(secrets.token_bytes(32))


@dataclass(frozen=True)
class VerifierRecord:
    username: str
    vpw: Digest


@dataclass(frozen=True)
class RequestMsg:
    username: str
    r1_point: Point


@dataclass(frozen=True)
class ChallengeMsg:
    realm: str
    r2_point: Point
    h1: Digest


@dataclass(frozen=True)
class ResponseMsg:
    username: str
    realm: str
    h2: Digest


@dataclass(frozen=True)
class ClientState:
    username: str
    hpw: Digest
    hpw_scalar: int
    r1: int
    curve: CurveParams


@dataclass
class ServerSession:
    username: str
    realm: str
    r2: int
    r1_prime: Point
    sk: Point
    expected_h2: Digest
    curve: CurveParams
    spent: bool = False


@dataclass(frozen=True)
class SessionKey:
    point: Point
    export: Digest

    @classmethod
    def from_point(cls, point: Point, curve: CurveParams) -> "SessionKey":
        return cls(point, hash_bytes(encode_point(point, curve)))


def password_digest(username: str, password: str) -> Digest:
    return hash_concat(username, password)


def _server_mask(username: str, server_key: ServerKey) -> Digest:
    return hash_concat(username, server_key.secret)


def auth_digest1(sk: Point, r2_point: Point, curve: CurveParams) -> Digest:
    """h1 = h(SK || R2)."""
    return hash_concat(encode_point(sk, curve), encode_point(r2_point, curve))


def auth_digest2(username: str, realm: str, sk: Point, curve: CurveParams) -> Digest:
    """h2 = h(username || realm || SK)."""
    return hash_concat(username, realm, encode_point(sk, curve))


def _require_finite(P: Point, curve: CurveParams, what: str) -> None:
    if P is None or not validate_point(curve, P):
        raise InvalidPoint(f"{what} must be a finite point on {curve.name}")


def register(username: str, password: str, server_key: ServerKey, curve: CurveParams) -> VerifierRecord:
    check_token(username)
    if not password:
        raise ValueError("password must not be empty")
    hpw = password_digest(username, password)
    digest_to_scalar(hpw, curve)
    return VerifierRecord(username, xor_digests(hpw, _server_mask(username, server_key)))


def client_begin(username: str, password: str, curve: CurveParams, rng=None):
    check_token(username)
    hpw = password_digest(username, password)
    hpw_scalar = digest_to_scalar(hpw, curve)
    r1 = random_scalar(curve, rng)
    r1_point = scalar_mul(curve, hpw_scalar * r1 % curve.n, curve.G)
    state = ClientState(username, hpw, hpw_scalar, r1, curve)
    return state, RequestMsg(username, r1_point)


def server_challenge(
    msg: RequestMsg,
    record: VerifierRecord,
    server_key: ServerKey,
    realm: str,
    curve: CurveParams,
    rng=None,
):
    if record is None:
        raise UnknownUser(msg.username)
    if record.username != msg.username:
        raise SessionMismatch("verifier record belongs to a different user")
    check_token(realm, "realm")
    _require_finite(msg.r1_point, curve, "R1")

    hpw = xor_digests(record.vpw, _server_mask(record.username, server_key))
    hpw_inv = scalar_inv(curve, digest_to_scalar(hpw, curve))
    r1_prime = scalar_mul(curve, hpw_inv, msg.r1_point)
    r2 = random_scalar(curve, rng)
    r2_point = scalar_mul(curve, r2, curve.G)
    sk = scalar_mul(curve, r2, r1_prime)
    session = ServerSession(
        username=msg.username,
        realm=realm,
        r2=r2,
        r1_prime=r1_prime,
        sk=sk,
        expected_h2=auth_digest2(msg.username, realm, sk, curve),
        curve=curve,
    )
    return session, ChallengeMsg(realm, r2_point, auth_digest1(sk, r2_point, curve))


def client_respond(state: ClientState, msg: ChallengeMsg):
    curve = state.curve
    _require_finite(msg.r2_point, curve, "R2")
    check_token(msg.realm, "realm")
    sk = scalar_mul(curve, state.r1, msg.r2_point)
    if auth_digest1(sk, msg.r2_point, curve) != msg.h1:
        raise ServerAuthFailed("h1 does not match; server not authenticated")
    h2 = auth_digest2(state.username, msg.realm, sk, curve)
    return SessionKey.from_point(sk, curve), ResponseMsg(state.username, msg.realm, h2)


def server_verify(session: ServerSession, msg: ResponseMsg) -> SessionKey:
    """Check h2.  The session is spent afterwards whatever the outcome."""
    if session.spent:
        raise SessionMismatch("server session already used")
    session.spent = True
    if msg.username != session.username or msg.realm != session.realm:
        raise SessionMismatch("response does not echo this session's username and realm")
    if msg.h2 != session.expected_h2:
        raise UserAuthFailed("h2 does not match; user not authenticated")
    return SessionKey.from_point(session.sk, session.curve)


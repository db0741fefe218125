"""Line protocol, transports and the connection drivers.

One authentication exchange per connection::

    C -> S  REQUEST <username> <hex R1>
    S -> C  CHALLENGE <realm> <hex R2> <hex h1>
    C -> S  RESPONSE <username> <realm> <hex h2>
    S -> C  OK | REJECT <code>

Every line is UTF-8, single-space separated and LF terminated.  Points are
hex of ``codec.encode_point``; digests are 64 lowercase hex characters.
"""

from __future__ import annotations

import itertools
import logging
import socket
import threading
from dataclasses import dataclass
from typing import Optional, Union

from .codec import Digest, check_token, decode_point, encode_point, from_hex
from .ecc import CurveParams
from .errors import (
    AuthLabError,
    BadUsername,
    ConfigError,
    InvalidPoint,
    MalformedEncoding,
    Rejected,
    ScalarDegenerate,
    SessionMismatch,
    UnknownUser,
    UserAuthFailed,
)
from .protocol import (
    ChallengeMsg,
    RequestMsg,
    ResponseMsg,
    ServerKey,
    SessionKey,
    client_begin,
    client_respond,
    server_challenge,
    server_verify,
)
from .attack import forge_request

log = logging.getLogger(__name__)

MAX_LINE = 4096
DEFAULT_TIMEOUT = 10.0
REJECT_CODES = frozenset({"UNKNOWN_USER", "INVALID_POINT", "AUTH_FAILED", "MALFORMED", "DEGENERATE"})


@dataclass(frozen=True)
class OutcomeMsg:
    ok: bool
    code: Optional[str] = None

    def __post_init__(self):
        if self.ok and self.code is not None:
            raise ValueError("OK carries no code")
        if not self.ok and self.code not in REJECT_CODES:
            raise ValueError(f"unknown reject code {self.code!r}")


WireMessage = Union[RequestMsg, ChallengeMsg, ResponseMsg, OutcomeMsg]


def _point_hex(P, curve):
    if P is None:
        # Infinity is encodable, but never a legal protocol value.
        raise InvalidPoint("point at infinity cannot be sent")
    return encode_point(P, curve).hex()


def encode_msg(m: WireMessage, curve: CurveParams) -> bytes:
    if isinstance(m, RequestMsg):
        fields = ["REQUEST", check_token(m.username), _point_hex(m.r1_point, curve)]
    elif isinstance(m, ChallengeMsg):
        fields = ["CHALLENGE", check_token(m.realm, "realm"), _point_hex(m.r2_point, curve), Digest(m.h1).hex()]
    elif isinstance(m, ResponseMsg):
        fields = ["RESPONSE", check_token(m.username), check_token(m.realm, "realm"), Digest(m.h2).hex()]
    elif isinstance(m, OutcomeMsg):
        fields = ["OK"] if m.ok else ["REJECT", m.code]
    else:
        raise TypeError(f"not a wire message: {m!r}")
    return (" ".join(fields) + "\n").encode("utf-8")


def _token(text, what):
    try:
        return check_token(text, what)
    except BadUsername as exc:
        raise MalformedEncoding(str(exc)) from None


def _point(text, curve):
    return decode_point(from_hex(text), curve)


def decode_msg(line: bytes, curve: CurveParams) -> WireMessage:
    """Parse one LF-terminated line; raises MalformedEncoding or InvalidPoint."""
    if len(line) > MAX_LINE + 1:
        raise MalformedEncoding("line too long")
    if not line.endswith(b"\n") or b"\n" in line[:-1]:
        raise MalformedEncoding("message must be exactly one LF-terminated line")
    try:
        text = line[:-1].decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedEncoding("line is not UTF-8") from None
    verb, *args = text.split(" ")
    arity = {"REQUEST": 2, "CHALLENGE": 3, "RESPONSE": 3, "OK": 0, "REJECT": 1}
    if verb not in arity:
        raise MalformedEncoding(f"unknown verb {verb[:16]!r}")
    if len(args) != arity[verb]:
        raise MalformedEncoding(f"{verb} takes {arity[verb]} fields, got {len(args)}")
    if verb == "REQUEST":
        return RequestMsg(_token(args[0], "username"), _point(args[1], curve))
    if verb == "CHALLENGE":
        return ChallengeMsg(_token(args[0], "realm"), _point(args[1], curve), Digest.fromhex(args[2]))
    if verb == "RESPONSE":
        return ResponseMsg(_token(args[0], "username"), _token(args[1], "realm"), Digest.fromhex(args[2]))
    if verb == "OK":
        return OutcomeMsg(True)
    if args[0] not in REJECT_CODES:
        raise MalformedEncoding(f"unknown reject code {args[0][:32]!r}")
    return OutcomeMsg(False, args[0])


class _Buffer:
    def __init__(self):
        self.data = bytearray()
        self.closed = False
        self.cond = threading.Condition()


class MemoryStream:
    """One end of an in-process byte stream with the socket calls we use."""

    def __init__(self, inbound: _Buffer, outbound: _Buffer):
        self._in = inbound
        self._out = outbound
        self._timeout = None

    def settimeout(self, timeout):
        self._timeout = timeout

    def sendall(self, data: bytes) -> None:
        with self._out.cond:
            if self._out.closed:
                raise BrokenPipeError("stream closed")
            self._out.data += data
            self._out.cond.notify_all()

    def recv(self, bufsize: int) -> bytes:
        with self._in.cond:
            if not self._in.cond.wait_for(lambda: self._in.data or self._in.closed, self._timeout):
                raise socket.timeout("timed out")
            chunk = bytes(self._in.data[:bufsize])
            del self._in.data[:bufsize]
            return chunk

    def close(self) -> None:
        for buf in (self._in, self._out):
            with buf.cond:
                buf.closed = True
                buf.cond.notify_all()


def memory_pair():
    """Two connected MemoryStream ends, like ``socket.socketpair``."""
    a, b = _Buffer(), _Buffer()
    return MemoryStream(a, b), MemoryStream(b, a)


class LineChannel:
    """Line framing over any object with ``sendall``/``recv``/``close``."""

    def __init__(self, stream, curve: CurveParams, timeout: Optional[float] = DEFAULT_TIMEOUT):
        self.stream = stream
        self.curve = curve
        self._pending = bytearray()
        if timeout is not None and hasattr(stream, "settimeout"):
            stream.settimeout(timeout)

    def send(self, m: WireMessage) -> None:
        self.stream.sendall(encode_msg(m, self.curve))

    def recv_line(self) -> bytes:
        while True:
            nl = self._pending.find(b"\n")
            if nl >= 0:
                line = bytes(self._pending[: nl + 1])
                del self._pending[: nl + 1]
                return line
            if len(self._pending) > MAX_LINE:
                raise MalformedEncoding("line too long")
            chunk = self.stream.recv(4096)
            if not chunk:
                raise ConnectionAbortedError("peer closed the connection")
            self._pending += chunk

    def recv(self) -> WireMessage:
        return decode_msg(self.recv_line(), self.curve)

    def close(self) -> None:
        self.stream.close()


def reject_code(exc: Exception) -> str:
    if isinstance(exc, UnknownUser):
        return "UNKNOWN_USER"
    if isinstance(exc, InvalidPoint):
        return "INVALID_POINT"
    if isinstance(exc, ScalarDegenerate):
        return "DEGENERATE"
    if isinstance(exc, (UserAuthFailed, SessionMismatch)):
        return "AUTH_FAILED"
    return "MALFORMED"


class AuthServer:
    """Serves one exchange per connection; ``sessions`` holds the live ones.

    ``on_accept(username, session_key)`` is called after each successful login.
    """

    def __init__(self, store, server_key: ServerKey, realm: str, curve: CurveParams,
                 timeout: Optional[float] = DEFAULT_TIMEOUT, rng=None, on_accept=None):
        if store.curve_name != curve.name:
            raise ConfigError(f"store is for curve {store.curve_name!r}, server runs {curve.name!r}")
        check_token(realm, "realm")
        self.store = store
        self.server_key = server_key
        self.realm = realm
        self.curve = curve
        self.timeout = timeout
        self.rng = rng
        self.on_accept = on_accept
        self.sessions = {}
        self._lock = threading.Lock()
        self._ids = itertools.count()
        self._stop = threading.Event()

    def handle(self, stream) -> None:
        chan = LineChannel(stream, self.curve, self.timeout)
        conn_id = next(self._ids)
        try:
            request = chan.recv()
            if not isinstance(request, RequestMsg):
                raise MalformedEncoding("expected REQUEST")
            record = self.store.get_record(request.username)
            session, challenge = server_challenge(
                request, record, self.server_key, self.realm, self.curve, self.rng
            )
            with self._lock:
                self.sessions[conn_id] = session
            chan.send(challenge)
            response = chan.recv()
            if not isinstance(response, ResponseMsg):
                raise MalformedEncoding("expected RESPONSE")
            key = server_verify(session, response)
            chan.send(OutcomeMsg(True))
            if self.on_accept is not None:
                self.on_accept(session.username, key)
        except AuthLabError as exc:
            log.info("connection %d rejected: %s", conn_id, exc)
            try:
                chan.send(OutcomeMsg(False, reject_code(exc)))
            except OSError:
                pass
        except OSError as exc:
            log.info("connection %d dropped: %s", conn_id, exc)
        finally:
            with self._lock:
                self.sessions.pop(conn_id, None)
            chan.close()

    def serve_forever(self, listener: socket.socket, poll_interval: float = 0.2) -> None:
        self._stop.clear()
        listener.settimeout(poll_interval)
        while not self._stop.is_set():
            try:
                conn, _ = listener.accept()
            except socket.timeout:
                continue
            except OSError:
                if self._stop.is_set():
                    break
                raise
            conn.settimeout(None)
            threading.Thread(target=self.handle, args=(conn,), daemon=True).start()

    def shutdown(self) -> None:
        self._stop.set()


def serve(listener, store, server_key, realm, curve, timeout=DEFAULT_TIMEOUT, rng=None) -> None:
    AuthServer(store, server_key, realm, curve, timeout, rng).serve_forever(listener)


def parse_address(text: str):
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


def connect(address: str, timeout: Optional[float] = DEFAULT_TIMEOUT) -> socket.socket:
    return socket.create_connection(parse_address(address), timeout=timeout)


def _expect(msg, kind):
    if isinstance(msg, OutcomeMsg) and not msg.ok:
        raise Rejected(msg.code)
    if not isinstance(msg, kind):
        raise MalformedEncoding(f"expected {kind.__name__}, got {type(msg).__name__}")
    return msg


def client_exchange(conn, username: str, password: str, curve: CurveParams, rng=None,
                    timeout: Optional[float] = DEFAULT_TIMEOUT) -> SessionKey:
    chan = LineChannel(conn, curve, timeout)
    state, request = client_begin(username, password, curve, rng)
    chan.send(request)
    challenge = _expect(chan.recv(), ChallengeMsg)
    try:
        key, response = client_respond(state, challenge)
    except AuthLabError:
        chan.close()
        raise
    chan.send(response)
    _expect(chan.recv(), OutcomeMsg)
    return key


def adversary_exchange(conn, username: str, curve: CurveParams, rng=None,
                       timeout: Optional[float] = DEFAULT_TIMEOUT):
    """Send a forged REQUEST and capture the CHALLENGE; the caller may then hang up."""
    chan = LineChannel(conn, curve, timeout)
    state, request = forge_request(username, curve, rng)
    chan.send(request)
    return state, _expect(chan.recv(), ChallengeMsg)

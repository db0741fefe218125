"""Command line entry point: register, serve, login, attack, bench.

stdout only ever carries the result (a hex session key or one JSON object);
diagnostics go to stderr.  Exit codes: 0 success, 1 authentication failure
or password not found, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import getpass
import json
import logging
import os
import random
import signal
import socket
import sys

from . import attack, store as store_mod, wire
from .codec import from_hex
from .ecc import resolve_curve
from .errors import (
    AuthLabError,
    BadUsername,
    ConfigError,
    CurveError,
    DuplicateUser,
    FormatError,
    MalformedEncoding,
)
from .protocol import ServerKey, register

log = logging.getLogger("authlab")

DEFAULT_CURVE = "p256"
_CONFIG_ERRORS = (ConfigError, CurveError, FormatError, BadUsername, DuplicateUser)


class UsageError(Exception):
    pass


def _rng(seed):
    return random.Random(seed) if seed is not None else None


def _curve(args):
    return resolve_curve(args.curve or os.environ.get("AUTHLAB_CURVE") or DEFAULT_CURVE)


def _server_key(args) -> ServerKey:
    if args.server_key and args.server_key_file:
        raise UsageError("give --server-key or --server-key-file, not both")
    if args.server_key_file:
        with open(args.server_key_file, encoding="ascii") as fh:
            text = fh.read().strip()
    elif args.server_key:
        text = args.server_key
    else:
        raise UsageError("a server key is required (--server-key or --server-key-file)")
    try:
        return ServerKey(from_hex(text.lower()))
    except (MalformedEncoding, ValueError):
        raise UsageError("server key must be at least 64 hex characters") from None


def _password(args) -> str:
    if args.password is not None:
        return args.password
    return getpass.getpass(f"password for {args.username}: ")


def cmd_register(args) -> int:
    curve = _curve(args)
    key = _server_key(args)
    if os.path.exists(args.store):
        db = store_mod.load_store(args.store)
        if db.curve_name != curve.name:
            raise ConfigError(f"{args.store} holds verifiers for curve {db.curve_name!r}")
    else:
        db = store_mod.VerifierStore(curve.name)
    db.put_record(register(args.username, _password(args), key, curve), overwrite=args.overwrite)
    store_mod.save_store(db, args.store)
    log.info("registered %s in %s", args.username, args.store)
    return 0


def cmd_serve(args) -> int:
    curve = _curve(args)
    server = wire.AuthServer(
        store_mod.load_store(args.store), _server_key(args), args.realm, curve,
        timeout=args.timeout, rng=_rng(args.seed),
    )
    listener = socket.create_server(wire.parse_address(args.listen))
    host, port = listener.getsockname()[:2]
    print(f"listening on {host}:{port}", file=sys.stderr, flush=True)
    signal.signal(signal.SIGTERM, lambda *_: server.shutdown())
    try:
        server.serve_forever(listener)
    except KeyboardInterrupt:
        pass
    finally:
        listener.close()
    return 0


def cmd_login(args) -> int:
    curve = _curve(args)
    password = _password(args)
    with wire.connect(args.server, args.timeout) as conn:
        key = wire.client_exchange(conn, args.username, password, curve, _rng(args.seed), args.timeout)
    print(key.export.hex())
    return 0


def cmd_attack(args) -> int:
    curve = _curve(args)
    dictionary = attack.load_dictionary(args.dict)
    with wire.connect(args.server, args.timeout) as conn:
        state, challenge = wire.adversary_exchange(conn, args.username, curve, _rng(args.seed), args.timeout)
    log.info("challenge captured; scanning %d candidates offline", len(dictionary))
    password, stats = attack.run_dictionary(state, challenge, dictionary, args.workers)
    print(json.dumps(stats.report(password)))
    return 0 if password is not None else 1


def cmd_bench(args) -> int:
    curve = _curve(args)
    password, stats = attack.bench_attack(curve, args.dict_size, args.seed, args.workers)
    print(json.dumps(stats.report(password)))
    return 0


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", help=f"built-in curve name or parameter file (env AUTHLAB_CURVE, default {DEFAULT_CURVE})")
    common.add_argument("-v", "--verbose", action="store_true")

    keyed = argparse.ArgumentParser(add_help=False)
    keyed.add_argument("--server-key", help="server secret as hex (>= 32 bytes)")
    keyed.add_argument("--server-key-file", help="file containing the server secret as hex")

    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--timeout", type=float, default=wire.DEFAULT_TIMEOUT, help="per-message read timeout, seconds")
    timed.add_argument("--seed", type=int, help="seed the protocol randomness (tests only)")

    parser = argparse.ArgumentParser(prog="authlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", parents=[common, keyed], help="add a user verifier to the store")
    p.add_argument("--store", required=True)
    p.add_argument("--username", required=True)
    p.add_argument("--password", help="omit to be prompted")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("serve", parents=[common, keyed, timed], help="run the authentication server")
    p.add_argument("--store", required=True)
    p.add_argument("--listen", default="127.0.0.1:5060")
    p.add_argument("--realm", default="authlab")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("login", parents=[common, timed], help="authenticate and print the session key")
    p.add_argument("--server", required=True)
    p.add_argument("--username", required=True)
    p.add_argument("--password", help="omit to be prompted")
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("attack", parents=[common, timed], help="capture a challenge and guess offline")
    p.add_argument("--server", required=True)
    p.add_argument("--username", required=True)
    p.add_argument("--dict", required=True, help="dictionary file, one candidate per line")
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", parents=[common], help="measure offline guess throughput")
    p.add_argument("--dict-size", type=_positive, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="authlab: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, *_CONFIG_ERRORS) as exc:
        print(f"authlab: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"authlab: error: {exc}", file=sys.stderr)
        return 2
    except AuthLabError as exc:
        print(f"authlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"authlab: connection failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

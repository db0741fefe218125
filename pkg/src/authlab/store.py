"""The server's verifier database and its on-disk format.

File layout (UTF-8, LF line endings)::

    # authlab-verifiers v1 curve=<name>
    <username>\t<hex(vpw)>
    ...
"""

from __future__ import annotations

import os
import re
import tempfile
import threading

from .codec import DIGEST_SIZE, Digest, TOKEN_RE, check_token
from .errors import DuplicateUser, FormatError, MalformedEncoding, UnknownUser
from .protocol import VerifierRecord

HEADER_RE = re.compile(r"# authlab-verifiers v1 curve=([A-Za-z0-9._-]+)")


class VerifierStore:
    """Thread-safe map of username -> VerifierRecord for one curve."""

    def __init__(self, curve_name: str, records=()):
        self.curve_name = curve_name
        self._records = {}
        self._lock = threading.Lock()
        for record in records:
            self.put_record(record)

    def put_record(self, record: VerifierRecord, overwrite: bool = False) -> None:
        check_token(record.username)
        if len(record.vpw) != DIGEST_SIZE:
            raise ValueError("verifier has the wrong width")
        with self._lock:
            if record.username in self._records and not overwrite:
                raise DuplicateUser(record.username)
            self._records[record.username] = record

    def get_record(self, username: str) -> VerifierRecord:
        with self._lock:
            try:
                return self._records[username]
            except KeyError:
                raise UnknownUser(username) from None

    def snapshot(self) -> list:
        with self._lock:
            return list(self._records.values())

    def __len__(self):
        with self._lock:
            return len(self._records)

    def __contains__(self, username):
        with self._lock:
            return username in self._records

    def __eq__(self, other):
        if not isinstance(other, VerifierStore):
            return NotImplemented
        return self.curve_name == other.curve_name and sorted(
            self.snapshot(), key=lambda r: r.username
        ) == sorted(other.snapshot(), key=lambda r: r.username)

    def __repr__(self):
        return f"VerifierStore(curve_name={self.curve_name!r}, size={len(self)})"


def dumps_store(store: VerifierStore) -> str:
    lines = [f"# authlab-verifiers v1 curve={store.curve_name}"]
    lines += [f"{r.username}\t{r.vpw.hex()}" for r in store.snapshot()]
    return "\n".join(lines) + "\n"


def loads_store(text: str) -> VerifierStore:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty verifier file")
    header = HEADER_RE.fullmatch(lines[0])
    if header is None:
        raise FormatError(f"bad header {lines[0][:80]!r}")
    store = VerifierStore(header.group(1))
    for lineno, line in enumerate(lines[1:], 2):
        username, sep, vpw_hex = line.partition("\t")
        if not sep or not TOKEN_RE.fullmatch(username):
            raise FormatError(f"line {lineno}: expected username TAB hex")
        try:
            vpw = Digest.fromhex(vpw_hex)
        except MalformedEncoding as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        try:
            store.put_record(VerifierRecord(username, vpw))
        except DuplicateUser:
            raise FormatError(f"line {lineno}: duplicate username {username!r}") from None
    return store


def save_store(store: VerifierStore, path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".verifiers-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_store(store))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_store(path) -> VerifierStore:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8") from exc
    if "\r" in text:
        raise FormatError(f"{path}: CR characters are not allowed")
    return loads_store(text)

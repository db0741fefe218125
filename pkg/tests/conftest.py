import os
import socket
import sys
import threading

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from authlab import wire  # noqa: E402
from authlab.ecc import P256, TOY17  # noqa: E402
from authlab.protocol import ServerKey, register  # noqa: E402
from authlab.store import VerifierStore  # noqa: E402

SERVER_KEY = ServerKey(bytes(range(32)))


@pytest.fixture
def server_key():
    return SERVER_KEY


class LiveServer:
    def __init__(self, server, listener, thread):
        self.server = server
        self.listener = listener
        self.thread = thread
        host, port = listener.getsockname()[:2]
        self.address = f"{host}:{port}"

    def connect(self):
        return wire.connect(self.address, timeout=5)

    def stop(self):
        self.server.shutdown()
        self.thread.join(timeout=5)
        self.listener.close()


def start_server(store, server_key=SERVER_KEY, realm="example.org", curve=P256, rng=None, timeout=5.0, **kw):
    server = wire.AuthServer(store, server_key, realm, curve, timeout=timeout, rng=rng, **kw)
    listener = socket.create_server(("127.0.0.1", 0))
    thread = threading.Thread(target=server.serve_forever, args=(listener, 0.05), daemon=True)
    thread.start()
    return LiveServer(server, listener, thread)


class Recorder:
    """Stream wrapper that logs every byte sent, and can fault on use."""

    def __init__(self, stream):
        self.stream = stream
        self.sent = bytearray()
        self.faulty = False
        self.faults = 0

    def _check(self):
        if self.faulty:
            self.faults += 1
            raise AssertionError("transport used after capture")

    def settimeout(self, t):
        self.stream.settimeout(t)

    def sendall(self, data):
        self._check()
        self.sent += data
        self.stream.sendall(data)

    def recv(self, n):
        self._check()
        return self.stream.recv(n)

    def close(self):
        self.stream.close()

    def lines(self):
        return bytes(self.sent).splitlines(keepends=True)


@pytest.fixture
def p256_store():
    store = VerifierStore("p256")
    store.put_record(register("alice", "correct-horse", SERVER_KEY, P256))
    return store


@pytest.fixture
def live_server(p256_store):
    srv = start_server(p256_store)
    yield srv
    srv.stop()


@pytest.fixture
def toy():
    return TOY17


@pytest.fixture
def p256():
    return P256


_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion reported in the summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _acceptance_results[label] = "PASS" if call.excinfo is None else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance_results, key=lambda s: int(s.split(" ", 1)[0][2:])):
        terminalreporter.write_line(f"[{_acceptance_results[label]}] {label}")

"""Shared fixtures: the hotel worked example, a fake clock and a chat stub."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from topkset import (Candidate, Construct, KnownStore, Problem, Question,
                     ScoringSpec)

HOTELS = ("HNY", "MLN", "HYN", "SHN", "WLD")

REL_KNOWN = {"MLN": 1.0, "HYN": 1.0, "SHN": 0.0, "WLD": 0.5}

DIV_KNOWN = {
    ("HNY", "MLN"): 1.0,
    ("HNY", "HYN"): 0.5,
    ("HNY", "SHN"): 0.5,
    ("HNY", "WLD"): 0.5,
    ("HYN", "WLD"): 0.5,
}

# Scores of the four initially hidden questions, fed to the table oracle.
HIDDEN_TRUTH = {
    Question("rel", ("HNY",)): 0.5,
    Question("div", ("MLN", "HYN")): 1.0,
    Question("div", ("MLN", "SHN")): 0.0,
    Question("div", ("MLN", "WLD")): 0.5,
}


def hotel_spec() -> ScoringSpec:
    return ScoringSpec(
        constructs=(
            Construct("rel", 1, definition="relevance of the hotel to the query"),
            Construct("div", 2, definition="how different two hotels are from each other"),
        ),
        min_score=0.0, max_score=1.0, grid_step=0.5)


def hotel_problem() -> Problem:
    spec = hotel_spec()
    knowns = KnownStore()
    for e, v in REL_KNOWN.items():
        knowns = knowns.record(spec, Question("rel", (e,)), v)
    for pair, v in DIV_KNOWN.items():
        knowns = knowns.record(spec, Question("div", pair), v)
    ground_truth = dict(knowns.items())
    ground_truth.update(HIDDEN_TRUTH)
    candidates = tuple(
        Candidate(i, members) for i, members in enumerate(
            [("HNY", "MLN", "HYN"), ("HNY", "MLN", "SHN"), ("HNY", "MLN", "WLD")]))
    return Problem(
        entities=HOTELS, spec=spec, k=3, candidates=candidates,
        knowns=knowns, ground_truth=ground_truth,
        query_text="affordable hotels in midtown Manhattan")


@pytest.fixture
def f1() -> Problem:
    return hotel_problem()


class FakeClock:
    """Deterministic nanosecond counter advancing a fixed amount per call."""

    def __init__(self, tick: int = 1000):
        self.now = 0
        self.tick = tick

    def __call__(self) -> int:
        self.now += self.tick
        return self.now


@pytest.fixture
def make_clock():
    return FakeClock


class ChatStub:
    """Tiny chat-completion endpoint running on a local port.

    `script` holds (status, payload) pairs served in order; once empty,
    every request gets a 200 with `default_reply` as the message text.
    Raw request bodies and headers end up in `requests`.
    """

    def __init__(self):
        self.script: list[tuple[int, object]] = []
        self.requests: list[dict] = []
        self.default_reply = "0.5"

        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append(
                    {"body": body, "headers": dict(self.headers)})
                if stub.script:
                    status, payload = stub.script.pop(0)
                else:
                    status = 200
                    payload = {"choices": [
                        {"message": {"content": stub.default_reply}}]}
                data = (payload if isinstance(payload, str)
                        else json.dumps(payload)).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1/chat"
        self.thread = threading.Thread(
            target=self.server.serve_forever, daemon=True)
        self.thread.start()

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def chat_server():
    stub = ChatStub()
    yield stub
    stub.close()

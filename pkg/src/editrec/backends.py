"""Scoring backends: lexical defaults plus an external-process wire protocol.

The engine talks to three backend roles: pair scorers (dependency between
two code fragments), embedders (semantic vectors), and optionally learned
line labelers / candidate generators.  Defaults are deterministic lexical
implementations; heavier models can be attached over newline-delimited JSON
on a subprocess' stdio or a local TCP socket.
"""

from __future__ import annotations

import json
import logging
import select
import socket
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .errors import BackendUnavailable
from .tokens import TermVector, embed, identifiers, overlap_coefficient

logger = logging.getLogger(__name__)


class PairScorer(Protocol):
    """Scores directional dependency between two token sequences."""

    def score_pair(
        self, former: Sequence[str], latter: Sequence[str]
    ) -> tuple[float, float]:
        """Returns (y1, y2): y1 = former depends on latter, y2 = the reverse."""
        ...


class Embedder(Protocol):
    def embed(self, tokens: Sequence[str]) -> TermVector:
        ...


class LineLabeler(Protocol):
    """Maps a serialized window to per-line (keep, insert, replace) probs."""

    def label_lines(
        self, tokens: Sequence[str], line_count: int
    ) -> list[tuple[float, float, float]]:
        ...


class CandidateGenerator(Protocol):
    def generate(
        self, tokens: Sequence[str], k: int
    ) -> list[tuple[list[str], float]]:
        """Returns up to k (lines, confidence) pairs, best first."""
        ...


class LexicalPairScorer:
    """Identifier-overlap dependency scorer.

    y2 is the overlap coefficient |ids(former) ∩ ids(latter)| / |ids(latter)|,
    read as "the latter code builds on names from the former"; y1 swaps the
    roles.  Either score is 0.0 when its denominator side has no identifiers.
    """

    single_flight = False

    def score_pair(
        self, former: Sequence[str], latter: Sequence[str]
    ) -> tuple[float, float]:
        former_ids = identifiers(former)
        latter_ids = identifiers(latter)
        y2 = overlap_coefficient(former_ids, latter_ids)
        y1 = overlap_coefficient(latter_ids, former_ids)
        return y1, y2


class TermFrequencyEmbedder:
    """L2-normalized term-frequency embedding over the shared tokenizer."""

    single_flight = False

    def embed(self, tokens: Sequence[str]) -> TermVector:
        return embed(tokens)


# ===== External backends (newline-delimited JSON) =====


class _Transport:
    """Correlated request/response over one NDJSON byte stream."""

    def __init__(self, timeout: float, max_inflight: int):
        self.timeout = timeout
        self._sem = threading.BoundedSemaphore(max(1, max_inflight))
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._responses: dict[int, dict] = {}
        self._next_id = 0
        self._reading = False
        self._dead: str | None = None

    # Subclasses provide the raw byte-stream primitives.
    def _write_line(self, data: bytes):
        raise NotImplementedError

    def _read_line(self) -> bytes:
        raise NotImplementedError

    def close(self):
        pass

    def request(self, payload: dict) -> dict:
        with self._sem:
            with self._lock:
                if self._dead:
                    raise BackendUnavailable(self._dead)
                req_id = self._next_id
                self._next_id += 1
            body = dict(payload)
            body["id"] = req_id
            try:
                self._write_line(json.dumps(body).encode("utf-8") + b"\n")
            except OSError as exc:
                self._mark_dead(f"write failed: {exc}")
                raise BackendUnavailable(str(exc)) from exc
            return self._await_response(req_id)

    def _await_response(self, req_id: int) -> dict:
        with self._cond:
            while req_id not in self._responses:
                if self._dead:
                    raise BackendUnavailable(self._dead)
                if not self._reading:
                    self._reading = True
                    self._cond.release()
                    try:
                        self._pump_one()
                    finally:
                        self._cond.acquire()
                        self._reading = False
                        self._cond.notify_all()
                else:
                    if not self._cond.wait(timeout=self.timeout):
                        self._mark_dead("timed out waiting for response")
                        raise BackendUnavailable("timed out waiting for response")
            return self._responses.pop(req_id)

    def _pump_one(self):
        """Read one response line and file it under its id."""
        try:
            raw = self._read_line()
        except OSError as exc:
            self._mark_dead(f"read failed: {exc}")
            raise BackendUnavailable(str(exc)) from exc
        if not raw:
            self._mark_dead("backend closed the stream")
            raise BackendUnavailable("backend closed the stream")
        try:
            msg = json.loads(raw.decode("utf-8"))
            resp_id = int(msg["id"])
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            self._mark_dead(f"protocol error: {exc}")
            raise BackendUnavailable(f"protocol error: {exc}") from exc
        with self._cond:
            self._responses[resp_id] = msg
            self._cond.notify_all()

    def _mark_dead(self, reason: str):
        with self._cond:
            self._dead = reason
            self._cond.notify_all()


class StdioTransport(_Transport):
    """Runs the backend as a child process, one JSON object per line."""

    def __init__(self, command: Sequence[str], timeout: float = 10.0,
                 max_inflight: int = 1):
        super().__init__(timeout, max_inflight)
        logger.info("starting backend process: %s", " ".join(command))
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )

    def _write_line(self, data: bytes):
        if self._proc.poll() is not None:
            raise OSError("backend process exited")
        self._proc.stdin.write(data)
        self._proc.stdin.flush()

    def _read_line(self) -> bytes:
        # Pipes have no native read timeout; poll before the blocking read.
        ready, _, _ = select.select([self._proc.stdout], [], [], self.timeout)
        if not ready:
            raise OSError(f"no response within {self.timeout}s")
        return self._proc.stdout.readline()

    def close(self):
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class SocketTransport(_Transport):
    """Connects to a backend served on a local TCP port."""

    def __init__(self, host: str, port: int, timeout: float = 10.0,
                 max_inflight: int = 1):
        super().__init__(timeout, max_inflight)
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise BackendUnavailable(f"cannot connect to {host}:{port}: {exc}")
        self._sock.settimeout(timeout)
        self._reader = self._sock.makefile("rb")

    def _write_line(self, data: bytes):
        self._sock.sendall(data)

    def _read_line(self) -> bytes:
        return self._reader.readline()

    def close(self):
        try:
            self._sock.close()
        except OSError:
            pass


class ExternalBackend:
    """Pair scorer / line labeler / generator behind an NDJSON transport.

    Requests carry a task name and an id; responses echo the id.  Malformed
    replies, closed streams and timeouts surface as BackendUnavailable.
    """

    def __init__(self, transport: _Transport, single_flight: bool = False):
        self.transport = transport
        self.single_flight = single_flight
        self._serial = threading.Lock() if single_flight else None

    def _request(self, payload: dict) -> dict:
        if self._serial:
            with self._serial:
                return self.transport.request(payload)
        return self.transport.request(payload)

    def score_pair(
        self, former: Sequence[str], latter: Sequence[str]
    ) -> tuple[float, float]:
        msg = self._request(
            {"task": "dep_pair", "former": list(former), "latter": list(latter)}
        )
        try:
            return float(msg["y1"]), float(msg["y2"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"bad dep_pair reply: {exc}") from exc

    def label_lines(
        self, tokens: Sequence[str], line_count: int
    ) -> list[tuple[float, float, float]]:
        msg = self._request(
            {"task": "line_label", "tokens": list(tokens), "line_count": line_count}
        )
        probs = msg.get("probs")
        if not isinstance(probs, list) or len(probs) != line_count:
            raise BackendUnavailable("bad line_label reply shape")
        out = []
        for row in probs:
            if not isinstance(row, list) or len(row) != 3:
                raise BackendUnavailable("bad line_label probability row")
            out.append((float(row[0]), float(row[1]), float(row[2])))
        return out

    def generate(
        self, tokens: Sequence[str], k: int
    ) -> list[tuple[list[str], float]]:
        msg = self._request({"task": "generate", "tokens": list(tokens), "k": k})
        cands = msg.get("candidates")
        if not isinstance(cands, list):
            raise BackendUnavailable("bad generate reply shape")
        out = []
        for cand in cands[:k]:
            try:
                out.append(([str(x) for x in cand["lines"]], float(cand["confidence"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendUnavailable(f"bad candidate entry: {exc}") from exc
        return out

    def close(self):
        self.transport.close()


@dataclass
class Backends:
    """The backend bundle the engine routes every scoring call through."""

    pair_scorer: PairScorer = field(default_factory=LexicalPairScorer)
    embedder: Embedder = field(default_factory=TermFrequencyEmbedder)
    line_labeler: LineLabeler | None = None
    generator: CandidateGenerator | None = None

    @classmethod
    def lexical(cls) -> "Backends":
        """The self-contained default bundle (no external processes)."""
        return cls()

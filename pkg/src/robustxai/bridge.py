"""Wire protocol client: drive an out-of-process model/explainer as a SueHandle.

Frames are newline-delimited JSON objects, one per line, UTF-8. Requests carry
monotonically increasing ids and exactly one request is in flight per
connection; any id mismatch or malformed frame aborts the evaluation instead
of silently reordering. The primary transport spawns the adapter command and
talks over its stdio; a TCP address is also accepted.
"""

from __future__ import annotations

import json
import selectors
import socket
import subprocess
import threading

import numpy as np

from .errors import (BridgeTimeout, ContractViolation, NondeterministicAdapter,
                     ProtocolError, RemoteEvaluationError)
from .sue import SueHandle


class _StdioTransport:
    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                     stderr=None)
        self._buffer = b""
        self._selector = selectors.DefaultSelector()
        self._selector.register(self.proc.stdout, selectors.EVENT_READ)

    def send_line(self, line: bytes):
        self.proc.stdin.write(line + b"\n")
        self.proc.stdin.flush()

    def recv_line(self, timeout_s: float) -> bytes:
        while True:
            nl = self._buffer.find(b"\n")
            if nl >= 0:
                line, self._buffer = self._buffer[:nl], self._buffer[nl + 1:]
                return line
            if not self._selector.select(timeout_s):
                raise BridgeTimeout(f"adapter did not answer within {timeout_s:.1f}s")
            chunk = self.proc.stdout.read1(1 << 20)
            if not chunk:
                raise ProtocolError("adapter closed the stream mid-conversation")
            self._buffer += chunk

    def close(self):
        try:
            self._selector.close()
            if self.proc.stdin:
                self.proc.stdin.close()
            self.proc.wait(timeout=5)
        except Exception:
            self.proc.kill()


class _TcpTransport:
    def __init__(self, host: str, port: int, timeout_s: float):
        self.sock = socket.create_connection((host, port), timeout=timeout_s)
        self._file = self.sock.makefile("rwb")

    def send_line(self, line: bytes):
        self._file.write(line + b"\n")
        self._file.flush()

    def recv_line(self, timeout_s: float) -> bytes:
        self.sock.settimeout(timeout_s)
        try:
            line = self._file.readline()
        except socket.timeout as exc:
            raise BridgeTimeout(f"adapter did not answer within {timeout_s:.1f}s") from exc
        if not line:
            raise ProtocolError("adapter closed the connection mid-conversation")
        return line.rstrip(b"\n")

    def close(self):
        try:
            self._file.close()
            self.sock.close()
        except Exception:
            pass


class RemoteSue(SueHandle):
    """SueHandle whose classify/explain serialize to bridge frames."""

    concurrent_safe = False

    def __init__(self, transport, timeout_s: float, allow_nondeterministic: bool):
        super().__init__()
        self._transport = transport
        self._timeout_s = timeout_s
        self._next_id = 0
        self._lock = threading.Lock()
        self._closed = False
        meta = self._request("hello")["meta"]
        for key in ("input_dim", "num_classes", "explainer_name", "deterministic"):
            if key not in meta:
                raise ProtocolError(f"hello meta is missing {key!r}")
        self.input_dim = int(meta["input_dim"])
        self.num_classes = int(meta["num_classes"])
        self.explainer_name = str(meta["explainer_name"])
        self.deterministic = bool(meta["deterministic"])
        if not self.deterministic and not allow_nondeterministic:
            raise NondeterministicAdapter(
                "adapter declared deterministic=false; pass allow_nondeterministic to use it")

    def _request(self, op: str, inputs=None) -> dict:
        with self._lock:
            self._next_id += 1
            frame = {"id": self._next_id, "op": op}
            if inputs is not None:
                frame["inputs"] = inputs
            self._transport.send_line(json.dumps(frame).encode("utf-8"))
            raw = self._transport.recv_line(self._timeout_s)
            try:
                reply = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ProtocolError("adapter sent a malformed frame",
                                    offending_line=raw[:200].decode("utf-8", "replace")) from exc
            if not isinstance(reply, dict) or "id" not in reply:
                raise ProtocolError("adapter frame is not an object with an id",
                                    offending_line=raw[:200].decode("utf-8", "replace"))
            if reply["id"] != self._next_id:
                raise ProtocolError(
                    f"response id {reply['id']} does not match request id {self._next_id}")
            if not reply.get("ok", False):
                raise RemoteEvaluationError(str(reply.get("error", "adapter reported an error")))
            return reply

    def _batch(self, op: str, x: np.ndarray, out_width: int) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if batch.shape[1] != self.input_dim:
            raise ContractViolation(f"input dim {batch.shape[1]} != {self.input_dim}")
        reply = self._request(op, inputs=batch.tolist())
        outputs = reply.get("outputs")
        if not isinstance(outputs, list) or len(outputs) != batch.shape[0]:
            raise ProtocolError(f"{op} returned {0 if outputs is None else len(outputs)} rows "
                                f"for {batch.shape[0]} inputs")
        arr = np.asarray(outputs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != out_width:
            raise ProtocolError(f"{op} rows have width {arr.shape[-1]}, expected {out_width}")
        return arr

    def classify_batch(self, x: np.ndarray) -> np.ndarray:
        out = self._batch("classify", x, self.num_classes)
        self.counter.classify_points += out.shape[0]
        return out

    def explain_batch(self, x: np.ndarray) -> np.ndarray:
        out = self._batch("explain", x, self.input_dim)
        self.counter.explain_points += out.shape[0]
        return out

    def close(self):
        if self._closed:
            return
        self._closed = True
        try:
            self._request("shutdown")
        except Exception:
            pass
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def remote_sue_connect(target, timeout_ms: int = 30_000,
                       allow_nondeterministic: bool = False) -> RemoteSue:
    """Handshake with an adapter and return it as a SueHandle.

    `target` is either an argv list (spawned, stdio transport) or a
    "host:port" string (TCP).
    """
    timeout_s = timeout_ms / 1000.0
    if isinstance(target, (list, tuple)):
        transport = _StdioTransport([str(t) for t in target])
    elif isinstance(target, str) and ":" in target:
        host, port = target.rsplit(":", 1)
        transport = _TcpTransport(host, int(port), timeout_s)
    else:
        raise ContractViolation("target must be an argv list or a host:port address")
    try:
        return RemoteSue(transport, timeout_s, allow_nondeterministic)
    except Exception:
        transport.close()
        raise

"""Frame handling for the newline-delimited JSON evaluation protocol.

One frame per line, UTF-8. Ops: hello, classify, explain, shutdown. The
adapter validates its own output shapes before replying so protocol errors
never originate from silent shape drift in the wrapped callables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class AdapterSpec:
    """What the adapter serves: two batch callables plus their declared shapes."""

    classify_fn: Callable[[np.ndarray], np.ndarray]
    explain_fn: Callable[[np.ndarray], np.ndarray]
    input_dim: int
    num_classes: int
    explainer_name: str = "custom"
    deterministic: bool = True

    def meta(self) -> dict:
        return {"input_dim": int(self.input_dim), "num_classes": int(self.num_classes),
                "explainer_name": self.explainer_name,
                "deterministic": bool(self.deterministic)}


def encode_frame(payload: dict) -> str:
    return json.dumps(payload)


def parse_request(line: str) -> dict:
    frame = json.loads(line)
    if not isinstance(frame, dict):
        raise ValueError("frame is not an object")
    if "id" not in frame or "op" not in frame:
        raise ValueError("frame is missing id or op")
    return frame


def _run_batch(spec: AdapterSpec, op: str, inputs) -> list[list[float]]:
    arr = np.asarray(inputs, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{op} inputs must be a list of flat vectors")
    if arr.shape[1] != spec.input_dim:
        raise ValueError(f"{op} rows have dim {arr.shape[1]}, handshake said {spec.input_dim}")
    fn = spec.classify_fn if op == "classify" else spec.explain_fn
    out = np.asarray(fn(arr), dtype=np.float64)
    want = spec.num_classes if op == "classify" else spec.input_dim
    if out.shape != (arr.shape[0], want):
        raise ValueError(f"{op} callable returned shape {out.shape}, "
                         f"expected ({arr.shape[0]}, {want})")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{op} callable returned non-finite values")
    return out.tolist()


def handle_request(spec: AdapterSpec, line: str) -> tuple[dict, bool]:
    """Answer one request line. Returns (response, keep_serving)."""
    try:
        frame = parse_request(line)
    except Exception as exc:
        return {"id": -1, "ok": False, "error": f"ProtocolError: {exc}"}, True
    frame_id = frame["id"]
    op = frame["op"]
    try:
        if op == "hello":
            return {"id": frame_id, "ok": True, "meta": spec.meta()}, True
        if op == "shutdown":
            return {"id": frame_id, "ok": True}, False
        if op in ("classify", "explain"):
            outputs = _run_batch(spec, op, frame.get("inputs"))
            return {"id": frame_id, "ok": True, "outputs": outputs}, True
        return {"id": frame_id, "ok": False, "error": f"ProtocolError: unknown op {op!r}"}, True
    except Exception as exc:
        return {"id": frame_id, "ok": False, "error": f"{type(exc).__name__}: {exc}"}, True

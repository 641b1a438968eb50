"""Serve a bundled in-process SUE over the wire protocol (stdio).

This is the echo-adapter end of the bridge used by tests and demos:
    python -m robustxai.bridge_serve --model toy8x8 --explainer gxi
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .sue import SueHandle, make_builtin_sue


def _respond(stream, payload: dict):
    stream.write(json.dumps(payload) + "\n")
    stream.flush()


def serve(sue: SueHandle, explainer_name: str, stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        try:
            frame = json.loads(line)
            frame_id = frame["id"]
            op = frame["op"]
        except Exception:
            _respond(stdout, {"id": -1, "ok": False, "error": f"protocol: malformed frame {line[:200]!r}"})
            continue
        try:
            if op == "hello":
                _respond(stdout, {"id": frame_id, "ok": True, "meta": {
                    "input_dim": sue.input_dim, "num_classes": sue.num_classes,
                    "explainer_name": explainer_name, "deterministic": bool(sue.deterministic)}})
            elif op in ("classify", "explain"):
                inputs = np.asarray(frame["inputs"], dtype=np.float64)
                out = sue.classify_batch(inputs) if op == "classify" else sue.explain_batch(inputs)
                _respond(stdout, {"id": frame_id, "ok": True, "outputs": out.tolist()})
            elif op == "shutdown":
                _respond(stdout, {"id": frame_id, "ok": True})
                return
            else:
                _respond(stdout, {"id": frame_id, "ok": False, "error": f"protocol: unknown op {op!r}"})
        except Exception as exc:
            _respond(stdout, {"id": frame_id, "ok": False, "error": f"{type(exc).__name__}: {exc}"})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="serve a bundled toy SUE over stdio frames")
    parser.add_argument("--model", default="toy8x8")
    parser.add_argument("--explainer", default="gxi")
    parser.add_argument("--target", default="logit", choices=["logit", "prob"])
    parser.add_argument("--explainer-params", default=None, help="JSON dict of explainer keywords")
    args = parser.parse_args(argv)
    params = json.loads(args.explainer_params) if args.explainer_params else None
    sue = make_builtin_sue(args.model, explainer=args.explainer, target=args.target,
                           explainer_params=params)
    serve(sue, explainer_name=args.explainer)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

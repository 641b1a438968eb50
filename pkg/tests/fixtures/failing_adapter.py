"""Test fixture: handshake works, every evaluation reports ok=false."""
import json
import sys

for raw in sys.stdin:
    frame = json.loads(raw)
    if frame["op"] == "hello":
        reply = {"id": frame["id"], "ok": True,
                 "meta": {"input_dim": 64, "num_classes": 4, "explainer_name": "fixture",
                          "deterministic": True}}
    elif frame["op"] == "shutdown":
        reply = {"id": frame["id"], "ok": True}
    else:
        reply = {"id": frame["id"], "ok": False, "error": "RuntimeError: injected failure"}
    sys.stdout.write(json.dumps(reply) + "\n")
    sys.stdout.flush()
    if frame["op"] == "shutdown":
        break

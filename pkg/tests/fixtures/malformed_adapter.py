"""Test fixture: answers the handshake, then emits a non-JSON line."""
import json
import sys

for raw in sys.stdin:
    frame = json.loads(raw)
    if frame["op"] == "hello":
        sys.stdout.write(json.dumps({"id": frame["id"], "ok": True,
                                     "meta": {"input_dim": 4, "num_classes": 2,
                                              "explainer_name": "fixture",
                                              "deterministic": True}}) + "\n")
    elif frame["op"] == "shutdown":
        sys.stdout.write(json.dumps({"id": frame["id"], "ok": True}) + "\n")
        sys.stdout.flush()
        break
    else:
        sys.stdout.write("this is not a frame\n")
    sys.stdout.flush()

"""Request loops: stdio (primary transport) and single-client TCP."""

from __future__ import annotations

import socket
import sys

from .protocol import AdapterSpec, encode_frame, handle_request


def serve_stdio(spec: AdapterSpec, stdin=None, stdout=None) -> None:
    """One request in flight, flush after every frame, run until shutdown."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        response, keep = handle_request(spec, line)
        stdout.write(encode_frame(response) + "\n")
        stdout.flush()
        if not keep:
            return


def serve_tcp(spec: AdapterSpec, port: int, host: str = "127.0.0.1") -> None:
    with socket.create_server((host, port)) as server:
        conn, _ = server.accept()
        with conn, conn.makefile("rw", encoding="utf-8") as stream:
            serve_stdio(spec, stdin=stream, stdout=stream)


def serve_adapter(spec: AdapterSpec, transport: str = "stdio", port: int | None = None) -> None:
    if transport == "stdio":
        serve_stdio(spec)
    elif transport == "tcp":
        if port is None:
            raise ValueError("tcp transport needs a port")
        serve_tcp(spec, port)
    else:
        raise ValueError(f"unknown transport {transport!r}")

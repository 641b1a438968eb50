"""Reference adapter for the newline-JSON evaluation bridge."""

from .mirror import MirrorMlp, load_mirror
from .protocol import AdapterSpec, handle_request
from .serve import serve_adapter, serve_stdio, serve_tcp

__version__ = "0.1.0"

__all__ = ["AdapterSpec", "MirrorMlp", "handle_request", "load_mirror",
           "serve_adapter", "serve_stdio", "serve_tcp"]

"""Command entry: serve a weights-file mirror, or any importable callable pair.

    bridge-adapter --weights toy8x8_weights.json --explainer gxi
    bridge-adapter --spec mymodule:make_adapter_spec --tcp 9000
"""

from __future__ import annotations

import argparse
import importlib

from .mirror import load_mirror
from .protocol import AdapterSpec
from .serve import serve_adapter


def spec_from_weights(path: str, explainer: str = "gxi", target: str = "logit") -> AdapterSpec:
    if explainer not in ("gxi", "gradient_x_input"):
        raise SystemExit(f"the weights mirror only serves gradient_x_input, not {explainer!r}")
    model = load_mirror(path)
    return AdapterSpec(
        classify_fn=model.classify,
        explain_fn=lambda x: model.gradient_x_input(x, target=target),
        input_dim=model.input_dim,
        num_classes=model.num_classes,
        explainer_name="gxi",
        deterministic=True,
    )


def spec_from_entrypoint(ref: str) -> AdapterSpec:
    module_name, _, attr = ref.partition(":")
    if not attr:
        raise SystemExit("spec reference must look like module:callable")
    factory = getattr(importlib.import_module(module_name), attr)
    spec = factory()
    if not isinstance(spec, AdapterSpec):
        raise SystemExit(f"{ref} did not return an AdapterSpec")
    return spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="serve classify/explain callables over the wire")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--weights", help="weights JSON to mirror")
    source.add_argument("--spec", help="module:callable returning an AdapterSpec")
    parser.add_argument("--explainer", default="gxi")
    parser.add_argument("--target", default="logit", choices=["logit", "prob"])
    parser.add_argument("--tcp", type=int, default=None, help="listen on a TCP port instead of stdio")
    args = parser.parse_args(argv)

    if args.weights:
        spec = spec_from_weights(args.weights, args.explainer, args.target)
    else:
        spec = spec_from_entrypoint(args.spec)
    serve_adapter(spec, transport="tcp" if args.tcp else "stdio", port=args.tcp)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

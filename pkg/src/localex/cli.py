"""Command-line entry point.

Subcommands: explain (one explanation as JSON), stability / converge /
fidelity (sweep tables as CSV or JSON), distributions (sampling-law dump).
Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import os.path
import sys

from .errors import ConfigError, EngineError, IoFailure
from .explain import (
    ExplainRequest,
    default_lambda,
    explain,
    explanation_to_json,
    method_from_json,
)
from .harness import (
    build_space,
    distributions_table,
    emit,
    json_dumps,
    load_config,
    load_input,
    reseed,
    run_convergence,
    run_fidelity,
    run_stability,
)
from .models import load_model


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors (exit 1), not argparse's exit 2
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _add_common(sp: argparse.ArgumentParser, config_required: bool) -> None:
    sp.add_argument("--config", required=config_required, help="JSON config file")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=None,
                    help="table format (default: config's, else csv)")
    sp.add_argument("--seed", type=int, default=None,
                    help="master seed; replaces the config's seed(s)")
    sp.add_argument("--jobs", type=int, default=1, help="parallel grid cells")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="localex",
                     description="local explanation engine and experiment harness")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("explain", "compute one explanation and emit it as JSON"),
        ("stability", "top-K Jaccard stability sweep"),
        ("converge", "Lime vs GlimeBinomial distance as n grows"),
        ("fidelity", "local fidelity sweep over ball radii"),
        ("distributions", "dump sampling pmfs and kernel weights"),
    ):
        sp = subs.add_parser(name, help=blurb)
        _add_common(sp, config_required=name != "distributions")
        if name == "distributions":
            sp.add_argument("--dim", type=int, default=None, help="number of segments d")
            sp.add_argument("--sigmas", default=None,
                            help="comma-separated kernel widths")
    return parser


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _cmd_explain(args: argparse.Namespace) -> int:
    if args.format == "csv":
        raise ConfigError("explain emits a single JSON explanation, not csv")
    obj = _read_json(args.config)
    base = os.path.dirname(os.path.abspath(args.config))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        model_path = resolve(obj["model"])
        input_path = resolve(obj["input"])
        method_obj = obj["method"]
        n = int(obj["n"])
        seed = int(obj.get("seed", 0))
        seg_obj = obj.get("segmentation") or {}
        reference_kind = str(obj.get("reference", "mean"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed explain config: {exc}") from exc
    method = method_from_json(method_obj)
    lam = float(obj["lambda"]) if "lambda" in obj else default_lambda(method)
    if args.seed is not None:
        seed = args.seed
    model = load_model(model_path)
    x, shape = load_input(input_path)
    seg, reference = build_space(
        x, shape, seg_obj.get("rows"), seg_obj.get("cols"), reference_kind
    )
    req = ExplainRequest(
        model=model, x=x, segmentation=seg, method=method,
        n=n, seed=seed, lam=lam, reference=reference,
    )
    exp = explain(req)
    _write_text(json_dumps(explanation_to_json(exp)) + "\n", args.out)
    return 0


_RUNNERS = {
    "stability": run_stability,
    "converge": run_convergence,
    "fidelity": run_fidelity,
}


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = reseed(config, args.seed)
    rows = _RUNNERS[args.command](config, jobs=args.jobs)
    fmt = args.format or config.out_format
    path = args.out if args.out is not None else config.out_path
    emit(rows, fmt, path)
    return 0


def _cmd_distributions(args: argparse.Namespace) -> int:
    if args.config is not None:
        obj = _read_json(args.config)
        try:
            d = int(obj["d"])
            sigmas = tuple(float(s) for s in obj["sigmas"])
            ks = None if obj.get("ks") is None else tuple(int(k) for k in obj["ks"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed distributions config: {exc}") from exc
    else:
        if args.dim is None or args.sigmas is None:
            raise ConfigError("distributions needs --config or both --dim and --sigmas")
        d = args.dim
        try:
            sigmas = tuple(float(s) for s in args.sigmas.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --sigmas value: {args.sigmas!r}") from exc
        ks = None
    rows = distributions_table(d, sigmas, ks)
    emit(rows, args.format or "csv", args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "explain":
            return _cmd_explain(args)
        if args.command == "distributions":
            return _cmd_distributions(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

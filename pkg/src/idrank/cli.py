"""Command-line front end: estimation, synthesis, profiling, planning.

Every subcommand is a batch operation: JSON (or CSV for cloud/curve data)
goes to --out or stdout, human-readable diagnostics go to stderr, and
identical inputs plus an identical seed produce byte-identical outputs.
Exit codes: 0 success, 1 data/format error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import planner, synth
from .cloud import PointCloud, read_csv, write_csv
from .errors import IdrankError, LengthMismatch
from .estimator import (
    DEFAULT_DISCARD_FRACTION,
    METHODS,
    decimation_stability,
    fit_mle,
    fit_regression,
    regression_points,
    two_nearest,
)
from .ghs import MAGIC, HiddenStateSet, read_ghs, write_ghs
from .profile import (
    DEFAULT_SAMPLE_CAP,
    POOLING_MODES,
    compute_profile,
    profile_diff,
    profile_digest,
    read_profile,
)

SEED_ENV_VAR = "IDRANK_SEED"


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise IdrankError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return 0


def _emit_text(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_json(payload: dict, out: str | None) -> None:
    _emit_text(json.dumps(payload, indent=2) + "\n", out)


def _load_cloud(path: str, layer: int | None, verbose: bool) -> PointCloud:
    """Load a cloud from CSV or a GHS1 file (sniffed by magic bytes)."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    # route near-miss magics to the GHS reader for a proper bad-magic error
    if head[:3] == MAGIC[:3]:
        states = read_ghs(path)
        if layer is None:
            if states.num_layers > 1:
                raise IdrankError(
                    f"{path} holds {states.num_layers} layers; pick one with --layer"
                )
            layer = 0
        if not 0 <= layer < states.num_layers:
            raise IdrankError(f"--layer {layer} out of range for {states.num_layers} layers")
        cloud = states.layers[layer]
        if verbose:
            print(f"loaded {path} layer {layer}: {cloud.n_points} x {cloud.ambient_dim}", file=sys.stderr)
        return cloud
    cloud = read_csv(path)
    if verbose:
        print(f"loaded {path}: {cloud.n_points} x {cloud.ambient_dim}", file=sys.stderr)
    return cloud


def _cmd_estimate(args) -> int:
    if args.emit_curve and args.method != "regression":
        raise UsageError("--emit-curve requires --method regression")
    cloud = _load_cloud(args.input, args.layer, args.verbose)
    stats = two_nearest(cloud)
    if args.verbose:
        dropped = cloud.n_points - len(stats.kept_indices)
        print(f"collapsed {dropped} duplicate points", file=sys.stderr)
    if args.method == "mle":
        est = fit_mle(stats.mu)
    else:
        est = fit_regression(stats.mu, args.discard_fraction)
    if args.emit_curve:
        x, y = regression_points(stats.mu, args.discard_fraction)
        write_csv(PointCloud(np.column_stack((x, y))), args.emit_curve)
    _emit_json(est.to_dict(), args.out)
    return 0


def _cmd_synth(args) -> int:
    kw = {}
    if args.kind == "helix":
        kw = {
            "radius": args.radius,
            "vertical_scale": args.vertical_scale,
            "t_range": (args.t_min, args.t_max),
        }
    spec = synth.ManifoldSpec(
        kind=args.kind,
        n_points=args.n,
        intrinsic_dim=args.intrinsic_dim,
        ambient_dim=args.ambient_dim,
        noise_sigma=args.noise_sigma,
        seed=_resolve_seed(args.seed),
        **kw,
    )
    cloud = synth.generate(spec)
    fmt = args.format
    if fmt == "auto":
        fmt = "ghs" if args.out and args.out.endswith(".ghs") else "csv"
    if fmt == "ghs":
        if not args.out or args.out == "-":
            raise UsageError("GHS output needs --out FILE")
        states = HiddenStateSet(
            layers=[PointCloud(cloud.data.astype(np.float32))],
            metadata={"model": "synth", "dataset": args.kind, "pooling": "", "tags": []},
        )
        write_ghs(states, args.out)
    else:
        if args.out and args.out != "-":
            write_csv(cloud, args.out)
        else:
            for row in cloud.data:
                sys.stdout.write(",".join(f"{v:.17g}" for v in row) + "\n")
    if args.verbose:
        print(f"generated {cloud.n_points} points in R^{cloud.ambient_dim}", file=sys.stderr)
    return 0


def _cmd_profile(args) -> int:
    states = read_ghs(args.input)
    if args.pooling and not states.metadata.get("pooling"):
        states.metadata["pooling"] = args.pooling
    prof = compute_profile(
        states,
        method=args.method,
        discard_fraction=args.discard_fraction,
        sample_cap=args.sample_cap,
        seed=_resolve_seed(args.seed),
        with_stability=args.with_stability,
        n_scales=args.scales,
        repeats_per_scale=args.repeats,
    )
    _emit_json(prof.to_dict(), args.out)
    return 0


def _cmd_stability(args) -> int:
    cloud = _load_cloud(args.input, args.layer, args.verbose)
    report = decimation_stability(
        cloud,
        n_scales=args.scales,
        repeats_per_scale=args.repeats,
        seed=_resolve_seed(args.seed),
        method=args.method,
        discard_fraction=args.discard_fraction,
    )
    _emit_json(report.to_dict(), args.out)
    return 0


def _cmd_plan(args) -> int:
    prof = read_profile(args.profile)
    blocks = args.blocks if args.blocks is not None else prof.num_layers - 1
    if blocks != prof.num_layers - 1:
        raise LengthMismatch(
            f"--blocks {blocks} does not match the profile's {prof.num_layers - 1} blocks"
        )
    shape = planner.ModelShape(num_blocks=blocks, d_model=args.d_model)
    plan = planner.plan_from_profile(
        prof,
        shape,
        offset=args.offset,
        alpha_ratio=args.alpha_ratio,
        rounding=args.rounding,
        source_profile_digest=profile_digest(prof),
    )
    _emit_text(planner.plan_to_json(plan), args.out)
    return 0


def _cmd_diff(args) -> int:
    before = read_profile(args.before)
    after = read_profile(args.after)
    _emit_json(profile_diff(before, after).to_dict(), args.out)
    return 0


class UsageError(Exception):
    """Flag combinations argparse cannot catch on its own."""


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idrank",
        description="Intrinsic-dimension estimation and per-block adapter-rank planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument(
            "--seed",
            type=_nonneg_int,
            default=None,
            help=f"random seed (default: ${SEED_ENV_VAR} or 0)",
        )
        p.add_argument("--json-errors", action="store_true", help="append a machine-readable JSON diagnostic to stderr on failure")
        p.add_argument("-v", "--verbose", action="store_true", help="diagnostics on stderr")
        p.formatter_class = argparse.ArgumentDefaultsHelpFormatter

    def fit_flags(p):
        p.add_argument("--method", choices=METHODS, default="mle", help="fit method")
        p.add_argument(
            "--discard-fraction",
            type=_fraction,
            default=DEFAULT_DISCARD_FRACTION,
            help="fraction of largest ratios excluded from the regression fit",
        )

    p = sub.add_parser("estimate", help="estimate the intrinsic dimension of one cloud")
    p.add_argument("--input", required=True, help="CSV or GHS1 file")
    p.add_argument("--layer", type=_nonneg_int, default=None, help="layer index for GHS1 inputs")
    fit_flags(p)
    p.add_argument("--emit-curve", default=None, metavar="CSV", help="write the (ln mu, -ln(1-F)) pairs used by the regression fit")
    common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("synth", help="generate a synthetic cloud of known dimension")
    p.add_argument("--kind", choices=synth.KINDS, required=True, help="manifold family")
    p.add_argument("--n", type=int, default=2000, help="number of points")
    p.add_argument("--intrinsic-dim", type=int, default=1, help="manifold dimension")
    p.add_argument("--ambient-dim", type=int, default=3, help="embedding dimension")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="isotropic ambient Gaussian noise")
    p.add_argument("--radius", type=float, default=1.0, help="helix radius")
    p.add_argument("--vertical-scale", type=float, default=0.2, help="helix vertical scale")
    p.add_argument("--t-min", type=float, default=0.0, help="helix parameter lower bound")
    p.add_argument("--t-max", type=float, default=12 * math.pi, help="helix parameter upper bound")
    p.add_argument("--format", choices=("auto", "csv", "ghs"), default="auto", help="auto picks by --out extension")
    common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("profile", help="intrinsic-dimension profile of a GHS1 hidden-state dump")
    p.add_argument("--input", required=True, help="GHS1 file")
    fit_flags(p)
    p.add_argument("--sample-cap", type=int, default=DEFAULT_SAMPLE_CAP, help="per-layer point cap before estimation")
    p.add_argument("--with-stability", action="store_true", help="use decimation plateaus per layer")
    p.add_argument("--scales", type=int, default=4, help="decimation scales")
    p.add_argument("--repeats", type=int, default=5, help="subsets per scale")
    p.add_argument("--pooling", choices=POOLING_MODES, default="mean", help="pooling recorded when the file metadata lacks one")
    common(p)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("stability", help="decimation stability report for one cloud")
    p.add_argument("--input", required=True, help="CSV or GHS1 file")
    p.add_argument("--layer", type=_nonneg_int, default=None, help="layer index for GHS1 inputs")
    fit_flags(p)
    p.add_argument("--scales", type=int, default=4, help="decimation scales")
    p.add_argument("--repeats", type=int, default=5, help="subsets per scale")
    common(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("plan", help="derive a per-block adapter rank plan from a profile")
    p.add_argument("--profile", required=True, help="profile JSON (needs the 'd' array)")
    p.add_argument("--offset", type=_nonneg_int, default=planner.DEFAULT_OFFSET, help="added to every rank lower bound")
    p.add_argument("--alpha-ratio", type=float, default=planner.DEFAULT_ALPHA_RATIO, help="constant alpha/rank ratio")
    p.add_argument("--rounding", choices=planner.ROUNDING_MODES, default="ceil", help="how dimension growth becomes an integer rank")
    p.add_argument("--blocks", type=int, default=None, help="expected block count (default: inferred from the profile)")
    p.add_argument("--d-model", type=int, required=True, help="model width; adapted matrices default to square")
    common(p)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("diff", help="compare two profiles layer by layer")
    p.add_argument("--before", required=True, help="profile JSON before")
    p.add_argument("--after", required=True, help="profile JSON after")
    common(p)
    p.set_defaults(func=_cmd_diff)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except IdrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if getattr(args, "json_errors", False):
            print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if getattr(args, "json_errors", False):
            print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())

"""CLI: dump hidden states to GHS1, or expand a rank plan for a model."""

from __future__ import annotations

import argparse
import sys

from .errors import BridgeError
from .extract import POOLING_MODES, ExtractionSpec, extract_hidden_states
from .plan_apply import AdapterTargetSpec, apply_plan, summary_tsv, write_config


def _cmd_extract(args) -> int:
    spec = ExtractionSpec(
        model=args.model,
        dataset=args.dataset,
        output_path=args.out,
        split=args.split,
        max_examples=args.max_examples,
        pooling=args.pooling,
        batch_size=args.batch_size,
        max_length=args.max_length,
        token_sample_k=args.token_sample_k,
        seed=args.seed,
    )
    path = extract_hidden_states(spec)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_apply_plan(args) -> int:
    if args.model_dir:
        target = AdapterTargetSpec.from_model_dir(args.model_dir)
    else:
        if args.blocks is None or args.d_model is None:
            raise BridgeError("pass --model-dir or both --blocks and --d-model")
        target = AdapterTargetSpec(num_blocks=args.blocks, d_model=args.d_model)
    config = apply_plan(args.plan, target)
    if args.out:
        write_config(config, args.out)
    table = summary_tsv(config)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    if config.total_trainable_params != config.plan_total_trainable_params:
        print(
            "warning: re-derived parameter total "
            f"{config.total_trainable_params} != plan total "
            f"{config.plan_total_trainable_params} (different model width?)",
            file=sys.stderr,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idrank-bridge",
        description="Bridge between transformers checkpoints and the rank-planning tool.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "extract",
        help="dump per-layer hidden states into a GHS1 file",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--model", required=True, help="checkpoint id or local directory")
    p.add_argument("--dataset", required=True, help="text file (one example per line) or directory with {split}.txt")
    p.add_argument("--out", required=True, help="output GHS1 path")
    p.add_argument("--split", default="validation", help="split file name inside a dataset directory")
    p.add_argument("--max-examples", type=int, default=200, help="examples processed at most")
    p.add_argument("--pooling", choices=POOLING_MODES, default="mean", help="token-to-point pooling")
    p.add_argument("--batch-size", type=int, default=16, help="inference batch size")
    p.add_argument("--max-length", type=int, default=128, help="tokenizer truncation length")
    p.add_argument("--token-sample-k", type=int, default=8, help="points per example for token-sample-k")
    p.add_argument("--seed", type=int, default=0, help="seed for token sampling")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser(
        "apply-plan",
        help="expand a rank plan to per-matrix adapter settings",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--plan", required=True, help="rank-plan JSON (schema_version 1)")
    p.add_argument("--model-dir", default=None, help="checkpoint directory to read block count/width from")
    p.add_argument("--blocks", type=int, default=None, help="block count (with --d-model)")
    p.add_argument("--d-model", type=int, default=None, help="model width (with --blocks)")
    p.add_argument("--out", default=None, help="write the full per-matrix config JSON here")
    p.add_argument("--summary", default=None, help="write the TSV summary here (default: stdout)")
    p.set_defaults(func=_cmd_apply_plan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())

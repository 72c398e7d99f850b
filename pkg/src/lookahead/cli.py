"""Command-line front end: decode, bench, analyze, and simulate.

``decode`` runs one decoding mode over a prompts file and writes the
generated text plus a JSON report; ``bench`` runs all three modes on the
same prompts and reports per-mode step compression; ``analyze`` emits the
closed-form/Monte-Carlo speedup curves as CSV; ``simulate`` runs lookahead
decoding sharded over simulated devices and reports communication stats.
Reports are deterministic given the config (seeds included), with
canonically ordered JSON keys.

Exit codes: 0 success, 1 runtime/IO failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import flops_proxy, scaling_rows
from .decoding import decode_autoregressive, decode_jacobi, decode_lookahead
from .models import ModelInterface, detokenize, markov_train, tokenize, transformer_init
from .parallel import CommStats, decode_lookahead_devices
from .pool import NGramPool
from .types import GenerationConfig, SamplerSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookahead",
        description="Parallel decoding engine with n-gram speculation and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_flags = argparse.ArgumentParser(add_help=False)
    run_flags.add_argument("--model", choices=["markov", "transformer"], default="markov")
    run_flags.add_argument("--corpus", type=Path, help="training corpus (required for markov)")
    run_flags.add_argument("--prompts", type=Path, required=True, help="one prompt per line")
    run_flags.add_argument("--tokenizer", choices=["bytes", "ints"], default="bytes")
    run_flags.add_argument("--vocab-size", type=int, help="vocabulary size for the ints tokenizer")
    run_flags.add_argument("-W", type=int, default=15, help="lookahead window size")
    run_flags.add_argument("-N", type=int, default=5, help="n-gram size")
    run_flags.add_argument("-G", type=int, default=None, help="max verification candidates (default W)")
    run_flags.add_argument("--max-tokens", type=int, default=64)
    run_flags.add_argument("--eos", type=int, default=None)
    run_flags.add_argument("--seed", type=int, default=0)
    run_flags.add_argument("--temperature", type=float, default=0.0, help="0 means greedy")
    run_flags.add_argument("--top-k", type=int, default=None)
    run_flags.add_argument("--top-p", type=float, default=None)
    run_flags.add_argument(
        "--pool-from-prompt",
        nargs="?",
        const=True,
        default=False,
        type=lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
        help="seed the n-gram pool from the prompt (optionally pass true/false)",
    )
    run_flags.add_argument("--pool-capacity", type=int, default=None)
    run_flags.add_argument("--order", type=int, default=3, help="markov model order")
    run_flags.add_argument("--smoothing", type=float, default=0.1, help="markov smoothing constant")
    run_flags.add_argument("--dim", type=int, default=16, help="transformer model width")
    run_flags.add_argument("--layers", type=int, default=2)
    run_flags.add_argument("--heads", type=int, default=2)
    run_flags.add_argument("--out", type=Path, default=Path("report.json"))
    run_flags.add_argument("--format", choices=["json", "csv"], default="json")

    decode_cmd = sub.add_parser("decode", parents=[run_flags], help="run one decoding mode")
    decode_cmd.add_argument(
        "--mode", choices=["autoregressive", "jacobi", "lookahead"], default="lookahead"
    )

    sub.add_parser("bench", parents=[run_flags], help="run all three modes on the same prompts")

    simulate_cmd = sub.add_parser(
        "simulate", parents=[run_flags], help="lookahead decoding on simulated devices"
    )
    simulate_cmd.add_argument("--devices", type=int, default=2)

    analyze_cmd = sub.add_parser("analyze", help="emit speedup-formula curves as CSV")
    analyze_cmd.add_argument("--alpha", type=float, required=True)
    analyze_cmd.add_argument("--gamma", type=int, required=True)
    analyze_cmd.add_argument("--b", type=int, nargs="+", default=[1])
    analyze_cmd.add_argument("--f", type=float, default=1.0)
    analyze_cmd.add_argument("--trials", type=int, default=200_000)
    analyze_cmd.add_argument("--seed", type=int, default=0)
    analyze_cmd.add_argument("--out", type=Path, default=None)

    return parser


def _load_tokens(path: Path, scheme: str, vocab_size: int | None) -> list[int]:
    return tokenize(path.read_bytes(), scheme, vocab_size)


def _build_model(args) -> tuple[ModelInterface, int]:
    if args.tokenizer == "bytes":
        vocab = 256
    elif args.vocab_size is not None:
        vocab = args.vocab_size
    elif args.model == "markov" and args.corpus is not None:
        corpus_tokens = _load_tokens(args.corpus, "ints", None)
        vocab = max(corpus_tokens, default=0) + 1
    else:
        raise ValueError("the ints tokenizer needs --vocab-size (or a markov --corpus to infer it)")

    if args.model == "markov":
        if args.corpus is None:
            raise ValueError("--model markov requires --corpus")
        corpus = _load_tokens(args.corpus, args.tokenizer, vocab)
        model = markov_train([corpus], order=args.order, smoothing=args.smoothing, vocab_size=vocab)
    else:
        model = transformer_init(
            seed=args.seed,
            vocab_size=vocab,
            d_model=args.dim,
            n_layers=args.layers,
            n_heads=args.heads,
        )
    return model, vocab


def _load_prompts(args, vocab: int) -> list[list[int]]:
    lines = args.prompts.read_text(encoding="utf-8").splitlines()
    prompts = []
    for i, line in enumerate(lines, start=1):
        tokens = tokenize(line, args.tokenizer, vocab)
        if not tokens:
            raise ValueError(f"prompt line {i} is empty")
        prompts.append(tokens)
    if not prompts:
        raise ValueError("prompts file contains no prompts")
    return prompts


def _sampler(args, seed_offset: int = 0) -> SamplerSpec:
    if args.temperature and args.temperature > 0.0:
        return SamplerSpec(
            mode="temperature",
            temperature=args.temperature,
            top_k=args.top_k,
            top_p=args.top_p,
            seed=args.seed + seed_offset,
        )
    return SamplerSpec(mode="greedy", seed=args.seed + seed_offset)


def _generation_config(args) -> GenerationConfig:
    return GenerationConfig(
        window=args.W,
        ngram=args.N,
        max_candidates=args.G,
        max_tokens=args.max_tokens,
        eos_token=args.eos,
        seed_pool_from_prompt=args.pool_from_prompt,
    )


def _config_echo(args, vocab: int) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    for key, value in echo.items():
        if isinstance(value, Path):
            echo[key] = str(value)
    echo["vocab_size"] = vocab
    echo["command"] = args.command
    return echo


def _run_mode(mode: str, model, prompts, args, devices: int | None = None):
    """Decode every prompt in one mode; returns (rows, text lines, comm totals)."""
    config = _generation_config(args)
    rows = []
    lines = []
    comm_total = CommStats() if devices else None
    for i, prompt in enumerate(prompts):
        sampler = _sampler(args, seed_offset=i)
        if mode == "autoregressive":
            tokens = decode_autoregressive(model, prompt, sampler, args.max_tokens, args.eos)
            row = {"id": i, "tokens": len(tokens), "steps": len(tokens)}
        elif mode == "jacobi":
            rng = np.random.default_rng(sampler.seed)
            tokens, _, iterations = decode_jacobi(model, prompt, args.max_tokens, rng)
            row = {"id": i, "tokens": len(tokens), "steps": iterations}
        else:
            pool = NGramPool(config.ngram, capacity=args.pool_capacity)
            if devices:
                tokens, metrics, comm = decode_lookahead_devices(
                    model, prompt, config, sampler, devices, pool=pool
                )
                comm_total.add(comm)
            else:
                tokens, metrics = decode_lookahead(model, prompt, config, sampler, pool=pool)
            row = {
                "id": i,
                "tokens": metrics.tokens_generated,
                "steps": metrics.steps,
                "acceptance_histogram": {str(k): v for k, v in metrics.acceptance_histogram.items()},
                "total_queries": metrics.total_queries,
                "mean_queries_per_step": metrics.mean_queries_per_step,
            }
        row["compression"] = row["tokens"] / row["steps"]
        rows.append(row)
        lines.append(detokenize(tokens, args.tokenizer))
    return rows, lines, comm_total


def _aggregate(rows: list[dict], args) -> dict:
    total_tokens = sum(r["tokens"] for r in rows)
    total_steps = sum(r["steps"] for r in rows)
    return {
        "total_tokens": total_tokens,
        "total_steps": total_steps,
        "overall_compression": total_tokens / total_steps,
        "mean_compression": sum(r["compression"] for r in rows) / len(rows),
        "flops_proxy": flops_proxy(args.W, args.N, args.G if args.G is not None else args.W),
    }


def _write_report(out: Path, report: dict, fmt: str, rows_by_mode: dict[str, list[dict]]) -> None:
    out.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if fmt == "csv":
        csv_path = out.with_suffix(".csv")
        with csv_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mode", "prompt_id", "tokens", "steps", "compression"])
            for mode, rows in rows_by_mode.items():
                for r in rows:
                    writer.writerow([mode, r["id"], r["tokens"], r["steps"], r["compression"]])


def _text_path(out: Path, mode: str | None = None) -> Path:
    stem = out.stem if out.suffix else out.name
    suffix = f".{mode}.txt" if mode else ".txt"
    return out.with_name(stem + suffix)


def _cmd_decode(args) -> int:
    model, vocab = _build_model(args)
    prompts = _load_prompts(args, vocab)
    rows, lines, _ = _run_mode(args.mode, model, prompts, args)
    report = {
        "engine_version": __version__,
        "config": _config_echo(args, vocab),
        "mode": args.mode,
        "prompts": rows,
        "aggregate": _aggregate(rows, args),
    }
    _write_report(args.out, report, args.format, {args.mode: rows})
    _text_path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_bench(args) -> int:
    model, vocab = _build_model(args)
    prompts = _load_prompts(args, vocab)
    modes = {}
    rows_by_mode = {}
    for mode in ("autoregressive", "jacobi", "lookahead"):
        rows, lines, _ = _run_mode(mode, model, prompts, args)
        modes[mode] = {"prompts": rows, "aggregate": _aggregate(rows, args)}
        rows_by_mode[mode] = rows
        _text_path(args.out, mode).write_text("\n".join(lines) + "\n", encoding="utf-8")
    report = {
        "engine_version": __version__,
        "config": _config_echo(args, vocab),
        "modes": modes,
    }
    _write_report(args.out, report, args.format, rows_by_mode)
    return 0


def _cmd_simulate(args) -> int:
    if args.devices < 1:
        raise ValueError("--devices must be >= 1")
    model, vocab = _build_model(args)
    prompts = _load_prompts(args, vocab)
    rows, lines, comm = _run_mode("lookahead", model, prompts, args, devices=args.devices)
    aggregate = _aggregate(rows, args)
    aggregate["comm"] = {
        "tokens_synchronized": comm.tokens_synchronized,
        "sync_events": comm.sync_events,
    }
    report = {
        "engine_version": __version__,
        "config": _config_echo(args, vocab),
        "devices": args.devices,
        "prompts": rows,
        "aggregate": aggregate,
    }
    _write_report(args.out, report, args.format, {"lookahead": rows})
    _text_path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_analyze(args) -> int:
    rows = scaling_rows(args.alpha, args.f, args.gamma, args.b, trials=args.trials, seed=args.seed)
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=["alpha", "f", "gamma", "b", "predicted_S", "mc_mean", "mc_stderr"]
    )
    writer.writeheader()
    writer.writerows(rows)
    text = buffer.getvalue()
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "decode": _cmd_decode,
        "bench": _cmd_bench,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

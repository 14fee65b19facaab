"""Command-line entry point: ``int <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Optional, Sequence

from .axioms import AXIOM_SETS
from .bench import build_corpus, run_bench
from .dataset import compute_stats, read_jsonl, read_records, to_record, write_jsonl
from .env import EnvConfig
from .errors import InfeasibleOrder, IntError
from .generator import GeneratorConfig, generate
from .kernel import check_proof
from .search import MctsConfig, OraclePolicy, StepCache, UniformPolicy, greedy_prove, prove
from .server import Server, serve_stdio, serve_tcp
from .splits import DIMENSIONS, SplitSpec, generate_split


def _emit(obj: dict, stream=None) -> None:
    print(json.dumps(obj), file=stream or sys.stdout)


def _open_out(path: Optional[str]):
    return sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8", newline="\n")


def _generator_config(args) -> GeneratorConfig:
    return GeneratorConfig(axiom_set=args.axioms, k=args.k, l=args.l, degree=args.degree, seed=args.seed)


def cmd_generate(args) -> int:
    cfg = _generator_config(args)
    out = _open_out(args.out)
    try:
        n = write_jsonl((generate(cfg, i) for i in range(args.start, args.start + args.num)), out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.out not in (None, "-"):
        _emit({"written": n, "out": args.out})
    return 0


def cmd_split(args) -> int:
    spec = SplitSpec(
        dimension=args.dimension,
        n_orders=args.orders,
        n_combinations=args.combinations,
        n_test_combinations=args.test_combinations,
        test_size=args.test_size,
        test_k=args.test_k,
        test_l=args.test_l,
    )
    split = generate_split(spec, _generator_config(args))
    os.makedirs(args.out_dir, exist_ok=True)
    test_path = os.path.join(args.out_dir, "test.jsonl")
    train_path = os.path.join(args.out_dir, "train.jsonl")
    n_test = write_jsonl(split.test, test_path)
    n_train = write_jsonl(split.train(args.train), train_path)
    _emit({"dimension": args.dimension, "test": n_test, "train": n_train, "out_dir": args.out_dir})
    return 0


def cmd_verify(args) -> int:
    total = failed = 0
    first = None
    for rec, thm in read_records(args.inp):
        verdict = check_proof(thm, thm.proof or ())
        total += 1
        if not verdict.ok:
            failed += 1
            if first is None:
                first = {"theorem_id": rec.get("id") or to_record(thm)["id"], "index": total - 1,
                         "step_index": verdict.step_index, "reason": verdict.reason}
    report = {"total": total, "verified": total - failed, "failed": failed}
    if first:
        report["first_failure"] = first
    _emit(report, sys.stdout if not failed else sys.stderr)
    return 0 if not failed else 1


def cmd_prove(args) -> int:
    cfg = MctsConfig(args.cpuct, args.tau, args.sims, args.step_limit, args.axioms)
    cache = StepCache()
    results = []
    for i, thm in enumerate(read_jsonl(args.inp)):
        if args.limit is not None and i >= args.limit:
            break
        policy = OraclePolicy(thm, cache=cache) if args.policy == "oracle" else UniformPolicy(cache)
        rng = random.Random(args.seed + i)
        if args.method == "greedy":
            steps = greedy_prove(thm, policy, cfg, rng)
        else:
            steps = prove(thm, policy, cfg=cfg, rng=rng)
        results.append({"index": i, "goal": str(thm.goal), "solved": steps is not None,
                        "length": len(steps) if steps is not None else None,
                        "proof": [s.to_json() for s in steps] if steps is not None else None})
    solved = [r for r in results if r["solved"]]
    summary = {
        "method": args.method,
        "policy": args.policy,
        "total": len(results),
        "solved": len(solved),
        "success_rate": len(solved) / len(results) if results else 0.0,
        "mean_length": sum(r["length"] for r in solved) / len(solved) if solved else None,
    }
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump({"summary": summary, "results": results}, fh, indent=1)
    _emit(summary)
    return 0


def cmd_stats(args) -> int:
    _emit(compute_stats(read_jsonl(args.inp)).to_json())
    return 0


def cmd_bench(args) -> int:
    cfg = GeneratorConfig(axiom_set=args.axioms, k=args.k, l=args.l, seed=args.seed)
    report = run_bench(build_corpus(args.steps, cfg))
    _emit(report.to_json())
    return 0


def cmd_serve(args) -> int:
    app = Server(EnvConfig(step_limit=args.step_limit))
    if args.transport == "stdio":
        serve_stdio(app)
    else:
        serve_tcp(args.host, args.port, app)
    return 0


def _add_generator_flags(p: argparse.ArgumentParser, k: int = 3, l: int = 5) -> None:
    p.add_argument("--axioms", choices=sorted(AXIOM_SETS), default="ordered-field")
    p.add_argument("--k", type=int, default=k)
    p.add_argument("--l", type=int, default=l)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="int", description="Synthetic inequality theorems: generate, verify, prove.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write generated theorems as JSON lines")
    _add_generator_flags(p)
    p.add_argument("--num", type=int, default=10)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="write a train/test split")
    _add_generator_flags(p)
    p.add_argument("--dimension", choices=DIMENSIONS, default="iid")
    p.add_argument("--orders", type=int, default=100, help="train order pool size")
    p.add_argument("--combinations", type=int, default=25, help="train combination pool size")
    p.add_argument("--test-combinations", type=int, default=300)
    p.add_argument("--test-k", type=int, default=None)
    p.add_argument("--test-l", type=int, default=None)
    p.add_argument("--test-size", type=int, default=1000)
    p.add_argument("--train", type=int, default=1000, help="number of train theorems")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("verify", help="replay every proof in a dataset")
    p.add_argument("--in", dest="inp", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("prove", help="run a prover over a dataset")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--method", choices=("greedy", "mcts"), default="mcts")
    p.add_argument("--policy", choices=("uniform", "oracle"), default="uniform")
    p.add_argument("--sims", type=int, default=200)
    p.add_argument("--cpuct", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--step-limit", type=int, default=15)
    p.add_argument("--axioms", choices=sorted(AXIOM_SETS), default="ordered-field")
    p.add_argument("--limit", type=int, default=None, help="prove only the first N theorems")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="write per-theorem results here")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--in", dest="inp", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="mean apply_step latency")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--axioms", choices=sorted(AXIOM_SETS), default="ordered-field")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="NDJSON environment server")
    p.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7878)
    p.add_argument("--step-limit", type=int, default=15)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleOrder as err:
        _emit({"error": {"code": err.code, "message": str(err)}}, sys.stderr)
        return 2
    except (IntError, OSError, ValueError) as err:
        code = getattr(err, "code", type(err).__name__)
        _emit({"error": {"code": code, "message": str(err)}}, sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

    tutorsmith run       -- train and evaluate agents under the ideal tutor
    tutorsmith problems  -- export generated problem sets as JSONL
    tutorsmith serve     -- start the authoring service
    tutorsmith bench     -- compare compiled vs pure-python kernels
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .domains import DOMAIN_IDS, get_domain


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tutorsmith")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulated ideal-tutor experiment")
    run.add_argument("--domain", required=True, choices=list(DOMAIN_IDS))
    run.add_argument(
        "--learner",
        required=True,
        choices=["stand", "decision_tree", "bagged_forest"],
    )
    run.add_argument("--htn", action="store_true", help="enable process-learning")
    run.add_argument("--n-train", type=int, default=100)
    run.add_argument("--n-holdout", type=int, default=100)
    run.add_argument("--reps", type=int, default=40)
    run.add_argument("--seed", type=int, default=1)
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    run.add_argument("--workers", type=int, default=1)

    problems = sub.add_parser("problems", help="export a generated problem set")
    problems.add_argument("--domain", required=True, choices=list(DOMAIN_IDS))
    problems.add_argument("--n", type=int, default=100)
    problems.add_argument("--seed", type=int, default=1)
    problems.add_argument("--out", default="-")

    serve = sub.add_parser("serve", help="start the authoring service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)

    bench = sub.add_parser("bench", help="benchmark compiled vs pure kernels")
    bench.add_argument("--rows", type=int, default=2000)
    bench.add_argument("--cols", type=int, default=150)
    bench.add_argument("--repeats", type=int, default=5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        from .harness.runner import ExperimentConfig, run_experiment

        config = ExperimentConfig(
            domain=args.domain,
            learner=args.learner,
            htn=args.htn,
            n_train=args.n_train,
            n_holdout=args.n_holdout,
            reps=args.reps,
            seed=args.seed,
            out=args.out,
            fmt=args.format,
            workers=args.workers,
        )
        try:
            run_experiment(config)
        except Exception as exc:  # surface invariant violations as nonzero exit
            print(f"experiment failed: {exc}", file=sys.stderr)
            return 1
        return 0
    if args.command == "problems":
        domain = get_domain(args.domain)
        rng = random.Random(args.seed)
        lines = []
        for _ in range(args.n):
            problem = domain.generate(rng)
            record = problem.record()
            record["seed"] = args.seed
            lines.append(json.dumps(record, sort_keys=True))
        text = "\n".join(lines) + "\n"
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w") as f:
                f.write(text)
        return 0
    if args.command == "serve":
        import uvicorn

        from .api.service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0
    if args.command == "bench":
        from .bench import run_bench

        run_bench(rows=args.rows, cols=args.cols, repeats=args.repeats)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())

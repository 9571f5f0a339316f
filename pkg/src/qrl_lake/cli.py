"""qrl-lake command line interface.

Subcommands: oracle, train, metrics, grid, report, correlate, circuits dump.
Exit codes: 0 success, 1 usage error, 2 run failure.
"""

import argparse
import os
import sys

import numpy as np

from . import bench, circuits, config as config_mod, lake, ppo, qmetrics
from .backend import KERNEL_NAME

USAGE_ERROR, RUN_FAILURE = 1, 2
_ARROWS = ("<", "v", ">", "^")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_ERROR)


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="flat key=value config file")
    p.add_argument("--seed", type=int, metavar="K", help="run seed")
    p.add_argument("--only", metavar="LIST",
                   help="comma-separated solution ids (pqc1..pqc19, nn2..nn16)")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="parallel workers for the grid")
    p.add_argument("--out", default="out", metavar="DIR", help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="qrl-lake",
                     description="Hybrid quantum-classical PPO on a slippery "
                                 "FrozenLake, with circuit metrics "
                                 f"(statevector kernel: {KERNEL_NAME})")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("oracle", "value iteration, greedy policy, and reward threshold"),
        ("train", "train one solution (--only pqcK or nnH, --seed K)"),
        ("metrics", "compute Ent/Exp/ED for the benchmark circuits"),
        ("grid", "run the full (or filtered) solution x seed grid"),
        ("report", "build summary.csv, correlations.csv, and SVG plots"),
        ("correlate", "recompute correlations.csv from summary.csv"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    circ = sub.add_parser("circuits", help="circuit template utilities")
    circ_sub = circ.add_subparsers(dest="circuits_command", required=True)
    dump = circ_sub.add_parser("dump", help="print a gate table")
    dump.add_argument("--id", required=True,
                      help="circuit id 1..19, an embedding index e0..e15, or 'all'")
    return parser


def _load_opts(args):
    return config_mod.load_config(args.config) if args.config else {}


def _cmd_oracle(args) -> int:
    opts = _load_opts(args)
    slip = float(opts.get("slip_prob", lake.DEFAULT_SLIP))
    cap = int(opts.get("max_episode_steps", lake.DEFAULT_MAX_EPISODE_STEPS))
    model = lake.build_model(slip_prob=slip, max_episode_steps=cap)
    values, policy = lake.value_iteration(model, gamma=1.0)
    threshold = lake.reward_threshold(
        model, episodes=int(opts.get("threshold_episodes", 1000)),
        seed=args.seed if args.seed is not None else 1)

    print(f"slippery FrozenLake (slip={slip}, step cap={cap})")
    print("state values (success probability of the oracle policy):")
    for row in range(4):
        print("  " + "  ".join(f"{values[4*row + c]:.4f}" for c in range(4)))
    print("greedy policy:")
    for row in range(4):
        print("  " + " ".join(
            "." if model.terminal[4*row + c] else _ARROWS[policy[4*row + c]]
            for c in range(4)))
    print(f"V[start] = {values[model.start_state]:.4f}")
    print(f"Monte Carlo mean reward ({threshold.episodes} episodes, "
          f"seed {threshold.seed}): {threshold.mean_reward:.4f}")
    print(f"reward threshold (0.95 x mean): {threshold.threshold:.4f}")

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "oracle.csv")
    with open(path, "w") as fh:
        fh.write("state,value,action\n")
        for s in range(model.num_states):
            fh.write(f"{s},{values[s]:.10f},{int(policy[s])}\n")
    print(f"wrote {path}")
    return 0


def _parse_single_solution(args, parser) -> ppo.RunSpec:
    if not args.only or "," in args.only:
        parser.error("train needs exactly one --only solution id (e.g. pqc6)")
    seed = args.seed if args.seed is not None else 1
    try:
        return ppo.RunSpec.parse(args.only, seed)
    except ValueError as exc:
        parser.error(str(exc))


def _cmd_train(args, parser) -> int:
    spec = _parse_single_solution(args, parser)
    cfg = ppo.PpoConfig.from_mapping(_load_opts(args))
    out_dir = bench.run_dir(args.out, spec)
    record = ppo.train(spec, cfg, out_dir=out_dir)
    mr = bench.max_reward(record.reward_series)
    ttc = bench.time_to_convergence(record.reward_series)
    print(f"{record.solution_id} seed {spec.seed}: W={record.weight_count} "
          f"MR={mr:.3f} TTC={ttc}")
    print(f"wrote {out_dir}/")
    return 0


def _cmd_metrics(args) -> int:
    opts = _load_opts(args)
    cfg = qmetrics.MetricsConfig(
        ent_samples=int(opts.get("ent_samples", 5000)),
        exp_pairs=int(opts.get("exp_pairs", 5000)),
        exp_bins=int(opts.get("exp_bins", 75)),
        ed_theta_samples=int(opts.get("ed_theta_samples", 100)),
        ed_k=int(opts.get("ed_k", 100)),
        ed_gamma=float(opts.get("ed_gamma", 1.0)),
        ed_n=int(opts.get("ed_n", 100_000)),
        seed=args.seed if args.seed is not None else int(opts.get("seed", 0)),
    )
    ids = None
    if args.only:
        ids = []
        for token in args.only.split(","):
            spec = ppo.RunSpec.parse(token, 0)
            if spec.kind != "pqc":
                raise ValueError("metrics apply to circuits only (pqcK ids)")
            ids.append(spec.arch)
    records = qmetrics.compute_metrics(ids, cfg)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "metrics.csv")
    bench.write_metrics_csv(records, path)
    for r in records:
        print(f"circuit {r.circuit_id:2d}: Ent={r.ent:.3f} Exp={r.exp:.3f} "
              f"ED={r.ed:.2f}")
    print(f"wrote {path}")
    return 0


def _cmd_grid(args) -> int:
    opts = _load_opts(args)
    cfg = ppo.PpoConfig.from_mapping(opts)
    seeds = (config_mod.parse_seed_list(opts["seeds"]) if "seeds" in opts
             else bench.DEFAULT_SEEDS)
    only = args.only.split(",") if args.only else None
    manifest = bench.run_grid(cfg, args.out, only=only, seeds=seeds,
                              jobs=args.jobs)
    done = sum(1 for v in manifest["runs"].values() if v["status"] == "done")
    failed = {k: v for k, v in manifest["runs"].items()
              if v["status"] == "failed"}
    print(f"grid: {done} runs done, {len(failed)} failed")
    for key, entry in failed.items():
        print(f"  FAILED {key}: {entry.get('error', '')}")
    return RUN_FAILURE if failed else 0


def _cmd_report(args) -> int:
    opts = _load_opts(args)
    seeds = (config_mod.parse_seed_list(opts["seeds"]) if "seeds" in opts
             else bench.DEFAULT_SEEDS)
    only = args.only.split(",") if args.only else None
    written = bench.render_report(args.out, only=only, seeds=seeds)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_correlate(args) -> int:
    summary_path = os.path.join(args.out, "summary.csv")
    if not os.path.exists(summary_path):
        raise FileNotFoundError(f"{summary_path} not found (run report first)")
    rows = bench.read_summary_csv(summary_path)
    entries = bench.correlate(rows)
    path = os.path.join(args.out, "correlations.csv")
    bench.write_correlations_csv(entries, path)
    for e in entries:
        pearson = "undefined" if e.pearson is None else f"{e.pearson:+.3f}"
        spearman = "undefined" if e.spearman is None else f"{e.spearman:+.3f}"
        print(f"{e.metric} vs {e.target}: pearson {pearson} "
              f"spearman {spearman} (n={e.n})")
    print(f"wrote {path}")
    return 0


def _cmd_circuits_dump(args, parser) -> int:
    token = args.id.strip().lower()
    if token == "all":
        ids = [str(i) for i in bench.PQC_IDS]
    else:
        ids = [token]
    for tok in ids:
        if tok.startswith("e"):
            template = circuits.embedding_circuit(int(tok[1:]))
        else:
            cid = int(tok)
            if not 1 <= cid <= circuits.NUM_BENCHMARK_CIRCUITS:
                parser.error(f"circuit id must be 1..19, got {cid}")
            template = circuits.benchmark_circuit(cid)
        print(circuits.dump_template(template))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "train":
            return _cmd_train(args, parser)
        if args.command == "metrics":
            return _cmd_metrics(args)
        if args.command == "grid":
            return _cmd_grid(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "correlate":
            return _cmd_correlate(args)
        if args.command == "circuits":
            return _cmd_circuits_dump(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, FileNotFoundError, RuntimeError,
            FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUN_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())

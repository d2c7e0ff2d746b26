"""Command-line entry point: ``cascadeopt <subcommand> ...``.

Exit codes: 0 success, 2 config error, 3 degenerate network, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .diffusion import CascadeObjective, MessageStyle, PreferenceTable, simulate_cascade
from .errors import CascadeOptError, DegenerateNetworkError, DomainError, GridTooLargeError
from .harness import (
    DEFAULT_GRID,
    PREFERENCE_STREAM,
    ExperimentConfig,
    grid_oracle,
    mix_seed,
    run_experiment,
    write_outputs,
)
from .netgen import DirectedGraph, NetworkConfig, compute_stats, generate_network

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4


def _read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc


def _load_graph(path) -> DirectedGraph:
    return DirectedGraph.from_dict(_read_json(path))


def _load_prefs(path, graph) -> PreferenceTable:
    prefs = PreferenceTable.from_list(_read_json(path))
    if len(prefs) != graph.node_count:
        raise DomainError(f"{path}: {len(prefs)} preference rows for {graph.node_count} nodes")
    return prefs


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_gen_net(args) -> int:
    config = NetworkConfig(node_count=args.nodes, exponent=args.exponent, max_degree=args.max_degree, seed=args.seed)
    graph = generate_network(config)
    text = graph.to_json() + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if args.prefs_out:
        rng = np.random.default_rng(mix_seed(args.seed, PREFERENCE_STREAM))
        Path(args.prefs_out).write_text(PreferenceTable.random(graph.node_count, rng).to_json() + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    _emit(compute_stats(_load_graph(args.net)).to_dict())
    return EXIT_OK


def cmd_cascade(args) -> int:
    graph = _load_graph(args.net)
    prefs = _load_prefs(args.prefs, graph)
    msg = MessageStyle.from_dict(_read_json(args.msg))
    _emit(simulate_cascade(graph, prefs, args.sender, msg, args.epsilon).to_dict())
    return EXIT_OK


def cmd_optimize(args) -> int:
    config = ExperimentConfig.from_json(Path(args.config).read_text())
    result = run_experiment(config)
    write_outputs(result, args.out_dir)
    return EXIT_OK


def cmd_oracle(args) -> int:
    graph = _load_graph(args.net)
    prefs = _load_prefs(args.prefs, graph)
    objective = CascadeObjective(graph, prefs, args.sender, args.epsilon)
    grid = DEFAULT_GRID if args.grid == "default" else _read_json(args.grid)
    best, score, size = grid_oracle(objective, grid)
    _emit({"best": best.to_dict(), "fitness": score, "points": size, "reachable": objective.upper_bound()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascadeopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-net", help="generate a network as JSON")
    p.add_argument("--nodes", type=int, default=250)
    p.add_argument("--exponent", type=float, default=2.4)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--prefs-out", default=None, help="also write a random preference table")
    p.set_defaults(func=cmd_gen_net)

    p = sub.add_parser("stats", help="print network statistics")
    p.add_argument("--net", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("cascade", help="simulate one message")
    p.add_argument("--net", required=True)
    p.add_argument("--prefs", required=True)
    p.add_argument("--sender", type=int, required=True)
    p.add_argument("--msg", required=True)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("optimize", help="run a replicated GA experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("oracle", help="exhaustive grid search for the best style")
    p.add_argument("--net", required=True)
    p.add_argument("--prefs", required=True)
    p.add_argument("--sender", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--grid", default="default", help="'default' or a JSON file of per-field values")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateNetworkError as exc:
        print(f"cascadeopt: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (CascadeOptError, GridTooLargeError) as exc:
        print(f"cascadeopt: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cascadeopt: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

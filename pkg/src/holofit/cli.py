"""Command line entry point: holofit bestterm|learn|learn-dnn|fem|eval."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import run_experiment


def _add_experiment(sub, name: str, help_text: str):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", required=True, help="path to the JSON experiment config")
    p.add_argument("--out", required=True, help="output directory for results.csv / meta.json")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config master seed")
    return p


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="holofit",
        description="Sparse Legendre learning benchmarks and network evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_experiment(sub, "bestterm", "best s-term decay of the product benchmark target")
    _add_experiment(sub, "learn", "sample-complexity sweep of the polynomial learner")
    _add_experiment(sub, "learn-dnn", "learning sweep with the trained tanh network")
    _add_experiment(sub, "fem", "Hilbert-valued learning against the diffusion solver")

    ev = sub.add_parser("eval", help="evaluate a saved network on CSV points")
    ev.add_argument("--network", required=True, help="network container file")
    ev.add_argument("--in", dest="infile", required=True, help="CSV of input points, one row per point")
    ev.add_argument("--out", dest="outfile", required=True, help="CSV of output values")

    args = parser.parse_args(argv)
    if args.command == "eval":
        return _eval_network(args)

    with open(args.config) as fh:
        config = json.load(fh)
    if config.get("experiment", args.command) != args.command:
        print(
            f"error: config is for experiment {config.get('experiment')!r}, "
            f"not {args.command!r}",
            file=sys.stderr,
        )
        return 2
    config["experiment"] = args.command
    if args.seed is not None:
        config["seed"] = args.seed
    try:
        path = run_experiment(config, args.out, threads=args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


def _eval_network(args) -> int:
    from .networks import FeedforwardNetwork

    net = FeedforwardNetwork.load(args.network)
    pts = np.loadtxt(args.infile, delimiter=",", ndmin=2)
    if pts.shape[1] != net.input_dim:
        print(
            f"error: points have {pts.shape[1]} columns, network expects {net.input_dim}",
            file=sys.stderr,
        )
        return 2
    np.savetxt(args.outfile, net(pts), delimiter=",")
    return 0


if __name__ == "__main__":
    sys.exit(main())

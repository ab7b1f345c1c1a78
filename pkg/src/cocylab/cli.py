"""Command line entry point: ``cocylab <subcommand> --config S.json ...``.

Exit status is 0 when every requested experiment meets its expectation, 1
when one does not, and 2 on configuration or runtime errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CocylabError, ExperimentFailed
from .runner import dumps, run_config
from .scenarios import TEMPLATES, dump_config, generate_scenario, load_config


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="scenario config (JSON)")
    g.add_argument("--out", metavar="DIR", help="write the report bundle to DIR")
    g.add_argument("--seed", type=int, help="override the master seed")
    g.add_argument("--threads", type=int, help="worker threads (default: $COCYLAB_THREADS or 1)")
    g.add_argument("--tol-scale", type=float, dest="tol_scale", help="multiply every tolerance")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    ap = argparse.ArgumentParser(prog="cocylab", description="Experiments with linear cocycles over shifts of finite type.")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        return sub.add_parser(name, parents=[parent], help=help_)

    cmd("validate", "check the config and the mixing of the shift")
    p = cmd("periodic", "compare return maps on periodic orbits")
    p.add_argument("--mode", choices=["equal", "conjugate"], default="equal")
    p.add_argument("--max-period", type=int, default=10)
    p.add_argument("--a", default="A")
    p.add_argument("--b", default="B")

    p = cmd("bunching", "certify fiber bunching")
    p.add_argument("--system", default="A")
    p.add_argument("--max-n", type=int, default=24)
    p.add_argument("--max-period", type=int, default=12)
    p.add_argument("--route", choices=["direct", "periodic", "both"], default="both")

    p = cmd("holonomy", "check the holonomy axioms on related pairs")
    p.add_argument("--system", default="A")
    p.add_argument("--pairs", default="200", help="pair count or a JSON file of {x, y, kind} records")
    p.add_argument("--triples", type=int, default=50)

    p = cmd("conjugacy", "build and verify a transfer map")
    p.add_argument("--mode", choices=["equal", "conjugate"], default="conjugate")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--emit", metavar="FILE", help="write the cached field to FILE")
    p.add_argument("--a", default="A")
    p.add_argument("--b", default="B")
    p.add_argument("--max-period", type=int, default=10)

    p = cmd("centralizer", "commutant dimensions along powers of a return map")
    p.add_argument("--system", default="A")
    p.add_argument("--orbit", default="0")
    p.add_argument("--kmax", type=int, default=12)

    p = cmd("spectrum", "periodic and measure exponents")
    p.add_argument("--system", default="A")
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--max-period", type=int, default=10)

    p = cmd("splitting", "invariant splitting of a perturbed constant cocycle")
    p.add_argument("--a", default="A", help="the constant system")
    p.add_argument("--b", default="B", help="the perturbed system")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--iters", type=int, default=60)

    cmd("run", "run every experiment of the config")
    p = cmd("template", "print a generated config")
    p.add_argument("name", choices=TEMPLATES)
    return ap


def _experiments(args) -> list[dict]:
    c = args.command
    if c == "validate":
        return [{"id": "validate", "type": "validate"}]
    if c == "periodic":
        return [{"id": "periodic", "type": "periodic", "a": args.a, "b": args.b, "mode": args.mode.upper(),
                 "max_period": args.max_period}]
    if c == "bunching":
        return [{"id": "bunching", "type": "bunching", "system": args.system, "max_n": args.max_n,
                 "max_period": args.max_period, "route": args.route}]
    if c == "holonomy":
        e = {"id": "holonomy", "type": "holonomy", "system": args.system, "triples": args.triples}
        if args.pairs.isdigit():
            e["pairs"] = int(args.pairs)
        else:
            e["pair_list"] = json.loads(Path(args.pairs).read_text())
        return [e]
    if c == "conjugacy":
        mode = args.mode.upper()
        return [{"id": "periodic", "type": "periodic", "a": args.a, "b": args.b, "mode": mode,
                 "max_period": args.max_period},
                {"id": "conjugacy", "type": "conjugacy", "a": args.a, "b": args.b, "window": args.window,
                 "c_p": "identity" if mode == "EQUAL" else "solve", "emit": bool(args.emit)}]
    if c == "centralizer":
        return [{"id": "centralizer", "type": "centralizer", "system": args.system, "orbit": args.orbit,
                 "kmax": args.kmax}]
    if c == "spectrum":
        return [{"id": "spectrum", "type": "spectrum", "system": args.system, "steps": args.steps,
                 "samples": args.samples, "max_period": args.max_period}]
    if c == "splitting":
        return [{"id": "splitting", "type": "splitting", "a": args.a, "b": args.b, "depth": args.depth,
                 "iterations": args.iters}]
    raise ValueError(c)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "template":
            cfg = generate_scenario(args.name, args.seed if args.seed is not None else 0)
            text = dump_config(cfg) + "\n"
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / f"{args.name}.json").write_text(text)
            else:
                sys.stdout.write(text)
            return 0
        if not args.config:
            print("error: --config is required", file=sys.stderr)
            return 2
        cfg = load_config(args.config)
        if args.command != "run":
            cfg["experiments"] = [dict(e, expect="PASS") for e in _experiments(args)]
        bundle = run_config(cfg, args.seed, args.tol_scale, args.threads)
        emit = getattr(args, "emit", None)
        if emit:
            rep = bundle.experiment("conjugacy")["report"]
            if rep is not None:
                Path(emit).write_text(dumps(rep.pop("field")) + "\n")
        if args.out:
            bundle.write(args.out)
        if args.command == "run":
            sys.stdout.write(dumps(bundle.to_json()) + "\n")
        else:
            sys.stdout.write(dumps({"overall": bundle.verdict,
                                    "experiments": {x["id"]: x for x in bundle.experiments}}) + "\n")
        for x in bundle.experiments:
            if x["status"] == "ERROR":
                print(f"{x['id']}: {x['error']['code']}: {x['error']['message']}", file=sys.stderr)
        if any(x["status"] == "ERROR" for x in bundle.experiments):
            return 2
        return 0 if bundle.passed else 1
    except ExperimentFailed as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except CocylabError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

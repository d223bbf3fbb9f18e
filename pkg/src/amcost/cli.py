"""Command-line front end: ``amcost run|check|constraints|soundness``.

Exit codes: 0 success, 1 stuck run / unresolved file / import cycle,
2 fuel exhausted, 3 parse error, 4 type error, 5 invalid options
(missing root, bad cost table or sigma). The soundness command exits 0
exactly when no violation was found.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .costalg import instantiate, normalize_type, render, render_type
from .errors import (
    CostSyntaxError, CyclicBounds, FuelExhausted, ImportCycle, MachineError, ParseError,
    ShapeMismatch, TypeCheckError, UnboundVar, UnresolvedFile,
)
from .harness import FEATURES, GenConfig, parse_features, soundness_campaign
from .machine import DEFAULT_COSTS, CostTable, FsFileGetter, run
from .typecheck import infer

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_FUEL = 2
EXIT_PARSE = 3
EXIT_TYPE = 4
EXIT_USAGE = 5


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    root: str = "."
    fuel: int = 1_000_000
    cost_table: Optional[str] = None
    json: bool = False
    trace: bool = False
    sigma: List[str] = field(default_factory=list)

    def costs(self) -> CostTable:
        if self.cost_table is None:
            return DEFAULT_COSTS
        try:
            return CostTable.load(self.cost_table)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad cost table {self.cost_table}: {exc}") from exc

    def file_getter(self) -> FsFileGetter:
        if not os.path.isdir(self.root):
            raise UsageError(f"root directory not found: {self.root}")
        return FsFileGetter(self.root)

    def sigma_map(self) -> Dict[str, int]:
        out = {}
        for item in self.sigma:
            name, sep, value = item.rpartition("=")
            if not sep or not name:
                raise UsageError(f"sigma binding must be name=nat: {item!r}")
            try:
                n = int(value)
            except ValueError:
                raise UsageError(f"sigma value must be a natural number: {item!r}") from None
            if n < 0:
                raise UsageError(f"sigma value must be a natural number: {item!r}")
            out[name] = n
        return out


def _entry(name: str) -> str:
    return name if name.startswith("/") else "/" + name


def _print_json(obj, out) -> None:
    print(json.dumps(obj, sort_keys=True, ensure_ascii=False), file=out)


def cmd_run(entry: str, cfg: CliConfig, out=sys.stdout) -> int:
    result = run(cfg.file_getter(), _entry(entry), cfg.costs(), fuel=cfg.fuel)
    if cfg.json:
        _print_json(result.to_json(), out)
        return EXIT_OK
    print(f"cost: {result.cost}", file=out)
    print(f"steps: {result.steps}", file=out)
    exports = result.to_json()["exports"]
    print(f"exports: {json.dumps(exports, sort_keys=True)}", file=out)
    if cfg.trace:
        for i, rule in enumerate(result.trace, 1):
            print(f"{i:4d} {rule}", file=out)
    return EXIT_OK


def cmd_check(entry: str, cfg: CliConfig, out=sys.stdout) -> int:
    sigma = cfg.sigma_map()
    result = infer(cfg.file_getter(), _entry(entry), cfg.costs())
    value = None
    if cfg.sigma:
        try:
            value = instantiate(result.cost, sigma)
        except UnboundVar as exc:
            raise UsageError(f"sigma does not cover {', '.join(exc.names)}") from exc
    if cfg.json:
        report = result.to_json()
        if value is not None:
            report["sigma"] = dict(sorted(sigma.items()))
            report["instantiated"] = value
        _print_json(report, out)
        return EXIT_OK
    print(f"cost: {render(result.cost)}", file=out)
    fv = sorted(result.free_vars)
    print(f"free variables: {', '.join(fv) if fv else 'none'}", file=out)
    if value is not None:
        print(f"instantiated: {value}", file=out)
    return EXIT_OK


def cmd_constraints(entry: str, cfg: CliConfig, out=sys.stdout) -> int:
    result = infer(cfg.file_getter(), _entry(entry), cfg.costs())
    if cfg.json:
        report = result.to_json()
        _print_json({"constraints": report["constraints"], "solved": report["solved"]}, out)
        return EXIT_OK
    if not result.constraints:
        print("no constraints", file=out)
        return EXIT_OK
    print(f"constraints: {len(result.constraints)}", file=out)
    for c in result.constraints:
        print(f"  gathered:   {c.render(explicit=True)}", file=out)
        print(f"  normalized: {render_type(normalize_type(c.lower))} ⊑ {c.upper}", file=out)
    print("solved:", file=out)
    for name, t in sorted(result.solved.items()):
        print(f"  {name} = {render_type(t)}", file=out)
    return EXIT_OK


def cmd_soundness(cfg: CliConfig, count: int, seed: int,
                  features=FEATURES, out=sys.stdout) -> int:
    if count < 0:
        raise UsageError("count must be nonnegative")
    gen = GenConfig(seed=seed, features=features)
    summary = soundness_campaign(gen, count, cfg.fuel, cfg.costs())
    if cfg.json:
        for line in summary.lines:
            print(line, file=out)
        _print_json({"summary": summary.to_json()}, out)
    else:
        print(f"programs: {summary.total}", file=out)
        print(f"holds: {summary.holds}", file=out)
        print(f"violated: {summary.violated}", file=out)
        print(f"nonterminating: {summary.nonterminating}", file=out)
        print(f"errors: {summary.errors}", file=out)
        print(f"variable-free: {summary.variable_free}/{summary.holds}", file=out)
        for v in summary.violations:
            print(f"VIOLATION seed={v['seed']}: {v['detail']}", file=out)
    return EXIT_OK if summary.violated == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--root", default=None,
                        help="directory that file ids resolve against (default: $AMCOST_ROOT or .)")
    common.add_argument("--fuel", type=int, default=1_000_000, help="maximum machine steps")
    common.add_argument("--cost-table", default=None,
                        help='JSON file like {"add": 0, "sub": 0, "mul": 0}')
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="amcost", description="Cost machine and sized-type checker.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a file on the cost machine")
    r.add_argument("entry")
    r.add_argument("--trace", action="store_true", help="print the rule sequence")
    c = sub.add_parser("check", parents=[common], help="infer the cost type of a file")
    c.add_argument("entry")
    c.add_argument("--sigma", action="append", default=[], metavar="VAR=N",
                   help="instantiate a while variable (repeatable)")
    k = sub.add_parser("constraints", parents=[common], help="show gathered and solved constraints")
    k.add_argument("entry")
    s = sub.add_parser("soundness", parents=[common], help="run a random soundness campaign")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--features", default=None,
                   help=f"comma-separated subset of {','.join(sorted(FEATURES))}")
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    cfg = CliConfig(
        root=args.root or os.environ.get("AMCOST_ROOT") or ".",
        fuel=args.fuel,
        cost_table=args.cost_table,
        json=args.json,
        trace=getattr(args, "trace", False),
        sigma=getattr(args, "sigma", []),
    )
    try:
        if cfg.fuel <= 0:
            raise UsageError("fuel must be positive")
        if args.command == "run":
            return cmd_run(args.entry, cfg, out)
        if args.command == "check":
            return cmd_check(args.entry, cfg, out)
        if args.command == "constraints":
            return cmd_constraints(args.entry, cfg, out)
        try:
            features = FEATURES if args.features is None else parse_features(args.features)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return cmd_soundness(cfg, args.count, args.seed, features, out)
    except UsageError as exc:
        print(f"amcost: {exc}", file=err)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc.render()}", file=err)
        return EXIT_PARSE
    except FuelExhausted as exc:
        print(f"amcost: {exc}", file=err)
        return EXIT_FUEL
    except (MachineError, UnresolvedFile, ImportCycle) as exc:
        print(f"amcost: {exc}", file=err)
        return EXIT_RUNTIME
    except TypeCheckError as exc:
        print(f"type error: {exc.render()}", file=err)
        return EXIT_TYPE
    except (CyclicBounds, CostSyntaxError, ShapeMismatch) as exc:
        print(f"type error: {exc}", file=err)
        return EXIT_TYPE


if __name__ == "__main__":
    sys.exit(main())

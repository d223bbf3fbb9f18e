"""Random program generation and machine-versus-type soundness checks.

A check runs the machine, infers the type of the entry file, instantiates
each while variable with the number of times its loop body was entered,
and compares the two costs.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .costalg import CostExpr, free_vars, instantiate, render
from .errors import AmcostError, FuelExhausted, IntegerOverflow, ParseError, TypeCheckError
from .machine import DEFAULT_COSTS, CostTable, FileGetter, MemoryFileGetter, run
from .parser import format_file
from .syntax import (
    Assign, BinOp, BinOpKind, CompCall, CompDef, Export, For, If, ImportAll,
    ImportSelected, Let, Num, Proj, SourceFile, Var, While,
)
from .typecheck import infer, while_var

FEATURES = frozenset({"while", "for", "if", "compdef", "compcall", "import", "export",
                      "binop", "proj"})
# Lets and assignments are always generated; naming them is accepted for
# feature lists such as "for,binop,if,let,assign".
BASE_FEATURES = frozenset({"let", "assign"})

HOLDS = "Holds"
VIOLATED = "Violated"
NON_TERMINATING = "NonTerminating"
MACHINE_ERROR = "MachineError"
TYPE_ERROR = "TypeError"
OUTCOMES = (HOLDS, VIOLATED, NON_TERMINATING, MACHINE_ERROR, TYPE_ERROR)

ENTRY = "/main.jsx"
_MASK64 = (1 << 64) - 1


def parse_features(text: str) -> FrozenSet[str]:
    names = frozenset(s.strip() for s in text.split(",") if s.strip())
    unknown = names - FEATURES - BASE_FEATURES
    if unknown:
        raise ValueError(f"unknown features: {', '.join(sorted(unknown))}")
    return names


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 3
    max_stmts: int = 4
    features: FrozenSet[str] = FEATURES
    max_files: int = 3
    max_literal: int = 3

    def __post_init__(self) -> None:
        feats = frozenset(self.features)
        unknown = feats - FEATURES - BASE_FEATURES
        if unknown:
            raise ValueError(f"unknown features: {', '.join(sorted(unknown))}")
        object.__setattr__(self, "features", feats)
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.max_stmts < 1 or self.max_files < 1 or self.max_literal < 0:
            raise ValueError("max_stmts and max_files must be positive, max_literal nonnegative")

    def has(self, feature: str) -> bool:
        return feature in self.features


def derive_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index) & _MASK64


# -- generation ----------------------------------------------------------------

@dataclass(frozen=True)
class _Comp:
    ref: object                   # Var or Proj naming the component
    kinds: Tuple[str, ...]        # "int" or "comp" per parameter


@dataclass
class _Scope:
    ints: List[object] = field(default_factory=list)        # readable int expressions
    assignable: List[str] = field(default_factory=list)
    comps: List[_Comp] = field(default_factory=list)

    def copy(self) -> "_Scope":
        return _Scope(list(self.ints), list(self.assignable), list(self.comps))


@dataclass
class _Interface:
    ints: List[str] = field(default_factory=list)
    comps: List[Tuple[str, Tuple[str, ...]]] = field(default_factory=list)

    @property
    def names(self) -> List[str]:
        return sorted(self.ints + [n for n, _ in self.comps])


class _FileGen:
    def __init__(self, rng: random.Random, cfg: GenConfig, index: int):
        self.rng = rng
        self.cfg = cfg
        self.index = index
        self.counter = 0

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.index}_{self.counter}"

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    def literal(self) -> Num:
        return Num(self.rng.randint(0, self.cfg.max_literal))

    # -- expressions
    def int_expr(self, scope: _Scope, depth: int = 0):
        r = self.rng.random()
        if self.cfg.has("binop") and depth < 2 and r < 0.35:
            op = self.rng.choice(list(BinOpKind))
            if op is BinOpKind.MUL:
                # a literal factor keeps values small across loop iterations
                return BinOp(op, self.int_expr(scope, depth + 1), self.literal())
            return BinOp(op, self.int_expr(scope, depth + 1), self.int_expr(scope, depth + 1))
        if scope.ints and r < 0.75:
            return self.rng.choice(scope.ints)
        return self.literal()

    def first_order(self, scope: _Scope) -> List[_Comp]:
        return [c for c in scope.comps if c.kinds == ("int",)]

    def callable(self, scope: _Scope) -> List[_Comp]:
        """Components whose component arguments can be supplied from ``scope``."""
        have_args = bool(self.first_order(scope))
        return [c for c in scope.comps if have_args or "comp" not in c.kinds]

    # -- statements
    def block(self, scope: _Scope, depth: int, in_comp: bool) -> Tuple:
        inner = scope.copy()
        out = []
        for _ in range(self.rng.randint(0, self.cfg.max_stmts)):
            out.extend(self.stmt(inner, depth, in_comp))
        return tuple(out)

    def stmt(self, scope: _Scope, depth: int, in_comp: bool, top: bool = False) -> List:
        cfg = self.cfg
        kinds = ["let", "let"]
        if scope.assignable:
            kinds += ["assign", "assign"]
        if depth < cfg.max_depth:
            kinds += [k for k in ("if", "while", "for") if cfg.has(k)]
        if cfg.has("compcall") and self.callable(scope):
            kinds += ["call", "call"]
        if top and not in_comp and cfg.has("compdef"):
            kinds += ["def", "def"]
        kind = self.rng.choice(kinds)
        if kind == "let":
            name = self.fresh("v")
            s = Let(name, self.int_expr(scope))
            scope.ints.append(Var(name))
            scope.assignable.append(name)
            return [s]
        if kind == "assign":
            return [Assign(self.rng.choice(scope.assignable), self.int_expr(scope))]
        if kind == "if":
            return [If(self.int_expr(scope), self.block(scope, depth + 1, in_comp),
                       self.block(scope, depth + 1, in_comp))]
        if kind == "while":
            i = self.fresh("i")
            scope.ints.append(Var(i))
            body = (Assign(i, BinOp(BinOpKind.SUB, Var(i), Num(1))),)
            body += self.block(scope, depth + 1, in_comp)
            return [Let(i, self.literal()), While(None, Var(i), body)]
        if kind == "for":
            lo = self.rng.randint(0, cfg.max_literal)
            hi = lo + self.rng.randint(0, cfg.max_literal)
            name = self.fresh("f")
            inner = scope.copy()
            inner.ints.append(Var(name))
            return [For(name, lo, hi, self.block(inner, depth + 1, in_comp))]
        if kind == "call":
            return [self.call(scope, self.rng.choice(self.callable(scope)))]
        return self.compdef(scope, depth)

    def call(self, scope: _Scope, comp: _Comp) -> CompCall:
        args = []
        for k in comp.kinds:
            if k == "int":
                args.append(self.int_expr(scope))
            else:
                args.append(self.rng.choice(self.first_order(scope)).ref)
        return CompCall(comp.ref, tuple(args))

    def compdef(self, scope: _Scope, depth: int) -> List:
        name = self.fresh("c")
        arity = self.rng.randint(0, 2)
        kinds = ["int"] * arity
        higher = arity > 0 and bool(self.first_order(scope)) and self.chance(0.6)
        if higher:
            kinds[self.rng.randrange(arity)] = "comp"
        params = [self.fresh("a") for _ in kinds]
        inner = scope.copy()
        for p, k in zip(params, kinds):
            if k == "int":
                inner.ints.append(Var(p))
                inner.assignable.append(p)
            else:
                inner.comps.append(_Comp(Var(p), ("int",)))
        body = []
        for p, k in zip(params, kinds):
            if k == "comp":
                body.append(self.call(inner, _Comp(Var(p), ("int",))))
        for _ in range(self.rng.randint(0, self.cfg.max_stmts)):
            body.extend(self.stmt(inner, depth + 1, in_comp=True))
        comp = _Comp(Var(name), tuple(kinds))
        out = [Let(name, CompDef(tuple(params), tuple(body)))]
        scope.comps.append(comp)
        if higher:
            # Parameter types come from call sites, so make sure there is one.
            out.append(self.call(scope, comp))
        return out

    # -- files
    def file(self, interfaces: Dict[str, _Interface], file_ids: List[str]):
        scope = _Scope()
        imports = []
        if self.cfg.has("import"):
            for fid in file_ids[self.index + 1:]:
                iface = interfaces[fid]
                if not self.chance(0.7):
                    continue
                if self.cfg.has("proj") and self.chance(0.5):
                    alias = self.fresh("m")
                    imports.append(ImportAll(alias, fid))
                    scope.ints.extend(Proj(alias, n) for n in iface.ints)
                    scope.comps.extend(_Comp(Proj(alias, n), k) for n, k in iface.comps)
                elif iface.names:
                    names = [n for n in iface.names if self.chance(0.7)] or iface.names[:1]
                    imports.append(ImportSelected(tuple(names), fid))
                    comps = dict(iface.comps)
                    for n in names:
                        if n in comps:
                            scope.comps.append(_Comp(Var(n), comps[n]))
                        else:
                            scope.ints.append(Var(n))
                            scope.assignable.append(n)
        stmts = []
        for _ in range(self.rng.randint(1, 2)):
            name = self.fresh("v")
            stmts.append(Let(name, self.literal()))
            scope.ints.append(Var(name))
            scope.assignable.append(name)
        for _ in range(self.rng.randint(1, self.cfg.max_stmts)):
            stmts.extend(self.stmt(scope, 0, in_comp=False, top=True))
        iface = _Interface()
        exports = []
        if self.cfg.has("export"):
            local_ints = [n for n in scope.assignable if n.startswith(f"v{self.index}_")]
            local_comps = [c for c in scope.comps
                           if isinstance(c.ref, Var) and c.ref.name.startswith(f"c{self.index}_")]
            for n in local_ints:
                if self.chance(0.5):
                    iface.ints.append(n)
            for c in local_comps:
                if self.chance(0.7):
                    iface.comps.append((c.ref.name, c.kinds))
            exports = [Export(n) for n in iface.names]
        return SourceFile(tuple(imports), tuple(stmts), tuple(exports)), iface


class GeneratedFiles(MemoryFileGetter):
    """In-memory file set that keeps the generated source text."""

    def program_text(self) -> Dict[str, str]:
        return dict(sorted(self.sources.items()))


_ATTEMPTS = 20
_ORACLE_FUEL = 1_000_000


def generate_program(cfg: GenConfig) -> Tuple[GeneratedFiles, str]:
    """Build a terminating, well-scoped program; the same config gives the same text.

    Programs are well formed by construction. Arithmetic can still leave
    the 64-bit range, so a candidate whose run overflows is replaced by
    one built from a derived seed.
    """
    for attempt in range(_ATTEMPTS):
        seed = cfg.seed if attempt == 0 else derive_seed(cfg.seed ^ 0x5EED, attempt)
        fg, entry = _build(cfg, random.Random(seed))
        try:
            run(fg, entry, fuel=_ORACLE_FUEL)
        except IntegerOverflow:
            continue
        except FuelExhausted:
            pass
        return fg, entry
    raise RuntimeError(f"no overflow-free program for seed {cfg.seed} in {_ATTEMPTS} attempts")


def _build(cfg: GenConfig, rng: random.Random) -> Tuple[GeneratedFiles, str]:
    n_files = rng.randint(1, cfg.max_files) if cfg.has("import") else 1
    file_ids = [ENTRY] + [f"/m{k}.jsx" for k in range(1, n_files)]
    interfaces: Dict[str, _Interface] = {}
    texts: Dict[str, str] = {}
    for k in reversed(range(n_files)):
        src, iface = _FileGen(rng, cfg, k).file(interfaces, file_ids)
        interfaces[file_ids[k]] = iface
        texts[file_ids[k]] = format_file(src)
    return GeneratedFiles(texts), ENTRY


# -- checking ------------------------------------------------------------------

@dataclass
class SoundnessVerdict:
    outcome: str
    machine_cost: Optional[int] = None
    type_cost: Optional[CostExpr] = None
    sigma: Optional[Dict[str, int]] = None
    instantiated: Optional[int] = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")

    @property
    def free_vars(self) -> FrozenSet[str]:
        return free_vars(self.type_cost) if self.type_cost is not None else frozenset()

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "machine_cost": self.machine_cost,
            "type_cost": None if self.type_cost is None else render(self.type_cost),
            "sigma": None if self.sigma is None else dict(sorted(self.sigma.items())),
            "instantiated": self.instantiated,
            "detail": self.detail,
        }


def check_soundness(fg: FileGetter, entry: str, fuel: int = 1_000_000,
                    bc: CostTable = DEFAULT_COSTS) -> SoundnessVerdict:
    try:
        result = run(fg, entry, bc, fuel=fuel)
    except FuelExhausted as exc:
        return SoundnessVerdict(NON_TERMINATING, detail=str(exc))
    except (ParseError, AmcostError) as exc:
        return SoundnessVerdict(MACHINE_ERROR, detail=str(exc))
    try:
        checked = infer(fg, entry, bc)
    except AmcostError as exc:
        kind = exc.kind if isinstance(exc, TypeCheckError) else type(exc).__name__
        return SoundnessVerdict(TYPE_ERROR, machine_cost=result.cost, detail=f"{kind}: {exc}")
    sigma = {while_var(lbl): result.loop_counts.get(lbl, 0) for lbl in checked.while_vars}
    missing = free_vars(checked.cost) - set(sigma)
    if missing:
        return SoundnessVerdict(TYPE_ERROR, machine_cost=result.cost, type_cost=checked.cost,
                                sigma=sigma, detail=f"no loop for variables {sorted(missing)}")
    bound = instantiate(checked.cost, sigma)
    outcome = HOLDS if result.cost <= bound else VIOLATED
    detail = "" if outcome == HOLDS else f"machine cost {result.cost} exceeds bound {bound}"
    return SoundnessVerdict(outcome, result.cost, checked.cost, sigma, bound, detail)


@dataclass
class CampaignSummary:
    holds: int = 0
    violated: int = 0
    nonterminating: int = 0
    errors: int = 0
    variable_free: int = 0
    violations: List[dict] = field(default_factory=list)
    lines: List[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.holds + self.violated + self.nonterminating + self.errors

    def to_json(self) -> dict:
        return {"count": self.total, "holds": self.holds, "violated": self.violated,
                "nonterminating": self.nonterminating, "errors": self.errors,
                "variable_free": self.variable_free, "violations": self.violations}


def soundness_campaign(cfg: GenConfig, count: int, fuel: int = 1_000_000,
                       bc: CostTable = DEFAULT_COSTS) -> CampaignSummary:
    """Generate and check ``count`` programs; one JSON line per program in ``lines``."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    summary = CampaignSummary()
    for i in range(count):
        item = replace(cfg, seed=derive_seed(cfg.seed, i))
        fg, entry = generate_program(item)
        v = check_soundness(fg, entry, fuel, bc)
        record = {"index": i, "seed": item.seed, **v.to_json()}
        if v.outcome == HOLDS:
            summary.holds += 1
            if not v.free_vars:
                summary.variable_free += 1
        elif v.outcome == VIOLATED:
            summary.violated += 1
        elif v.outcome == NON_TERMINATING:
            summary.nonterminating += 1
        else:
            summary.errors += 1
        if v.outcome != HOLDS:
            record["program"] = fg.program_text()
        if v.outcome == VIOLATED:
            summary.violations.append(record)
        summary.lines.append(json.dumps(record, sort_keys=True))
    return summary

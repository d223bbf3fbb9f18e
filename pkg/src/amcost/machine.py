"""Cost-instrumented abstract machine.

A configuration is the 6-tuple ``<instructions, fg, ls, es, vs, ss>``.
Stacks are persistent cons lists (``(head, tail)`` pairs, ``None`` for nil)
and the two stores are copied on write, so a :class:`Configuration` is a
value and :func:`step` never mutates its argument.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Mapping, Optional, Protocol, Tuple, Union

from .errors import (
    FinalState, FuelExhausted, ImportCycle, IntegerOverflow, MachineError, Stuck, UnresolvedFile,
)
from .parser import parse_file
from .syntax import (
    Assign, BinOp, BinOpKind, CompCall, CompDef, Export, FileId, For, If, ImportAll,
    ImportSelected, Let, Num, Proj, SourceFile, Var, While, WhileLabel,
)

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


# -- runtime values ----------------------------------------------------------

@dataclass(frozen=True)
class IntVal:
    value: int


@dataclass(frozen=True)
class ObjVal:
    fields: Tuple[Tuple[str, "Value"], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, "Value"]) -> "ObjVal":
        return cls(tuple(sorted(mapping.items())))

    def get(self, name: str) -> Optional["Value"]:
        for k, v in self.fields:
            if k == name:
                return v
        return None


@dataclass(frozen=True)
class Closure:
    params: Tuple[str, ...]
    body: tuple
    scope: FileId


Value = Union[IntVal, ObjVal, Closure]


# -- runtime-only instructions -----------------------------------------------

@dataclass(frozen=True)
class BinOpApply:
    op: BinOpKind


@dataclass(frozen=True)
class Branch:
    then: tuple
    orelse: tuple


@dataclass(frozen=True)
class WhilePrimed:
    label: Optional[WhileLabel]
    cond: object
    body: tuple


@dataclass(frozen=True)
class BindInstr:
    name: str


@dataclass(frozen=True)
class BindAll:
    name: str


@dataclass(frozen=True)
class BindSelected:
    name: str


@dataclass(frozen=True)
class EmptyExports:
    pass


@dataclass(frozen=True)
class PopScope:
    # set when this pop ends an import, so the file leaves the in-progress set
    finishes: Optional[FileId] = None


@dataclass(frozen=True)
class PushScope:
    scope: FileId


@dataclass(frozen=True)
class CompCallPrimed:
    args: tuple


# -- file getters ------------------------------------------------------------

class FileGetter(Protocol):
    def get(self, file_id: FileId) -> SourceFile:
        """Return the parsed file or raise :class:`UnresolvedFile`."""


class MemoryFileGetter:
    """Files held in memory, given as source text or already-parsed trees."""

    def __init__(self, files: Mapping[FileId, Union[str, SourceFile]]):
        self._files: Dict[FileId, SourceFile] = {}
        self.sources: Dict[FileId, str] = {}
        for fid, content in files.items():
            if isinstance(content, str):
                self.sources[fid] = content
            self._files[fid] = parse_file(content, fid) if isinstance(content, str) else content

    def get(self, file_id: FileId) -> SourceFile:
        try:
            return self._files[file_id]
        except KeyError:
            raise UnresolvedFile(file_id) from None

    def __contains__(self, file_id: FileId) -> bool:
        return file_id in self._files


class FsFileGetter:
    """Resolves ``/p.jsx`` to ``<root>/p.jsx``; parses once per id."""

    def __init__(self, root: Union[str, os.PathLike]):
        self.root = os.fspath(root)
        self._cache: Dict[FileId, SourceFile] = {}

    def path_of(self, file_id: FileId) -> str:
        return os.path.join(self.root, file_id.lstrip("/"))

    def get(self, file_id: FileId) -> SourceFile:
        if file_id in self._cache:
            return self._cache[file_id]
        path = self.path_of(file_id)
        if not file_id or not os.path.isfile(path):
            raise UnresolvedFile(file_id)
        with open(path, encoding="utf-8") as fh:
            src = parse_file(fh.read(), file_id)
        self._cache[file_id] = src
        return src


# -- cost table --------------------------------------------------------------

@dataclass(frozen=True)
class CostTable:
    add: int = 0
    sub: int = 0
    mul: int = 0

    def __post_init__(self) -> None:
        for k in ("add", "sub", "mul"):
            if getattr(self, k) < 0:
                raise ValueError(f"binary operator cost must be nonnegative: {k}")

    def __call__(self, op: BinOpKind) -> int:
        return getattr(self, op.key)

    @classmethod
    def from_mapping(cls, data: Mapping[str, int]) -> "CostTable":
        unknown = set(data) - {"add", "sub", "mul"}
        if unknown:
            raise ValueError(f"unknown cost-table keys: {sorted(unknown)}")
        return cls(**{k: int(v) for k, v in data.items()})

    @classmethod
    def load(cls, path: str) -> "CostTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))


DEFAULT_COSTS = CostTable()


# -- configuration -----------------------------------------------------------

def push_all(items: Iterable, stack):
    """Push ``items`` so that the first item ends up on top."""
    for x in reversed(tuple(items)):
        stack = (x, stack)
    return stack


def iter_stack(stack):
    while stack is not None:
        yield stack[0]
        stack = stack[1]


@dataclass(frozen=True)
class Configuration:
    instructions: object
    fg: FileGetter = field(repr=False)
    ls: Mapping[Tuple[FileId, str], Value]
    es: Mapping[str, Value]
    vs: object
    ss: object
    # bookkeeping beyond the 6-tuple: files whose import has not finished
    importing: frozenset = frozenset()

    @property
    def is_final(self) -> bool:
        return self.instructions is None

    def instruction_list(self) -> list:
        return list(iter_stack(self.instructions))

    def value_list(self) -> list:
        return list(iter_stack(self.vs))

    def scope_list(self) -> list:
        return list(iter_stack(self.ss))


def initial_config(fg: FileGetter, entry: FileId) -> Configuration:
    src = fg.get(entry)
    return Configuration((src, None), fg, {}, {}, None, (entry, None), frozenset({entry}))


def _replace(c: Configuration, **kw) -> Configuration:
    d = dict(instructions=c.instructions, fg=c.fg, ls=c.ls, es=c.es, vs=c.vs,
             ss=c.ss, importing=c.importing)
    d.update(kw)
    return Configuration(**d)


def _top_scope(c: Configuration, what: str) -> FileId:
    if c.ss is None:
        raise Stuck(f"{what} with an empty scope stack")
    return c.ss[0]


def _pop_value(c: Configuration, what: str):
    if c.vs is None:
        raise Stuck(f"{what} with an empty value stack")
    return c.vs


def _truth(v: Value, what: str) -> bool:
    if not isinstance(v, IntVal):
        raise Stuck(f"{what} on a non-integer value")
    return v.value != 0


def step(c: Configuration, bc: CostTable = DEFAULT_COSTS) -> Tuple[Configuration, int, str]:
    """Fire the single reduction rule matching ``c``.

    Returns the successor configuration, the rule's cost and its name.
    """
    if c.instructions is None:
        raise FinalState()
    instr, rest = c.instructions

    if isinstance(instr, SourceFile):
        body = (*instr.imports, *instr.stmts, *instr.exports)
        return _replace(c, instructions=push_all(body, rest)), 0, "R-SrcFile"

    # expressions
    if isinstance(instr, Num):
        return _replace(c, instructions=rest, vs=(IntVal(instr.value), c.vs)), 0, "R-Num"
    if isinstance(instr, BinOp):
        todo = push_all((instr.left, instr.right, BinOpApply(instr.op)), rest)
        return _replace(c, instructions=todo), 0, "R-BinOp1"
    if isinstance(instr, BinOpApply):
        top = _pop_value(c, "binary operator")
        v2, below = top
        if below is None:
            raise Stuck("binary operator with one operand")
        v1, vs = below
        if not (isinstance(v1, IntVal) and isinstance(v2, IntVal)):
            raise Stuck(f"binary operator {instr.op.value} on a non-integer value")
        result = instr.op.apply(v1.value, v2.value)
        if not INT_MIN <= result <= INT_MAX:
            raise IntegerOverflow(f"integer overflow in {v1.value} {instr.op.value} {v2.value}")
        return _replace(c, instructions=rest, vs=(IntVal(result), vs)), bc(instr.op), "R-BinOp2"
    if isinstance(instr, Var):
        s = _top_scope(c, "variable lookup")
        try:
            v = c.ls[(s, instr.name)]
        except KeyError:
            raise Stuck(f"unbound variable {instr.name} in scope {s}") from None
        return _replace(c, instructions=rest, vs=(v, c.vs)), 0, "R-Var"
    if isinstance(instr, Proj):
        s = _top_scope(c, "projection")
        obj = c.ls.get((s, instr.record))
        if not isinstance(obj, ObjVal):
            raise Stuck(f"projection on non-object {instr.record} in scope {s}")
        v = obj.get(instr.field)
        if v is None:
            raise Stuck(f"object {instr.record} has no field {instr.field}")
        return _replace(c, instructions=rest, vs=(v, c.vs)), 0, "R-Proj"
    if isinstance(instr, CompDef):
        s = _top_scope(c, "component definition")
        clo = Closure(instr.params, instr.body, s)
        return _replace(c, instructions=rest, vs=(clo, c.vs)), 0, "R-CompDef"

    # statements
    if isinstance(instr, If):
        todo = push_all((instr.cond, Branch(instr.then, instr.orelse)), rest)
        return _replace(c, instructions=todo), 0, "R-If"
    if isinstance(instr, Branch):
        v, vs = _pop_value(c, "branch")
        if _truth(v, "branch"):
            return _replace(c, instructions=push_all(instr.then, rest), vs=vs), 0, "R-IfTrue"
        return _replace(c, instructions=push_all(instr.orelse, rest), vs=vs), 0, "R-IfFalse"
    if isinstance(instr, While):
        todo = push_all((instr.cond, WhilePrimed(instr.label, instr.cond, instr.body)), rest)
        return _replace(c, instructions=todo), 0, "R-While"
    if isinstance(instr, WhilePrimed):
        v, vs = _pop_value(c, "while condition")
        if _truth(v, "while condition"):
            todo = push_all((*instr.body, instr.cond, instr), rest)
            return _replace(c, instructions=todo, vs=vs), 0, "R-WhileTrue"
        return _replace(c, instructions=rest, vs=vs), 0, "R-WhileFalse"
    if isinstance(instr, Let):
        todo = push_all((instr.expr, BindInstr(instr.name)), rest)
        return _replace(c, instructions=todo), 0, "R-Let"
    if isinstance(instr, Assign):
        todo = push_all((instr.expr, BindInstr(instr.name)), rest)
        return _replace(c, instructions=todo), 0, "R-Assign"
    if isinstance(instr, BindInstr):
        v, vs = _pop_value(c, "bind")
        s = _top_scope(c, "bind")
        ls = dict(c.ls)
        ls[(s, instr.name)] = v
        return _replace(c, instructions=rest, ls=ls, vs=vs), 1, "R-Bind"
    if isinstance(instr, For):
        if instr.start > instr.stop:
            raise Stuck(f"for-loop bounds inverted ({instr.start} > {instr.stop})")
        unrolled = []
        for n in range(instr.start, instr.stop + 1):
            unrolled.append(Let(instr.name, Num(n)))
            unrolled.extend(instr.body)
        return _replace(c, instructions=push_all(unrolled, rest)), 0, "R-For"
    if isinstance(instr, CompCall):
        todo = push_all((instr.callee, CompCallPrimed(instr.args)), rest)
        return _replace(c, instructions=todo), 0, "R-CompCall"
    if isinstance(instr, CompCallPrimed):
        clo, vs = _pop_value(c, "component call")
        if not isinstance(clo, Closure):
            raise Stuck("component call on a non-component value")
        if len(clo.params) != len(instr.args):
            raise Stuck(f"component expects {len(clo.params)} arguments, got {len(instr.args)}")
        todo = push_all(
            (*instr.args, PushScope(clo.scope), *(BindInstr(p) for p in reversed(clo.params)),
             *clo.body, PopScope()),
            rest,
        )
        return _replace(c, instructions=todo, vs=vs), 0, "R-CompCallPrime"

    # imports, exports and scopes
    if isinstance(instr, (ImportAll, ImportSelected)):
        f = instr.file
        if f in c.importing:
            raise ImportCycle(f, [s for s in reversed(c.scope_list())])
        src = c.fg.get(f)
        if isinstance(instr, ImportAll):
            binds = (BindAll(instr.alias),)
            rule = "R-ImportAll"
        else:
            binds = tuple(BindSelected(n) for n in instr.names)
            rule = "R-ImportSelected"
        todo = push_all((src, PopScope(finishes=f), *binds, EmptyExports()), rest)
        return (_replace(c, instructions=todo, ss=(f, c.ss), importing=c.importing | {f}),
                2, rule)
    if isinstance(instr, PopScope):
        if c.ss is None:
            raise Stuck("pop of an empty scope stack")
        importing = c.importing - {instr.finishes} if instr.finishes else c.importing
        return _replace(c, instructions=rest, ss=c.ss[1], importing=importing), 0, "R-PopScope"
    if isinstance(instr, PushScope):
        return _replace(c, instructions=rest, ss=(instr.scope, c.ss)), 0, "R-PushScope"
    if isinstance(instr, EmptyExports):
        return _replace(c, instructions=rest, es={}), 0, "R-EmptyExports"
    if isinstance(instr, BindAll):
        s = _top_scope(c, "bind-all")
        ls = dict(c.ls)
        ls[(s, instr.name)] = ObjVal.of(c.es)
        return _replace(c, instructions=rest, ls=ls), 1, "R-BindAll"
    if isinstance(instr, BindSelected):
        s = _top_scope(c, "bind-selected")
        if instr.name not in c.es:
            raise Stuck(f"imported name {instr.name} is not exported")
        ls = dict(c.ls)
        ls[(s, instr.name)] = c.es[instr.name]
        return _replace(c, instructions=rest, ls=ls), 1, "R-BindSelected"
    if isinstance(instr, Export):
        s = _top_scope(c, "export")
        try:
            v = c.ls[(s, instr.name)]
        except KeyError:
            raise Stuck(f"export of unbound variable {instr.name} in scope {s}") from None
        es = dict(c.es)
        es[instr.name] = v
        return _replace(c, instructions=rest, es=es), 1, "R-Export"

    raise Stuck(f"no rule for instruction {instr!r}")


# -- running -----------------------------------------------------------------

@dataclass
class RunResult:
    cost: int
    trace: list
    locals: dict
    exports: dict
    loop_counts: dict
    steps: int
    final_scopes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "cost": self.cost,
            "steps": self.steps,
            "trace": list(self.trace),
            "locals": [
                {"scope": s, "name": n, "value": value_to_json(v)}
                for (s, n), v in sorted(self.locals.items())
            ],
            "exports": {k: value_to_json(v) for k, v in sorted(self.exports.items())},
            "loop_counts": [
                {"file": lbl.file, "index": lbl.index, "count": n}
                for lbl, n in sorted(self.loop_counts.items(), key=lambda kv: (kv[0].file, kv[0].index))
            ],
            "final_scopes": list(self.final_scopes),
        }


def value_to_json(v: Value):
    if isinstance(v, IntVal):
        return v.value
    if isinstance(v, ObjVal):
        return {"object": {k: value_to_json(x) for k, x in v.fields}}
    from .parser import format_stmt
    return {"closure": {"params": list(v.params), "scope": v.scope,
                        "body": [format_stmt(s) for s in v.body]}}


def run(fg: FileGetter, entry: FileId, bc: CostTable = DEFAULT_COSTS,
        fuel: int = 1_000_000,
        on_step: Optional[Callable[[Configuration, int, str], None]] = None) -> RunResult:
    """Run ``entry`` to a final state, spending at most ``fuel`` steps.

    Errors raised along the way carry the run so far on ``.partial``.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    c = initial_config(fg, entry)
    cost = 0
    trace = []
    loop_counts: Dict[WhileLabel, int] = {}

    def partial():
        return RunResult(cost, trace, dict(c.ls), dict(c.es), dict(loop_counts),
                         len(trace), c.scope_list())

    while c.instructions is not None:
        if len(trace) >= fuel:
            raise FuelExhausted(fuel, partial())
        top = c.instructions[0]
        try:
            c2, k, rule = step(c, bc)
        except MachineError as exc:
            exc.partial = partial()
            raise
        except (UnresolvedFile, ImportCycle) as exc:
            exc.partial = partial()
            raise
        if rule == "R-WhileTrue" and top.label is not None:
            loop_counts[top.label] = loop_counts.get(top.label, 0) + 1
        c = c2
        cost += k
        trace.append(rule)
        if on_step is not None:
            on_step(c, k, rule)
    return partial()

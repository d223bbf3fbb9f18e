"""Abstract syntax of the JSX subset.

Nodes are frozen dataclasses holding tuples, so trees are hashable and
compare structurally. Source positions ride along on ``pos`` but are
excluded from equality.
"""
from __future__ import annotations

import dataclasses
import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

Pos = Optional[Tuple[int, int]]

FileId = str


def is_identifier(name: str) -> bool:
    return bool(IDENT_RE.match(name))


def numeral_value(digits: str) -> int:
    """Numeral to number. Numerals are plain decimal digit strings."""
    if not digits.isdigit():
        raise ValueError(f"not a numeral: {digits!r}")
    return int(digits)


def numeral_of(value: int) -> str:
    """Inverse of :func:`numeral_value` on the naturals."""
    if value < 0:
        raise ValueError(f"numerals are nonnegative, got {value}")
    return str(value)


class BinOpKind(enum.Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"

    @property
    def key(self) -> str:
        return self.name.lower()

    def apply(self, a: int, b: int) -> int:
        if self is BinOpKind.ADD:
            return a + b
        if self is BinOpKind.SUB:
            return a - b
        return a * b


@dataclass(frozen=True)
class WhileLabel:
    file: FileId
    index: int

    def __str__(self) -> str:
        return f"{self.file}:{self.index}"


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: BinOpKind
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Proj:
    record: str
    field: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CompDef:
    params: Tuple[str, ...]
    body: Tuple["Stmt", ...]
    pos: Pos = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"duplicate component parameters: {self.params}")


Expr = Union[Num, Var, BinOp, Proj, CompDef]


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Let:
    name: str
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    label: Optional[WhileLabel]
    cond: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class For:
    name: str
    start: int
    stop: int
    body: Tuple["Stmt", ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CompCall:
    callee: Expr
    args: Tuple[Expr, ...]
    pos: Pos = field(default=None, compare=False, repr=False)


Stmt = Union[Let, Assign, If, While, For, CompCall]


# -- file level --------------------------------------------------------------

@dataclass(frozen=True)
class ImportAll:
    alias: str
    file: FileId
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ImportSelected:
    names: Tuple[str, ...]
    file: FileId
    pos: Pos = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("selective import needs at least one name")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate imported names: {self.names}")


ImportDecl = Union[ImportAll, ImportSelected]


@dataclass(frozen=True)
class Export:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SourceFile:
    imports: Tuple[ImportDecl, ...] = ()
    stmts: Tuple[Stmt, ...] = ()
    exports: Tuple[Export, ...] = ()


# -- while labelling ---------------------------------------------------------

def preorder_while_labels(src: SourceFile, file_id: FileId) -> SourceFile:
    """Number every ``While`` of ``src`` in preorder as ``(file_id, k)``.

    Labels link a loop's type variable to the machine's iteration count,
    so the numbering must be a pure function of the tree shape.
    """
    counter = [0]

    def label_stmts(stmts):
        return tuple(label_stmt(s) for s in stmts)

    def label_expr(e):
        if isinstance(e, CompDef):
            return dataclasses.replace(e, body=label_stmts(e.body))
        if isinstance(e, BinOp):
            return dataclasses.replace(e, left=label_expr(e.left), right=label_expr(e.right))
        return e

    def label_stmt(s):
        if isinstance(s, While):
            lbl = WhileLabel(file_id, counter[0])
            counter[0] += 1
            cond = label_expr(s.cond)
            return dataclasses.replace(s, label=lbl, cond=cond, body=label_stmts(s.body))
        if isinstance(s, (Let, Assign)):
            return dataclasses.replace(s, expr=label_expr(s.expr))
        if isinstance(s, If):
            cond = label_expr(s.cond)
            then = label_stmts(s.then)
            return dataclasses.replace(s, cond=cond, then=then, orelse=label_stmts(s.orelse))
        if isinstance(s, For):
            return dataclasses.replace(s, body=label_stmts(s.body))
        if isinstance(s, CompCall):
            callee = label_expr(s.callee)
            return dataclasses.replace(s, callee=callee, args=tuple(label_expr(a) for a in s.args))
        raise TypeError(f"not a statement: {s!r}")

    return dataclasses.replace(src, stmts=label_stmts(src.stmts))


def iter_whiles(src: SourceFile):
    """Yield the file's ``While`` nodes in preorder."""

    def walk_expr(e):
        if isinstance(e, CompDef):
            yield from walk(e.body)
        elif isinstance(e, BinOp):
            yield from walk_expr(e.left)
            yield from walk_expr(e.right)

    def walk(stmts):
        for s in stmts:
            if isinstance(s, While):
                yield s
                yield from walk_expr(s.cond)
                yield from walk(s.body)
            elif isinstance(s, (Let, Assign)):
                yield from walk_expr(s.expr)
            elif isinstance(s, If):
                yield from walk_expr(s.cond)
                yield from walk(s.then)
                yield from walk(s.orelse)
            elif isinstance(s, For):
                yield from walk(s.body)
            elif isinstance(s, CompCall):
                yield from walk_expr(s.callee)
                for a in s.args:
                    yield from walk_expr(a)

    yield from walk(src.stmts)

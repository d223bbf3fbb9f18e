"""Cost expressions, types, their canonical forms and the lub order.

Cost expressions are built from naturals and variables with ``+``, ``*``
and ``max`` (written ``↑`` in rule notation). Every expression denotes a
monotone function of its variables over the naturals, which is what makes
the canonical form below sound:

* ``*`` and ``+`` distribute over ``max``,
* ``*`` distributes over ``+``,

so an expression is equivalent to a max of polynomials with natural
coefficients. A polynomial that is coefficient-wise below another one in
the same max can never win and is dropped. The surviving antichain, sorted,
is the canonical form.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple, Union

from .errors import CostSyntaxError, ShapeMismatch, UnboundVar


# -- cost expressions --------------------------------------------------------

class CostExpr:
    __slots__ = ()

    def __add__(self, other: "CostExpr") -> "CostExpr":
        return AddC(self, _coerce(other))

    def __radd__(self, other) -> "CostExpr":
        return AddC(_coerce(other), self)

    def __mul__(self, other: "CostExpr") -> "CostExpr":
        return MulC(self, _coerce(other))

    def __rmul__(self, other) -> "CostExpr":
        return MulC(_coerce(other), self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, repr=False)
class NumC(CostExpr):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("cost constants are naturals")

    def __repr__(self):
        return f"NumC({self.value})"


@dataclass(frozen=True, repr=False)
class VarC(CostExpr):
    name: str

    def __repr__(self):
        return f"VarC({self.name!r})"


@dataclass(frozen=True, repr=False)
class AddC(CostExpr):
    left: CostExpr
    right: CostExpr

    def __repr__(self):
        return f"AddC({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class MulC(CostExpr):
    left: CostExpr
    right: CostExpr

    def __repr__(self):
        return f"MulC({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class MaxC(CostExpr):
    left: CostExpr
    right: CostExpr

    def __repr__(self):
        return f"MaxC({self.left!r}, {self.right!r})"


ZERO = NumC(0)
ONE = NumC(1)


def _coerce(x) -> CostExpr:
    if isinstance(x, CostExpr):
        return x
    if isinstance(x, int):
        return NumC(x)
    raise TypeError(f"cannot use {x!r} as a cost expression")


def cmax(*ts) -> CostExpr:
    if not ts:
        raise ValueError("cmax of nothing")
    out = _coerce(ts[0])
    for t in ts[1:]:
        out = MaxC(out, _coerce(t))
    return out


def csum(ts: Iterable) -> CostExpr:
    out = None
    for t in ts:
        out = _coerce(t) if out is None else AddC(out, _coerce(t))
    return ZERO if out is None else out


# -- polynomial view ---------------------------------------------------------

Monomial = Tuple[str, ...]          # sorted multiset of variable names
Poly = Tuple[Tuple[Monomial, int], ...]


def _poly(d: Mapping[Monomial, int]) -> Poly:
    return tuple(sorted(((m, c) for m, c in d.items() if c), key=_term_key))


def _term_key(term):
    mono, _ = term
    # higher degree first, constant last, then lexicographic on names
    return (-len(mono), mono)


def _padd(p: Poly, q: Poly) -> Poly:
    d = dict(p)
    for m, c in q:
        d[m] = d.get(m, 0) + c
    return _poly(d)


def _pmul(p: Poly, q: Poly) -> Poly:
    d: Dict[Monomial, int] = {}
    for m1, c1 in p:
        for m2, c2 in q:
            m = tuple(sorted(m1 + m2))
            d[m] = d.get(m, 0) + c1 * c2
    return _poly(d)


def _dominated(p: Poly, q: Poly) -> bool:
    """Coefficient-wise ``p <= q``; implies ``p <= q`` pointwise on naturals."""
    dq = dict(q)
    return all(dq.get(m, 0) >= c for m, c in p)


def _prune(polys: Iterable[Poly]) -> Tuple[Poly, ...]:
    uniq = sorted(set(polys), key=_poly_key)
    keep = []
    for i, p in enumerate(uniq):
        if any(j != i and _dominated(p, q) for j, q in enumerate(uniq)):
            continue
        keep.append(p)
    return tuple(keep)


def _poly_key(p: Poly):
    return tuple((-len(m), m, -c) for m, c in p)


@functools.lru_cache(maxsize=1 << 16)
def to_polys(t: CostExpr) -> Tuple[Poly, ...]:
    """The canonical antichain of polynomials whose max equals ``t``."""
    if isinstance(t, NumC):
        return (_poly({(): t.value}),)
    if isinstance(t, VarC):
        return (((t.name,), 1),),
    if isinstance(t, AddC):
        a, b = to_polys(t.left), to_polys(t.right)
        return _prune(_padd(p, q) for p in a for q in b)
    if isinstance(t, MulC):
        a, b = to_polys(t.left), to_polys(t.right)
        return _prune(_pmul(p, q) for p in a for q in b)
    if isinstance(t, MaxC):
        return _prune(to_polys(t.left) + to_polys(t.right))
    raise TypeError(f"not a cost expression: {t!r}")


def _mono_expr(m: Monomial, c: int) -> CostExpr:
    if not m:
        return NumC(c)
    out = None if c == 1 else NumC(c)
    for name in m:
        out = VarC(name) if out is None else MulC(out, VarC(name))
    return out


def _poly_expr(p: Poly) -> CostExpr:
    if not p:
        return ZERO
    return csum(_mono_expr(m, c) for m, c in p)


def from_polys(polys: Sequence[Poly]) -> CostExpr:
    return cmax(*(_poly_expr(p) for p in polys))


def normalize(t: CostExpr) -> CostExpr:
    """Canonical representative of ``t``; idempotent."""
    return from_polys(to_polys(t))


def is_canonical(t: CostExpr) -> bool:
    return normalize(t) == t


# -- evaluation and variables ------------------------------------------------

def cost_vars(t: CostExpr) -> FrozenSet[str]:
    if isinstance(t, NumC):
        return frozenset()
    if isinstance(t, VarC):
        return frozenset((t.name,))
    return cost_vars(t.left) | cost_vars(t.right)


def instantiate(t: CostExpr, sigma: Mapping[str, int]) -> int:
    """Evaluate ``t`` over the naturals with variables read from ``sigma``."""
    missing = cost_vars(t) - set(sigma)
    if missing:
        raise UnboundVar(missing)
    return _eval(t, sigma)


def _eval(t: CostExpr, sigma) -> int:
    if isinstance(t, NumC):
        return t.value
    if isinstance(t, VarC):
        v = sigma[t.name]
        if v < 0:
            raise ValueError(f"sigma must map to naturals: {t.name} = {v}")
        return v
    a, b = _eval(t.left, sigma), _eval(t.right, sigma)
    if isinstance(t, AddC):
        return a + b
    if isinstance(t, MulC):
        return a * b
    return max(a, b)


def subst_cost(t: CostExpr, mapping: Mapping[str, CostExpr]) -> CostExpr:
    if isinstance(t, NumC):
        return t
    if isinstance(t, VarC):
        return mapping.get(t.name, t)
    return type(t)(subst_cost(t.left, mapping), subst_cost(t.right, mapping))


# -- types -------------------------------------------------------------------

class Type:
    __slots__ = ()

    def __str__(self) -> str:
        return render_type(self)


@dataclass(frozen=True)
class Cost(Type):
    expr: CostExpr

    @classmethod
    def of(cls, x) -> "Cost":
        return cls(_coerce(x))


@dataclass(frozen=True)
class Arrow(Type):
    params: Tuple[Type, ...]
    result: Type


@dataclass(frozen=True)
class Record(Type):
    fields: Tuple[Tuple[str, Type], ...] = ()

    def __post_init__(self):
        names = [k for k, _ in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate record fields: {names}")
        if names != sorted(names):
            object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda kv: kv[0])))

    @classmethod
    def of(cls, mapping: Mapping[str, Type]) -> "Record":
        return cls(tuple(sorted(mapping.items(), key=lambda kv: kv[0])))

    def as_dict(self) -> Dict[str, Type]:
        return dict(self.fields)

    def get(self, name: str):
        for k, t in self.fields:
            if k == name:
                return t
        return None

    def with_field(self, name: str, t: Type) -> "Record":
        d = self.as_dict()
        d[name] = t
        return Record.of(d)

    def keys(self):
        return [k for k, _ in self.fields]


COST_ZERO = Cost(ZERO)


def is_structured(t: Type) -> bool:
    """Arrow and record types; the side conditions split on this."""
    return isinstance(t, (Arrow, Record))


def normalize_type(t: Type) -> Type:
    if isinstance(t, Cost):
        return Cost(normalize(t.expr))
    if isinstance(t, Arrow):
        return Arrow(tuple(normalize_type(p) for p in t.params), normalize_type(t.result))
    if isinstance(t, Record):
        return Record(tuple((k, normalize_type(v)) for k, v in t.fields))
    raise TypeError(f"not a type: {t!r}")


def free_vars(t) -> FrozenSet[str]:
    if isinstance(t, CostExpr):
        return cost_vars(t)
    if isinstance(t, Cost):
        return cost_vars(t.expr)
    if isinstance(t, Arrow):
        out = free_vars(t.result)
        for p in t.params:
            out |= free_vars(p)
        return out
    if isinstance(t, Record):
        out = frozenset()
        for _, v in t.fields:
            out |= free_vars(v)
        return out
    raise TypeError(f"not a type: {t!r}")


def subst_type(t: Type, mapping: Mapping[str, CostExpr]) -> Type:
    if isinstance(t, Cost):
        return Cost(subst_cost(t.expr, mapping))
    if isinstance(t, Arrow):
        return Arrow(tuple(subst_type(p, mapping) for p in t.params), subst_type(t.result, mapping))
    return Record(tuple((k, subst_type(v, mapping)) for k, v in t.fields))


def _is_zero(t: Type) -> bool:
    return isinstance(t, Cost) and normalize(t.expr) == ZERO


def lub(ts: Iterable[Type]) -> Type:
    """Least upper bound, normalized.

    ``0`` is below every type, so zero costs are absorbed by arrows and
    records as well as by costs.
    """
    ts = list(ts)
    if not ts:
        raise ValueError("lub of an empty set")
    if any(not isinstance(t, Cost) for t in ts):
        ts = [t for t in ts if not _is_zero(t)]
    kinds = {type(t) for t in ts}
    if len(kinds) > 1:
        raise ShapeMismatch("cannot join types of different shapes: "
                            + ", ".join(sorted(render_type(t) for t in ts)))
    kind = kinds.pop()
    if kind is Cost:
        return Cost(normalize(cmax(*(t.expr for t in ts))))
    if kind is Arrow:
        arity = {len(t.params) for t in ts}
        if len(arity) > 1:
            raise ShapeMismatch(f"component arities differ: {sorted(arity)}")
        params = [tuple(normalize_type(p) for p in t.params) for t in ts]
        if any(p != params[0] for p in params[1:]):
            raise ShapeMismatch("component parameter types differ")
        return Arrow(params[0], lub(t.result for t in ts))
    if kind is Record:
        keys = {tuple(t.keys()) for t in ts}
        if len(keys) > 1:
            raise ShapeMismatch("record fields differ")
        return Record(tuple((k, lub(t.get(k) for t in ts)) for k in ts[0].keys()))
    raise TypeError(f"not a type: {ts[0]!r}")


def leq(a: Type, b: Type) -> bool:
    """``a ⊑ b`` iff ``a ⊔ b`` is ``b`` (after normalization)."""
    if _is_zero(a):
        return True
    try:
        return lub([a, b]) == normalize_type(b)
    except ShapeMismatch:
        return False


def leq_cost(a, b) -> bool:
    return leq(Cost.of(a), Cost.of(b))


# -- type environments -------------------------------------------------------

@dataclass(frozen=True)
class TypeEnv:
    """Identifier bindings plus the exports slot ``eps``."""

    bindings: Tuple[Tuple[str, Type], ...] = ()
    eps: Record = Record()

    @classmethod
    def of(cls, mapping: Mapping[str, Type] = None, eps: Record = None) -> "TypeEnv":
        mapping = mapping or {}
        return cls(tuple(sorted(mapping.items(), key=lambda kv: kv[0])), eps or Record())

    def as_dict(self) -> Dict[str, Type]:
        return dict(self.bindings)

    def get(self, name: str):
        for k, t in self.bindings:
            if k == name:
                return t
        return None

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def bind(self, name: str, t: Type) -> "TypeEnv":
        d = self.as_dict()
        d[name] = t
        return TypeEnv.of(d, self.eps)

    def with_eps(self, eps: Record) -> "TypeEnv":
        return TypeEnv(self.bindings, eps)


def _merge_records(recs: Sequence[Record]) -> Record:
    keys = sorted({k for r in recs for k in r.keys()})
    return Record(tuple((k, lub(r.get(k) for r in recs if r.get(k) is not None)) for k in keys))


def lub_env(envs: Iterable[TypeEnv]) -> TypeEnv:
    """Pointwise lub; a name bound in only some members keeps those bindings."""
    envs = list(envs)
    if not envs:
        raise ValueError("lub of an empty set of environments")
    names = sorted({k for e in envs for k, _ in e.bindings})
    bindings = {n: lub(e.get(n) for e in envs if e.get(n) is not None) for n in names}
    return TypeEnv.of(bindings, _merge_records([e.eps for e in envs]))


# -- rendering ---------------------------------------------------------------

def render(t: CostExpr, explicit: bool = False) -> str:
    """Render a cost expression.

    Left-nested sums and products print flat; other nesting gets
    parentheses, so :func:`parse_cost` gives back the same tree. With
    ``explicit`` every compound sum or product is parenthesized.
    """
    if isinstance(t, NumC):
        return str(t.value)
    if isinstance(t, VarC):
        return t.name
    if isinstance(t, MaxC):
        parts = []
        node = t
        while isinstance(node, MaxC):
            parts.append(node.right)
            node = node.left
        parts.append(node)
        return "max(" + ", ".join(render(p, explicit) for p in reversed(parts)) + ")"
    if explicit:
        op = " + " if isinstance(t, AddC) else " * "
        return "(" + render(t.left, True) + op + render(t.right, True) + ")"
    if isinstance(t, AddC):
        right = render(t.right)
        if isinstance(t.right, AddC):
            right = f"({right})"
        return f"{render(t.left)} + {right}"
    left, right = render(t.left), render(t.right)
    if isinstance(t.left, AddC):
        left = f"({left})"
    if isinstance(t.right, (AddC, MulC)):
        right = f"({right})"
    return f"{left} * {right}"


def render_type(t: Type, explicit: bool = False) -> str:
    if isinstance(t, Cost):
        return render(t.expr, explicit)
    if isinstance(t, Arrow):
        parts = [render_type(p, explicit) for p in t.params] + [render_type(t.result, explicit)]
        if not t.params:
            return f"(→ {parts[0]})"
        return "(" + " → ".join(parts) + ")"
    if isinstance(t, Record):
        return "{" + ", ".join(f"{k}: {render_type(v, explicit)}" for k, v in t.fields) + "}"
    raise TypeError(f"not a type: {t!r}")


# -- parsing -----------------------------------------------------------------

_COST_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>[0-9]+)
  | (?P<max>max(?=\s*\())
  | (?P<name>[A-Za-z_](?:[A-Za-z0-9_/.]|:(?=\S)|-(?!>))*)
  | (?P<arrow>→|->)
  | (?P<punct>[-+*(),{}:↑·])
""", re.VERBOSE)


def _lex(text: str) -> List[Tuple[str, str]]:
    out = []
    i = 0
    while i < len(text):
        m = _COST_TOKEN.match(text, i)
        if m is None:
            raise CostSyntaxError(f"bad character {text[i]!r} at offset {i} in {text!r}")
        if m.lastgroup != "ws":
            kind = m.lastgroup
            val = m.group()
            if kind == "punct" and val == "·":
                val = "*"
            out.append((kind, val))
        i = m.end()
    out.append(("eof", ""))
    return out


class _TypeParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def eat(self, val: str):
        kind, v = self.peek()
        if v != val:
            raise CostSyntaxError(f"expected {val!r} but found {v or 'end'!r} in {self.text!r}")
        self.i += 1

    def done(self):
        if self.peek()[0] != "eof":
            raise CostSyntaxError(f"trailing input {self.peek()[1]!r} in {self.text!r}")

    # cost := maxterm { "↑" maxterm } ; maxterm := term { "+" term }
    def cost(self) -> CostExpr:
        left = self.sum()
        while self.peek()[1] == "↑":
            self.i += 1
            left = MaxC(left, self.sum())
        return left

    def sum(self) -> CostExpr:
        left = self.product()
        while self.peek()[1] == "+":
            self.i += 1
            left = AddC(left, self.product())
        return left

    def product(self) -> CostExpr:
        left = self.atom()
        while self.peek()[1] == "*":
            self.i += 1
            left = MulC(left, self.atom())
        return left

    def atom(self) -> CostExpr:
        kind, val = self.peek()
        if kind == "num":
            self.i += 1
            return NumC(int(val))
        if kind == "name":
            self.i += 1
            return VarC(val)
        if kind == "max":
            self.i += 1
            self.eat("(")
            out = self.cost()
            while self.peek()[1] == ",":
                self.i += 1
                out = MaxC(out, self.cost())
            self.eat(")")
            return out
        if val == "(":
            self.i += 1
            out = self.cost()
            self.eat(")")
            return out
        raise CostSyntaxError(f"unexpected {val or 'end'!r} in {self.text!r}")

    def type(self) -> Type:
        kind, val = self.peek()
        if val == "{":
            self.i += 1
            fields = []
            while self.peek()[1] != "}":
                k, name = self.peek()
                if k not in ("name", "max"):
                    raise CostSyntaxError(f"expected field name in {self.text!r}")
                self.i += 1
                self.eat(":")
                fields.append((name, self.type()))
                if self.peek()[1] == ",":
                    self.i += 1
            self.eat("}")
            return Record.of(dict(fields))
        if val == "(":
            save = self.i
            arrow = self._try_arrow()
            if arrow is not None:
                return arrow
            self.i = save
        return Cost(self.cost())

    def _try_arrow(self):
        self.i += 1
        parts = []
        if self.peek()[0] == "arrow":
            self.i += 1
            result = self.type()
            if self.peek()[1] != ")":
                return None
            self.i += 1
            return Arrow((), result)
        try:
            parts.append(self.type())
        except CostSyntaxError:
            return None
        if self.peek()[0] != "arrow":
            return None
        while self.peek()[0] == "arrow":
            self.i += 1
            parts.append(self.type())
        if self.peek()[1] != ")":
            return None
        self.i += 1
        return Arrow(tuple(parts[:-1]), parts[-1])


def parse_cost(text: str) -> CostExpr:
    p = _TypeParser(text)
    out = p.cost()
    p.done()
    return out


def parse_type(text: str) -> Type:
    p = _TypeParser(text)
    out = p.type()
    p.done()
    return out

"""Sized-type checking, constraint gathering and solving.

Statement types are cost expressions; expression types are costs, arrows
(components) or records (import-all aliases). While loops introduce a
free variable ``w:<file>:<index>`` for their unknown iteration count and
component parameters get variables ``p:<file>:<k>``.

Parameter types are inferred from call sites: each call emits
``argument type ⊑ parameter variable`` and a variable's solution is the lub
of its lower bounds. Because a component body may itself call a
parameter, :func:`infer` alternates typing and solving until the solution
is stable and then does one strict pass with it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .costalg import (
    COST_ZERO, ONE, ZERO, AddC, Arrow, Cost, CostExpr, MulC, NumC, Record, Type,
    TypeEnv, VarC, csum, free_vars, is_structured, leq, lub, lub_env, normalize,
    normalize_type, render_type, subst_cost,
)
from .errors import CyclicBounds, ImportCycle, ShapeMismatch, TypeCheckError
from .machine import DEFAULT_COSTS, CostTable, FileGetter
from .syntax import (
    Assign, BinOp, CompCall, CompDef, For, If, ImportAll, ImportSelected, Let, Num,
    Proj, SourceFile, Var, While, WhileLabel,
)

PARAM_PREFIX = "p:"
WHILE_PREFIX = "w:"


def while_var(label: WhileLabel) -> str:
    return f"{WHILE_PREFIX}{label.file}:{label.index}"


def is_param_var(name: str) -> bool:
    return name.startswith(PARAM_PREFIX)


@dataclass(frozen=True)
class Constraint:
    """``lower ⊑ upper``, with ``upper`` a type variable."""

    lower: Type
    upper: str

    def normalized(self) -> "Constraint":
        return Constraint(normalize_type(self.lower), self.upper)

    def render(self, explicit: bool = False) -> str:
        return f"{render_type(self.lower, explicit)} ⊑ {self.upper}"


class VarSupply:
    """Deterministic names for parameter variables, counted per file."""

    def __init__(self, file: str = "<anon>"):
        self.file = file
        self._counters: Dict[str, int] = {}

    def enter(self, file: str) -> str:
        prev = self.file
        self.file = file
        self._counters[file] = 0
        return prev

    def leave(self, prev: str) -> None:
        self.file = prev

    def param(self) -> str:
        k = self._counters.get(self.file, 0)
        self._counters[self.file] = k + 1
        return f"{PARAM_PREFIX}{self.file}:{k}"


@dataclass
class CheckResult:
    cost: CostExpr
    env_out: TypeEnv
    constraints: Tuple[Constraint, ...]
    while_vars: Dict[WhileLabel, str]
    solved: Dict[str, Type] = field(default_factory=dict)

    @property
    def free_vars(self):
        return free_vars(self.cost)

    def to_json(self) -> dict:
        from .costalg import render
        return {
            "cost": render(self.cost),
            "free_vars": sorted(self.free_vars),
            "constraints": [
                {"lower": render_type(c.lower, explicit=True),
                 "lower_normalized": render_type(normalize_type(c.lower)),
                 "upper": c.upper}
                for c in self.constraints
            ],
            "solved": {k: render_type(v) for k, v in sorted(self.solved.items())},
            "while_vars": {str(lbl): v for lbl, v in
                           sorted(self.while_vars.items(), key=lambda kv: (kv[0].file, kv[0].index))},
            "errors": [],
        }


# -- closing types over a solution --------------------------------------------

def close_type(t: Type, solution: Mapping[str, Type]) -> Type:
    """Replace solved variables in ``t``.

    A bare variable solved to an arrow or record becomes that type.
    Parameter variables in cost position are zero: a parameter that is not
    a component or record is charged nothing when used. Other variables
    with a cost solution take that solution.
    """
    if isinstance(t, Cost):
        e = t.expr
        if isinstance(e, VarC):
            s = solution.get(e.name)
            if s is not None and is_structured(s):
                return s
        return Cost(_close_cost(e, solution))
    if isinstance(t, Arrow):
        return Arrow(tuple(close_type(p, solution) for p in t.params), close_type(t.result, solution))
    if isinstance(t, Record):
        return Record(tuple((k, close_type(v, solution)) for k, v in t.fields))
    raise TypeError(f"not a type: {t!r}")


def _close_cost(e: CostExpr, solution) -> CostExpr:
    mapping = {}
    for name in free_vars(e):
        if is_param_var(name):
            mapping[name] = ZERO
        else:
            s = solution.get(name)
            if isinstance(s, Cost):
                mapping[name] = s.expr
            elif s is not None:
                mapping[name] = ZERO
    return subst_cost(e, mapping) if mapping else e


def solve_constraints(cs: Iterable[Constraint]) -> Dict[str, Type]:
    """Smallest solution: each variable gets the lub of its lower bounds.

    Lower bounds mentioning other constrained variables are re-closed in
    round-robin passes until nothing changes.
    """
    cs = list(cs)
    uppers = sorted({c.upper for c in cs})
    bounds = {v: [c.lower for c in cs if c.upper == v] for v in uppers}
    sol: Dict[str, Type] = {}
    for _ in range(len(uppers) + 1):
        changed = False
        for v in uppers:
            new = lub(close_type(t, sol) for t in bounds[v])
            if sol.get(v) != new:
                sol[v] = new
                changed = True
        if not changed:
            return sol
    raise CyclicBounds(f"constraints did not stabilize within {len(uppers) + 1} passes: "
                       + ", ".join(uppers))


# -- the checker ---------------------------------------------------------------

def _node_pos(node):
    return getattr(node, "pos", None)


class Checker:
    """One typing pass.

    With ``lenient`` set, calls and projections through a parameter whose
    type is not known yet are skipped and flagged in ``pending``; the
    strict pass reports them as errors.
    """

    def __init__(self, fg: Optional[FileGetter] = None, bc: CostTable = DEFAULT_COSTS,
                 solution: Optional[Mapping[str, Type]] = None, lenient: bool = True,
                 supply: Optional[VarSupply] = None):
        self.fg = fg
        self.bc = bc
        self.solution = dict(solution or {})
        self.lenient = lenient
        self.supply = supply or VarSupply()
        self.constraints: List[Constraint] = []
        self.while_vars: Dict[WhileLabel, str] = {}
        self.pending = False
        self.files: List[str] = []
        self._anon_whiles = 0

    # -- helpers
    def fail(self, kind: str, message: str, node=None):
        file = self.files[-1] if self.files else self.supply.file
        raise TypeCheckError(kind, message, file, _node_pos(node))

    def resolve(self, t: Type) -> Type:
        if isinstance(t, Cost) and isinstance(t.expr, VarC):
            s = self.solution.get(t.expr.name)
            if s is not None and is_structured(s):
                return s
        return t

    @staticmethod
    def _is_param(t: Type) -> bool:
        return isinstance(t, Cost) and isinstance(t.expr, VarC) and is_param_var(t.expr.name)

    def _lub_env(self, envs, node):
        try:
            return lub_env(envs)
        except ShapeMismatch as exc:
            self.fail("ShapeMismatch", f"branches disagree: {exc}", node)

    # -- expressions
    def expr(self, env: TypeEnv, e) -> Type:
        if isinstance(e, Num):
            return COST_ZERO
        if isinstance(e, Var):
            t = env.get(e.name)
            if t is None:
                self.fail("UnboundVariable", f"unbound variable {e.name}", e)
            return self.resolve(t)
        if isinstance(e, BinOp):
            t1 = self.expr(env, e.left)
            t2 = self.expr(env, e.right)
            if is_structured(t1) or is_structured(t2):
                self.fail("BinOpOnNonCost",
                          f"operator {e.op.value} applied to a component or record", e)
            return Cost(AddC(AddC(t1.expr, t2.expr), NumC(self.bc(e.op))))
        if isinstance(e, Proj):
            t = env.get(e.record)
            if t is None:
                self.fail("UnboundVariable", f"unbound variable {e.record}", e)
            t = self.resolve(t)
            if isinstance(t, Record):
                ft = t.get(e.field)
                if ft is None:
                    self.fail("ProjectionError", f"{e.record} has no field {e.field}", e)
                return self.resolve(ft)
            if self.lenient and self._is_param(t):
                self.pending = True
                return COST_ZERO
            self.fail("ProjectionError", f"{e.record} is not a record", e)
        if isinstance(e, CompDef):
            names = [self.supply.param() for _ in e.params]
            inner = env
            for p, n in zip(e.params, names):
                inner = inner.bind(p, Cost(VarC(n)))
            t_r, _ = self.stmts(inner, e.body)
            return Arrow(tuple(Cost(VarC(n)) for n in names), Cost(t_r))
        raise TypeError(f"not an expression: {e!r}")

    # -- statements
    def stmts(self, env: TypeEnv, ss: Sequence) -> Tuple[CostExpr, TypeEnv]:
        parts = []
        for s in ss:
            t, env = self.stmt(env, s)
            parts.append(t)
        return normalize(csum(parts)), env

    def _cond(self, env, e, node) -> CostExpr:
        t = self.expr(env, e)
        if is_structured(t):
            self.fail("ShapeMismatch", "condition is a component or record", node)
        return t.expr

    def stmt(self, env: TypeEnv, s) -> Tuple[CostExpr, TypeEnv]:
        if isinstance(s, (Let, Assign)):
            if isinstance(s, Assign) and s.name not in env:
                self.fail("UnboundVariable", f"assignment to unbound variable {s.name}", s)
            t1 = self.expr(env, s.expr)
            if is_structured(t1):
                return ONE, env.bind(s.name, t1)
            return normalize(AddC(ONE, t1.expr)), env.bind(s.name, COST_ZERO)
        if isinstance(s, If):
            t1 = self._cond(env, s.cond, s)
            t2, g1 = self.stmts(env, s.then)
            t3, g2 = self.stmts(env, s.orelse)
            from .costalg import MaxC
            return normalize(AddC(t1, MaxC(t2, t3))), self._lub_env([g1, g2], s)
        if isinstance(s, While):
            label = s.label
            if label is None:
                label = WhileLabel(f"<unlabelled:{self.supply.file}>", self._anon_whiles)
                self._anon_whiles += 1
            x = while_var(label)
            self.while_vars[label] = x
            t1 = self._cond(env, s.cond, s)
            t2, g2 = self.stmts(env, s.body)
            cost = AddC(MulC(VarC(x), AddC(t1, t2)), t1)
            return normalize(cost), self._lub_env([env, g2], s)
        if isinstance(s, For):
            if s.start > s.stop:
                self.fail("ForBoundsInverted", f"for-loop bounds inverted ({s.start} > {s.stop})", s)
            t1, g2 = self.stmts(env.bind(s.name, COST_ZERO), s.body)
            t2 = NumC(s.stop - s.start + 1)
            return normalize(AddC(MulC(t2, t1), t2)), g2
        if isinstance(s, CompCall):
            return self.call(env, s), env
        raise TypeError(f"not a statement: {s!r}")

    def call(self, env: TypeEnv, s: CompCall) -> CostExpr:
        tc = self.expr(env, s.callee)
        targs = [self.expr(env, a) for a in s.args]
        n = len(targs)
        t_a = csum(t.expr for t in targs if not is_structured(t))
        if not isinstance(tc, Arrow):
            if self.lenient and self._is_param(tc):
                self.pending = True
                return normalize(AddC(t_a, NumC(n)))
            self.fail("NotAComponent", "callee is not a component", s)
        if len(tc.params) != n:
            self.fail("ArityMismatch",
                      f"component takes {len(tc.params)} arguments, called with {n}", s)
        zeroed = {}
        for targ, param in zip(targs, tc.params):
            if isinstance(param, Cost) and isinstance(param.expr, VarC):
                self.constraints.append(Constraint(targ, param.expr.name))
                if not is_structured(self.resolve(param)):
                    zeroed[param.expr.name] = ZERO
            elif is_structured(param):
                if not leq(close_type(targ, self.solution), param):
                    self.fail("ShapeMismatch",
                              f"argument {render_type(targ)} exceeds parameter {render_type(param)}", s)
        result = tc.result
        if not isinstance(result, Cost):
            self.fail("ShapeMismatch", "component result is not a cost", s)
        t_r = subst_cost(result.expr, zeroed) if zeroed else result.expr
        return normalize(AddC(AddC(t_r, t_a), NumC(n)))

    # -- files
    def file(self, file_id: str, node=None) -> Tuple[CostExpr, TypeEnv]:
        if file_id in self.files:
            raise ImportCycle(file_id, list(self.files))
        if self.fg is None:
            raise ValueError("typing a file needs a file getter")
        src: SourceFile = self.fg.get(file_id)
        self.files.append(file_id)
        prev = self.supply.enter(file_id)
        try:
            env = TypeEnv()
            parts = []
            for imp in src.imports:
                if imp.file in self.files:
                    raise ImportCycle(imp.file, list(self.files))
                t, imported = self.file(imp.file, imp)
                if isinstance(imp, ImportAll):
                    env = env.bind(imp.alias, imported.eps).with_eps(Record())
                    parts.append(AddC(t, NumC(3)))
                else:
                    for name in imp.names:
                        ti = imported.eps.get(name)
                        if ti is None:
                            self.fail("ImportNameMissing", f"{imp.file} does not export {name}", imp)
                        env = env.bind(name, ti)
                    env = env.with_eps(Record())
                    parts.append(AddC(t, NumC(len(imp.names) + 2)))
            t_s, env = self.stmts(env, src.stmts)
            parts.append(t_s)
            for ex in src.exports:
                t = env.get(ex.name)
                if t is None:
                    self.fail("ExportUnbound", f"export of unbound variable {ex.name}", ex)
                env = env.with_eps(env.eps.with_field(ex.name, t))
                parts.append(ONE)
            return normalize(csum(parts)), env
        finally:
            self.supply.leave(prev)
            self.files.pop()


# -- public operations ---------------------------------------------------------

def type_expr(env: TypeEnv, e, fresh: Optional[VarSupply] = None,
              bc: CostTable = DEFAULT_COSTS) -> Tuple[Type, frozenset]:
    ch = Checker(bc=bc, supply=fresh)
    t = ch.expr(env, e)
    return t, frozenset(ch.constraints)


def type_stmts(env: TypeEnv, ss: Sequence, fresh: Optional[VarSupply] = None,
               bc: CostTable = DEFAULT_COSTS) -> Tuple[CostExpr, TypeEnv, frozenset]:
    ch = Checker(bc=bc, supply=fresh)
    t, env_out = ch.stmts(env, ss)
    return t, env_out, frozenset(ch.constraints)


def type_file(fg: FileGetter, file_id: str, fresh: Optional[VarSupply] = None,
              bc: CostTable = DEFAULT_COSTS) -> CheckResult:
    """A single gathering pass over ``file_id`` and its imports."""
    ch = Checker(fg, bc, supply=fresh)
    cost, env = ch.file(file_id)
    return CheckResult(cost, env, tuple(ch.constraints), dict(ch.while_vars))


def gather_constraints(fg: FileGetter, file_id: str,
                       bc: CostTable = DEFAULT_COSTS) -> Tuple[Constraint, ...]:
    return type_file(fg, file_id, bc=bc).constraints


def _solve(cs, file_id):
    try:
        return solve_constraints(cs)
    except ShapeMismatch as exc:
        raise TypeCheckError("ShapeMismatch", f"incompatible argument types: {exc}", file_id) from exc


def infer(fg: FileGetter, file_id: str, bc: CostTable = DEFAULT_COSTS) -> CheckResult:
    """Type ``file_id`` with parameter types solved from their call sites.

    The reported cost has every parameter variable eliminated; what stays
    free are the while-loop variables.
    """
    solution: Dict[str, Type] = {}
    rounds = 0
    while True:
        ch = Checker(fg, bc, solution, lenient=True)
        ch.file(file_id)
        new = _solve(ch.constraints, file_id)
        if new == solution:
            break
        solution = new
        rounds += 1
        if rounds > len(solution) + 2:
            raise CyclicBounds("parameter types did not stabilize")
    final = Checker(fg, bc, solution, lenient=False)
    cost, env = final.file(file_id)
    solved = _solve(final.constraints, file_id)
    cost = normalize(_close_cost(cost, solved))
    env = TypeEnv(tuple((k, normalize_type(close_type(t, solved))) for k, t in env.bindings),
                  Record(tuple((k, normalize_type(close_type(t, solved))) for k, t in env.eps.fields)))
    return CheckResult(cost, env, tuple(final.constraints), dict(final.while_vars), solved)

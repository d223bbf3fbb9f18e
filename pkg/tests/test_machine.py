import json

import pytest

from amcost.errors import FinalState, FuelExhausted, ImportCycle, IntegerOverflow, Stuck, UnresolvedFile
from amcost.machine import (
    DEFAULT_COSTS, Closure, CostTable, IntVal, MemoryFileGetter, ObjVal, initial_config,
    run, step,
)
from amcost.syntax import BinOpKind, WhileLabel

GOLDEN_TRACE = (
    "R-SrcFile R-ImportSelected R-SrcFile R-Let R-Num R-Bind R-While R-Var R-WhileTrue "
    "R-Assign R-BinOp1 R-Var R-Num R-BinOp2 R-Bind R-Var R-WhileTrue R-Assign R-BinOp1 "
    "R-Var R-Num R-BinOp2 R-Bind R-Var R-WhileTrue R-Assign R-BinOp1 R-Var R-Num R-BinOp2 "
    "R-Bind R-Var R-WhileFalse R-Export R-PopScope R-BindSelected R-EmptyExports R-Let "
    "R-Num R-Bind R-Let R-CompDef R-Bind R-CompCall R-Var R-CompCallPrime R-Var "
    "R-PushScope R-Bind R-Assign R-BinOp1 R-Var R-Num R-BinOp2 R-Bind R-PopScope"
).split()


def mem(**files):
    return MemoryFileGetter({"/" + k.replace("_", ".") : v for k, v in files.items()})


def run_text(text, **kw):
    return run(MemoryFileGetter({"/t.jsx": text}), "/t.jsx", **kw)


def test_worked_example(fixtures_fg):
    r = run(fixtures_fg, "/main.jsx")
    assert r.cost == 12
    assert r.steps == 56
    assert r.trace == GOLDEN_TRACE
    assert r.loop_counts == {WhileLabel("/simpleWhile.jsx", 0): 3}
    assert r.locals[("/main.jsx", "y")] == IntVal(2)
    assert r.locals[("/main.jsx", "x")] == IntVal(0)
    assert r.locals[("/main.jsx", "prop")] == IntVal(0)
    assert r.locals[("/simpleWhile.jsx", "x")] == IntVal(0)
    func = r.locals[("/main.jsx", "func")]
    assert isinstance(func, Closure) and func.params == ("prop",) and func.scope == "/main.jsx"
    assert len(r.locals) == 5


def test_simple_while_alone(fixtures_fg):
    r = run(fixtures_fg, "/simpleWhile.jsx")
    assert r.cost == 5
    assert r.exports == {"x": IntVal(0)}


def test_empty_file_costs_nothing(fixtures_fg):
    r = run(fixtures_fg, "/empty.jsx")
    assert (r.cost, r.trace) == (0, ["R-SrcFile"])


def test_initial_and_final_configurations(fixtures_fg):
    c = initial_config(fixtures_fg, "/main.jsx")
    assert c.scope_list() == ["/main.jsx"]
    assert not c.is_final
    seen = []
    while not c.is_final:
        c, k, rule = step(c)
        seen.append(rule)
    assert seen == GOLDEN_TRACE
    assert c.value_list() == [] and c.scope_list() == ["/main.jsx"]
    with pytest.raises(FinalState):
        step(c)


def test_step_does_not_mutate(fixtures_fg):
    c = initial_config(fixtures_fg, "/main.jsx")
    for _ in range(10):
        before = (c.instructions, dict(c.ls), c.vs, c.ss)
        c2, _, _ = step(c)
        assert (c.instructions, dict(c.ls), c.vs, c.ss) == before
        c = c2


def test_rule_costs():
    r = run_text("let x = 1; x = 2;")
    assert r.cost == 2
    r = run(mem(a_jsx="let v = 1; export v;", b_jsx='import * as m from "/a.jsx"; let w = m.v;'),
            "/b.jsx")
    # ImportAll 2 + Bind v 1 + Export 1 + BindAll 1 + Bind w 1
    assert r.cost == 6
    assert "R-ImportAll" in r.trace and "R-BindAll" in r.trace and "R-Proj" in r.trace
    assert r.locals[("/b.jsx", "w")] == IntVal(1)
    assert r.locals[("/b.jsx", "m")] == ObjVal.of({"v": IntVal(1)})


def test_binop_cost_table():
    table = CostTable(add=3, sub=1, mul=0)
    assert table(BinOpKind.ADD) == 3
    r = run_text("let x = (+ 1 (- 2 (* 3 4)));", bc=table)
    assert r.cost == 1 + 3 + 1
    assert r.locals[("/t.jsx", "x")] == IntVal(-9)


def test_cost_table_parsing(tmp_path):
    p = tmp_path / "costs.json"
    p.write_text(json.dumps({"add": 2}))
    assert CostTable.load(str(p)) == CostTable(add=2)
    with pytest.raises(ValueError):
        CostTable.from_mapping({"div": 1})
    with pytest.raises(ValueError):
        CostTable(add=-1)


def test_if_and_for():
    r = run_text("let a = 0; if (a) { a = 5; } else { a = 7; } for (i in 1..3) { a = + a i; }")
    assert r.locals[("/t.jsx", "a")] == IntVal(13)
    assert "R-IfFalse" in r.trace and "R-For" in r.trace
    # Let a, Assign in else, three Lets of i and three Assigns
    assert r.cost == 1 + 1 + 3 + 3


def test_component_scope_is_defining_file():
    files = mem(
        lib_jsx="let n = 0; let bump = <k> n = + n k; </>; export bump;",
        main_jsx='import { bump } from "/lib.jsx"; comp bump (2); comp bump (3);',
    )
    r = run(files, "/main.jsx")
    assert r.locals[("/lib.jsx", "n")] == IntVal(5)
    assert ("/main.jsx", "n") not in r.locals


def test_loop_counts_sum_over_reentries():
    r = run_text("let c = <> let i = 2; while (i) { i = - i 1; }; </>; comp c (); comp c ();")
    assert r.loop_counts == {WhileLabel("/t.jsx", 0): 4}


def test_json_report_is_stable(fixtures_fg):
    a = json.dumps(run(fixtures_fg, "/main.jsx").to_json(), sort_keys=True)
    b = json.dumps(run(fixtures_fg, "/main.jsx").to_json(), sort_keys=True)
    assert a == b
    report = json.loads(a)
    assert report["cost"] == 12 and report["steps"] == 56
    assert report["loop_counts"] == [{"file": "/simpleWhile.jsx", "index": 0, "count": 3}]


@pytest.mark.parametrize("text, fragment", [
    ("let x = y;", "unbound variable y"),
    ("let x = 1; comp x ();", "non-component"),
    ("let c = <a> </>; comp c ();", "expects 1 arguments"),
    ("let x = 1; let y = x.f;", "non-object"),
    ("let c = <> </>; while (c) { };", "non-integer"),
    ("let c = <> </>; let z = + c 1;", "non-integer"),
    ("let x = * 4611686018427387904 2;", "overflow"),
    ("x = 1;", None),
])
def test_stuck_states(text, fragment):
    if fragment is None:
        r = run_text(text)   # assignment binds like let
        assert r.locals[("/t.jsx", "x")] == IntVal(1)
        return
    with pytest.raises(Stuck) as info:
        run_text(text)
    assert fragment in str(info.value)
    assert info.value.partial is not None


def test_overflow_is_its_own_error():
    with pytest.raises(IntegerOverflow):
        run_text("let x = * 4611686018427387904 2;")
    assert run_text("let x = - 0 9223372036854775807;").locals[("/t.jsx", "x")] == IntVal(-(2 ** 63 - 1))


def test_missing_export_is_stuck():
    files = mem(a_jsx="let v = 1;", b_jsx='import { v } from "/a.jsx";')
    with pytest.raises(Stuck, match="not exported"):
        run(files, "/b.jsx")


def test_unresolved_and_cycles(fixtures_fg):
    with pytest.raises(UnresolvedFile):
        run(fixtures_fg, "/missing.jsx")
    files = mem(a_jsx='import * as b from "/b.jsx";', b_jsx='import * as a from "/a.jsx";')
    with pytest.raises(ImportCycle):
        run(files, "/a.jsx")
    with pytest.raises(ImportCycle):
        run(mem(s_jsx='import * as s from "/s.jsx";'), "/s.jsx")


def test_fuel(fixtures_fg):
    with pytest.raises(FuelExhausted) as info:
        run(fixtures_fg, "/spin.jsx", fuel=100)
    assert info.value.partial.steps == 100
    with pytest.raises(FuelExhausted):
        run(fixtures_fg, "/main.jsx", fuel=55)
    assert run(fixtures_fg, "/main.jsx", fuel=56).cost == 12
    with pytest.raises(ValueError):
        run(fixtures_fg, "/main.jsx", fuel=0)


def test_two_call_fixture(fixtures_fg):
    r = run(fixtures_fg, "/twocall.jsx")
    assert r.cost == 11
    assert r.locals[("/twocall.jsx", "y")] == IntVal(2)


def test_default_costs_are_zero():
    assert DEFAULT_COSTS == CostTable(0, 0, 0)

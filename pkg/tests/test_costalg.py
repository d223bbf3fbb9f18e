import pytest
from hypothesis import given, settings, strategies as st

from amcost.costalg import (
    AddC, Arrow, COST_ZERO, Cost, MaxC, MulC, NumC, ONE, Record, TypeEnv, VarC, ZERO,
    cmax, csum, free_vars, instantiate, is_canonical, leq, lub, lub_env, normalize,
    normalize_type, parse_cost, parse_type, render, render_type,
)
from amcost.errors import CostSyntaxError, ShapeMismatch, UnboundVar

from strategies import cost_exprs, sigmas

x, y, z = VarC("x"), VarC("y"), VarC("z")


def n(k):
    return NumC(k)


def C(e):
    return Cost(e)


# -- normalization -------------------------------------------------------------

def test_normalize_examples():
    assert normalize((ZERO + ZERO) + ZERO) == ZERO
    assert normalize(x * (ZERO + ONE) + ZERO) == x
    assert normalize(n(1) + n(3)) == n(4) == normalize(n(3) + n(1))


def test_normalize_distributes_and_collects():
    assert normalize(x * (y + n(2))) == normalize(n(2) * x + y * x)
    assert normalize(x + x) == normalize(n(2) * x)
    assert normalize(n(0) * x) == ZERO
    assert normalize((x + y) * (x + y)) == normalize(x * x + n(2) * x * y + y * y)


def test_normalize_max():
    assert normalize(MaxC(n(3), n(5))) == n(5)
    assert normalize(MaxC(x, x + n(1))) == normalize(x + n(1))
    assert normalize(MaxC(x, y)) == normalize(MaxC(y, x))
    assert isinstance(normalize(MaxC(x, y)), MaxC)
    assert normalize(MaxC(MaxC(x, y), x)) == normalize(MaxC(x, y))
    assert normalize(MaxC(x, y) + n(1)) == normalize(MaxC(x + n(1), y + n(1)))


def test_canonical_predicate():
    assert is_canonical(normalize(x * (y + ONE)))
    assert not is_canonical(ZERO + ZERO)


def test_helpers():
    assert csum([]) == ZERO
    assert normalize(csum([n(1), n(2), x])) == normalize(x + n(3))
    assert normalize(cmax(n(1), x)) == normalize(MaxC(n(1), x))
    assert x + 1 == AddC(x, ONE)
    assert 2 * x == MulC(n(2), x)


@settings(max_examples=400, deadline=None)
@given(cost_exprs)
def test_normalize_idempotent(t):
    once = normalize(t)
    assert normalize(once) == once
    assert is_canonical(once)


@settings(max_examples=400, deadline=None)
@given(cost_exprs, sigmas)
def test_instantiate_commutes_with_normalize(t, sigma):
    assert instantiate(normalize(t), sigma) == instantiate(t, sigma)


@settings(max_examples=200, deadline=None)
@given(cost_exprs, cost_exprs)
def test_normalize_respects_commutativity(a, b):
    assert normalize(a + b) == normalize(b + a)
    assert normalize(a * b) == normalize(b * a)
    assert normalize(MaxC(a, b)) == normalize(MaxC(b, a))


@settings(max_examples=200, deadline=None)
@given(cost_exprs, sigmas, sigmas)
def test_instantiate_monotone(t, s1, s2):
    lo = {k: min(s1[k], s2[k]) for k in s1}
    hi = {k: max(s1[k], s2[k]) for k in s1}
    assert instantiate(t, lo) <= instantiate(t, hi)


# -- instantiate / free vars ----------------------------------------------------

def test_instantiate_examples():
    assert instantiate(x + n(2), {"x": 3}) == 5
    assert instantiate(n(7), {}) == 7
    assert instantiate(x * (y + ONE), {"x": 2, "y": 0}) == 2
    with pytest.raises(UnboundVar) as info:
        instantiate(x + y, {"x": 1})
    assert info.value.names == ("y",)


def test_free_vars_examples():
    assert free_vars(x * (ZERO + ONE) + ZERO) == {"x"}
    assert free_vars(n(12)) == set()
    assert free_vars(Arrow((C(x),), C(y + ONE))) == {"x", "y"}
    assert free_vars(Record((("f", C(z)),))) == {"z"}


# -- lub and leq --------------------------------------------------------------------

def test_lub_examples():
    assert lub([Arrow((COST_ZERO,), C(ONE)), Arrow((COST_ZERO,), C(n(2)))]) == Arrow((COST_ZERO,), C(n(2)))
    assert lub([C(n(1) + n(3)), C(n(3) + n(1))]) == C(n(4))
    t = C(x * y + n(1))
    assert lub([t]) == normalize_type(t)
    assert lub([C(x), C(y)]) == C(normalize(MaxC(x, y)))


def test_lub_records_pointwise():
    a = Record((("p", C(n(1))), ("q", C(x))))
    b = Record((("p", C(n(4))), ("q", C(n(0)))))
    assert lub([a, b]) == Record((("p", C(n(4))), ("q", C(x))))


def test_lub_zero_is_absorbed():
    arrow = Arrow((COST_ZERO,), C(n(2)))
    assert lub([COST_ZERO, arrow]) == arrow
    rec = Record((("a", C(ONE)),))
    assert lub([rec, COST_ZERO]) == rec


@pytest.mark.parametrize("ts", [
    [C(ONE), Arrow((COST_ZERO,), C(ONE))],
    [Arrow((COST_ZERO,), C(ONE)), Arrow((COST_ZERO, COST_ZERO), C(ONE))],
    [Arrow((COST_ZERO,), C(ONE)), Arrow((C(ONE),), C(ONE))],
    [Record((("a", COST_ZERO),)), Record((("b", COST_ZERO),))],
    [Record(()), Arrow((), COST_ZERO)],
])
def test_lub_shape_mismatch(ts):
    with pytest.raises(ShapeMismatch):
        lub(ts)


def test_lub_empty_is_an_error():
    with pytest.raises(ValueError):
        lub([])


def test_leq_examples():
    assert leq(COST_ZERO, Arrow((COST_ZERO,), C(ONE)))
    assert leq(C(n(3)), C(n(5)))
    assert not leq(C(n(5)), C(n(3)))
    assert leq(C(x), C(MaxC(x, y)))
    assert not leq(C(x), C(y))
    assert not leq(C(ONE), Arrow((COST_ZERO,), C(ONE)))


@settings(max_examples=300, deadline=None)
@given(cost_exprs, cost_exprs, cost_exprs)
def test_lub_laws(a, b, c):
    A, B, Cc = C(a), C(b), C(c)
    assert lub([A, B]) == lub([B, A])
    assert lub([lub([A, B]), Cc]) == lub([A, lub([B, Cc])])
    assert lub([A, A]) == normalize_type(A)
    assert leq(A, lub([A, B])) and leq(B, lub([A, B]))


@settings(max_examples=300, deadline=None)
@given(cost_exprs, cost_exprs, cost_exprs)
def test_leq_order(a, b, c):
    A, B, Cc = C(a), C(b), C(c)
    assert leq(A, A)
    assert leq(COST_ZERO, A)
    if leq(A, B) and leq(B, Cc):
        assert leq(A, Cc)
    if leq(A, B) and leq(B, A):
        assert normalize(a) == normalize(b)


@settings(max_examples=200, deadline=None)
@given(cost_exprs, cost_exprs, sigmas)
def test_leq_is_semantically_sound(a, b, sigma):
    if leq(C(a), C(b)):
        assert instantiate(a, sigma) <= instantiate(b, sigma)


# -- environments ---------------------------------------------------------------------

def test_lub_env_examples():
    g = TypeEnv.of({"x": C(n(3))})
    assert lub_env([g, g]) == g
    assert lub_env([TypeEnv.of({"x": C(n(3))}), TypeEnv.of({"x": C(n(5))})]) == TypeEnv.of({"x": C(n(5))})
    assert lub_env([TypeEnv.of({"x": C(n(3))}), TypeEnv.of({"y": C(ONE)})]) == \
        TypeEnv.of({"x": C(n(3)), "y": C(ONE)})


def test_lub_env_merges_exports():
    a = TypeEnv.of({}, Record((("u", C(ONE)),)))
    b = TypeEnv.of({}, Record((("u", C(n(2))), ("v", COST_ZERO))))
    assert lub_env([a, b]).eps == Record((("u", C(n(2))), ("v", COST_ZERO)))


def test_type_env_operations():
    g = TypeEnv().bind("b", C(ONE)).bind("a", COST_ZERO)
    assert [k for k, _ in g.bindings] == ["a", "b"]
    assert "a" in g and "c" not in g
    assert g.get("b") == C(ONE)
    assert list(g.with_eps(Record((("a", COST_ZERO),))).eps.keys()) == ["a"]


# -- rendering and parsing ------------------------------------------------------------

def test_render_forms():
    assert render(normalize(VarC("w:/simpleWhile.jsx:0") + n(9))) == "w:/simpleWhile.jsx:0 + 9"
    assert render(MaxC(MaxC(x, y), z)) == "max(x, y, z)"
    assert render(MaxC(x, MaxC(y, z))) == "max(x, max(y, z))"
    assert render((x + y) * z) == "(x + y) * z"
    assert render((ZERO + ZERO) + ZERO, explicit=True) == "((0 + 0) + 0)"
    assert render_type(Arrow((COST_ZERO,), C(n(2)))) == "(0 → 2)"
    assert render_type(Arrow((), C(ONE))) == "(→ 1)"
    assert render_type(Record((("a", COST_ZERO), ("b", C(x))))) == "{a: 0, b: x}"


@settings(max_examples=300, deadline=None)
@given(cost_exprs)
def test_render_parse_round_trip(t):
    assert parse_cost(render(t)) == t
    assert parse_cost(render(t, explicit=True)) == t
    canon = normalize(t)
    assert parse_cost(render(canon)) == canon


def test_parse_type_forms():
    t = Arrow((C(VarC("p:/m.jsx:0")), Arrow((COST_ZERO,), C(ONE))), C(VarC("p:/m.jsx:0") + ONE))
    assert parse_type(render_type(t)) == t
    assert parse_type("(0 -> 2)") == Arrow((COST_ZERO,), C(n(2)))
    assert parse_type("{f: (0 → 1), g: 3}") == Record((("f", Arrow((COST_ZERO,), C(ONE))), ("g", C(n(3)))))
    assert parse_type("(→ 0)") == Arrow((), COST_ZERO)
    assert parse_cost("x ↑ y") == MaxC(x, y)
    assert parse_cost("2 · x") == MulC(n(2), x)


@pytest.mark.parametrize("text", ["", "x +", "max(x", "(x", "x y", "3 @"])
def test_parse_cost_errors(text):
    with pytest.raises(CostSyntaxError):
        parse_cost(text)

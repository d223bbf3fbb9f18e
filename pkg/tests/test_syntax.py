import pytest

from amcost.parser import parse_file
from amcost.syntax import (
    BinOp, BinOpKind, CompDef, ImportSelected, Num, SourceFile, Var, While, WhileLabel,
    is_identifier, iter_whiles, numeral_of, numeral_value, preorder_while_labels,
)


def test_identifier_class():
    assert is_identifier("x")
    assert is_identifier("func_2")
    assert not is_identifier("")
    assert not is_identifier("2x")
    assert not is_identifier("_x")


def test_numerals_round_trip():
    for n in (0, 1, 42, 10 ** 12):
        assert numeral_value(numeral_of(n)) == n
    with pytest.raises(ValueError):
        numeral_of(-1)
    with pytest.raises(ValueError):
        numeral_value("-3")


def test_binop_kinds():
    assert [k.key for k in BinOpKind] == ["add", "sub", "mul"]
    assert BinOpKind.SUB.apply(1, 3) == -2
    assert BinOpKind.MUL.apply(4, 3) == 12


def test_compdef_rejects_duplicate_params():
    with pytest.raises(ValueError):
        CompDef(("a", "a"), ())


def test_import_selected_invariants():
    with pytest.raises(ValueError):
        ImportSelected((), "/a.jsx")
    with pytest.raises(ValueError):
        ImportSelected(("x", "x"), "/a.jsx")


def test_positions_do_not_affect_equality():
    assert Num(3, pos=(1, 1)) == Num(3, pos=(9, 9))
    assert hash(Var("x", pos=(1, 2))) == hash(Var("x"))


def test_nested_whiles_label_in_preorder():
    src = parse_file("while (a) { while (b) { }; }; while (c) { };", "/n.jsx")
    labels = [w.label for w in iter_whiles(src)]
    conds = [w.cond.name for w in iter_whiles(src)]
    assert labels == [WhileLabel("/n.jsx", 0), WhileLabel("/n.jsx", 1), WhileLabel("/n.jsx", 2)]
    assert conds == ["a", "b", "c"]


def test_whiles_inside_components_are_labelled():
    src = parse_file("let c = <> while (x) { }; </>; while (y) { };", "/c.jsx")
    assert [str(w.label) for w in iter_whiles(src)] == ["/c.jsx:0", "/c.jsx:1"]


def test_relabelling_is_idempotent():
    src = parse_file("while (a) { while (b) { }; };", "/n.jsx")
    again = preorder_while_labels(src, "/n.jsx")
    assert again == src
    assert [w.label for w in iter_whiles(again)] == [w.label for w in iter_whiles(src)]


def test_file_without_whiles_is_unchanged():
    src = SourceFile((), (), ())
    assert preorder_while_labels(src, "/e.jsx") == src
    assert list(iter_whiles(src)) == []


def test_label_string_form():
    assert str(WhileLabel("/simpleWhile.jsx", 0)) == "/simpleWhile.jsx:0"

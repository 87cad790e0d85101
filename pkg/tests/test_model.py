import io

import pytest

from incmeter.errors import InputError
from incmeter.evaluation import compare_values
from incmeter.model import (Atom, Comparison, Const, ConstraintSet, DenialConstraint,
                            Fact, Instance, Var, check_consistency, load_instance,
                            parse_constraints, parse_schema)


def test_parse_schema_basics():
    schema = parse_schema("p(A)\nq(A, B)  # comment\n\n# full comment line\nr(A,C)\n")
    assert schema.predicate_names == ("p", "q", "r")
    assert schema.predicate("q").arity == 2
    assert schema.predicate("q").attributes == ("A", "B")
    assert "p" in schema and "nope" not in schema


def test_parse_schema_errors():
    with pytest.raises(InputError):
        parse_schema("p(A\n")
    with pytest.raises(InputError):
        parse_schema("p()\n")
    with pytest.raises(InputError):
        parse_schema("p(A)\np(B)\n")  # duplicate name
    with pytest.raises(InputError):
        parse_schema("p(A, A)\n")  # duplicate attribute
    err = None
    try:
        parse_schema("p(A)\nbroken line\n")
    except InputError as exc:
        err = exc
    assert err is not None and err.line == 2


def test_parse_dc_shapes():
    schema = parse_schema("p(A)\nq(A, B)\n")
    cs = parse_constraints(
        'dc c1 : !exists p(x), q(x, y)\n'
        'dc c2 : !exists q(x, y), x != y\n'
        'dc c3 : !exists q(x, "lit"), p(x)\n'
        'dc c4 : !exists p(Upper)\n', schema)
    assert len(cs) == 4
    c1, c2, c3, c4 = cs
    assert [a.predicate for a in c1.atoms] == ["p", "q"]
    assert c2.comparisons[0].op == "!="
    # quoted and bare uppercase tokens are constants, lowercase are variables
    assert c3.atoms[0].terms[1] == Const("lit")
    assert c4.atoms[0].terms[0] == Const("Upper")
    assert c1.atoms[1].terms[0] == Var("x")
    assert cs.max_atoms == 2


def test_parse_dc_errors():
    schema = parse_schema("p(A)\nq(A, B)\n")
    with pytest.raises(InputError):
        parse_constraints("dc c : !exists nosuch(x)", schema)
    with pytest.raises(InputError):
        parse_constraints("dc c : !exists p(x, y)", schema)  # arity
    with pytest.raises(InputError):
        parse_constraints("dc c : !exists p(x), y != x2", schema)  # unsafe vars
    with pytest.raises(InputError):
        parse_constraints("dc c : !exists p(x), x < y, q(x, y)", schema)  # atom after cmp
    with pytest.raises(InputError):
        parse_constraints("dc c : p(x)", schema)  # missing !exists
    with pytest.raises(InputError):
        parse_constraints("fd c : p : A -> A", schema)  # dependent in determinant
    with pytest.raises(InputError):
        parse_constraints("fd c : q : A -> Nope", schema)
    with pytest.raises(InputError):
        parse_constraints("dc c : !exists p(x)\ndc c : !exists q(x, y)", schema)
    with pytest.raises(InputError):
        parse_constraints("nonsense", schema)


def test_fd_expansion_matches_manual_dc():
    schema = parse_schema("rel(A, B, C)\n")
    sugar = parse_constraints("fd f : rel : A -> B\n", schema)
    manual = parse_constraints(
        "dc f : !exists rel(x, y1, z1), rel(x, y2, z2), y1 != y2\n", schema)
    inst = load_instance({"rel": "A,B,C\na,b,c\na,d,c\ne,b,c\n"}, schema)
    assert not check_consistency(inst, sugar)
    assert not check_consistency(inst, manual)
    ok = load_instance({"rel": "A,B,C\na,b,c\na,b,d\ne,x,c\n"}, schema)
    assert check_consistency(ok, sugar)
    assert check_consistency(ok, manual)


def test_multi_attribute_determinant():
    schema = parse_schema("t(A, B, C)\n")
    cs = parse_constraints("fd f : t : A, B -> C\n", schema)
    bad = load_instance({"t": "A,B,C\na,b,c\na,b,d\n"}, schema)
    good = load_instance({"t": "A,B,C\na,b,c\na,x,d\n"}, schema)
    assert not check_consistency(bad, cs)
    assert check_consistency(good, cs)


def test_load_instance_tid_assignment_is_deterministic():
    schema = parse_schema("p(A)\nq(A, B)\nr(A, C)\n")
    sources = {"r": "A,C\na,c\n", "p": "A\na\ne\n", "q": "A,B\na,b\n"}
    inst = load_instance(sources, schema)
    # ascending predicate name, then row order, counting from 1
    assert [(f.tid, f.predicate, f.values) for f in inst.facts] == [
        (1, "p", ("a",)), (2, "p", ("e",)), (3, "q", ("a", "b")), (4, "r", ("a", "c"))]
    again = load_instance(sources, schema)
    assert inst.facts == again.facts


def test_load_instance_accepts_bytes_and_streams():
    schema = parse_schema("p(A)\n")
    a = load_instance({"p": b"A\nx\n"}, schema)
    b = load_instance({"p": io.BytesIO(b"A\nx\n")}, schema)
    c = load_instance({"p": io.StringIO("A\nx\n")}, schema)
    assert a.facts == b.facts == c.facts


def test_load_instance_errors():
    schema = parse_schema("p(A)\nq(A, B)\n")
    with pytest.raises(InputError):
        load_instance({"zz": "A\nx\n"}, schema)
    with pytest.raises(InputError):
        load_instance({"p": "WRONG\nx\n"}, schema)
    with pytest.raises(InputError):
        load_instance({"q": "A,B\nx\n"}, schema)  # field count
    with pytest.raises(InputError):
        load_instance({"p": "A\nNULL\n"}, schema)  # reserved value
    with pytest.raises(InputError):
        load_instance({"p": "A\nx\nx\n"}, schema)  # duplicate row
    with pytest.raises(InputError):
        load_instance({"p": ""}, schema)  # missing header
    with pytest.raises(InputError):
        load_instance({"p": "A\nx\n"}, schema, endogenous_tids=[7])


def test_missing_predicate_loads_empty():
    schema = parse_schema("p(A)\nq(A, B)\n")
    inst = load_instance({"p": "A\nx\n"}, schema)
    assert inst.facts_by_predicate().get("q") is None
    assert len(inst) == 1


def test_instance_validation():
    schema = parse_schema("p(A)\n")
    with pytest.raises(InputError):
        Instance(schema, (Fact(1, "p", ("a",)), Fact(1, "p", ("b",))))
    with pytest.raises(InputError):
        Instance(schema, (Fact(0, "p", ("a",)),))
    with pytest.raises(InputError):
        Instance(schema, (Fact(1, "p", ("a", "b")),))
    with pytest.raises(InputError):
        Instance(schema, (Fact(1, "nope", ("a",)),))
    with pytest.raises(InputError):
        Instance(schema, (Fact(1, "p", ("a",)),), frozenset({9}))
    inst = Instance(schema, (Fact(2, "p", ("b",)), Fact(1, "p", ("a",))))
    assert inst.tids == (1, 2)  # normalized to tid order


def test_effective_endogenous_defaults_to_everything():
    schema = parse_schema("p(A)\n")
    inst = Instance(schema, (Fact(1, "p", ("a",)), Fact(2, "p", ("b",))))
    assert inst.effective_endogenous() == {1, 2}
    part = Instance(schema, inst.facts, frozenset({2}))
    assert part.effective_endogenous() == {2}


def test_comparison_semantics():
    # equality is plain string equality
    assert compare_values("01", "=", "01")
    assert not compare_values("01", "=", "1")
    assert compare_values("01", "!=", "1")
    # order is numeric when both sides are integers, lexicographic otherwise
    assert compare_values("9", "<", "10")
    assert compare_values("10", "<", "9x")  # lexicographic fallback
    assert compare_values("-2", "<", "1")
    assert compare_values("b", ">", "a")
    assert compare_values("3", "<=", "3")


def test_constraint_constructor_guards():
    with pytest.raises(InputError):
        DenialConstraint("c", ())
    with pytest.raises(InputError):
        DenialConstraint("c", (Atom("p", (Var("x"),)),),
                         (Comparison(Var("z"), "<", Var("x")),))
    with pytest.raises(InputError):
        Comparison(Var("x"), "~", Var("y"))
    with pytest.raises(InputError):
        ConstraintSet((DenialConstraint("c", (Atom("p", (Var("x"),)),)),
                       DenialConstraint("c", (Atom("q", (Var("x"),)),))))


def test_check_consistency(pqr, fd):
    _, cs, inst = pqr
    assert not check_consistency(inst, cs)
    assert check_consistency(inst.restrict({2, 3, 4}), cs)
    assert check_consistency(inst.restrict({1, 2}), cs)
    _, cs2, inst2 = fd
    assert not check_consistency(inst2, cs2)
    assert check_consistency(inst2.restrict({1, 3}), cs2)
    assert check_consistency(inst2.restrict({2}), cs2)


def test_constraint_str_reparses():
    schema = parse_schema("p(A)\nq(A, B)\n")
    cs = parse_constraints(
        'dc c1 : !exists p(x), q(x, y), x != "B 2", y >= 3\n', schema)
    round_trip = parse_constraints(str(cs.constraints[0]), schema)
    assert round_trip.constraints[0] == cs.constraints[0]

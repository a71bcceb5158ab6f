import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ground_src
from caspfzn.aspif import TheoryAtom, TheoryElement, TNumber, TSymbol, TCompound, make_program
from caspfzn.oracle import enumerate_answer_sets, enumerate_ir_models
from caspfzn.pipeline import compile_program
from caspfzn.theory import (DEFAULT_FALLBACK, CaspSpec, Cumulative, Disjoint, Distinct,
                            LinearConstraint, TheoryError, bound_or_default, cumulative_holds,
                            extract_casp, global_holds, strip_theory_heads)


def spec_of(p):
    return extract_casp(strip_theory_heads(p))


def test_listing1_spec(listing1):
    s = spec_of(listing1)
    assert s.vars == {"x", "y"}
    assert s.domains == {"x": (0, 2), "y": (0, 1)}
    # d :- &sum{x; y} != 3
    assert s.lin_atoms[7] == LinearConstraint((("y", 1), ("x", 1)), "!=", 3)
    assert s.lin_atoms[1] == LinearConstraint((("y", 1),), "=", 1)
    assert not s.globals and not s.lin_objective


def test_listing1_directives_stripped(listing1):
    b = strip_theory_heads(listing1)
    assert len(b.rules) == len(listing1.rules) - 2
    assert all(t.atom == 0 for t in b.theory_atoms if t.name.name == "dom")


def test_minimize_directive(tmp_path):
    p = ground_src("&dom{0..5} = makespan. &minimize{makespan}.", tmp_path)
    s = spec_of(p)
    assert s.lin_objective == (("makespan", 1),)
    assert s.objective_value({"makespan": 4}) == 4


def test_weighted_objective_with_constant(tmp_path):
    p = ground_src("&dom{0..3} = x. &dom{0..3} = y. &minimize{2*x; y; 7}.", tmp_path)
    s = spec_of(p)
    assert dict(s.lin_objective) == {"x": 2, "y": 1}
    assert s.objective_offset == 7


def test_rhs_variable_moved_left(tmp_path):
    p = ground_src("&dom{0..3} = x. &dom{0..3} = y. a :- &sum{x} <= y.", tmp_path)
    (lc,) = spec_of(p).lin_atoms.values()
    assert dict(lc.terms) == {"x": 1, "y": -1} and lc.op == "<=" and lc.rhs == 0


def test_empty_spec(p1):
    s = extract_casp(p1)
    assert s.is_empty() and s == CaspSpec()


def test_globals(tmp_path):
    src = """&dom{0..3} = s1. &dom{0..3} = s2.
    &distinct{s1; s2}.
    &disjoint{s1@2; s2@1}.
    &cumulative{s1@2@1; s2@1@2} <= 2."""
    s = spec_of(ground_src(src, tmp_path))
    assert Distinct(("s1", "s2")) in s.globals
    assert Disjoint((("s1", 2), ("s2", 1))) in s.globals
    assert Cumulative((("s1", 2, 1), ("s2", 1, 2)), 2) in s.globals


def test_bound_or_default():
    s = CaspSpec(vars=frozenset({"x", "z"}), domains={"x": (0, 1)})
    t = bound_or_default(s)
    assert t.domains == {"x": (0, 1), "z": DEFAULT_FALLBACK}
    assert t.defaulted == {"z"}
    assert bound_or_default(t) is t
    with pytest.raises(ValueError):
        bound_or_default(s, (1, 0))


def test_fallback_interval_can_exclude_models(tmp_path):
    p = ground_src("a :- &sum{z} >= 1. :- not a.", tmp_path)
    assert compile_program(p, fallback=(0, 5)).spec.defaulted == {"z"}
    c = compile_program(p, fallback=(0, 0))
    assert enumerate_ir_models(c.model) == []
    c = compile_program(p, fallback=(0, 2))
    assert len(enumerate_answer_sets(c.program, c.spec)) == 2


@pytest.mark.parametrize("src,reason", [
    ("&dom{0..1; 3..4} = x.", "non-contiguous domains are not supported"),
    ("&dom{2..1} = x.", "empty domain"),
    ("&dom{0..2} = x. &dom{3..4} = x.", "empty domain for x"),
    ("a :- &sum{x*y} <= 2.", None),
])
def test_theory_errors(tmp_path, src, reason):
    p = ground_src(src, tmp_path)
    with pytest.raises(TheoryError) as e:
        spec_of(p)
    if reason:
        assert e.value.reason == reason


X = TheoryElement((TSymbol("x"),))


def test_sum_directive_rejected():
    a = TheoryAtom(0, TSymbol("sum"), (X,), ("<=", TNumber(2)))
    with pytest.raises(TheoryError) as e:
        extract_casp(make_program([], theory_atoms=[a]))
    assert e.value.reason == "&sum used as a directive"


def test_conditional_dom_rejected():
    from conftest import rule
    el = TheoryElement((TCompound("..", (TNumber(0), TNumber(2))),))
    dom = TheoryAtom(2, TSymbol("dom"), (el,), ("=", TSymbol("x")))
    p = make_program([rule([2], 1), rule([1])], theory_atoms=[dom])
    with pytest.raises(TheoryError) as e:
        extract_casp(p)
    assert e.value.reason == "&dom is only supported as an unconditional fact"


def test_distinct_guard_rejected():
    a = TheoryAtom(0, TSymbol("distinct"), (X,), ("=", TSymbol("z")))
    with pytest.raises(TheoryError):
        extract_casp(make_program([], theory_atoms=[a]))


def test_reified_twice_rejected():
    t = lambda op: TheoryAtom(1, TSymbol("sum"), (TheoryElement((TSymbol("x"),)),),
                              (op, TNumber(1)))
    p = make_program([], atoms=[1], theory_atoms=[t("<="), t(">=")])
    with pytest.raises(TheoryError):
        extract_casp(p)


def test_unknown_theory_atom():
    a = TheoryAtom(0, TSymbol("nonsense"), ())
    with pytest.raises(TheoryError):
        extract_casp(make_program([], theory_atoms=[a]))


def test_cumulative_profile():
    assert cumulative_holds([(0, 2, 1), (1, 2, 1)], 2)
    assert not cumulative_holds([(0, 2, 1), (1, 2, 1)], 1)
    assert cumulative_holds([(0, 2, 1), (2, 2, 1)], 1)
    assert cumulative_holds([(0, 0, 5)], 1)  # zero-length tasks use nothing
    assert not cumulative_holds([(0, -1, 1)], 1)


tasks = st.lists(st.tuples(st.integers(-2, 4), st.integers(0, 3)), min_size=1, max_size=4)


@given(tasks)
def test_unit_cumulative_is_disjoint(ts):
    names = {f"s{i}": s for i, (s, _) in enumerate(ts)}
    d = Disjoint(tuple((f"s{i}", l) for i, (_, l) in enumerate(ts)))
    c = Cumulative(tuple((f"s{i}", l, 1) for i, (_, l) in enumerate(ts)), 1)
    assert global_holds(d, names) == global_holds(c, names)
    # pairwise non-overlap of positive-length intervals
    pos = [(s, l) for s, l in ts if l > 0]
    pairwise = all(s1 + l1 <= s2 or s2 + l2 <= s1
                   for i, (s1, l1) in enumerate(pos) for s2, l2 in pos[i + 1:])
    assert global_holds(d, names) == pairwise


@given(st.lists(st.integers(0, 3), min_size=1, max_size=5))
def test_distinct_holds(vals):
    a = {f"v{i}": v for i, v in enumerate(vals)}
    assert global_holds(Distinct(tuple(a)), a) == (len(set(vals)) == len(vals))


SRC = """&dom{0..2} = x. &dom{1..3} = y.
a :- &sum{x; 2*y} <= 4.
b :- &sum{x} != y.
&distinct{x; y}.
&minimize{x; y}.
"""


@given(st.integers(0, 1000))
def test_statement_order_irrelevant(tmp_path_factory, seed):
    p = ground_src(SRC, tmp_path_factory.mktemp("g"))
    theory = list(p.theory_atoms)
    random.Random(seed).shuffle(theory)
    q = make_program(p.rules, atoms=p.atoms, minimize=p.minimize,
                     theory_atoms=theory, shows=p.shows)
    a, b = spec_of(p), spec_of(q)
    assert (a.vars, dict(a.domains), dict(a.lin_atoms), set(a.globals), dict(a.lin_objective)) == \
           (b.vars, dict(b.domains), dict(b.lin_atoms), set(b.globals), dict(b.lin_objective))


def test_interval_element_as_compound():
    el = TheoryElement((TCompound("..", (TNumber(1), TNumber(3))),))
    dom = TheoryAtom(0, TSymbol("dom"), (el,), ("=", TSymbol("x")))
    s = extract_casp(make_program([], theory_atoms=[dom]))
    assert s.domains == {"x": (1, 3)}

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A, B, C, D, rule, wrule
from caspfzn.aspif import MinimizeEntry, make_program
from caspfzn.gen import GenConfig, random_program
from caspfzn.oracle import (INF, Verdict, check_correspondence, check_ranked_supported,
                            enumerate_answer_sets, find_ranking, lexicographic_optima,
                            make_einterp, optimal_cost, plain_answer_sets, sorted_interps)
from caspfzn.pipeline import compile_program
from caspfzn.search import SearchSpaceTooLarge
from caspfzn.theory import CaspSpec, LinearConstraint


def test_p1_answer_sets(p1):
    assert plain_answer_sets(p1) == [frozenset({A, C}), frozenset({B, C}), frozenset({C})]


def test_q_answer_sets(q):
    assert plain_answer_sets(q) == [frozenset()]


def test_empty_program():
    assert plain_answer_sets(make_program([])) == [frozenset()]


def test_disjunction_minimal():
    # a | b.   a <- b.   only {a}
    p = make_program([rule([1, 2]), rule([1], 2)])
    assert plain_answer_sets(p) == [frozenset({1})]


def test_choice_reduct():
    # {a}.  b <- a.
    p = make_program([rule([1], choice=True), rule([2], 1)])
    assert plain_answer_sets(p) == [frozenset(), frozenset({1, 2})]


def test_cap():
    p = make_program([rule([a], choice=True) for a in range(1, 9)])
    with pytest.raises(SearchSpaceTooLarge):
        plain_answer_sets(p, cap=2**7)


def test_weighted_negative_literal_evaluated_in_candidate():
    # a <- 1 <= {not a:1, b:1}.  {b} <- a.
    a, b = 1, 2
    p = make_program([wrule([a], 1, [(-a, 1), (b, 1)]), rule([b], a, choice=True)])
    assert plain_answer_sets(p) == []
    # a reduct that keeps "not a" unevaluated admits {a, b}
    assert plain_answer_sets(p, reduct="flp") == [frozenset({a, b})]
    c = compile_program(p)
    v = check_correspondence(c.original, c.spec, c.model, True)
    assert v.kind == "OneToOne" and v.models == 0


@given(st.integers(0, 10**6))
def test_least_model_shortcut_agrees(seed):
    p = random_program(seed, GenConfig(max_atoms=6, max_rules=8))
    assert plain_answer_sets(p) == plain_answer_sets(p, use_subsets=True)


@given(st.integers(0, 10**6))
def test_reducts_agree_without_weighted_negation(seed):
    p = random_program(seed, GenConfig(max_atoms=6, max_rules=8, weighted_ratio=0.0))
    assert plain_answer_sets(p) == plain_answer_sets(p, reduct="flp")


# --- constraint answer sets ---------------------------------------------------

def test_constraint_answer_sets():
    # a <- [x >= 1].  x in 0..2   (a reifies the constraint and needs no rule)
    spec = CaspSpec(frozenset({"x"}), {"x": (0, 2)}, {1: LinearConstraint((("x", 1),), ">=", 1)})
    p = make_program([], atoms=[1])
    got = sorted_interps(enumerate_answer_sets(p, spec))
    assert got == [make_einterp([], {"x": 0}), make_einterp([1], {"x": 1}),
                   make_einterp([1], {"x": 2})]


def test_unbounded_variable_rejected():
    spec = CaspSpec(frozenset({"x"}), {}, {1: LinearConstraint((("x", 1),), ">=", 1)})
    with pytest.raises(ValueError):
        enumerate_answer_sets(make_program([], atoms=[1]), spec)


# --- ranked support -----------------------------------------------------------

def test_ranked_supported_examples(p1):
    assert check_ranked_supported(p1, {A, C}, {A: 2, C: 1, B: INF, D: INF})
    # a cannot have a rank below its support c
    r = check_ranked_supported(p1, {A, C}, {A: 1, C: 1, B: INF, D: INF})
    assert not r and "atom 1 is unsupported" in r.problems
    r = check_ranked_supported(p1, {A, C}, {A: 2, C: INF, B: INF, D: INF})
    assert not r


def test_positive_loop_unsupported(q):
    assert find_ranking(q, {1, 2}) is None
    assert find_ranking(q, set()) == {1: INF, 2: INF}


def test_modular_rank_bound(q):
    p = make_program([rule([1], 2), rule([2], 1), rule([1])])
    ranks = find_ranking(p, {1, 2}, variant="modular")
    assert ranks == {1: 1, 2: 2}
    r = check_ranked_supported(p, {1, 2}, {1: 1, 2: 3}, variant="modular")
    assert not r and "exceeds its SCC size" in r.problems[0]


def test_free_atoms_need_no_support():
    p = make_program([], atoms=[1])
    assert not check_ranked_supported(p, {1}, {1: 1})
    assert check_ranked_supported(p, {1}, {1: 1}, free=[1])


def test_bad_variant(p1):
    with pytest.raises(ValueError):
        check_ranked_supported(p1, set(), {}, variant="other")


SMALL = GenConfig(max_atoms=4, max_rules=6)


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from(["plain", "scc", "modular"]))
def test_answer_sets_are_ranked_supported_models(seed, variant):
    p = random_program(seed, SMALL)
    answer = set(plain_answer_sets(p))
    atoms = sorted(p.atoms)
    for bits in itertools.product((0, 1), repeat=len(atoms)):
        i = frozenset(a for a, b in zip(atoms, bits) if b)
        assert (find_ranking(p, i, variant=variant) is not None) == (i in answer), (i, variant)


# --- verdicts and optimization -----------------------------------------------

def test_verdict_strings():
    assert str(Verdict("OneToOne", answer_sets=8, models=8)) == "OneToOne (8 answer sets, 8 models)"
    w = make_einterp([1, 2])
    assert str(Verdict("Mismatch", w, "answer set only")) == "Mismatch: {1,2} (answer set only)"
    assert not Verdict("Mismatch").ok and Verdict("ProjectionEqual").ok


def test_optimal_cost():
    # {a; b}.  :- not a, not b.  minimize a:2, b:1
    p = make_program([rule([1, 2], choice=True), rule([], -1, -2)],
                     minimize=[MinimizeEntry(1, 2, 0), MinimizeEntry(2, 1, 0)])
    assert optimal_cost(p) == 1
    assert lexicographic_optima(p, enumerate_answer_sets(p)) == {frozenset({2})}


def test_optimal_cost_unsat():
    p = make_program([rule([], 1), rule([1])])
    assert optimal_cost(p) is None

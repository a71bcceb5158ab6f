import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A, B, C, EXAMPLE3, L1, rule, shown, wrule
from caspfzn.analysis import NotHcfError
from caspfzn.aspif import MinimizeEntry, make_program
from caspfzn.gen import GenConfig, random_program
from caspfzn.ir import Clause, Implication, Linear, Lit, ReifAnd, ReifLinear
from caspfzn.oracle import (check_correspondence, enumerate_answer_sets, enumerate_ir_models,
                            optimal_cost, project_model, ranks_unique, min_ir_objective)
from caspfzn.pipeline import compile_program
from caspfzn.translate import (PartialShiftViolation, VarRegistry as R, tr_ranking, tr_rule,
                               tr_support, translate)


def verdict(p, strict=True, linear=False):
    c = compile_program(p, strict=strict, linear=linear)
    return check_correspondence(c.original, c.spec, c.model, strict)


# --- ranking group ---------------------------------------------------------

def test_tight_program_has_no_ranks(p1):
    assert tr_ranking(p1) == []
    assert translate(p1).rank_var == {}


def test_q_ranking_counts(q):
    assert len(tr_ranking(q)) == 8
    assert len(tr_ranking(q, strict=False)) == 4


def test_q_ranking_constraints(q):
    got = tr_ranking(q, strict=False)
    assert ReifLinear("x_1", (("l_1", 1),), "<=", 2) in got
    assert ReifLinear("dep_1_2", (("l_1", -1), ("l_2", 1)), "<=", -1) in got
    strict = tr_ranking(q)
    assert ReifLinear("y_1_2", (("l_1", -1), ("l_2", 1)), "<=", -2) in strict
    assert ReifAnd("gap_1_2", (Lit("x_1"), Lit("x_2"), Lit("y_1_2"))) in strict


def test_rank_domains(q):
    m = translate(q)
    assert m.vars["l_1"].bounds == (1, 3)
    assert m.rank_var == {1: "l_1", 2: "l_2"}


# --- rules -------------------------------------------------------------------

def test_p1_constraint_row(p1):
    # <- 3 <= {a:1, b:2}   becomes   x_a + 2 x_b <= 2
    assert tr_rule(p1, 1) == [Linear((("x_1", 1), ("x_2", 2)), "<=", 2)]


def test_p1_completion(p1):
    got = tr_rule(p1, 2)
    assert ReifAnd("bd_2", (Lit("x_4", True),)) in got
    assert ReifAnd("sp_2_3", (Lit("bd_2"),)) in got
    assert Implication(Lit("sp_2_3"), Lit("x_3")) in got


def test_choice_rule_has_no_implication(p1):
    got = tr_rule(p1, 0)
    assert ReifAnd("sp_0_1", (Lit("bd_0"),)) in got
    assert not any(isinstance(c, Implication) for c in got)


def test_q_cyclic_body(q):
    got = tr_rule(q, 0, strict=False)
    assert got == [ReifAnd("bda_0_1", (Lit("dep_1_2"),)),
                   ReifAnd("sp_0_1", (Lit("bda_0_1"),)),
                   Implication(Lit("sp_0_1"), Lit("x_1"))]
    strict = tr_rule(q, 0)
    assert Clause((Lit("bda_0_1", True), Lit("gap_1_2", True))) in strict


def test_disjunctive_head_group():
    # a | b <- c.  c.
    p = make_program([rule([1, 2], 3), rule([3])])
    got = tr_rule(p, 0)
    assert ReifAnd("sp_0_1", (Lit("bd_0"), Lit("x_2", True))) in got
    assert ReifAnd("sp_0_2", (Lit("bd_0"), Lit("x_1", True))) in got
    assert Clause((Lit("x_1"), Lit("x_2"), Lit("bd_0", True))) in got


def test_fact_body_fixed_true():
    p = make_program([rule([1])])
    m = translate(p)
    assert m.vars["bd_0"].fixed is True
    assert tr_rule(p, 0) == [ReifAnd("sp_0_1", (Lit("bd_0"),)),
                             Implication(Lit("sp_0_1"), Lit("x_1"))]


def test_cyclic_weighted_body():
    # a <- 1 <= {b:1, c:1}.  b <- a.  (c is outside the SCC)
    p = make_program([wrule([1], 1, [(2, 1), (3, 1)]), rule([2], 1)], atoms=[1, 2, 3])
    got = tr_rule(p, 0)
    names = {c.target for c in got if hasattr(c, "target")}
    assert {"ext_0_1", "int_0_1", "aux_0_1", "bda_0_1", "sp_0_1"} <= names
    assert Linear((("ext_0_1", 3), ("x_1", 3), ("l_1", 1)), "<=", 7) in got
    nonstrict = tr_rule(p, 0, strict=False)
    assert not any(getattr(c, "target", "") == "aux_0_1" for c in nonstrict)


# --- support -----------------------------------------------------------------

def test_support_clauses(p1):
    got = tr_support(p1)
    assert Clause((Lit("sp_2_3"), Lit("x_3", True))) in got
    # d never occurs in a head: unit clause
    assert Clause((Lit("x_4", True),)) in got
    assert len(got) == 4


def test_linear_atoms_need_no_support(listing1):
    c = compile_program(listing1)
    support = [x for x, g in zip(c.model.constraints, c.model.groups) if g == "support"]
    mentioned = {l.var for cl in support for l in cl.lits}
    for a in c.spec.lin_atoms:
        assert R.atom(a) not in mentioned


# --- whole translation -------------------------------------------------------

def test_p1_solutions(p1):
    m = translate(p1)
    models = enumerate_ir_models(m)
    got = sorted(sorted(project_model(m, x, p1.atoms, ()).atoms) for x in models)
    assert got == sorted([[C], [A, C], [B, C]])


def test_empty_program_one_solution():
    m = translate(make_program([]))
    assert enumerate_ir_models(m) == [{}]


def test_listing1_eight_solutions(listing1):
    c = compile_program(listing1)
    v = check_correspondence(c.original, c.spec, c.model, True)
    assert v.kind == "OneToOne" and v.answer_sets == v.models == 8
    got = sorted((sorted(shown(e)), e.delta["x"], e.delta["y"])
                 for e in enumerate_answer_sets(c.original, c.spec))
    assert got == sorted((sorted(s), x, y) for s, x, y in EXAMPLE3)


def test_listing1_non_strict(listing1):
    assert verdict(listing1, strict=False).kind == "ProjectionEqual"


def test_listing1_linearized(listing1):
    v = verdict(listing1, linear=True)
    assert v.kind == "OneToOne" and v.models == 8


def test_not_hcf_rejected():
    with pytest.raises(NotHcfError):
        translate(make_program([rule([1, 2], 3), rule([1], 2), rule([2], 1)]))


def test_unshifted_rejected():
    p = make_program([rule([1, 3], 2), rule([2], 1)])
    with pytest.raises(PartialShiftViolation):
        translate(p)
    assert verdict(p).ok


def test_disjunction_in_nontrivial_scc_ranked_by_support():
    # a | c <- d.  c.  d.  f.  a <- e.  e <- a.  e <- f.
    a, c, d, e, f = 1, 2, 3, 4, 5
    p = make_program([rule([a, c], d), rule([c]), rule([d]), rule([f]),
                      rule([a], e), rule([e], a), rule([e], f)])
    v = verdict(p)
    assert v.kind == "OneToOne" and v.answer_sets == 1
    m = compile_program(p).model
    assert ranks_unique(m, enumerate_ir_models(m))


def test_normal_disjunction_in_cycle_shifted():
    # a | c <- b.  b <- a.
    p = make_program([rule([1, 3], 2), rule([2], 1)])
    v = verdict(p)
    assert v.kind == "OneToOne" and v.answer_sets == 1


def test_minimize_objective():
    p = make_program([rule([1, 2], choice=True)],
                     minimize=[MinimizeEntry(-1, 2, 0), MinimizeEntry(2, 1, 0)])
    m = translate(p)
    assert dict(m.objective) == {"x_1": -2, "x_2": 1}
    assert m.objective_offset == 2
    assert min_ir_objective(m) == optimal_cost(p) == 0


def test_variable_names_deterministic(listing1):
    a = compile_program(listing1).model
    b = compile_program(listing1).model
    assert list(a.vars) == list(b.vars) and a.constraints == b.constraints


# --- theorem checks on random programs --------------------------------------

CFG = GenConfig(max_atoms=6, max_rules=8)


@given(st.integers(0, 10**6), st.booleans())
def test_translation_corresponds(seed, strict):
    p = random_program(seed, CFG)
    v = verdict(p, strict)
    assert v.ok, str(v)
    if strict:
        assert v.kind == "OneToOne"


@given(st.integers(0, 10**6))
def test_translation_corresponds_with_theory(seed):
    p = random_program(seed, GenConfig(max_atoms=5, max_rules=6, lin_vars=2))
    assert verdict(p).kind == "OneToOne"


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_linearized_translation_corresponds(seed):
    p = random_program(seed, GenConfig(max_atoms=5, max_rules=6, lin_vars=1))
    assert verdict(p, linear=True).kind == "OneToOne"


@given(st.integers(0, 10**6))
def test_strict_ranks_unique(seed):
    p = random_program(seed, CFG)
    m = compile_program(p).model
    assert ranks_unique(m, enumerate_ir_models(m))


@given(st.integers(0, 10**6))
def test_optimum_preserved(seed):
    p = random_program(seed, GenConfig(max_atoms=5, max_rules=6, lin_vars=1, minimize=True,
                                       lin_objective=True))
    c = compile_program(p)
    assert min_ir_objective(c.model) == optimal_cost(c.original, c.spec)


def test_atom_variable_for_every_atom(listing1):
    m = compile_program(listing1).model
    assert set(m.atom_var) == compile_program(listing1).program.atoms
    assert m.atom_var[L1["c"]] == "x_11"

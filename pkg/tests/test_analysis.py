import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import A, B, C, D, rule, wrule
from caspfzn.analysis import (NotHcfError, build_dep_graph, is_hcf, is_tight, needs_shift,
                              partially_shift)
from caspfzn.aspif import NormalBody, Rule, make_program
from caspfzn.gen import GenConfig, random_program, random_violating_program
from caspfzn.oracle import plain_answer_sets


def test_p1_graph(p1):
    s = build_dep_graph(p1)
    edges = {(a, b) for a, bs in s.edges.items() for b in bs}
    assert edges == {(A, C), (B, C)}
    assert s.is_tight() and is_tight(p1)
    assert all(s.size(x) == 1 for x in (A, B, C, D))


def test_q_one_scc(q):
    s = build_dep_graph(q)
    assert s.same(1, 2) and s.size(1) == 2
    assert not s.is_tight()


def test_empty_program_tight():
    s = build_dep_graph(make_program([]))
    assert s.edges == {} and s.is_tight()


def test_hcf_examples(p1):
    assert is_hcf(p1)
    assert not is_hcf(make_program([rule([1, 2], 3), rule([1], 2), rule([2], 1)]))
    assert is_hcf(make_program([rule([1]), rule([2])]))


def test_choice_rules_ignored_by_hcf():
    assert is_hcf(make_program([rule([1, 2], 3, choice=True), rule([1], 2), rule([2], 1)]))


def test_shift_identity_when_conforming(p1):
    assert partially_shift(p1) is p1


def test_shift_weighted_example():
    # a | b <- 1 <= {c:1}.  c <- a.
    a, b, c = 1, 2, 3
    p = make_program([wrule([a, b], 1, [(c, 1)]), rule([c], a)])
    q = partially_shift(p)
    aux = 4
    assert q.rules == (
        Rule((aux,), p.rules[0].body),
        Rule((a,), NormalBody((aux,), (b,))),
        Rule((b,), NormalBody((aux,), (a,))),
        Rule((c,), NormalBody((a,), ())),
    )
    before = plain_answer_sets(p)
    after = {s & p.atoms for s in plain_answer_sets(q)}
    assert set(before) == after


def test_shift_normal_disjunction_in_cycle():
    # a | c <- b.  b <- a.   the head atom a shares an SCC with the body atom b
    p = make_program([rule([1, 3], 2), rule([2], 1)])
    s = build_dep_graph(p)
    assert needs_shift(p.rules[0], s)
    q = partially_shift(p)
    assert q.rules[:2] == (rule([1], 2, -3), rule([3], 2, -1))


def test_choice_rules_never_shifted():
    p = make_program([wrule([1, 2], 1, [(3, 1)], choice=True), rule([3], 1)])
    assert partially_shift(p) is p


def test_shift_rejects_non_hcf():
    with pytest.raises(NotHcfError):
        partially_shift(make_program([rule([1, 2], 3), rule([1], 2), rule([2], 1)]))


@given(st.integers(0, 5000))
def test_scc_partition_matches_networkx(seed):
    p = random_program(seed, GenConfig(max_atoms=8, max_rules=10))
    s = build_dep_graph(p)
    g = nx.DiGraph()
    g.add_nodes_from(p.atoms)
    for r in p.rules:
        g.add_edges_from((a, b) for a in r.head for b in r.pos)
    assert {(a, b) for a, bs in s.edges.items() for b in bs} == set(g.edges)
    expected = {frozenset(c) for c in nx.strongly_connected_components(g)}
    got: dict[int, set] = {}
    for a, cid in s.scc_id.items():
        got.setdefault(cid, set()).add(a)
    assert {frozenset(c) for c in got.values()} == expected
    assert s.is_tight() == nx.is_directed_acyclic_graph(g)


@given(st.integers(0, 5000))
def test_dep_graph_deterministic(seed):
    p = random_program(seed)
    assert build_dep_graph(p) == build_dep_graph(p)


@given(st.integers(0, 5000))
def test_shift_preserves_answer_sets(seed):
    p = random_violating_program(seed)
    q = partially_shift(p)
    s = build_dep_graph(q)
    assert not any(needs_shift(r, s) for r in q.rules)
    assert set(plain_answer_sets(p)) == {a & p.atoms for a in plain_answer_sets(q)}


def test_deep_chain_no_recursion_limit():
    n = 5000
    rules = [rule([i], i + 1) for i in range(1, n)] + [rule([n], 1)]
    s = build_dep_graph(make_program(rules))
    assert s.size(1) == n

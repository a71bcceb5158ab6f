import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from caspfzn.aspif import (AspifSyntaxError, GroundProgram, MinimizeEntry, NormalBody, Rule,
                           TautologyError, UnsupportedStatement, WeightedBody, compile_priorities,
                           cost, make_program, normalize_weighted, parse_aspif, write_aspif)
from caspfzn.gen import GenConfig, random_program
from caspfzn.oracle import lexicographic_key


def test_empty_program():
    p = parse_aspif("asp 1 0 0\n0\n")
    assert p.rules == () and p.atoms == frozenset()


def test_fact():
    p = parse_aspif("asp 1 0 0\n1 0 1 1 0 0\n0\n")
    assert p.rules == (Rule((1,), NormalBody()),)
    assert p.atoms == {1}


def test_listing1_statement_counts(listing1):
    # gringo moves the weighted constraint into an auxiliary atom (14 :- 3 <= {...}; :- 14)
    choice = [r for r in listing1.rules if r.choice]
    weighted = [r for r in listing1.rules if r.weighted]
    constraints = [r for r in listing1.rules if r.is_constraint]
    assert len(choice) == 1 and choice[0].head == (12, 13)
    assert len(weighted) == 1 and weighted[0].body == WeightedBody(3, ((12, 1), (13, 2)))
    assert len(constraints) == 1
    assert len(listing1.rules) == 10
    assert len(listing1.theory_atoms) == 6
    assert len(listing1.shows) == 7


def test_bytes_and_stream_input(listing1_text, listing1):
    import io
    assert parse_aspif(listing1_text.encode()) == listing1
    assert parse_aspif(io.BytesIO(listing1_text.encode())) == listing1


def test_negative_weights_normalized():
    p = parse_aspif("asp 1 0 0\n1 0 1 1 1 1 2 2 -2 3 1\n0\n")
    assert p.rules[0].body == WeightedBody(3, ((-2, 2), (3, 1)))


def test_duplicate_literals_merged():
    assert normalize_weighted(2, [(1, 1), (1, 2), (-2, 1)]) == WeightedBody(2, ((1, 3), (-2, 1)))
    # merging can cancel a literal's weight to zero
    assert normalize_weighted(1, [(1, 2), (1, -2)]) == WeightedBody(1, ((1, 0),))


@pytest.mark.parametrize("text,line", [
    ("asp 1 0 0\n1 0 1\n0\n", 2),
    ("asp 1 0 0\n1 0 1 1 0 1 0\n0\n", 2),
    ("asp 1 0 0\n1 3 1 1 0 0\n0\n", 2),
    ("asp 1 0 0\n1 0 1 1 0 0\n", 2),
    ("asp 1 0 0\n0\n1 0 1 1 0 0\n", 3),
    ("asp 1 0 0\n42\n0\n", 2),
    ("asp 1 0 0\n1 0 1 1 0 1 x\n0\n", 2),
    ("nope\n0\n", 1),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(AspifSyntaxError) as e:
        parse_aspif(text)
    assert e.value.line == line


@pytest.mark.parametrize("stmt,kind", [
    ("5 1 2", "external"), ("7 0 1 0 0 0", "heuristic"), ("8 1 2 0", "edge"),
    ("6 1 1", "assumption"), ("3 1 1", "project"),
])
def test_unsupported_statements(stmt, kind):
    with pytest.raises(UnsupportedStatement) as e:
        parse_aspif(f"asp 1 0 0\n{stmt}\n0\n")
    assert e.value.kind == kind


def test_incremental_header_rejected():
    with pytest.raises(UnsupportedStatement):
        parse_aspif("asp 1 0 0 incremental\n0\n")


def test_tautology_rejected():
    with pytest.raises(TautologyError):
        parse_aspif("asp 1 0 0\n1 0 1 1 0 1 1\n0\n")
    with pytest.raises(TautologyError):
        make_program([Rule((1,), normalize_weighted(1, [(1, 1)]))])


def test_atom_zero_reserved():
    with pytest.raises(Exception):
        make_program([Rule((0,))])


def test_comments_skipped():
    p = parse_aspif("asp 1 0 0\n10 hello world\n1 0 1 1 0 0\n0\n")
    assert len(p.rules) == 1


# --- priority compilation --------------------------------------------------

def test_single_level_unchanged():
    es = [MinimizeEntry(1, 1, 0), MinimizeEntry(2, 2, 0)]
    assert compile_priorities(es) == tuple(es)


def test_two_levels_scaled():
    es = [MinimizeEntry(1, 1, 1), MinimizeEntry(2, 1, 0), MinimizeEntry(3, 1, 0)]
    got = {e.literal: e.weight for e in compile_priorities(es)}
    assert got == {1: 3, 2: 1, 3: 1}


def test_two_levels_order_matches_lexicographic():
    es = [MinimizeEntry(1, 1, 1), MinimizeEntry(2, 1, 0), MinimizeEntry(3, 1, 0)]
    flat = compile_priorities(es)
    interps = [frozenset(a for a, bit in zip((1, 2, 3), bits) if bit)
               for bits in itertools.product((0, 1), repeat=3)]
    for i, j in itertools.product(interps, repeat=2):
        lex = (lexicographic_key(es, i) > lexicographic_key(es, j)) - (lexicographic_key(es, i) < lexicographic_key(es, j))
        sc = (cost(flat, i) > cost(flat, j)) - (cost(flat, i) < cost(flat, j))
        assert lex == sc


def test_empty_priorities():
    assert compile_priorities([]) == ()
    assert cost(compile_priorities([]), frozenset({1})) == 0


def test_priority_overflow():
    with pytest.raises(OverflowError):
        compile_priorities([MinimizeEntry(1, 2**20, 0), MinimizeEntry(2, 2**20, 1)])


def test_negative_minimize_literal_cost():
    es = (MinimizeEntry(-1, 2, 0),)
    assert cost(es, frozenset()) == 2
    assert cost(es, frozenset({1})) == 0


# --- properties ------------------------------------------------------------

@given(st.integers(0, 10_000))
def test_round_trip(seed):
    p = random_program(seed, GenConfig(lin_vars=2, minimize=True, lin_objective=True))
    text = write_aspif(p)
    q = parse_aspif(text)
    # atoms that occur in no statement have no ASPIF representation
    assert (q.rules, q.minimize, q.theory_atoms, q.shows) == (p.rules, p.minimize,
                                                              p.theory_atoms, p.shows)
    assert q.atoms <= p.atoms
    assert parse_aspif(write_aspif(q)) == q
    assert write_aspif(q) == text


def test_round_trip_listing1(listing1):
    assert parse_aspif(write_aspif(listing1)) == listing1


lits = st.lists(st.tuples(st.integers(1, 6).flatmap(lambda a: st.sampled_from((a, -a))),
                          st.integers(-3, 3)), max_size=6)


@given(lits, st.integers(-4, 8), st.integers(0, 63))
def test_weight_normalization_preserves_satisfaction(body, bound, mask):
    interp = {a for a in range(1, 7) if mask >> (a - 1) & 1}

    def true(l):
        return (l in interp) if l > 0 else (-l not in interp)

    original = sum(w for l, w in body if true(l)) >= bound
    nb = normalize_weighted(bound, body)
    assert all(w >= 0 for _, w in nb.lits)
    assert (sum(w for l, w in nb.lits if true(l)) >= nb.bound) == original


entries = st.lists(st.builds(MinimizeEntry,
                             st.integers(1, 8).flatmap(lambda a: st.sampled_from((a, -a))),
                             st.integers(-3, 3), st.integers(0, 1)), max_size=6)


@given(entries)
def test_priority_compilation_preserves_argmin(es):
    flat = compile_priorities(es)
    interps = [frozenset(a for a in range(1, 9) if m >> (a - 1) & 1) for m in range(256)]
    lex = {i: lexicographic_key(es, i) for i in interps}
    sc = {i: cost(flat, i) for i in interps}
    best_lex = min(lex.values())
    best_sc = min(sc.values())
    assert {i for i in interps if lex[i] == best_lex} == {i for i in interps if sc[i] == best_sc}


def test_program_helpers(listing1):
    assert isinstance(listing1, GroundProgram)
    assert listing1.shown_atoms[11] == "c"
    assert listing1.max_atom() == 14
    occ = listing1.head_occurrences()
    assert occ[12] == occ[13] == [7]

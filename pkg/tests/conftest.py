import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from caspfzn.aspif import NormalBody, Rule, make_program, normalize_weighted, parse_aspif

settings.register_profile("ci", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

DATA = Path(__file__).parent / "data"

# Example 1: {a;b} <- c.  <- 3 <= {a:1, b:2}.  c <- not d.
A, B, C, D = 1, 2, 3, 4


def body(*lits):
    return NormalBody(tuple(l for l in lits if l > 0), tuple(-l for l in lits if l < 0))


def rule(head, *lits, choice=False):
    return Rule(tuple(head), body(*lits), choice)


def wrule(head, bound, lits, choice=False):
    return Rule(tuple(head), normalize_weighted(bound, lits), choice)


def program_p1():
    return make_program([
        rule([A, B], C, choice=True),
        wrule([], 3, [(A, 1), (B, 2)]),
        rule([C], -D),
    ], atoms=[A, B, C, D])


def program_q():
    return make_program([rule([1], 2), rule([2], 1)])


@pytest.fixture
def p1():
    return program_p1()


@pytest.fixture
def q():
    return program_q()


@pytest.fixture
def listing1_text():
    return (DATA / "listing1.aspif").read_text()


@pytest.fixture
def listing1(listing1_text):
    return parse_aspif(listing1_text)


# atom ids in the grounded Listing 1 fixture
L1 = {"c": 11, "a": 12, "b": 13, "d": 8, "val(y,1)": 2, "val(x,1)": 4, "val(x,2)": 6}

# Example 3: the eight constraint answer sets, as (shown atoms, x, y)
EXAMPLE3 = [
    ({"d", "val(y,1)"}, 0, 1),
    ({"d", "val(y,1)", "val(x,1)"}, 1, 1),
    ({"c", "val(y,1)", "val(x,2)"}, 2, 1),
    ({"c", "a", "val(y,1)", "val(x,2)"}, 2, 1),
    ({"c", "b", "val(y,1)", "val(x,2)"}, 2, 1),
    ({"d", "val(x,2)"}, 2, 0),
    ({"d"}, 0, 0),
    ({"d", "val(x,1)"}, 1, 0),
]


def ground_src(src, tmp_path):
    """Ground an ASP source string with the clingo module."""
    pytest.importorskip("clingo")
    from caspfzn.grounding import ground_with_clingo
    f = tmp_path / "prog.lp"
    f.write_text(src)
    return parse_aspif(ground_with_clingo([str(f)]))


def shown(e):
    names = {v: k for k, v in L1.items()}
    return {names[a] for a in e.atoms if a in names}


sys.path.insert(0, str(Path(__file__).parent))


def milp_completable(lin, point):
    """Exact check, via HiGHS, that the linear model ``lin`` has a solution extending ``point``."""
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    names = list(lin.vars)
    col = {v: i for i, v in enumerate(names)}
    lo = np.array([point.get(v, lin.bounds(v)[0]) for v in names], dtype=float)
    hi = np.array([point.get(v, lin.bounds(v)[1]) for v in names], dtype=float)
    rows, rlo, rhi = [], [], []
    for c in lin.constraints:
        row = np.zeros(len(names))
        for v, k in c.terms:
            row[col[v]] += k
        rows.append(row)
        rlo.append(c.rhs if c.op == "=" else -np.inf)
        rhi.append(c.rhs)
    cons = [LinearConstraint(np.array(rows), rlo, rhi)] if rows else []
    res = milp(np.zeros(len(names)), constraints=cons, integrality=np.ones(len(names)),
               bounds=Bounds(lo, hi))
    return res.status == 0

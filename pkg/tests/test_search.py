import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from caspfzn import search
from caspfzn.gen import GenConfig, random_model, random_program
from caspfzn.ir import Clause, ConstraintModel, Linear, Lit
from caspfzn.pipeline import compile_program
from caspfzn.search import SearchSpaceTooLarge, flatten, run_search, variable_order

needs_kernel = pytest.mark.skipif(search.BACKEND != "cython",
                                  reason="compiled kernel not built")


def brute(m):
    names = list(m.vars)
    ranges = [range(m.bounds(v)[0], m.bounds(v)[1] + 1) for v in names]
    return sorted(x for x in itertools.product(*ranges) if m.satisfies(dict(zip(names, x))))


def solutions(m, **kw):
    names = list(m.vars)
    return sorted(tuple(a[v] for v in names) for a in run_search(m, **kw).assignments())


@given(st.integers(0, 100_000))
def test_python_kernel_matches_brute_force(seed):
    m = random_model(seed)
    assert solutions(m, backend="python") == brute(m)


@needs_kernel
@given(st.integers(0, 100_000))
def test_kernels_agree_on_models(seed):
    m = random_model(seed)
    a = run_search(m, backend="python")
    b = run_search(m, backend="cython")
    assert sorted(a.solutions) == sorted(b.solutions)
    assert a.nodes == b.nodes


@needs_kernel
@given(st.integers(0, 100_000))
def test_kernels_agree_on_translations(seed):
    m = compile_program(random_program(seed, GenConfig(lin_vars=1))).model
    a = run_search(m, backend="python")
    b = run_search(m, backend="cython")
    assert sorted(a.solutions) == sorted(b.solutions) and a.nodes == b.nodes


def test_projection_one_per_value():
    m = ConstraintModel()
    m.add_bool("a")
    m.add_bool("b")
    sols = run_search(m, project=["a"]).assignments()
    assert sorted(s["a"] for s in sols) == [0, 1]
    assert len(run_search(m, project=[]).assignments()) == 1


def test_node_limit():
    m = ConstraintModel()
    for i in range(12):
        m.add_bool(f"b{i}")
    with pytest.raises(SearchSpaceTooLarge):
        run_search(m, max_nodes=100)


def test_solution_limit():
    m = ConstraintModel()
    for i in range(5):
        m.add_bool(f"b{i}")
    with pytest.raises(SearchSpaceTooLarge):
        run_search(m, max_solutions=10)


def test_ground_rows_decided():
    m = ConstraintModel()
    m.add_bool("a")
    m.add(Linear((), "<=", -1))
    assert run_search(m).solutions == []
    ok = ConstraintModel()
    ok.add_bool("a")
    ok.add(Linear((), "=", 0))
    assert len(run_search(ok).solutions) == 2


def test_empty_model():
    assert run_search(ConstraintModel()).assignments() == [{}]


def test_fixed_bools_are_constants():
    m = ConstraintModel()
    m.add_bool("t", fixed=True)
    m.add_bool("a")
    m.add(Clause((Lit("t", True), Lit("a"))))
    assert run_search(m).assignments() == [{"t": 1, "a": 1}]


def test_variable_order_is_permutation():
    m = compile_program(random_program(7, GenConfig(lin_vars=2))).model
    f = flatten(m)
    order = variable_order(f, list(range(f.n)))
    assert sorted(order) == list(range(f.n))


def test_pure_python_switch():
    code = "from caspfzn import search; print(search.BACKEND)"
    env = dict(os.environ, CASPFZN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_default_backend():
    m = ConstraintModel()
    m.add_bool("a")
    assert len(run_search(m, backend=None).solutions) == 2

"""Exhaustive model enumeration for ConstraintModels.

The hot loop lives in a compiled extension (``_search``); when it is not
built, or ``CASPFZN_PURE_PYTHON=1`` is set, the pure-Python kernel is used.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _search_py
from .ir import (AllDifferent, Clause, ConstraintModel, Cumulative, Disjunctive,
                 Implication, Linear, ReifAnd, ReifLinear, ReifOr, lit_terms)

if os.environ.get("CASPFZN_PURE_PYTHON") == "1":
    _kernel = None
else:
    try:
        from . import _search as _kernel  # type: ignore[attr-defined]
    except ImportError:
        _kernel = None

BACKEND = "cython" if _kernel is not None else "python"

DEFAULT_MAX_NODES = 20_000_000
DEFAULT_MAX_SOLUTIONS = 1_000_000

_OPCODE = {"<=": 0, "=": 1, "!=": 2}


class SearchSpaceTooLarge(Exception):
    pass


@dataclass
class FlatModel:
    names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    kind: np.ndarray
    op: np.ndarray
    reif: np.ndarray
    rhs: np.ndarray
    ts: np.ndarray
    te: np.ndarray
    tvar: np.ndarray
    tcoef: np.ndarray
    vstart: np.ndarray
    vcons: np.ndarray
    targets: list[int]      # reified target per constraint, -1 if none
    cvars: list[list[int]]  # variables per constraint

    @property
    def n(self) -> int:
        return len(self.names)


def flatten(m: ConstraintModel) -> FlatModel:
    names = list(m.vars)
    idx = {n: i for i, n in enumerate(names)}
    lb = [m.bounds(n)[0] for n in names]
    ub = [m.bounds(n)[1] for n in names]
    consts: dict[int, int] = {}

    def const(value: int) -> int:
        if value not in consts:
            consts[value] = len(names)
            names.append(f"#const{value}")
            lb.append(value)
            ub.append(value)
        return consts[value]

    def operand(x) -> int:
        return const(x) if isinstance(x, int) else idx[x]

    rows: list[tuple[int, int, int, int, list[int], list[int]]] = []

    def lin(terms, op: str, rhs: int, target: int = -1) -> None:
        rows.append((0, _OPCODE[op], target, rhs, [idx[v] for v, _ in terms], [c for _, c in terms]))

    for c in m.constraints:
        if isinstance(c, Linear):
            lin(c.terms, c.op, c.rhs)
        elif isinstance(c, ReifLinear):
            lin(c.terms, c.op, c.rhs, idx[c.target])
        elif isinstance(c, Clause):
            t, k = lit_terms((l, -1) for l in c.lits)
            lin(t, "<=", -1 - k)
        elif isinstance(c, Implication):
            t, k = lit_terms([(c.premise, 1), (c.conclusion, -1)])
            lin(t, "<=", -k)
        elif isinstance(c, ReifAnd):
            t, k = lit_terms((l, -1) for l in c.lits)
            lin(t, "<=", -len(c.lits) - k, idx[c.target])
        elif isinstance(c, ReifOr):
            t, k = lit_terms((l, -1) for l in c.lits)
            lin(t, "<=", -1 - k, idx[c.target])
        elif isinstance(c, AllDifferent):
            items = [operand(x) for x in c.items]
            rows.append((1, 0, -1, 0, items, [0] * len(items)))
        elif isinstance(c, Disjunctive):
            items = [operand(x) for s, l in c.tasks for x in (s, l, 1)]
            rows.append((2, 0, -1, 1, items, [0] * len(items)))
        elif isinstance(c, Cumulative):
            items = [operand(x) for t in c.tasks for x in t]
            rows.append((2, 0, -1, c.bound, items, [0] * len(items)))
        else:  # pragma: no cover
            raise TypeError(f"unknown constraint {c!r}")

    n = len(names)
    kind, op, reif, rhs, ts, te, tvar, tcoef = [], [], [], [], [], [], [], []
    incidence: list[list[int]] = [[] for _ in range(n)]
    cvars: list[list[int]] = []
    for ci, (k, o, r, g, vs, cs) in enumerate(rows):
        kind.append(k)
        op.append(o)
        reif.append(r)
        rhs.append(g)
        ts.append(len(tvar))
        tvar.extend(vs)
        tcoef.extend(cs)
        te.append(len(tvar))
        members = sorted(set(vs) | ({r} if r >= 0 else set()))
        cvars.append(members)
        for v in members:
            incidence[v].append(ci)
    vstart = [0]
    vcons: list[int] = []
    for v in range(n):
        vcons.extend(incidence[v])
        vstart.append(len(vcons))

    def arr(x):
        return np.asarray(x, dtype=np.int64)

    return FlatModel(names, arr(lb), arr(ub), arr(kind), arr(op), arr(reif), arr(rhs),
                     arr(ts), arr(te), arr(tvar), arr(tcoef), arr(vstart), arr(vcons),
                     list(reif), cvars)


def variable_order(f: FlatModel, priority: Sequence[int]) -> list[int]:
    """Static branching order.

    Priority variables come in the given order; after each, every variable
    that is the reified target of a constraint whose inputs are all placed is
    placed too (it is functionally determined).  The rest follow greedily by
    the number of constraints they complete.
    """
    n = f.n
    placed = [False] * n
    order: list[int] = []
    by_var: list[list[int]] = [[] for _ in range(n)]
    for ci, vs in enumerate(f.cvars):
        for v in vs:
            by_var[v].append(ci)
    missing = [len(vs) for vs in f.cvars]

    def place(v: int) -> list[int]:
        placed[v] = True
        order.append(v)
        ready = []
        for ci in by_var[v]:
            missing[ci] -= 1
            t = f.targets[ci]
            if missing[ci] == 1 and t >= 0 and not placed[t]:
                ready.append(t)
        return ready

    def cascade(v: int) -> None:
        queue = place(v)
        while queue:
            t = queue.pop(0)
            if not placed[t] and t not in prio_set:
                queue.extend(place(t))

    prio_set = set(priority)
    # constants first: they never branch
    for v in range(n):
        if f.lb[v] == f.ub[v] and not placed[v]:
            cascade(v)
    for v in priority:
        if not placed[v]:
            cascade(v)
    while len(order) < n:
        best, score = -1, (-1, -1)
        for v in range(n):
            if placed[v]:
                continue
            s = (sum(1 for ci in by_var[v] if missing[ci] == 1),
                 sum(1 for ci in by_var[v] if missing[ci] < len(f.cvars[ci])))
            if s > score:
                best, score = v, s
        cascade(best)
    return order


@dataclass
class SearchResult:
    names: list[str]
    solutions: list[tuple[int, ...]]
    nodes: int

    def assignments(self) -> list[dict[str, int]]:
        keep = [i for i, n in enumerate(self.names) if not n.startswith("#const")]
        return [{self.names[i]: int(s[i]) for i in keep} for s in self.solutions]


def run_search(m: ConstraintModel, *, project: Optional[Iterable[str]] = None,
               priority: Optional[Sequence[str]] = None,
               max_nodes: int = DEFAULT_MAX_NODES,
               max_solutions: int = DEFAULT_MAX_SOLUTIONS,
               backend: Optional[str] = None) -> SearchResult:
    """Enumerate the models of ``m``.

    With ``project`` only one model per distinct assignment of those
    variables is returned.
    """
    f = flatten(m)
    idx = {n: i for i, n in enumerate(f.names)}
    proj = [idx[v] for v in project] if project is not None else None
    prio_names = list(priority) if priority is not None else default_priority(m)
    prio = [idx[v] for v in prio_names]
    if proj is not None:
        prio = proj + [v for v in prio if v not in set(proj)]
    if not _ground_rows_hold(f):
        return SearchResult(f.names, [], 0)
    order = variable_order(f, prio)
    jump = -1
    if proj is not None:
        pos = {v: i for i, v in enumerate(order)}
        jump = max((pos[v] for v in proj), default=-1)
        if jump < 0:
            jump = 0 if f.n else -1
    kernel = _pick(backend)
    status, sols, nodes = kernel.search(
        f.n, f.lb, f.ub, np.asarray(order, dtype=np.int64), jump,
        f.kind, f.op, f.reif, f.rhs, f.ts, f.te, f.tvar, f.tcoef, f.vstart, f.vcons,
        max_solutions, max_nodes)
    if status == _search_py.NODE_LIMIT:
        raise SearchSpaceTooLarge(f"more than {max_nodes} search nodes")
    if status == _search_py.SOLUTION_LIMIT:
        raise SearchSpaceTooLarge(f"more than {max_solutions} solutions")
    if proj is not None and not proj and sols:
        sols = sols[:1]
    return SearchResult(f.names, sols, nodes)


def _ground_rows_hold(f: FlatModel) -> bool:
    """Rows without variables are never triggered by the kernel; decide them here."""
    for ci, vs in enumerate(f.cvars):
        if vs:
            continue
        if f.kind[ci] == 0:
            g = int(f.rhs[ci])
            holds = {0: 0 <= g, 1: 0 == g, 2: 0 != g}[int(f.op[ci])]
            if not holds:
                return False
    return True


def default_priority(m: ConstraintModel) -> list[str]:
    atoms = [m.atom_var[a] for a in sorted(m.atom_var)]
    lins = [m.lin_var[v] for v in sorted(m.lin_var)]
    ranks = [m.rank_var[a] for a in sorted(m.rank_var)]
    seen = set(atoms) | set(lins) | set(ranks)
    return atoms + lins + ranks + [v for v in m.vars if v not in seen and not m.is_bool(v)]


def _pick(backend: Optional[str]):
    if backend == "python":
        return _search_py
    if backend == "cython":
        if _kernel is None:
            raise RuntimeError("compiled search kernel is not available")
        return _kernel
    return _kernel or _search_py

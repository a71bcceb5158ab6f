"""Solver-neutral constraint model and its linearization.

Booleans may appear directly in linear terms; they denote their 0-1 value.
The emitter materializes the 0-1 shadows, the IR only records the link.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .theory import cumulative_holds

Operand = Union[str, int]
Terms = tuple[tuple[str, int], ...]

_OPS = {"<=": operator.le, "=": operator.eq, "!=": operator.ne}


class UnboundedError(Exception):
    pass


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class Lit:
    var: str
    neg: bool = False

    def __neg__(self) -> "Lit":
        return Lit(self.var, not self.neg)

    def value(self, a: Mapping[str, int]) -> bool:
        return bool(a[self.var]) != self.neg

    def __str__(self) -> str:
        return ("~" if self.neg else "") + self.var


def pos(v: str) -> Lit:
    return Lit(v)


def neg(v: str) -> Lit:
    return Lit(v, True)


@dataclass(frozen=True)
class BoolVar:
    name: str
    fixed: Optional[bool] = None

    @property
    def bounds(self) -> tuple[int, int]:
        if self.fixed is None:
            return 0, 1
        return int(self.fixed), int(self.fixed)


@dataclass(frozen=True)
class IntVar:
    name: str
    lb: Optional[int]
    ub: Optional[int]

    @property
    def bounds(self) -> tuple[Optional[int], Optional[int]]:
        return self.lb, self.ub


Var = Union[BoolVar, IntVar]


def _sum(terms: Terms, a: Mapping[str, int]) -> int:
    return sum(a[v] * c for v, c in terms)


@dataclass(frozen=True)
class Clause:
    lits: tuple[Lit, ...]

    def holds(self, a):
        return any(l.value(a) for l in self.lits)

    def vars(self):
        return [l.var for l in self.lits]


@dataclass(frozen=True)
class ReifAnd:
    """``target <-> lit_1 & ... & lit_n`` (empty conjunction is true)."""

    target: str
    lits: tuple[Lit, ...]

    def holds(self, a):
        return bool(a[self.target]) == all(l.value(a) for l in self.lits)

    def vars(self):
        return [self.target] + [l.var for l in self.lits]


@dataclass(frozen=True)
class ReifOr:
    target: str
    lits: tuple[Lit, ...]

    def holds(self, a):
        return bool(a[self.target]) == any(l.value(a) for l in self.lits)

    def vars(self):
        return [self.target] + [l.var for l in self.lits]


@dataclass(frozen=True)
class Implication:
    premise: Lit
    conclusion: Lit

    def holds(self, a):
        return not self.premise.value(a) or self.conclusion.value(a)

    def vars(self):
        return [self.premise.var, self.conclusion.var]


@dataclass(frozen=True)
class Linear:
    terms: Terms
    op: str
    rhs: int

    def holds(self, a):
        return _OPS[self.op](_sum(self.terms, a), self.rhs)

    def vars(self):
        return [v for v, _ in self.terms]


@dataclass(frozen=True)
class ReifLinear:
    target: str
    terms: Terms
    op: str
    rhs: int

    def holds(self, a):
        return bool(a[self.target]) == _OPS[self.op](_sum(self.terms, a), self.rhs)

    def vars(self):
        return [self.target] + [v for v, _ in self.terms]


def _opval(x: Operand, a: Mapping[str, int]) -> int:
    return x if isinstance(x, int) else a[x]


@dataclass(frozen=True)
class AllDifferent:
    items: tuple[Operand, ...]

    def holds(self, a):
        vals = [_opval(x, a) for x in self.items]
        return len(vals) == len(set(vals))

    def vars(self):
        return [x for x in self.items if isinstance(x, str)]


@dataclass(frozen=True)
class Disjunctive:
    """Tasks ``(start, length)``; tasks of positive length may not overlap."""

    tasks: tuple[tuple[Operand, Operand], ...]

    def holds(self, a):
        return cumulative_holds(((_opval(s, a), _opval(l, a), 1) for s, l in self.tasks), 1)

    def vars(self):
        return [x for t in self.tasks for x in t if isinstance(x, str)]


@dataclass(frozen=True)
class Cumulative:
    tasks: tuple[tuple[Operand, Operand, Operand], ...]
    bound: int

    def holds(self, a):
        return cumulative_holds(((_opval(s, a), _opval(l, a), _opval(r, a))
                                 for s, l, r in self.tasks), self.bound)

    def vars(self):
        return [x for t in self.tasks for x in t if isinstance(x, str)]


Constraint = Union[Clause, ReifAnd, ReifOr, Implication, Linear, ReifLinear,
                   AllDifferent, Disjunctive, Cumulative]
LINEAR_KINDS = (Linear,)
REIFIED_KINDS = (ReifAnd, ReifOr, ReifLinear)


def normalize_op(terms: Iterable[tuple[str, int]], op: str, rhs: int) -> tuple[Terms, str, int]:
    """Rewrite any of the six comparisons into ``<=``, ``=`` or ``!=``."""
    merged: dict[str, int] = {}
    for v, c in terms:
        merged[v] = merged.get(v, 0) + c
    t = tuple((v, c) for v, c in merged.items() if c != 0)
    if op in ("<=", "=", "!="):
        return t, op, rhs
    if op == "<":
        return t, "<=", rhs - 1
    flipped = tuple((v, -c) for v, c in t)
    if op == ">=":
        return flipped, "<=", -rhs
    if op == ">":
        return flipped, "<=", -rhs - 1
    raise ModelError(f"unknown operator {op}")


def lit_terms(lits: Iterable[tuple[Lit, int]]) -> tuple[Terms, int]:
    """Linear form of ``sum w * lit``: ``w*(1-x)`` for a negative literal."""
    terms: dict[str, int] = {}
    const = 0
    for l, w in lits:
        if l.neg:
            const += w
            terms[l.var] = terms.get(l.var, 0) - w
        else:
            terms[l.var] = terms.get(l.var, 0) + w
    return tuple((v, c) for v, c in terms.items() if c != 0), const


@dataclass
class ConstraintModel:
    vars: dict[str, Var] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    groups: list[str] = field(default_factory=list)
    objective: Terms = ()
    objective_offset: int = 0
    # projection metadata filled in by the translator
    atom_var: dict[int, str] = field(default_factory=dict)
    lin_var: dict[str, str] = field(default_factory=dict)
    rank_var: dict[int, str] = field(default_factory=dict)
    shadows: dict[str, str] = field(default_factory=dict)

    def add_bool(self, name: str, fixed: Optional[bool] = None) -> str:
        if name in self.vars:
            raise ModelError(f"duplicate variable {name}")
        self.vars[name] = BoolVar(name, fixed)
        return name

    def add_int(self, name: str, lb: Optional[int], ub: Optional[int]) -> str:
        if name in self.vars:
            raise ModelError(f"duplicate variable {name}")
        if lb is not None and ub is not None and lb > ub:
            raise ModelError(f"empty domain for {name}")
        self.vars[name] = IntVar(name, lb, ub)
        return name

    def add(self, c: Constraint, group: str = "") -> None:
        self.constraints.append(c)
        self.groups.append(group)

    def is_bool(self, name: str) -> bool:
        return isinstance(self.vars[name], BoolVar)

    def bounds(self, name: str) -> tuple[int, int]:
        lb, ub = self.vars[name].bounds
        if lb is None or ub is None:
            raise UnboundedError(f"variable {name} has no finite bounds")
        return lb, ub

    def sum_bounds(self, terms: Terms) -> tuple[int, int]:
        lo = hi = 0
        for v, c in terms:
            lb, ub = self.bounds(v)
            lo += min(c * lb, c * ub)
            hi += max(c * lb, c * ub)
        return lo, hi

    def count(self, group: str) -> int:
        return sum(1 for g in self.groups if g == group)

    def validate(self) -> None:
        for c in self.constraints:
            for v in c.vars():
                if v not in self.vars:
                    raise ModelError(f"undeclared variable {v} in {c}")
            for v in _bool_positions(c):
                if not self.is_bool(v):
                    raise ModelError(f"{v} must be Boolean in {c}")
        for v, _ in self.objective:
            if v not in self.vars:
                raise ModelError(f"undeclared objective variable {v}")
        for b, s in self.shadows.items():
            if not self.is_bool(b) or s not in self.vars:
                raise ModelError(f"bad shadow link {b} -> {s}")

    def satisfies(self, a: Mapping[str, int]) -> bool:
        for name, var in self.vars.items():
            lb, ub = var.bounds
            x = a[name]
            if (lb is not None and x < lb) or (ub is not None and x > ub):
                return False
        return all(c.holds(a) for c in self.constraints)

    def objective_value(self, a: Mapping[str, int]) -> int:
        return self.objective_offset + _sum(self.objective, a)

    def bool_vars(self) -> list[str]:
        return [n for n, v in self.vars.items() if isinstance(v, BoolVar)]

    def int_vars(self) -> list[str]:
        return [n for n, v in self.vars.items() if isinstance(v, IntVar)]

    def is_linear(self) -> bool:
        return all(isinstance(c, Linear) and c.op in ("<=", "=") for c in self.constraints)


def _bool_positions(c: Constraint) -> list[str]:
    if isinstance(c, (Clause,)):
        return [l.var for l in c.lits]
    if isinstance(c, (ReifAnd, ReifOr)):
        return [c.target] + [l.var for l in c.lits]
    if isinstance(c, Implication):
        return [c.premise.var, c.conclusion.var]
    if isinstance(c, ReifLinear):
        return [c.target]
    return []


# --- linearization -------------------------------------------------------

class _Linearizer:
    def __init__(self, m: ConstraintModel, reject_globals: bool = False):
        if reject_globals:
            for c in m.constraints:
                if isinstance(c, (AllDifferent, Disjunctive, Cumulative)):
                    raise ModelError(f"global constraint {type(c).__name__} not allowed")
        self.src = m
        self.out = ConstraintModel(dict(m.vars), [], [], m.objective, m.objective_offset,
                                   dict(m.atom_var), dict(m.lin_var), dict(m.rank_var),
                                   dict(m.shadows))
        self.fresh = 0
        for name in m.vars:
            m.bounds(name)

    def aux(self, stem: str) -> str:
        while True:
            self.fresh += 1
            name = f"lin_{stem}_{self.fresh}"
            if name not in self.out.vars:
                return self.out.add_bool(name)

    def aux_int(self, stem: str, lb: int, ub: int) -> str:
        while True:
            self.fresh += 1
            name = f"lin_{stem}_{self.fresh}"
            if name not in self.out.vars:
                return self.out.add_int(name, lb, ub)

    def row(self, terms: Iterable[tuple[str, int]], op: str, rhs: int, group: str) -> None:
        merged: dict[str, int] = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0) + c
        t = tuple((v, c) for v, c in merged.items() if c != 0)
        self.out.add(Linear(t, op, rhs), group)

    def lits_row(self, lits: Sequence[tuple[Lit, int]], op: str, rhs: int, group: str) -> None:
        t, k = lit_terms(lits)
        self.row(t, op, rhs - k, group)

    # b -> sum <= g  (one-sided, minimal M)
    def implied_le(self, b: Lit, terms: Terms, g: int, group: str) -> None:
        terms = _combine(terms, 0)[0]
        lo, hi = self.out.sum_bounds(terms)
        m = max(0, hi - g)
        # sum + m*b <= g + m, with b possibly negated
        bt, bk = lit_terms([(b, m)])
        self.row(list(terms) + list(bt), "<=", g + m - bk, group)

    def reif_le(self, b: Lit, terms: Terms, g: int, group: str) -> None:
        self.implied_le(b, terms, g, group)
        neg_terms = tuple((v, -c) for v, c in terms)
        self.implied_le(-b, neg_terms, -g - 1, group)

    def reif_and(self, c: Lit, lits: Sequence[Lit], group: str) -> None:
        for l in lits:
            self.lits_row([(c, 1), (l, -1)], "<=", 0, group)
        self.lits_row([(l, 1) for l in lits] + [(c, -1)], "<=", len(lits) - 1, group)

    def reif_or(self, c: Lit, lits: Sequence[Lit], group: str) -> None:
        self.reif_and(-c, [-l for l in lits], group)

    def not_equal(self, terms: Terms, g: int, group: str) -> None:
        if (len(terms) == 2 and g == 0 and sorted(c for _, c in terms) == [-1, 1]
                and all(self.out.is_bool(v) for v, _ in terms)):
            self.row([(terms[0][0], 1), (terms[1][0], 1)], "=", 1, group)
            return
        z = Lit(self.aux("ne"))
        self.implied_le(z, terms, g - 1, group)
        self.implied_le(-z, tuple((v, -c) for v, c in terms), -g - 1, group)

    def reif_linear(self, c: ReifLinear, group: str) -> None:
        b = Lit(c.target)
        if c.op == "<=":
            self.reif_le(b, c.terms, c.rhs, group)
            return
        p, q = Lit(self.aux("le")), Lit(self.aux("ge"))
        self.reif_le(p, c.terms, c.rhs, group)
        self.reif_le(q, tuple((v, -k) for v, k in c.terms), -c.rhs, group)
        self.reif_and(b if c.op == "=" else -b, [p, q], group)

    def operand(self, x: Operand) -> tuple[Terms, int]:
        return ((), x) if isinstance(x, int) else (((x, 1),), 0)

    def disjunction_of_le(self, options: Sequence[tuple[Terms, int]], group: str) -> None:
        """At least one ``terms + k <= 0`` holds; constant options are decided here."""
        lits = []
        for terms, k in options:
            if not terms:
                if k <= 0:
                    return
                continue
            b = Lit(self.aux("or"))
            self.implied_le(b, terms, -k, group)
            lits.append((b, -1))
        self.lits_row(lits, "<=", -1, group)

    def nonneg(self, x: Operand, group: str) -> None:
        if isinstance(x, int):
            if x < 0:
                self.row([], "<=", -1, group)
        else:
            self.row([(x, -1)], "<=", 0, group)

    def disjunctive(self, tasks, group: str) -> None:
        for _, l in tasks:
            self.nonneg(l, group)
        for i in range(len(tasks)):
            for j in range(i + 1, len(tasks)):
                (si, li), (sj, lj) = tasks[i], tasks[j]
                self.disjunction_of_le([
                    _combine([(li, 1)], 0),
                    _combine([(lj, 1)], 0),
                    _combine([(si, 1), (li, 1), (sj, -1)], 0),
                    _combine([(sj, 1), (lj, 1), (si, -1)], 0),
                ], group)

    def cumulative(self, tasks, bound: int, group: str) -> None:
        for _, l, r in tasks:
            self.nonneg(l, group)
            self.nonneg(r, group)
        if not tasks:
            if bound < 0:
                self.row([], "<=", -1, group)
            return
        starts = [self._range(s) for s, _, _ in tasks]
        lens = [self._range(l) for _, l, _ in tasks]
        lo = min(s[0] for s in starts)
        hi = max(s[1] + max(0, l[1]) for s, l in zip(starts, lens)) - 1
        for t in range(lo, hi + 1):
            usage: list[tuple[str, int]] = []
            const = 0
            for (s, l, r), (slo, shi), (llo, lhi) in zip(tasks, starts, lens):
                if shi + lhi <= t or slo > t or lhi <= 0:
                    continue
                u = self._running(s, l, t, group)
                if isinstance(u, bool):
                    if u:
                        if isinstance(r, int):
                            const += r
                        else:
                            usage.append((r, 1))
                    continue
                if isinstance(r, int):
                    usage.append((u, r))
                else:
                    rub = self.out.bounds(r)[1]
                    p = self.aux_int("use", 0, max(0, rub))
                    # p = r * u for r in [0, rub], u in {0, 1}
                    self.row([(p, 1), (u, -max(0, rub))], "<=", 0, group)
                    self.row([(p, 1), (r, -1)], "<=", 0, group)
                    self.row([(r, 1), (p, -1), (u, max(0, rub))], "<=", max(0, rub), group)
                    usage.append((p, 1))
            if usage or const > bound:
                self.row(usage, "<=", bound - const, group)

    def _range(self, x: Operand) -> tuple[int, int]:
        return (x, x) if isinstance(x, int) else self.out.bounds(x)

    def _running(self, s: Operand, l: Operand, t: int, group: str):
        """Boolean for ``s <= t < s + l``, or a constant when decided by bounds."""
        started = _combine([(s, 1)], -t)           # s - t <= 0
        not_done = _combine([(s, -1), (l, -1)], t + 1)  # t + 1 - s - l <= 0
        parts = []
        for terms, k in (started, not_done):
            if not terms:
                if k > 0:
                    return False
                continue
            lo, hi = self.out.sum_bounds(terms)
            if hi + k <= 0:
                continue
            if lo + k > 0:
                return False
            b = Lit(self.aux("cond"))
            self.reif_le(b, terms, -k, group)
            parts.append(b)
        if not parts:
            return True
        if len(parts) == 1:
            return parts[0].var
        u = Lit(self.aux("run"))
        self.reif_and(u, parts, group)
        return u.var

    def all_different(self, items, group: str) -> None:
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                terms, k = _combine([(items[i], 1), (items[j], -1)], 0)
                if not terms:
                    if k == 0:
                        self.row([], "<=", -1, group)
                    continue
                self.not_equal(terms, -k, group)

    def run(self) -> ConstraintModel:
        for c, group in zip(self.src.constraints, self.src.groups):
            if isinstance(c, Linear):
                if c.op == "!=":
                    self.not_equal(c.terms, c.rhs, group)
                else:
                    self.out.add(c, group)
            elif isinstance(c, Clause):
                self.lits_row([(l, -1) for l in c.lits], "<=", -1, group)
            elif isinstance(c, ReifAnd):
                self.reif_and(Lit(c.target), c.lits, group)
            elif isinstance(c, ReifOr):
                self.reif_or(Lit(c.target), c.lits, group)
            elif isinstance(c, Implication):
                self.lits_row([(c.premise, 1), (c.conclusion, -1)], "<=", 0, group)
            elif isinstance(c, ReifLinear):
                self.reif_linear(c, group)
            elif isinstance(c, AllDifferent):
                self.all_different(c.items, group)
            elif isinstance(c, Disjunctive):
                self.disjunctive(c.tasks, group)
            elif isinstance(c, Cumulative):
                self.cumulative(c.tasks, c.bound, group)
            else:  # pragma: no cover
                raise ModelError(f"cannot linearize {c}")
        return self.out


def _combine(items: Iterable[tuple[Operand, int]], const: int) -> tuple[Terms, int]:
    """Fold operands with coefficients into ``(terms, constant)``."""
    terms: dict[str, int] = {}
    for x, c in items:
        if isinstance(x, int):
            const += c * x
        else:
            terms[x] = terms.get(x, 0) + c
    return tuple((v, c) for v, c in terms.items() if c != 0), const


def linearize(m: ConstraintModel, reject_globals: bool = False) -> ConstraintModel:
    """Rewrite ``m`` into linear ``<=``/``=`` rows over bounded variables.

    Auxiliary variables are prefixed ``lin_``; the solution set projected on
    the original variables is unchanged. Globals are decomposed unless
    ``reject_globals`` is set, in which case they raise ModelError.
    """
    return _Linearizer(m, reject_globals).run()

"""Interpretation of ``&sum``/``&dom``/``&minimize``/global theory atoms."""
from __future__ import annotations

import operator
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

from .aspif import (LIST, SET, TUPLE, GroundProgram, NormalBody, TCompound,
                    TheoryAtom, TNumber, TSymbol, Term, make_program)

THEORY_DEFINITION = """\
#theory cp {
    var_term  {
    -  : 1, unary
    };
    pos_var_term  {
    };
    sum_term {
    -  : 1, unary;
    *  : 0, binary, left
    };
    dom_term {
    -  : 1, unary;
    .. : 0, binary, left
    };
    dom_term_right  {
    };
    disjoint_term {
    @  : 0, binary, left
    };
    &sum/0 : sum_term, {<=,=,!=,<,>,>=}, var_term, body;
    &minimize/0 : sum_term, directive;
    &dom/0 : dom_term, {=}, pos_var_term, head;
    &disjoint/0 : disjoint_term, head;
    &cumulative/0 : disjoint_term, {<=}, pos_var_term, head;
    &distinct/0 : pos_var_term, head
}.
"""

OPERATORS = {
    "<": operator.lt, "<=": operator.le, "=": operator.eq,
    "!=": operator.ne, ">": operator.gt, ">=": operator.ge,
}

DEFAULT_FALLBACK = (-(2**20), 2**20)

Operand = Union[str, int]


class TheoryError(Exception):
    def __init__(self, statement: object, reason: str):
        super().__init__(f"{reason}: {statement}")
        self.statement = statement
        self.reason = reason


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[str, int], ...]  # (variable, coefficient)
    op: str
    rhs: int

    def holds(self, assignment: Mapping[str, int]) -> bool:
        lhs = sum(assignment[v] * w for v, w in self.terms)
        return OPERATORS[self.op](lhs, self.rhs)


@dataclass(frozen=True)
class Distinct:
    vars: tuple[Operand, ...]


@dataclass(frozen=True)
class Disjoint:
    tasks: tuple[tuple[Operand, Operand], ...]  # (start, length)


@dataclass(frozen=True)
class Cumulative:
    tasks: tuple[tuple[Operand, Operand, Operand], ...]  # (start, length, resource)
    bound: int


Global = Union[Distinct, Disjoint, Cumulative]


def _val(x: Operand, assignment: Mapping[str, int]) -> int:
    return x if isinstance(x, int) else assignment[x]


def cumulative_holds(tasks: Iterable[tuple[int, int, int]], bound: int) -> bool:
    """Resource profile check; lengths and usages must be non-negative."""
    tasks = list(tasks)
    if any(l < 0 or r < 0 for _, l, r in tasks):
        return False
    points = sorted({s for s, l, _ in tasks if l > 0})
    for t in points:
        if sum(r for s, l, r in tasks if s <= t < s + l) > bound:
            return False
    return True


def global_holds(g: Global, assignment: Mapping[str, int]) -> bool:
    if isinstance(g, Distinct):
        vals = [_val(v, assignment) for v in g.vars]
        return len(vals) == len(set(vals))
    if isinstance(g, Disjoint):
        return cumulative_holds(((_val(s, assignment), _val(l, assignment), 1)
                                 for s, l in g.tasks), 1)
    return cumulative_holds(((_val(s, assignment), _val(l, assignment), _val(r, assignment))
                             for s, l, r in g.tasks), g.bound)


def global_vars(g: Global) -> list[str]:
    if isinstance(g, Distinct):
        items: Iterable[Operand] = g.vars
    else:
        items = [x for task in g.tasks for x in task]
    return [x for x in items if isinstance(x, str)]


@dataclass(frozen=True)
class CaspSpec:
    vars: frozenset[str] = frozenset()
    domains: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    lin_atoms: Mapping[int, LinearConstraint] = field(default_factory=dict)
    globals: tuple[Global, ...] = ()
    lin_objective: tuple[tuple[str, int], ...] = ()
    objective_offset: int = 0
    defaulted: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not (self.vars or self.lin_atoms or self.globals or self.lin_objective)

    def sorted_vars(self) -> list[str]:
        return sorted(self.vars)

    def objective_value(self, assignment: Mapping[str, int]) -> int:
        return self.objective_offset + sum(assignment[v] * w for v, w in self.lin_objective)


def render_term(t: Term) -> str:
    """Clingo-style text of a ground term, used for variable names."""
    if isinstance(t, TNumber):
        return str(t.value)
    if isinstance(t, TSymbol):
        return t.name
    args = ",".join(render_term(a) for a in t.args)
    if t.name == TUPLE:
        return f"({args},)" if len(t.args) == 1 else f"({args})"
    if t.name == SET:
        return "{" + args + "}"
    if t.name == LIST:
        return "[" + args + "]"
    if t.name == "-" and len(t.args) == 1:
        return "-" + args
    return f"{t.name}({args})" if t.args else str(t.name)


def _int_term(t: Term, where: object) -> int:
    if isinstance(t, TNumber):
        return t.value
    if isinstance(t, TCompound) and t.name == "-" and len(t.args) == 1:
        return -_int_term(t.args[0], where)
    raise TheoryError(where, f"expected an integer constant, got {render_term(t)}")


def _var_term(t: Term, where: object) -> Operand:
    """A variable (symbol, function or tuple) or an integer constant."""
    if isinstance(t, TNumber):
        return t.value
    if isinstance(t, TCompound) and t.name == "-" and len(t.args) == 1:
        return -_int_term(t.args[0], where)
    if isinstance(t, TSymbol) and t.name.startswith('"'):
        raise TheoryError(where, f"string {t.name} is not a variable")
    if isinstance(t, TCompound) and isinstance(t.name, str) and t.name in ("*", "..", "@", "+"):
        raise TheoryError(where, f"operator {t.name} not allowed here")
    return render_term(t)


def _linear(t: Term, where: object) -> tuple[dict[str, int], int]:
    """Decompose a sum term into ``({var: coeff}, constant)``."""
    if isinstance(t, TNumber):
        return {}, t.value
    if isinstance(t, TCompound) and t.name == "-" and len(t.args) == 1:
        coeffs, const = _linear(t.args[0], where)
        return {v: -w for v, w in coeffs.items()}, -const
    if isinstance(t, TCompound) and t.name == "*" and len(t.args) == 2:
        lc, lk = _linear(t.args[0], where)
        rc, rk = _linear(t.args[1], where)
        if lc and rc:
            raise TheoryError(where, "non-linear product")
        if lc:
            return {v: w * rk for v, w in lc.items()}, lk * rk
        return {v: w * lk for v, w in rc.items()}, lk * rk
    v = _var_term(t, where)
    if isinstance(v, int):
        return {}, v
    return {v: 1}, 0


def _theory_name(a: TheoryAtom) -> str:
    if isinstance(a.name, TSymbol):
        return a.name.name
    raise TheoryError(a, "theory atom name must be a constant")


def _plain_elements(a: TheoryAtom):
    for e in a.elements:
        if e.condition:
            raise TheoryError(a, "conditional theory elements are not supported")
        if not e.terms:
            raise TheoryError(a, "empty theory element")
        yield e.terms[0]


HEAD_THEORY = ("dom", "distinct", "disjoint", "cumulative")


def _head_facts(p: GroundProgram) -> tuple[set[int], set[int]]:
    heads: set[int] = set()
    facts: set[int] = set()
    for r in p.rules:
        heads.update(r.head)
        if (not r.choice and len(r.head) == 1 and isinstance(r.body, NormalBody)
                and not r.body.pos and not r.body.neg):
            facts.add(r.head[0])
    return heads, facts


def extract_casp(p: GroundProgram) -> CaspSpec:
    heads, facts = _head_facts(p)
    body_atoms: set[int] = set()
    for r in p.rules:
        body_atoms.update(r.pos)
        body_atoms.update(r.neg)

    domains: dict[str, tuple[int, int]] = {}
    lin_atoms: dict[int, LinearConstraint] = {}
    globals_: list[Global] = []
    objective: dict[str, int] = {}
    offset = 0
    used: set[str] = set()

    for a in p.theory_atoms:
        name = _theory_name(a)
        if name == "sum":
            if a.atom == 0:
                raise TheoryError(a, "&sum used as a directive")
            if a.atom in heads:
                raise TheoryError(a, "&sum must occur in rule bodies")
            if a.guard is None:
                raise TheoryError(a, "&sum needs a guard")
            op, rhs_term = a.guard
            if op not in OPERATORS:
                raise TheoryError(a, f"unknown operator {op}")
            coeffs: dict[str, int] = {}
            const = 0
            for t in _plain_elements(a):
                c, k = _linear(t, a)
                const += k
                for v, w in c.items():
                    coeffs[v] = coeffs.get(v, 0) + w
            rhs = _var_term(rhs_term, a)
            if isinstance(rhs, str):
                coeffs[rhs] = coeffs.get(rhs, 0) - 1
                rhs = 0
            if a.atom in lin_atoms:
                raise TheoryError(a, "atom reifies more than one linear constraint")
            terms = tuple((v, w) for v, w in coeffs.items() if w != 0)
            used.update(v for v, _ in coeffs.items())
            lin_atoms[a.atom] = LinearConstraint(terms, op, rhs - const)
        elif name == "minimize":
            if a.atom != 0 or a.guard is not None:
                raise TheoryError(a, "&minimize must be a directive without guard")
            for t in _plain_elements(a):
                c, k = _linear(t, a)
                offset += k
                for v, w in c.items():
                    objective[v] = objective.get(v, 0) + w
                    used.add(v)
        elif name in HEAD_THEORY:
            if a.atom != 0 and (a.atom in body_atoms or a.atom not in facts):
                raise TheoryError(a, f"&{name} is only supported as an unconditional fact")
            if name == "dom":
                if a.guard is None or a.guard[0] != "=":
                    raise TheoryError(a, "&dom needs guard '= variable'")
                var = _var_term(a.guard[1], a)
                if isinstance(var, int):
                    raise TheoryError(a, "&dom guard must be a variable")
                lo, hi = _dom_interval(a)
                if var in domains:
                    lo, hi = max(lo, domains[var][0]), min(hi, domains[var][1])
                if lo > hi:
                    raise TheoryError(a, f"empty domain for {var}")
                domains[var] = (lo, hi)
                used.add(var)
            elif name == "distinct":
                if a.guard is not None:
                    raise TheoryError(a, "&distinct takes no guard")
                g: Global = Distinct(tuple(_var_term(t, a) for t in _plain_elements(a)))
                globals_.append(g)
            elif name == "disjoint":
                if a.guard is not None:
                    raise TheoryError(a, "&disjoint takes no guard")
                tasks = []
                for t in _plain_elements(a):
                    parts = _at_parts(t, a)
                    if len(parts) != 2:
                        raise TheoryError(a, "&disjoint elements are start@length")
                    tasks.append((parts[0], parts[1]))
                globals_.append(Disjoint(tuple(tasks)))
            else:
                if a.guard is None or a.guard[0] != "<=":
                    raise TheoryError(a, "&cumulative needs guard '<= bound'")
                bound = _int_term(a.guard[1], a)
                ctasks = []
                for t in _plain_elements(a):
                    parts = _at_parts(t, a)
                    if len(parts) != 3:
                        raise TheoryError(a, "&cumulative elements are start@length@resource")
                    ctasks.append((parts[0], parts[1], parts[2]))
                globals_.append(Cumulative(tuple(ctasks), bound))
        else:
            raise TheoryError(a, f"unknown theory atom &{name}")

    for g in globals_:
        used.update(global_vars(g))
    return CaspSpec(frozenset(used), domains, lin_atoms, tuple(globals_),
                    tuple(objective.items()), offset)


def _dom_interval(a: TheoryAtom) -> tuple[int, int]:
    intervals = []
    for t in _plain_elements(a):
        if isinstance(t, TCompound) and t.name == ".." and len(t.args) == 2:
            intervals.append((_int_term(t.args[0], a), _int_term(t.args[1], a)))
        else:
            n = _int_term(t, a)
            intervals.append((n, n))
    intervals = sorted(iv for iv in intervals if iv[0] <= iv[1])
    if not intervals:
        raise TheoryError(a, "empty domain")
    lo, hi = intervals[0]
    for l, u in intervals[1:]:
        if l > hi + 1:
            raise TheoryError(a, "non-contiguous domains are not supported")
        hi = max(hi, u)
    return lo, hi


def _at_parts(t: Term, where: object) -> list[Operand]:
    if isinstance(t, TCompound) and t.name == "@" and len(t.args) == 2:
        return _at_parts(t.args[0], where) + [_var_term(t.args[1], where)]
    return [_var_term(t, where)]


def bound_or_default(spec: CaspSpec, fallback: tuple[int, int] = DEFAULT_FALLBACK) -> CaspSpec:
    lo, hi = fallback
    if lo > hi:
        raise ValueError(f"empty fallback interval {fallback}")
    missing = sorted(v for v in spec.vars if v not in spec.domains)
    if not missing:
        return spec
    domains = dict(spec.domains)
    for v in missing:
        domains[v] = (lo, hi)
    return replace(spec, domains=domains, defaulted=spec.defaulted | frozenset(missing))


def strip_theory_heads(p: GroundProgram) -> GroundProgram:
    """Drop head theory atoms (``&dom`` etc.) and the facts that assert them.

    They are directives for the theory layer, not program atoms.
    """
    directive_atoms = {t.atom for t in p.theory_atoms
                       if t.atom and isinstance(t.name, TSymbol) and t.name.name in HEAD_THEORY}
    if not directive_atoms:
        return p
    rules = [r for r in p.rules
             if not (len(r.head) == 1 and r.head[0] in directive_atoms and not r.choice
                     and not r.pos and not r.neg)]
    for r in rules:
        if directive_atoms & r.atoms():
            raise TheoryError(r, "head theory atom used outside a fact")
    keep = [t for t in p.theory_atoms if t.atom not in directive_atoms]
    directives = [replace(t, atom=0) for t in p.theory_atoms if t.atom in directive_atoms]
    atoms = p.atoms - directive_atoms
    return make_program(rules, atoms=atoms, minimize=p.minimize,
                        theory_atoms=keep + directives, shows=p.shows)

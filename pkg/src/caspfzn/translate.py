"""Translation of a partially shifted HCF (C)ASP program into a ConstraintModel.

Constraint groups are tagged ``rank``, ``body``, ``head``, ``support``,
``theory`` and ``global`` so callers can inspect what was produced.
"""
from __future__ import annotations

from typing import Optional

from .analysis import NotHcfError, SccInfo, build_dep_graph, is_hcf, needs_shift
from .aspif import GroundProgram, NormalBody, Rule, WeightedBody, compile_priorities
from .ir import (AllDifferent, Clause, ConstraintModel, Cumulative, Disjunctive,
                 Implication, Lit, Linear, ReifAnd, ReifLinear, ReifOr, lit_terms,
                 normalize_op)
from .theory import CaspSpec, Cumulative as TCumulative, Disjoint, Distinct


class PartialShiftViolation(Exception):
    pass


class VarRegistry:
    """Deterministic names for every translation variable."""

    @staticmethod
    def atom(a: int) -> str:
        return f"x_{a}"

    @staticmethod
    def rank(a: int) -> str:
        return f"l_{a}"

    @staticmethod
    def dep(a: int, b: int) -> str:
        return f"dep_{a}_{b}"

    @staticmethod
    def y(a: int, b: int) -> str:
        return f"y_{a}_{b}"

    @staticmethod
    def gap(a: int, b: int) -> str:
        return f"gap_{a}_{b}"

    @staticmethod
    def bd(r: int) -> str:
        return f"bd_{r}"

    @staticmethod
    def bda(r: int, a: int) -> str:
        return f"bda_{r}_{a}"

    @staticmethod
    def ext(r: int, a: int) -> str:
        return f"ext_{r}_{a}"

    @staticmethod
    def int_(r: int, a: int) -> str:
        return f"int_{r}_{a}"

    @staticmethod
    def aux(r: int, a: int) -> str:
        return f"aux_{r}_{a}"

    @staticmethod
    def sp(r: int, a: int) -> str:
        return f"sp_{r}_{a}"

    @staticmethod
    def lin(v: str) -> str:
        return f"v_{v}"


R = VarRegistry


def _x(a: int) -> Lit:
    return Lit(R.atom(a))


def _nx(a: int) -> Lit:
    return Lit(R.atom(a), True)


class _Translator:
    def __init__(self, p: GroundProgram, spec: CaspSpec, strict: bool, scc: SccInfo):
        self.p = p
        self.spec = spec
        self.strict = strict
        self.scc = scc
        self.m = ConstraintModel()

    # helpers
    def s(self, a: int) -> int:
        return self.scc.size(a) + 1

    def nontrivial(self, a: int) -> bool:
        return self.scc.size(a) > 1

    def declare(self) -> None:
        m = self.m
        for a in sorted(self.p.atoms):
            m.atom_var[a] = m.add_bool(R.atom(a))
        for v in self.spec.sorted_vars():
            lb, ub = self.spec.domains.get(v, (None, None))
            m.lin_var[v] = m.add_int(R.lin(v), lb, ub)

    def ranking(self) -> None:
        m, scc = self.m, self.scc
        for a in sorted(self.p.atoms):
            if self.nontrivial(a):
                m.rank_var[a] = m.add_int(R.rank(a), 1, self.s(a))
        for a in sorted(m.rank_var):
            m.add(ReifLinear(R.atom(a), ((R.rank(a), 1),), "<=", scc.size(a)), "rank")
        for a, b in self.intra_edges():
            m.add_bool(R.dep(a, b))
            t, op, g = normalize_op(((R.rank(a), 1), (R.rank(b), -1)), ">=", 1)
            m.add(ReifLinear(R.dep(a, b), t, op, g), "rank")
        if not self.strict:
            return
        for a, b in self.intra_edges():
            m.add_bool(R.y(a, b))
            t, op, g = normalize_op(((R.rank(a), 1), (R.rank(b), -1)), ">=", 2)
            m.add(ReifLinear(R.y(a, b), t, op, g), "rank")
        for a, b in self.intra_edges():
            m.add_bool(R.gap(a, b))
            m.add(ReifAnd(R.gap(a, b), (_x(a), _x(b), Lit(R.y(a, b)))), "rank")

    def intra_edges(self) -> list[tuple[int, int]]:
        scc = self.scc
        return [(a, b) for a in sorted(self.p.atoms) if self.nontrivial(a)
                for b in scc.edges.get(a, ()) if scc.same(a, b)]

    def rank_one(self, cond: str, a: int) -> None:
        """``cond & a`` forces rank 1."""
        s = self.s(a)
        self.m.add(Linear(((cond, s), (R.atom(a), s), (R.rank(a), 1)), "<=", 2 * s + 1), "body")

    def rule(self, i: int, r: Rule) -> None:
        m, scc = self.m, self.scc
        if r.is_constraint:
            self.constraint_rule(r)
            return
        for a in r.head:
            m.add_bool(R.sp(i, a))
        body_sccs = {scc.scc_id[b] for b in r.pos}
        tight = [a for a in r.head if scc.scc_id[a] not in body_sccs]
        cyclic = [a for a in r.head if scc.scc_id[a] in body_sccs]
        proper = not r.choice and len(r.head) > 1
        if proper and cyclic:
            raise PartialShiftViolation(f"rule {i} ({r}) must be shifted first")
        if tight:
            self.completion(i, r)
            if self.strict:
                for a in tight:
                    if self.nontrivial(a):
                        # a disjunctive rule supports a only if the other heads are false
                        self.rank_one(R.sp(i, a) if proper else R.bd(i), a)
        for a in cyclic:
            if isinstance(r.body, NormalBody):
                self.cyclic_normal(i, r.body, a)
            else:
                self.cyclic_weighted(i, r.body, a)
        self.head(i, r, tight)

    def constraint_rule(self, r: Rule) -> None:
        if isinstance(r.body, NormalBody):
            self.m.add(Clause(tuple(_nx(b) for b in r.body.pos) + tuple(_x(b) for b in r.body.neg)),
                       "body")
        else:
            terms, k = lit_terms(self.weighted_lits(r.body))
            self.m.add(Linear(terms, "<=", r.body.bound - 1 - k), "body")

    @staticmethod
    def weighted_lits(body: WeightedBody, only=None) -> list[tuple[Lit, int]]:
        out = []
        for l, w in body.lits:
            if l > 0 and (only is None or only(l)):
                out.append((_x(l), w))
            elif l < 0:
                out.append((_nx(-l), w))
        return out

    def completion(self, i: int, r: Rule) -> None:
        m = self.m
        body = r.body
        if isinstance(body, NormalBody):
            if not body.pos and not body.neg:
                m.add_bool(R.bd(i), fixed=True)
                return
            m.add_bool(R.bd(i))
            m.add(ReifAnd(R.bd(i), tuple(_x(b) for b in body.pos) + tuple(_nx(b) for b in body.neg)),
                  "body")
        else:
            m.add_bool(R.bd(i))
            terms, k = lit_terms(self.weighted_lits(body))
            t, op, g = normalize_op(terms, ">=", body.bound - k)
            m.add(ReifLinear(R.bd(i), t, op, g), "body")

    def cyclic_normal(self, i: int, body: NormalBody, a: int) -> None:
        m, scc = self.m, self.scc
        inside = [b for b in body.pos if scc.same(a, b)]
        lits = ([_x(b) for b in body.pos if not scc.same(a, b)]
                + [Lit(R.dep(a, b)) for b in inside]
                + [_nx(b) for b in body.neg])
        m.add_bool(R.bda(i, a))
        m.add(ReifAnd(R.bda(i, a), tuple(lits)), "body")
        if self.strict:
            m.add(Clause((Lit(R.bda(i, a), True),) + tuple(Lit(R.gap(a, b), True) for b in inside)),
                  "body")

    def cyclic_weighted(self, i: int, body: WeightedBody, a: int) -> None:
        m, scc = self.m, self.scc
        outside = self.weighted_lits(body, only=lambda b: not scc.same(a, b))
        inside = [(b, w) for b, w in body.lits if b > 0 and scc.same(a, b)]

        def reif(target: str, lits, op: str, bound: int) -> None:
            terms, k = lit_terms(lits)
            t, o, g = normalize_op(terms, op, bound - k)
            m.add(ReifLinear(target, t, o, g), "body")

        m.add_bool(R.ext(i, a))
        reif(R.ext(i, a), outside, ">=", body.bound)
        m.add_bool(R.int_(i, a))
        reif(R.int_(i, a), outside + [(Lit(R.dep(a, b)), w) for b, w in inside], ">=", body.bound)
        if self.strict:
            m.add_bool(R.aux(i, a))
            reif(R.aux(i, a), outside + [(Lit(R.gap(a, b)), w) for b, w in inside],
                 "<=", body.bound - 1)
            m.add(Clause((Lit(R.ext(i, a)), Lit(R.aux(i, a)), Lit(R.int_(i, a), True))), "body")
            self.rank_one(R.ext(i, a), a)
        m.add_bool(R.bda(i, a))
        m.add(ReifOr(R.bda(i, a), (Lit(R.ext(i, a)), Lit(R.int_(i, a)))), "body")

    def head(self, i: int, r: Rule, tight: list[int]) -> None:
        m = self.m
        if not r.choice and len(r.head) > 1:
            for a in r.head:
                others = tuple(_nx(b) for b in r.head if b != a)
                m.add(ReifAnd(R.sp(i, a), (Lit(R.bd(i)),) + others), "head")
            m.add(Clause(tuple(_x(a) for a in r.head) + (Lit(R.bd(i), True),)), "head")
            return
        for a in r.head:
            src = R.bd(i) if a in tight else R.bda(i, a)
            m.add(ReifAnd(R.sp(i, a), (Lit(src),)), "head")
            if not r.choice:
                m.add(Implication(Lit(R.sp(i, a)), _x(a)), "head")

    def support(self) -> None:
        occ: dict[int, list[int]] = {}
        for i, r in enumerate(self.p.rules):
            for a in r.head:
                occ.setdefault(a, []).append(i)
        exempt = set(self.spec.lin_atoms)
        for a in sorted(self.p.atoms):
            if a in exempt:
                continue
            lits = tuple(Lit(R.sp(i, a)) for i in occ.get(a, ())) + (_nx(a),)
            self.m.add(Clause(lits), "support")

    def operand(self, x):
        return x if isinstance(x, int) else R.lin(x)

    def theory(self) -> None:
        m = self.m
        for a in sorted(self.spec.lin_atoms):
            lc = self.spec.lin_atoms[a]
            t, op, g = normalize_op(((R.lin(v), w) for v, w in lc.terms), lc.op, lc.rhs)
            m.add(ReifLinear(R.atom(a), t, op, g), "theory")
        for g in self.spec.globals:
            if isinstance(g, Distinct):
                m.add(AllDifferent(tuple(self.operand(v) for v in g.vars)), "global")
            elif isinstance(g, Disjoint):
                m.add(Disjunctive(tuple((self.operand(s), self.operand(l)) for s, l in g.tasks)),
                      "global")
            elif isinstance(g, TCumulative):
                m.add(Cumulative(tuple(tuple(self.operand(x) for x in t) for t in g.tasks),
                                 g.bound), "global")

    def objective(self) -> None:
        terms: dict[str, int] = {}
        offset = self.spec.objective_offset
        for e in compile_priorities(self.p.minimize):
            name = R.atom(abs(e.literal))
            if e.literal > 0:
                terms[name] = terms.get(name, 0) + e.weight
            else:
                terms[name] = terms.get(name, 0) - e.weight
                offset += e.weight
        for v, w in self.spec.lin_objective:
            terms[R.lin(v)] = terms.get(R.lin(v), 0) + w
        self.m.objective = tuple((v, w) for v, w in terms.items() if w != 0)
        self.m.objective_offset = offset

    def run(self) -> ConstraintModel:
        self.declare()
        self.ranking()
        for i, r in enumerate(self.p.rules):
            self.rule(i, r)
        self.support()
        self.theory()
        self.objective()
        return self.m


def translate(p: GroundProgram, spec: Optional[CaspSpec] = None, *, strict: bool = True,
              scc: Optional[SccInfo] = None) -> ConstraintModel:
    """Build the constraint model of ``p``.

    ``p`` must be HCF and partially shifted: no proper disjunction may share an
    SCC with its positive body (see :func:`analysis.partially_shift`).
    """
    scc = scc or build_dep_graph(p)
    if not is_hcf(p, scc):
        raise NotHcfError("program is not head-cycle free")
    for i, r in enumerate(p.rules):
        if needs_shift(r, scc):
            raise PartialShiftViolation(f"rule {i} ({r}) must be shifted first")
    return _Translator(p, spec or CaspSpec(), strict, scc).run()


def _group(m: ConstraintModel, group: str) -> list:
    return [c for c, g in zip(m.constraints, m.groups) if g == group]


def tr_ranking(p: GroundProgram, scc: Optional[SccInfo] = None, *, strict: bool = True) -> list:
    """Ranking constraints alone; empty for tight programs."""
    return _group(translate(p, strict=strict, scc=scc), "rank")


def tr_rule(p: GroundProgram, i: int, spec: Optional[CaspSpec] = None, *, strict: bool = True,
            scc: Optional[SccInfo] = None) -> list:
    """Body and head constraints contributed by rule ``i``."""
    t = _Translator(p, spec or CaspSpec(), strict, scc or build_dep_graph(p))
    t.declare()
    t.ranking()
    start = len(t.m.constraints)
    t.rule(i, p.rules[i])
    return t.m.constraints[start:]


def tr_support(p: GroundProgram, spec: Optional[CaspSpec] = None) -> list:
    return _group(translate(p, spec), "support")

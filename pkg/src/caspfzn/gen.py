"""Random small (C)ASP programs for the theorem and property suites."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .analysis import build_dep_graph, is_hcf, needs_shift
from .ir import (AllDifferent, Clause, ConstraintModel, Cumulative, Disjunctive, Implication,
                 Linear, Lit, ReifAnd, ReifLinear, ReifOr)
from .aspif import (GroundProgram, MinimizeEntry, NormalBody, Rule, TautologyError, TCompound,
                    TheoryAtom, TheoryElement, TNumber, TSymbol, make_program, normalize_weighted)

SUM_OPS = ("<=", "=", "!=", "<", ">", ">=")
VAR_NAMES = ("u", "v")


@dataclass
class GenConfig:
    max_atoms: int = 8
    max_rules: int = 10
    lin_vars: int = 0             # up to this many linear variables
    max_width: int = 3            # values per linear domain
    minimize: bool = False
    lin_objective: bool = False
    max_weight: int = 3
    weighted_ratio: float = 0.35
    choice_ratio: float = 0.3
    disjunction_ratio: float = 0.25
    constraint_ratio: float = 0.15
    negative_weights: bool = False
    cycle_ratio: float = 0.6      # chance of planting a positive cycle


def _dom_atom(atom: int, var: str, lo: int, hi: int) -> TheoryAtom:
    elem = TheoryElement((TCompound("..", (TNumber(lo), TNumber(hi))),))
    return TheoryAtom(atom, TSymbol("dom"), (elem,), ("=", TSymbol(var)))


def _sum_atom(atom: int, terms: list[tuple[int, str]], op: str, rhs: int) -> TheoryAtom:
    elems = []
    for w, v in terms:
        t = TSymbol(v) if w == 1 else TCompound("*", (TNumber(w), TSymbol(v)))
        elems.append(TheoryElement((t,)))
    return TheoryAtom(atom, TSymbol("sum"), tuple(elems), (op, TNumber(rhs)))


def _min_atom(terms: list[tuple[int, str]]) -> TheoryAtom:
    elems = tuple(TheoryElement((TCompound("*", (TNumber(w), TSymbol(v))),)) for w, v in terms)
    return TheoryAtom(0, TSymbol("minimize"), elems)


class Generator:
    def __init__(self, seed: int, cfg: Optional[GenConfig] = None):
        self.rng = random.Random(seed)
        self.cfg = cfg or GenConfig()

    def weighted_body(self, pool: list[int], head: set[int]):
        rng, cfg = self.rng, self.cfg
        k = rng.randint(1, min(4, len(pool)))
        lits = []
        for b in rng.sample(pool, k):
            lo = -cfg.max_weight if cfg.negative_weights else 0
            w = rng.randint(lo, cfg.max_weight)
            if rng.random() < 0.35:
                lits.append((-b, w))
            elif b not in head:
                lits.append((b, w))
        bound = rng.randint(0, max(1, sum(abs(w) for _, w in lits)))
        return normalize_weighted(bound, lits)

    def normal_body(self, pool: list[int], head: set[int]) -> NormalBody:
        rng = self.rng
        k = rng.randint(0, min(3, len(pool)))
        pos, neg = [], []
        for b in rng.sample(pool, k):
            if rng.random() < 0.35:
                neg.append(b)
            elif b not in head:
                pos.append(b)
        return NormalBody(tuple(pos), tuple(neg))

    def rule(self, heads: list[int], body_pool: list[int]) -> Rule:
        rng, cfg = self.rng, self.cfg
        x = rng.random()
        if x < cfg.constraint_ratio:
            head: tuple[int, ...] = ()
            choice = False
        elif x < cfg.constraint_ratio + cfg.choice_ratio:
            head = tuple(rng.sample(heads, rng.randint(1, min(3, len(heads)))))
            choice = True
        elif x < cfg.constraint_ratio + cfg.choice_ratio + cfg.disjunction_ratio and len(heads) > 1:
            head = tuple(rng.sample(heads, rng.randint(2, min(3, len(heads)))))
            choice = False
        else:
            head = (rng.choice(heads),)
            choice = False
        hs = set(head)
        if rng.random() < cfg.weighted_ratio:
            body = self.weighted_body(body_pool, hs)
        else:
            body = self.normal_body(body_pool, hs)
        return Rule(head, body, choice)

    def cycle(self, atoms: list[int], pool: list[int]) -> list[Rule]:
        """Rules closing a positive loop through 2-4 atoms."""
        rng = self.rng
        ring = rng.sample(atoms, rng.randint(2, min(4, len(atoms))))
        rules = []
        for i, a in enumerate(ring):
            b = ring[(i + 1) % len(ring)]
            extra = [x for x in rng.sample(pool, min(2, len(pool))) if x not in (a, b)]
            if rng.random() < self.cfg.weighted_ratio:
                lits = [(b, rng.randint(1, 3))] + [(x * rng.choice((1, -1)), rng.randint(0, 2))
                                                   for x in extra if x != a]
                body = normalize_weighted(rng.randint(1, 3), lits)
            else:
                negs = tuple(x for x in extra[:1] if rng.random() < 0.5)
                body = NormalBody((b,), negs)
            head = (a,)
            if rng.random() < 0.25:
                head = (a, rng.choice([x for x in atoms if x != a]))
            rules.append(Rule(head, body, rng.random() < 0.3))
        # an entry point from outside the loop
        rules.append(Rule((rng.choice(ring),), self.normal_body(pool, set(ring)),
                          rng.random() < 0.5))
        return rules

    def program(self) -> GroundProgram:
        """An HCF program; regenerates until one is found."""
        while True:
            p = self._attempt()
            if p is not None:
                return p

    def _attempt(self) -> Optional[GroundProgram]:
        rng, cfg = self.rng, self.cfg
        n_vars = rng.randint(0, cfg.lin_vars) if cfg.lin_vars else 0
        n_lin = rng.randint(1, 2) if n_vars else 0
        n_atoms = rng.randint(2, cfg.max_atoms - n_lin)
        atoms = list(range(1, n_atoms + 1))
        lin_atoms = list(range(n_atoms + 1, n_atoms + 1 + n_lin))
        budget = cfg.max_rules - n_vars  # each domain costs one fact rule
        n_rules = rng.randint(1, budget)
        rules = [self.rule(atoms, atoms + lin_atoms) for _ in range(n_rules)]
        if rng.random() < cfg.cycle_ratio:
            cyc = self.cycle(atoms, atoms + lin_atoms)
            if len(cyc) <= budget:
                rules = rules[:max(0, min(n_rules, budget - len(cyc)))] + cyc
        theory: list[TheoryAtom] = []
        next_atom = n_atoms + n_lin + 1
        names = VAR_NAMES[:n_vars]
        for v in names:
            lo = rng.randint(-1, 1)
            hi = lo + rng.randint(0, cfg.max_width - 1)
            theory.append(_dom_atom(next_atom, v, lo, hi))
            rules.append(Rule((next_atom,)))
            next_atom += 1
        for a in lin_atoms:
            terms = [(rng.choice((1, 1, 2, -1)), v) for v in rng.sample(names, rng.randint(1, len(names)))]
            theory.append(_sum_atom(a, terms, rng.choice(SUM_OPS), rng.randint(-1, 3)))
        minimize: list[MinimizeEntry] = []
        if cfg.minimize:
            for _ in range(rng.randint(1, 4)):
                lit = rng.choice(atoms) * rng.choice((1, 1, -1))
                minimize.append(MinimizeEntry(lit, rng.randint(1, 3), rng.randint(0, 1)))
        if cfg.lin_objective and names:
            theory.append(_min_atom([(rng.randint(-2, 2) or 1, v) for v in names]))
        try:
            p = make_program(rules, atoms=atoms + lin_atoms, minimize=minimize, theory_atoms=theory)
        except TautologyError:
            return None
        if not is_hcf(p):
            return None
        return p


def random_program(seed: int, cfg: Optional[GenConfig] = None) -> GroundProgram:
    return Generator(seed, cfg).program()


def random_violating_program(seed: int, cfg: Optional[GenConfig] = None) -> GroundProgram:
    """An HCF program with a weighted disjunctive rule that must be shifted."""
    gen = Generator(seed, cfg or GenConfig(max_atoms=7, max_rules=7))
    rng = gen.rng
    while True:
        p = gen._attempt()
        if p is None:
            continue
        atoms = sorted(a for a in p.atoms if not p.theory_atom(a))
        if len(atoms) < 3:
            continue
        a, b, c = rng.sample(atoms, 3)
        extra = [
            Rule((a, b), normalize_weighted(rng.randint(1, 2),
                                            [(c, rng.randint(1, 2))] +
                                            [(-x, 1) for x in rng.sample(atoms, 1) if x not in (a, b)])),
            Rule((c,), NormalBody((a,), ())),
        ]
        try:
            q = make_program(list(p.rules) + extra, atoms=p.atoms, minimize=p.minimize,
                             theory_atoms=p.theory_atoms)
        except TautologyError:
            continue
        if not is_hcf(q):
            continue
        s = build_dep_graph(q)
        if any(needs_shift(r, s) and r.weighted for r in q.rules):
            return q


def random_model(seed: int, max_product: int = 10**5) -> ConstraintModel:
    """A small ConstraintModel mixing every IR constraint kind.

    The product of all domain sizes stays at or below ``max_product``.
    """
    rng = random.Random(seed)
    while True:
        m = ConstraintModel()
        n_bool = rng.randint(1, 4)
        n_int = rng.randint(1, 3)
        bools = [m.add_bool(f"b{i}") for i in range(n_bool)]
        ints = []
        for i in range(n_int):
            lo = rng.randint(-2, 1)
            ints.append(m.add_int(f"i{i}", lo, lo + rng.randint(0, 3)))
        size = 2**n_bool
        for v in ints:
            lo, hi = m.bounds(v)
            size *= hi - lo + 1
        if size <= max_product:
            break

    def lit() -> Lit:
        return Lit(rng.choice(bools), rng.random() < 0.4)

    def terms(k: int):
        pool = ints + bools
        return tuple((v, rng.choice((-2, -1, 1, 2))) for v in rng.sample(pool, min(k, len(pool))))

    def operand():
        return rng.choice(ints) if rng.random() < 0.8 else rng.randint(0, 2)

    for _ in range(rng.randint(1, 4)):
        kind = rng.randrange(9)
        if kind == 0:
            m.add(Clause(tuple(lit() for _ in range(rng.randint(1, 3)))))
        elif kind == 1:
            m.add(ReifAnd(rng.choice(bools), tuple(lit() for _ in range(rng.randint(0, 3)))))
        elif kind == 2:
            m.add(ReifOr(rng.choice(bools), tuple(lit() for _ in range(rng.randint(1, 3)))))
        elif kind == 3:
            m.add(Implication(lit(), lit()))
        elif kind == 4:
            m.add(Linear(terms(rng.randint(1, 3)), rng.choice(("<=", "=", "!=")), rng.randint(-2, 3)))
        elif kind == 5:
            m.add(ReifLinear(rng.choice(bools), terms(rng.randint(1, 3)),
                             rng.choice(("<=", "=", "!=")), rng.randint(-2, 3)))
        elif kind == 6:
            m.add(AllDifferent(tuple(operand() for _ in range(rng.randint(2, 3)))))
        elif kind == 7:
            m.add(Disjunctive(tuple((operand(), operand()) for _ in range(rng.randint(1, 3)))))
        else:
            m.add(Cumulative(tuple((operand(), operand(), operand()) for _ in range(rng.randint(1, 3))),
                             rng.randint(0, 3)))
    if rng.random() < 0.3:
        m.objective = terms(2)
    return m

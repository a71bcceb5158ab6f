"""Brute-force ground truth: answer sets by definition, IR models, correspondence.

Answer sets are computed from the reduct: a candidate ``I`` must be a model
of ``P`` and a subset-minimal model of ``P^I``.  In the reduct, negative
literals of weighted bodies are evaluated in ``I`` (the ``l'`` bound
adjustment) for every rule kind, and a choice rule contributes ``a <- B^+``
only for ``a`` in ``I``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .aspif import (GroundProgram, MinimizeEntry, NormalBody, Rule, compile_priorities, cost,
                    make_program)
from .analysis import build_dep_graph
from .ir import ConstraintModel
from .search import SearchSpaceTooLarge, run_search
from .theory import CaspSpec, global_holds

DEFAULT_CAP = 2**22

INF = None  # rank of a false atom


@dataclass(frozen=True, order=True)
class EInterpretation:
    atoms: frozenset[int]
    assignment: tuple[tuple[str, int], ...] = ()

    @property
    def delta(self) -> dict[str, int]:
        return dict(self.assignment)

    def sort_key(self):
        return (sorted(self.atoms), self.assignment)

    def __repr__(self) -> str:
        inner = ",".join(map(str, sorted(self.atoms)))
        if self.assignment:
            inner += "; " + ",".join(f"{v}={x}" for v, x in self.assignment)
        return "{" + inner + "}"


def make_einterp(atoms: Iterable[int], delta: Optional[Mapping[str, int]] = None) -> EInterpretation:
    return EInterpretation(frozenset(atoms), tuple(sorted((delta or {}).items())))


# --- answer sets -----------------------------------------------------------

class _Compiled:
    """Rules over bit positions."""

    def __init__(self, p: GroundProgram, reduct: str = "fixed"):
        if reduct not in ("fixed", "flp"):
            raise ValueError(reduct)
        self.literal_flp = reduct == "flp"
        self.atoms = sorted(p.atoms)
        self.bit = {a: 1 << i for i, a in enumerate(self.atoms)}
        self.rules = []
        for r in p.rules:
            head = 0
            for a in r.head:
                head |= self.bit[a]
            hbits = [self.bit[a] for a in r.head]
            if isinstance(r.body, NormalBody):
                pm = nm = 0
                for b in r.body.pos:
                    pm |= self.bit[b]
                for b in r.body.neg:
                    nm |= self.bit[b]
                self.rules.append((r.choice, head, hbits, False, pm, nm, None))
            else:
                pos = [(self.bit[l], w) for l, w in r.body.lits if l > 0]
                neg = [(self.bit[-l], w) for l, w in r.body.lits if l < 0]
                self.rules.append((r.choice, head, hbits, True, r.body.bound, pos, neg))

    @staticmethod
    def body_holds(rule, i: int) -> bool:
        _, _, _, weighted, a, b, c = rule
        if not weighted:
            return (i & a) == a and not (i & b)
        total = sum(w for m, w in b if i & m) + sum(w for m, w in c if not i & m)
        return total >= a

    def is_model(self, i: int) -> bool:
        for rule in self.rules:
            choice, head = rule[0], rule[1]
            if not choice and not (i & head) and self.body_holds(rule, i):
                return False
        return True

    def reduct(self, i: int) -> list[tuple[int, object]]:
        """Positive rules ``(head mask, body)`` where body is a mask or a weight test."""
        out = []
        for rule in self.rules:
            if not self.body_holds(rule, i):
                continue
            choice, head, hbits, weighted = rule[:4]
            if weighted:
                bound, pos, neg = rule[4:]
                if self.literal_flp and not choice:
                    out.append((head, (bound, pos, neg)))
                    continue
                fixed = sum(w for m, w in neg if not i & m)
                body: object = (max(0, bound - fixed), pos)
            else:
                body = rule[4]
            if choice:
                out.extend((h, body) for h in hbits if i & h)
            else:
                out.append((head, body))
        return out

    @staticmethod
    def _fires(body, j: int) -> bool:
        if isinstance(body, int):
            return (j & body) == body
        if len(body) == 3:
            bound, pos, neg = body
            return (sum(w for m, w in pos if j & m) + sum(w for m, w in neg if not j & m)) >= bound
        bound, pos = body
        return sum(w for m, w in pos if j & m) >= bound

    def minimal(self, i: int) -> bool:
        red = self.reduct(i)
        if not self.literal_flp and all(h & (h - 1) == 0 for h, _ in red):
            # definite reduct: the least model is the unique minimal one
            lm = 0
            changed = True
            while changed:
                changed = False
                for h, body in red:
                    if h and not lm & h and self._fires(body, lm):
                        lm |= h
                        changed = True
            return lm == i
        return self.minimal_by_subsets(i, red)

    def minimal_by_subsets(self, i: int, red=None) -> bool:
        red = self.reduct(i) if red is None else red
        j = (i - 1) & i
        while True:
            if j != i and all(not self._fires(body, j) or (j & h) for h, body in red):
                return False
            if j == 0:
                return True
            j = (j - 1) & i

    def atoms_of(self, i: int) -> frozenset[int]:
        return frozenset(a for a in self.atoms if i & self.bit[a])


def with_free_atoms(p: GroundProgram, free: Iterable[int]) -> GroundProgram:
    """``P`` plus a choice rule ``{a}.`` for every free atom."""
    extra = [Rule((a,), NormalBody(), True) for a in sorted(free)]
    if not extra:
        return p
    return make_program(list(p.rules) + extra, atoms=p.atoms, minimize=p.minimize,
                        theory_atoms=p.theory_atoms, shows=p.shows)


def plain_answer_sets(p: GroundProgram, *, cap: int = DEFAULT_CAP,
                      use_subsets: bool = False, reduct: str = "fixed") -> list[frozenset[int]]:
    """Answer sets of a program without theory atoms.

    ``reduct="flp"`` keeps weighted bodies of disjunctive rules verbatim in
    the reduct, so negative literals are re-evaluated in the candidate
    subset.  That variant disagrees with the ranked-support
    characterization; it is kept only to document the difference.
    """
    c = _Compiled(p, reduct)
    n = len(c.atoms)
    if 2**n > cap:
        raise SearchSpaceTooLarge(f"2^{n} candidate interpretations exceed the cap {cap}")
    out = []
    for i in range(2**n):
        if not c.is_model(i):
            continue
        ok = c.minimal_by_subsets(i) if use_subsets else c.minimal(i)
        if ok:
            out.append(c.atoms_of(i))
    return sorted(out, key=sorted)


def _assignments(spec: CaspSpec):
    names = spec.sorted_vars()
    ranges = []
    for v in names:
        if v not in spec.domains:
            raise ValueError(f"variable {v} has no finite domain")
        lo, hi = spec.domains[v]
        ranges.append(range(lo, hi + 1))
    for values in itertools.product(*ranges):
        yield dict(zip(names, values))


def domain_size(spec: CaspSpec) -> int:
    size = 1
    for v in spec.vars:
        if v not in spec.domains:
            return 0
        lo, hi = spec.domains[v]
        size *= hi - lo + 1
    return size


def enumerate_answer_sets(p: GroundProgram, spec: Optional[CaspSpec] = None, *,
                          cap: int = DEFAULT_CAP) -> set[EInterpretation]:
    """All constraint answer sets ``<I, delta>`` of ``p``."""
    spec = spec or CaspSpec()
    if spec.vars and domain_size(spec) == 0:
        raise ValueError("every linear variable needs a finite domain")
    if 2 ** len(p.atoms) * max(1, domain_size(spec)) > cap:
        raise SearchSpaceTooLarge("interpretation space exceeds the cap")
    lin = sorted(spec.lin_atoms)
    base = plain_answer_sets(with_free_atoms(p, lin), cap=cap)
    if spec.is_empty():
        return {make_einterp(i) for i in base}
    by_truth: dict[frozenset[int], list[dict[str, int]]] = {}
    for delta in _assignments(spec):
        if not all(global_holds(g, delta) for g in spec.globals):
            continue
        truth = frozenset(a for a in lin if spec.lin_atoms[a].holds(delta))
        by_truth.setdefault(truth, []).append(delta)
    out = set()
    for i in base:
        for delta in by_truth.get(i & frozenset(lin), ()):
            out.add(make_einterp(i, delta))
    return out


def sorted_interps(s: Iterable[EInterpretation]) -> list[EInterpretation]:
    return sorted(s, key=EInterpretation.sort_key)


# --- ranked supported models ----------------------------------------------

@dataclass
class SupportReport:
    ok: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _body_true(r: Rule, i: frozenset[int]) -> bool:
    b = r.body
    if isinstance(b, NormalBody):
        return all(x in i for x in b.pos) and not any(x in i for x in b.neg)
    total = sum(w for l, w in b.lits if (l > 0 and l in i) or (l < 0 and -l not in i))
    return total >= b.bound


def _is_model(p: GroundProgram, i: frozenset[int]) -> bool:
    return all(r.choice or any(a in i for a in r.head) or not _body_true(r, i) for r in p.rules)


def _lt(x, y) -> bool:
    if x is INF:
        return False
    return y is INF or x < y


def check_ranked_supported(p: GroundProgram, atoms: Iterable[int], ranks: Mapping[int, object],
                           *, variant: str = "plain",
                           free: Iterable[int] = ()) -> SupportReport:
    """Check a ranked interpretation.

    ``variant`` is ``plain`` (ranked supported), ``scc`` (ranked
    scc-supported) or ``modular`` (modular ranked scc-supported).  Atoms in
    ``free`` (reifying linear constraints) need no support.
    """
    if variant not in ("plain", "scc", "modular"):
        raise ValueError(variant)
    i = frozenset(atoms)
    free = set(free)
    problems = []
    for a in sorted(p.atoms):
        if (a in i) != (ranks.get(a, INF) is not INF):
            problems.append(f"atom {a}: rank must be finite iff the atom is true")
    if not _is_model(p, i):
        problems.append("not a model")
    scc = build_dep_graph(p) if variant != "plain" else None
    if variant == "modular":
        for a in sorted(i):
            r = ranks.get(a, INF)
            if r is not INF and r > scc.size(a):
                problems.append(f"atom {a}: rank {r} exceeds its SCC size {scc.size(a)}")
    if problems:
        return SupportReport(False, problems)
    for a in sorted(i - free):
        if not any(_supports(r, a, i, ranks, scc) for r in p.rules):
            problems.append(f"atom {a} is unsupported")
    return SupportReport(not problems, problems)


def _supports(r: Rule, a: int, i: frozenset[int], ranks, scc) -> bool:
    if a not in r.head:
        return False
    if not r.choice and set(r.head) & i != {a}:
        return False
    ra = ranks.get(a, INF)
    body = r.body

    def below(b: int) -> bool:
        return _lt(ranks.get(b, INF), ra)

    def pos_ok(b: int) -> bool:
        if scc is None or scc.same(a, b):
            return below(b)
        return b in i

    if isinstance(body, NormalBody):
        return all(pos_ok(b) for b in body.pos) and not any(b in i for b in body.neg)
    total = 0
    for l, w in body.lits:
        if l > 0 and pos_ok(l):
            total += w
        elif l < 0 and -l not in i:
            total += w
    return total >= body.bound


def find_ranking(p: GroundProgram, atoms: Iterable[int], *, variant: str = "plain",
                 free: Iterable[int] = ()) -> Optional[dict[int, object]]:
    """Exhaustively search a rank assignment passing :func:`check_ranked_supported`."""
    i = sorted(set(atoms))
    if variant == "plain":
        choices = [range(1, len(i) + 1)] * len(i)
    else:
        scc = build_dep_graph(p)
        choices = [range(1, scc.size(a) + 1) for a in i]
    base = {a: INF for a in p.atoms}
    for values in itertools.product(*choices):
        ranks = dict(base)
        ranks.update(zip(i, values))
        if check_ranked_supported(p, i, ranks, variant=variant, free=free):
            return ranks
    return None


# --- IR side -----------------------------------------------------------------

def enumerate_ir_models(m: ConstraintModel, *, project: Optional[Iterable[str]] = None,
                        max_nodes: Optional[int] = None,
                        max_solutions: Optional[int] = None) -> list[dict[str, int]]:
    """All models of ``m`` (or one per distinct projection), lexicographically sorted."""
    kwargs = {}
    if max_nodes is not None:
        kwargs["max_nodes"] = max_nodes
    if max_solutions is not None:
        kwargs["max_solutions"] = max_solutions
    res = run_search(m, project=project, **kwargs)
    models = res.assignments()
    return sorted(models, key=lambda a: tuple(sorted(a.items())))


def project_model(m: ConstraintModel, model: Mapping[str, int], atoms: Iterable[int],
                  lin_vars: Iterable[str]) -> EInterpretation:
    true = [a for a in atoms if model[m.atom_var[a]]]
    delta = {v: model[m.lin_var[v]] for v in lin_vars}
    return make_einterp(true, delta)


@dataclass(frozen=True)
class Verdict:
    kind: str  # OneToOne | ProjectionEqual | Mismatch
    witness: Optional[EInterpretation] = None
    side: str = ""
    answer_sets: int = 0
    models: int = 0

    @property
    def ok(self) -> bool:
        return self.kind != "Mismatch"

    def __str__(self) -> str:
        if self.kind == "Mismatch":
            return f"Mismatch: {self.witness!r} ({self.side})"
        return f"{self.kind} ({self.answer_sets} answer sets, {self.models} models)"


def check_correspondence(p: GroundProgram, spec: Optional[CaspSpec], m: ConstraintModel,
                         strict: bool, *, cap: int = DEFAULT_CAP,
                         max_nodes: Optional[int] = None,
                         answer_sets: Optional[set[EInterpretation]] = None) -> Verdict:
    """Compare answer sets of ``p`` with the models of its translation ``m``.

    ``p`` may be the program before shifting; only its atoms are compared.
    """
    spec = spec or CaspSpec()
    truth = answer_sets if answer_sets is not None else enumerate_answer_sets(p, spec, cap=cap)
    atoms = sorted(p.atoms)
    lins = spec.sorted_vars()
    proj_vars = [m.atom_var[a] for a in atoms] + [m.lin_var[v] for v in lins]
    models = enumerate_ir_models(m, project=None if strict else proj_vars, max_nodes=max_nodes)
    projected = [project_model(m, x, atoms, lins) for x in models]
    seen: dict[EInterpretation, int] = {}
    for e in projected:
        seen[e] = seen.get(e, 0) + 1
    for e in sorted_interps(seen):
        if e not in truth:
            return Verdict("Mismatch", e, "model of the translation only", len(truth), len(models))
    for e in sorted_interps(truth):
        if e not in seen:
            return Verdict("Mismatch", e, "answer set only", len(truth), len(models))
    if strict:
        for e in sorted_interps(seen):
            if seen[e] > 1:
                return Verdict("Mismatch", e, f"{seen[e]} models project here", len(truth),
                               len(models))
        return Verdict("OneToOne", None, "", len(truth), len(models))
    return Verdict("ProjectionEqual", None, "", len(truth), len(models))


def ranks_unique(m: ConstraintModel, models: Iterable[Mapping[str, int]]) -> bool:
    """Models agreeing on all atoms agree on every rank variable."""
    seen: dict[tuple, tuple] = {}
    atoms = sorted(m.atom_var)
    ranks = sorted(m.rank_var)
    for x in models:
        key = tuple(x[m.atom_var[a]] for a in atoms)
        val = tuple(x[m.rank_var[a]] for a in ranks)
        if seen.setdefault(key, val) != val:
            return False
    return True


# --- optimization ------------------------------------------------------------

def lexicographic_key(entries: Iterable[MinimizeEntry], atoms: frozenset[int]) -> tuple[int, ...]:
    entries = list(entries)
    levels = sorted({e.priority for e in entries}, reverse=True)
    return tuple(cost([e for e in entries if e.priority == lv], atoms) for lv in levels)


def interpretation_cost(p: GroundProgram, spec: Optional[CaspSpec], e: EInterpretation) -> int:
    """Single-level cost: compiled minimize statement plus the linear objective."""
    spec = spec or CaspSpec()
    return cost(compile_priorities(p.minimize), e.atoms) + spec.objective_value(e.delta)


def optimal_cost(p: GroundProgram, spec: Optional[CaspSpec] = None,
                 answer_sets: Optional[Iterable[EInterpretation]] = None) -> Optional[int]:
    """Minimum of compiled ASP cost plus linear objective over all answer sets."""
    spec = spec or CaspSpec()
    sets = answer_sets if answer_sets is not None else enumerate_answer_sets(p, spec)
    best: Optional[int] = None
    for e in sets:
        value = interpretation_cost(p, spec, e)
        if best is None or value < best:
            best = value
    return best


def lexicographic_optima(p: GroundProgram, answer_sets: Iterable[EInterpretation]) -> set[frozenset[int]]:
    sets = list(answer_sets)
    if not sets:
        return set()
    keys = {e.atoms: lexicographic_key(p.minimize, e.atoms) for e in sets}
    best = min(keys.values())
    return {a for a, k in keys.items() if k == best}


def min_ir_objective(m: ConstraintModel, *, max_nodes: Optional[int] = None) -> Optional[int]:
    """Minimum objective value over the models of ``m``."""
    proj = sorted({v for v, _ in m.objective})
    models = enumerate_ir_models(m, project=proj, max_nodes=max_nodes)
    if not models:
        return None
    return min(m.objective_value(x) for x in models)

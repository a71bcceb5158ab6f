"""Positive dependency graph, SCCs, head-cycle freeness and partial shifting."""
from __future__ import annotations

from dataclasses import dataclass

from .aspif import GroundProgram, NormalBody, Rule, make_program


class NotHcfError(Exception):
    pass


@dataclass(frozen=True)
class SccInfo:
    edges: dict[int, tuple[int, ...]]
    scc_id: dict[int, int]
    scc_size: dict[int, int]
    nontrivial: frozenset[int]

    def component(self, atom: int) -> frozenset[int]:
        cid = self.scc_id[atom]
        return frozenset(a for a, c in self.scc_id.items() if c == cid)

    def size(self, atom: int) -> int:
        return self.scc_size[self.scc_id[atom]]

    def same(self, a: int, b: int) -> bool:
        return self.scc_id[a] == self.scc_id[b]

    def is_tight(self) -> bool:
        return not self.nontrivial

    def in_nontrivial(self, atom: int) -> bool:
        return self.scc_id[atom] in self.nontrivial


def _tarjan(nodes: list[int], edges: dict[int, tuple[int, ...]]) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = edges.get(v, ())
            recursed = False
            while i < len(succ):
                w = succ[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recursed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recursed:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def build_dep_graph(p: GroundProgram) -> SccInfo:
    succ: dict[int, set[int]] = {a: set() for a in p.atoms}
    for r in p.rules:
        for a in r.head:
            succ[a].update(r.pos)
    edges = {a: tuple(sorted(bs)) for a, bs in succ.items()}
    comps = _tarjan(sorted(p.atoms), edges)
    scc_id: dict[int, int] = {}
    scc_size: dict[int, int] = {}
    for cid, comp in enumerate(comps):
        scc_size[cid] = len(comp)
        for a in comp:
            scc_id[a] = cid
    nontrivial = frozenset(c for c, n in scc_size.items() if n > 1)
    return SccInfo(edges, scc_id, scc_size, nontrivial)


def is_tight(p: GroundProgram, s: SccInfo | None = None) -> bool:
    return (s or build_dep_graph(p)).is_tight()


def is_hcf(p: GroundProgram, s: SccInfo | None = None) -> bool:
    s = s or build_dep_graph(p)
    for r in p.rules:
        if r.choice:
            continue
        comps = [s.scc_id[a] for a in r.head]
        if len(comps) != len(set(comps)):
            return False
    return True


def head_overlaps_body(r: Rule, s: SccInfo) -> bool:
    """True if some head atom shares an SCC with a positive body atom."""
    body = {s.scc_id[b] for b in r.pos}
    return any(s.scc_id[a] in body for a in r.head)


def needs_shift(r: Rule, s: SccInfo) -> bool:
    return not r.choice and len(r.head) > 1 and head_overlaps_body(r, s)


def partially_shift(p: GroundProgram, s: SccInfo | None = None) -> GroundProgram:
    """Shift the disjunctive rules whose heads overlap a positive-body SCC.

    ``a_1 | ... | a_m :- B`` becomes ``a_i :- B, not a_j (j != i)``.  A
    weighted ``B`` cannot carry extra negative literals, so it is first
    moved into a fresh atom ``aux :- B``.
    """
    s = s or build_dep_graph(p)
    if not is_hcf(p, s):
        raise NotHcfError("program is not head-cycle free")
    if not any(needs_shift(r, s) for r in p.rules):
        return p
    fresh = p.max_atom()
    rules: list[Rule] = []
    for r in p.rules:
        if not needs_shift(r, s):
            rules.append(r)
            continue
        if isinstance(r.body, NormalBody):
            pos, neg = r.body.pos, r.body.neg
        else:
            fresh += 1
            rules.append(Rule((fresh,), r.body))
            pos, neg = (fresh,), ()
        for a in r.head:
            others = tuple(b for b in r.head if b != a and b not in neg)
            rules.append(Rule((a,), NormalBody(pos, neg + others)))
    return make_program(rules, atoms=p.atoms, minimize=p.minimize,
                        theory_atoms=p.theory_atoms, shows=p.shows)

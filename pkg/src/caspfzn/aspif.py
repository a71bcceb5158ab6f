"""Ground programs and the ASPIF reader.

Atoms are positive integers; literals are signed atoms (``-a`` is default
negation of ``a``).  Id 0 is reserved by the format.
"""
from __future__ import annotations

import io
from collections import OrderedDict
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Union

IR_INT_MAX = 2**31 - 1


class AspifError(Exception):
    pass


class AspifSyntaxError(AspifError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnsupportedStatement(AspifError):
    def __init__(self, line: int, kind: str):
        super().__init__(f"line {line}: unsupported ASPIF statement: {kind}")
        self.line = line
        self.kind = kind


class TautologyError(AspifError):
    pass


@dataclass(frozen=True)
class NormalBody:
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()

    @property
    def literals(self) -> tuple[int, ...]:
        return self.pos + tuple(-b for b in self.neg)


@dataclass(frozen=True)
class WeightedBody:
    """``bound <= { lit_1 : w_1, ... }`` with non-negative weights."""

    bound: int
    lits: tuple[tuple[int, int], ...]

    @property
    def pos(self) -> tuple[int, ...]:
        return tuple(l for l, _ in self.lits if l > 0)

    @property
    def neg(self) -> tuple[int, ...]:
        return tuple(-l for l, _ in self.lits if l < 0)

    def weight(self, lit: int) -> int:
        for l, w in self.lits:
            if l == lit:
                return w
        return 0


Body = Union[NormalBody, WeightedBody]


@dataclass(frozen=True)
class Rule:
    head: tuple[int, ...]
    body: Body = NormalBody()
    choice: bool = False

    @property
    def weighted(self) -> bool:
        return isinstance(self.body, WeightedBody)

    @property
    def is_constraint(self) -> bool:
        return not self.choice and not self.head

    @property
    def pos(self) -> tuple[int, ...]:
        return self.body.pos

    @property
    def neg(self) -> tuple[int, ...]:
        return self.body.neg

    def atoms(self) -> set[int]:
        return set(self.head) | set(self.pos) | set(self.neg)

    def __str__(self) -> str:
        if self.choice:
            head = "{" + ";".join(map(str, self.head)) + "}"
        else:
            head = "|".join(map(str, self.head))
        if isinstance(self.body, WeightedBody):
            inner = ", ".join(f"{_lit_str(l)}:{w}" for l, w in self.body.lits)
            body = f"{self.body.bound} <= {{{inner}}}"
        else:
            body = ", ".join(_lit_str(l) for l in self.body.literals)
        return f"{head} :- {body}." if body else f"{head}."


def _lit_str(lit: int) -> str:
    return str(lit) if lit > 0 else f"not {-lit}"


@dataclass(frozen=True)
class MinimizeEntry:
    literal: int
    weight: int
    priority: int = 0


# Theory terms as delivered by the grounder; interpretation lives in theory.py.

@dataclass(frozen=True)
class TNumber:
    value: int


@dataclass(frozen=True)
class TSymbol:
    name: str


@dataclass(frozen=True)
class TCompound:
    """Function application or, with ``name`` in ``TUPLE/SET/LIST``, a tuple-like term."""

    name: Union[str, int]
    args: tuple["Term", ...]


Term = Union[TNumber, TSymbol, TCompound]

TUPLE, SET, LIST = -1, -2, -3


@dataclass(frozen=True)
class TheoryElement:
    terms: tuple[Term, ...]
    condition: tuple[int, ...] = ()


@dataclass(frozen=True)
class TheoryAtom:
    atom: int  # 0 for directives
    name: Term
    elements: tuple[TheoryElement, ...]
    guard: tuple[str, Term] | None = None


@dataclass(frozen=True)
class Show:
    name: str
    condition: tuple[int, ...]


@dataclass(frozen=True)
class GroundProgram:
    atoms: frozenset[int] = frozenset()
    rules: tuple[Rule, ...] = ()
    minimize: tuple[MinimizeEntry, ...] = ()
    theory_atoms: tuple[TheoryAtom, ...] = ()
    shows: tuple[Show, ...] = ()

    @property
    def shown_atoms(self) -> dict[int, str]:
        """Atoms shown unconditionally through a single positive literal."""
        return {s.condition[0]: s.name for s in self.shows
                if len(s.condition) == 1 and s.condition[0] > 0}

    def theory_atom(self, atom: int) -> TheoryAtom | None:
        for t in self.theory_atoms:
            if t.atom == atom:
                return t
        return None

    def head_occurrences(self) -> dict[int, list[int]]:
        occ: dict[int, list[int]] = {}
        for i, r in enumerate(self.rules):
            for a in r.head:
                occ.setdefault(a, []).append(i)
        return occ

    def max_atom(self) -> int:
        return max(self.atoms, default=0)


def make_program(rules: Iterable[Rule], *, atoms: Iterable[int] = (),
                 minimize: Iterable[MinimizeEntry] = (),
                 theory_atoms: Iterable[TheoryAtom] = (),
                 shows: Iterable[Show] = (), check: bool = True) -> GroundProgram:
    """Build a program, registering every referenced atom."""
    rules = tuple(rules)
    minimize = tuple(minimize)
    theory_atoms = tuple(theory_atoms)
    shows = tuple(shows)
    universe = set(atoms)
    for r in rules:
        universe |= r.atoms()
    universe.update(abs(m.literal) for m in minimize)
    for s in shows:
        universe.update(abs(l) for l in s.condition)
    for t in theory_atoms:
        if t.atom:
            universe.add(t.atom)
        for e in t.elements:
            universe.update(abs(l) for l in e.condition)
    if 0 in universe:
        raise AspifError("atom id 0 is reserved")
    if check:
        for r in rules:
            loop = set(r.head) & set(r.pos)
            if loop:
                raise TautologyError(f"atom {min(loop)} occurs in head and positive body of {r}")
    return GroundProgram(frozenset(universe), rules, minimize, theory_atoms, shows)


def normalize_weighted(bound: int, lits: Iterable[tuple[int, int]]) -> WeightedBody:
    """Merge duplicate literals and flip negative weights.

    ``w * [l]`` equals ``w - w * [not l]``, so a negative weight becomes a
    positive weight on the complementary literal and raises the bound by
    ``|w|``.
    """
    merged: OrderedDict[int, int] = OrderedDict()
    for l, w in lits:
        if l == 0:
            raise AspifError("literal 0 in weighted body")
        merged[l] = merged.get(l, 0) + w
    flipped: OrderedDict[int, int] = OrderedDict()
    for l, w in merged.items():
        if w < 0:
            bound -= w
            l, w = -l, -w
        flipped[l] = flipped.get(l, 0) + w
    return WeightedBody(bound, tuple(flipped.items()))


def normal_body(lits: Iterable[int]) -> NormalBody:
    pos: list[int] = []
    neg: list[int] = []
    for l in lits:
        if l > 0 and l not in pos:
            pos.append(l)
        elif l < 0 and -l not in neg:
            neg.append(-l)
        elif l == 0:
            raise AspifError("literal 0 in body")
    return NormalBody(tuple(pos), tuple(neg))


class _Tokens:
    def __init__(self, raw: bytes, lineno: int):
        self.raw = raw
        self.pos = 0
        self.lineno = lineno

    def int(self) -> int:
        raw = self.raw
        n = len(raw)
        while self.pos < n and raw[self.pos] == 0x20:
            self.pos += 1
        start = self.pos
        while self.pos < n and raw[self.pos] != 0x20:
            self.pos += 1
        tok = raw[start:self.pos]
        if not tok:
            raise AspifSyntaxError(self.lineno, "unexpected end of statement")
        try:
            return int(tok)
        except ValueError:
            raise AspifSyntaxError(self.lineno, f"expected integer, got {tok!r}") from None

    def count(self) -> int:
        n = self.int()
        if n < 0:
            raise AspifSyntaxError(self.lineno, "negative length")
        return n

    def ints(self, n: int) -> list[int]:
        return [self.int() for _ in range(n)]

    def string(self, nbytes: int) -> str:
        if self.pos < len(self.raw) and self.raw[self.pos] == 0x20:
            self.pos += 1
        s = self.raw[self.pos:self.pos + nbytes]
        if len(s) != nbytes:
            raise AspifSyntaxError(self.lineno, "string shorter than declared length")
        self.pos += nbytes
        try:
            return s.decode("utf-8")
        except UnicodeDecodeError:
            raise AspifSyntaxError(self.lineno, "string is not UTF-8") from None

    def end(self) -> None:
        if self.raw[self.pos:].strip():
            raise AspifSyntaxError(self.lineno, "trailing tokens")


_UNSUPPORTED = {3: "project", 5: "external", 6: "assumption", 7: "heuristic", 8: "edge"}


def parse_aspif(data: Union[bytes, str, BinaryIO]) -> GroundProgram:
    """Parse ASPIF 1.x text into a :class:`GroundProgram`."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    stream = io.BytesIO(data) if isinstance(data, bytes) else data

    lines = iter(stream)
    header = next(lines, b"").rstrip(b"\r\n")
    parts = header.split()
    if len(parts) < 4 or parts[0] != b"asp" or parts[1] != b"1":
        raise AspifSyntaxError(1, "expected header 'asp 1 <minor> <rev>'")
    if b"incremental" in parts[4:]:
        raise UnsupportedStatement(1, "incremental")

    rules: list[Rule] = []
    minimize: list[MinimizeEntry] = []
    shows: list[Show] = []
    terms: dict[int, tuple] = {}
    elements: dict[int, tuple[list[int], tuple[int, ...]]] = {}
    raw_atoms: list[tuple[int, int, list[int], tuple[int, int] | None]] = []
    finished = False
    lineno = 1

    for lineno, raw in enumerate(lines, start=2):
        raw = raw.rstrip(b"\r\n")
        if not raw.strip():
            continue
        if finished:
            raise AspifSyntaxError(lineno, "statement after terminating 0")
        tok = _Tokens(raw, lineno)
        kind = tok.int()
        if kind == 0:
            tok.end()
            finished = True
        elif kind == 1:
            htype = tok.int()
            if htype not in (0, 1):
                raise AspifSyntaxError(lineno, f"bad head type {htype}")
            head = tok.ints(tok.count())
            if any(a <= 0 for a in head):
                raise AspifSyntaxError(lineno, "head atoms must be positive")
            btype = tok.int()
            try:
                if btype == 0:
                    body: Body = normal_body(tok.ints(tok.count()))
                elif btype == 1:
                    bound = tok.int()
                    n = tok.count()
                    wl = []
                    for _ in range(n):
                        l, w = tok.int(), tok.int()
                        wl.append((l, w))
                    body = normalize_weighted(bound, wl)
                else:
                    raise AspifSyntaxError(lineno, f"bad body type {btype}")
            except AspifSyntaxError:
                raise
            except AspifError as exc:
                raise AspifSyntaxError(lineno, str(exc)) from None
            tok.end()
            rules.append(Rule(tuple(dict.fromkeys(head)), body, bool(htype)))
        elif kind == 2:
            prio = tok.int()
            n = tok.count()
            for _ in range(n):
                l, w = tok.int(), tok.int()
                if l == 0:
                    raise AspifSyntaxError(lineno, "literal 0 in minimize")
                minimize.append(MinimizeEntry(l, w, prio))
            tok.end()
        elif kind == 4:
            name = tok.string(tok.count())
            cond = tuple(tok.ints(tok.count()))
            tok.end()
            shows.append(Show(name, cond))
        elif kind == 9:
            _parse_theory(tok, terms, elements, raw_atoms)
            tok.end()
        elif kind == 10:
            continue
        elif kind in _UNSUPPORTED:
            raise UnsupportedStatement(lineno, _UNSUPPORTED[kind])
        else:
            raise AspifSyntaxError(lineno, f"unknown statement type {kind}")

    if not finished:
        raise AspifSyntaxError(lineno, "missing terminating 0")

    theory_atoms = [_resolve_atom(a, terms, elements) for a in raw_atoms]
    try:
        return make_program(rules, minimize=minimize, theory_atoms=theory_atoms, shows=shows)
    except TautologyError:
        raise
    except AspifError as exc:
        raise AspifSyntaxError(0, str(exc)) from None


def _parse_theory(tok: _Tokens, terms, elements, raw_atoms) -> None:
    sub = tok.int()
    if sub == 0:
        tid = tok.int()
        terms[tid] = ("num", tok.int())
    elif sub == 1:
        tid = tok.int()
        terms[tid] = ("sym", tok.string(tok.count()))
    elif sub == 2:
        tid = tok.int()
        fn = tok.int()
        terms[tid] = ("fun", fn, tok.ints(tok.count()))
    elif sub == 4:
        eid = tok.int()
        tids = tok.ints(tok.count())
        cond = tuple(tok.ints(tok.count()))
        elements[eid] = (tids, cond)
    elif sub in (5, 6):
        atom = tok.int()
        tid = tok.int()
        eids = tok.ints(tok.count())
        guard = (tok.int(), tok.int()) if sub == 6 else None
        raw_atoms.append((atom, tid, eids, guard))
    else:
        raise AspifSyntaxError(tok.lineno, f"unknown theory statement {sub}")


def _resolve_term(tid: int, terms: dict, seen: frozenset = frozenset()) -> Term:
    if tid not in terms:
        raise AspifSyntaxError(0, f"undefined theory term {tid}")
    if tid in seen:
        raise AspifSyntaxError(0, f"cyclic theory term {tid}")
    entry = terms[tid]
    if entry[0] == "num":
        return TNumber(entry[1])
    if entry[0] == "sym":
        return TSymbol(entry[1])
    _, fn, args = entry
    inner = seen | {tid}
    if fn < 0:
        name: Union[str, int] = fn
    else:
        fterm = _resolve_term(fn, terms, inner)
        if not isinstance(fterm, TSymbol):
            raise AspifSyntaxError(0, f"function name of term {tid} is not a symbol")
        name = fterm.name
    return TCompound(name, tuple(_resolve_term(a, terms, inner) for a in args))


def _resolve_atom(raw, terms, elements) -> TheoryAtom:
    atom, tid, eids, guard = raw
    elems = []
    for e in eids:
        if e not in elements:
            raise AspifSyntaxError(0, f"undefined theory element {e}")
        tids, cond = elements[e]
        elems.append(TheoryElement(tuple(_resolve_term(t, terms) for t in tids), cond))
    g = None
    if guard is not None:
        op = _resolve_term(guard[0], terms)
        if not isinstance(op, TSymbol):
            raise AspifSyntaxError(0, "theory guard operator must be a symbol")
        g = (op.name, _resolve_term(guard[1], terms))
    return TheoryAtom(atom, _resolve_term(tid, terms), tuple(elems), g)


def write_aspif(p: GroundProgram) -> str:
    """Canonical ASPIF text for ``p``; ``parse_aspif(write_aspif(p)) == p``."""
    out = ["asp 1 0 0"]
    for r in p.rules:
        head = " ".join(map(str, (int(r.choice), len(r.head), *r.head)))
        if isinstance(r.body, WeightedBody):
            lits = " ".join(f"{l} {w}" for l, w in r.body.lits)
            body = f"1 {r.body.bound} {len(r.body.lits)} {lits}".rstrip()
        else:
            lits = r.body.literals
            body = " ".join(map(str, (0, len(lits), *lits)))
        out.append(f"1 {head} {body}")
    runs: list[list[MinimizeEntry]] = []
    for m in p.minimize:
        if runs and runs[-1][0].priority == m.priority:
            runs[-1].append(m)
        else:
            runs.append([m])
    for run in runs:
        lits = " ".join(f"{m.literal} {m.weight}" for m in run)
        out.append(f"2 {run[0].priority} {len(run)} {lits}")
    out.extend(_write_theory(p.theory_atoms))
    for s in p.shows:
        cond = " ".join(map(str, (len(s.condition), *s.condition)))
        out.append(f"4 {len(s.name.encode('utf-8'))} {s.name} {cond}")
    out.append("0")
    return "\n".join(out) + "\n"


def _write_theory(atoms: Iterable[TheoryAtom]) -> list[str]:
    lines: list[str] = []
    ids: dict[Term, int] = {}

    def term(t: Term) -> int:
        if t in ids:
            return ids[t]
        if isinstance(t, TNumber):
            tid = len(ids)
            lines.append(f"9 0 {tid} {t.value}")
        elif isinstance(t, TSymbol):
            tid = len(ids)
            lines.append(f"9 1 {tid} {len(t.name.encode('utf-8'))} {t.name}")
        else:
            fn = t.name if isinstance(t.name, int) else term(TSymbol(t.name))
            args = [term(a) for a in t.args]
            tid = len(ids)
            lines.append(" ".join(map(str, (9, 2, tid, fn, len(args), *args))))
        ids[t] = tid
        return tid

    eid = 0
    for a in atoms:
        eids = []
        for e in a.elements:
            tids = [term(t) for t in e.terms]
            lines.append(" ".join(map(str, (9, 4, eid, len(tids), *tids, len(e.condition), *e.condition))))
            eids.append(eid)
            eid += 1
        name = term(a.name)
        if a.guard is None:
            lines.append(" ".join(map(str, (9, 5, a.atom, name, len(eids), *eids))))
        else:
            op = term(TSymbol(a.guard[0]))
            rhs = term(a.guard[1])
            lines.append(" ".join(map(str, (9, 6, a.atom, name, len(eids), *eids, op, rhs))))
    return lines


def compile_priorities(entries: Iterable[MinimizeEntry], *,
                       int_max: int = IR_INT_MAX) -> tuple[MinimizeEntry, ...]:
    """Fold prioritized minimize entries into one level-0 statement.

    Level ``p`` (priorities sorted ascending) is scaled by ``F_p`` with
    ``F_0 = 1`` and ``F_{p+1} = F_p * (1 + sum of |w| at levels <= p)``, so a
    unit at level ``p+1`` outweighs any difference below it.
    """
    entries = list(entries)
    if not entries:
        return ()
    levels = sorted({m.priority for m in entries})
    factor = {}
    f, span = 1, 0
    for prio in levels:
        factor[prio] = f
        span += sum(abs(m.weight) for m in entries if m.priority == prio)
        f = f * (1 + span)
    merged: OrderedDict[int, int] = OrderedDict()
    for m in entries:
        merged[m.literal] = merged.get(m.literal, 0) + m.weight * factor[m.priority]
    result = tuple(MinimizeEntry(l, w, 0) for l, w in merged.items())
    if sum(abs(m.weight) for m in result) > int_max:
        raise OverflowError("compiled minimize weights exceed the IR integer range")
    return result


def cost(entries: Iterable[MinimizeEntry], true_atoms: set[int] | frozenset[int]) -> int:
    total = 0
    for m in entries:
        holds = (m.literal in true_atoms) if m.literal > 0 else (-m.literal not in true_atoms)
        if holds:
            total += m.weight
    return total

"""FlatZinc serialization of a ConstraintModel, the output sidecar, and a reader.

The reader accepts the FlatZinc subset produced here (plus the generic item
grammar) and maps it back onto the IR, which lets tests check that emitted
text parses and keeps the solution set.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .ir import (AllDifferent, BoolVar, Clause, ConstraintModel, Cumulative, Disjunctive,
                 Implication, Linear, Lit, ReifAnd, ReifLinear, ReifOr)


class EmitError(Exception):
    pass


class FznSyntaxError(Exception):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


KEYWORDS = frozenset("""
ann annotation any array bool case constraint default diff differ else elseif endif
enum false float function if in include int intersect let list maximize minimize
not of op opt output par predicate record satisfy set solve string subset superset
symdiff test then true tuple type union var where xor
""".split())

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

GLOBAL_DECLS = {
    "fzn_all_different_int": "predicate fzn_all_different_int(array [int] of var int: x);",
    "fzn_disjunctive": "predicate fzn_disjunctive(array [int] of var int: s, "
                       "array [int] of var int: d);",
    "fzn_cumulative": "predicate fzn_cumulative(array [int] of var int: s, "
                      "array [int] of var int: d, array [int] of var int: r, var int: b);",
}

OBJECTIVE = "objective"


def sanitize(name: str) -> str:
    """Map a registry name onto the FlatZinc identifier alphabet."""
    s = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not s or not s[0].isalpha():
        s = "v" + s
    if s in KEYWORDS:
        s += "_"
    return s


def identifiers(m: ConstraintModel) -> dict[str, str]:
    """Registry name to FlatZinc identifier; ``EmitError`` on a collision."""
    out: dict[str, str] = {}
    owner: dict[str, str] = {}
    for name in m.vars:
        ident = sanitize(name)
        if ident in owner:
            raise EmitError(f"identifier {ident} produced by both {owner[ident]!r} and {name!r}")
        owner[ident] = name
        out[name] = ident
    return out


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def objective_identifier(m: ConstraintModel) -> str:
    return _fresh(OBJECTIVE, set(identifiers(m).values()))


def _ints(xs: Iterable[int]) -> str:
    return "[" + ",".join(str(x) for x in xs) + "]"


def _names(xs: Iterable[str]) -> str:
    return "[" + ",".join(xs) + "]"


class FznEmitter:
    def __init__(self, m: ConstraintModel, linearized: Optional[bool] = None):
        m.validate()
        self.m = m
        self.linear = m.is_linear() if linearized is None else linearized
        if self.linear and not m.is_linear():
            raise EmitError("model has non-linear constraints; linearize it first")
        self.ident = identifiers(m)
        self.taken = set(self.ident.values())
        self.obj_ident = _fresh(OBJECTIVE, self.taken) if m.objective else None
        self.shadows: dict[str, str] = {}   # bool -> 0-1 integer
        self.negations: dict[str, str] = {}
        self.extra_decls: list[str] = []
        self.items: list[str] = []
        self.predicates: set[str] = set()
        for name in m.vars:
            m.bounds(name)

    # -- helpers --------------------------------------------------------
    def int_ref(self, v: str) -> str:
        """Identifier usable in integer position."""
        if self.linear or not self.m.is_bool(v):
            return self.ident[v]
        if v not in self.shadows:
            s = _fresh(self.ident[v] + "_01", self.taken)
            self.shadows[v] = s
            self.extra_decls.append(f"var 0..1: {s};")
            self.items.append(f"constraint bool2int({self.ident[v]},{s});")
        return self.shadows[v]

    def lit_ref(self, l: Lit) -> str:
        if not l.neg:
            return self.ident[l.var]
        if l.var not in self.negations:
            s = _fresh("not_" + self.ident[l.var], self.taken)
            self.negations[l.var] = s
            self.extra_decls.append(f"var bool: {s};")
            self.items.append(f"constraint bool_not({self.ident[l.var]},{s});")
        return self.negations[l.var]

    def operand(self, x: Union[str, int]) -> str:
        return str(x) if isinstance(x, int) else self.int_ref(x)

    def constraint(self, text: str) -> None:
        self.items.append(f"constraint {text};")

    def nonneg(self, x: Union[str, int]) -> None:
        if isinstance(x, int):
            if x < 0:
                self.constraint("bool_clause([],[])")
        elif self.m.bounds(x)[0] < 0:
            self.constraint(f"int_le(0,{self.int_ref(x)})")

    # -- items ----------------------------------------------------------
    def declaration(self, name: str) -> str:
        var = self.m.vars[name]
        ident = self.ident[name]
        ann = " :: output_var" if name in self._outputs else ""
        if isinstance(var, BoolVar):
            if self.linear:
                lo, hi = var.bounds
                return f"var {lo}..{hi}: {ident}{ann};"
            if var.fixed is not None:
                return f"var bool: {ident}{ann} = {'true' if var.fixed else 'false'};"
            return f"var bool: {ident}{ann};"
        lo, hi = self.m.bounds(name)
        return f"var {lo}..{hi}: {ident}{ann};"

    def linear_item(self, terms, op: str, rhs: int, target: Optional[str] = None) -> None:
        if not terms:
            holds = {"<=": 0 <= rhs, "=": rhs == 0, "!=": rhs != 0}[op]
            if target is None:
                if not holds:
                    self.constraint("bool_clause([],[])")
            elif self.linear:
                self.constraint(f"int_eq({self.ident[target]},{int(holds)})")
            else:
                self.constraint(f"bool_eq({self.ident[target]},{'true' if holds else 'false'})")
            return
        name = {"<=": "int_lin_le", "=": "int_lin_eq", "!=": "int_lin_ne"}[op]
        args = f"{_ints(c for _, c in terms)},{_names(self.int_ref(v) for v, _ in terms)},{rhs}"
        if target is None:
            self.constraint(f"{name}({args})")
        else:
            self.constraint(f"{name}_reif({args},{self.ident[target]})")

    def emit_constraint(self, c) -> None:
        if isinstance(c, Linear):
            self.linear_item(c.terms, c.op, c.rhs)
        elif isinstance(c, ReifLinear):
            self.linear_item(c.terms, c.op, c.rhs, c.target)
        elif isinstance(c, Clause):
            pos = [self.ident[l.var] for l in c.lits if not l.neg]
            neg = [self.ident[l.var] for l in c.lits if l.neg]
            self.constraint(f"bool_clause({_names(pos)},{_names(neg)})")
        elif isinstance(c, Implication):
            pos = [self.ident[l.var] for l in (-c.premise, c.conclusion) if not l.neg]
            neg = [self.ident[l.var] for l in (-c.premise, c.conclusion) if l.neg]
            self.constraint(f"bool_clause({_names(pos)},{_names(neg)})")
        elif isinstance(c, (ReifAnd, ReifOr)):
            name = "array_bool_and" if isinstance(c, ReifAnd) else "array_bool_or"
            lits = _names(self.lit_ref(l) for l in c.lits)
            self.constraint(f"{name}({lits},{self.ident[c.target]})")
        elif isinstance(c, AllDifferent):
            self.predicates.add("fzn_all_different_int")
            self.constraint(f"fzn_all_different_int({_names(self.operand(x) for x in c.items)})")
        elif isinstance(c, Disjunctive):
            self.predicates.add("fzn_disjunctive")
            for _, l in c.tasks:
                self.nonneg(l)
            s = _names(self.operand(s) for s, _ in c.tasks)
            d = _names(self.operand(l) for _, l in c.tasks)
            self.constraint(f"fzn_disjunctive({s},{d})")
        elif isinstance(c, Cumulative):
            self.predicates.add("fzn_cumulative")
            for _, l, r in c.tasks:
                self.nonneg(l)
                self.nonneg(r)
            s = _names(self.operand(t[0]) for t in c.tasks)
            d = _names(self.operand(t[1]) for t in c.tasks)
            r = _names(self.operand(t[2]) for t in c.tasks)
            self.constraint(f"fzn_cumulative({s},{d},{r},{c.bound})")
        else:  # pragma: no cover
            raise EmitError(f"cannot emit {c!r}")

    def run(self) -> str:
        m = self.m
        self._outputs = set(m.atom_var.values()) | set(m.lin_var.values())
        for c in m.constraints:
            self.emit_constraint(c)
        solve = "solve satisfy;"
        if self.obj_ident is not None:
            lo, hi = m.sum_bounds(m.objective)
            lo += m.objective_offset
            hi += m.objective_offset
            self.extra_decls.append(f"var {lo}..{hi}: {self.obj_ident} :: output_var;")
            terms = list(m.objective) + [(None, -1)]
            coefs = _ints(c for _, c in terms)
            refs = _names(self.int_ref(v) if v is not None else self.obj_ident for v, _ in terms)
            self.constraint(f"int_lin_eq({coefs},{refs},{-m.objective_offset})")
            solve = f"solve minimize {self.obj_ident};"
        lines = [GLOBAL_DECLS[p] for p in sorted(self.predicates)]
        lines += [self.declaration(n) for n in m.vars]
        lines += self.extra_decls
        lines += self.items
        lines.append(solve)
        return "\n".join(lines) + "\n"


def emit_fzn(m: ConstraintModel, *, linearized: Optional[bool] = None) -> str:
    """FlatZinc text for ``m``.

    ``linearized=True`` declares Booleans as 0-1 integers and requires a
    purely linear model; by default this is chosen from the model itself.
    """
    return FznEmitter(m, linearized).run()


# --- output sidecar ----------------------------------------------------------

SIDECAR_HEADER = "% caspfzn output spec 1"


@dataclass
class OutputSpec:
    # (display, ident); ident None marks an atom shown in every answer set
    atoms: list[tuple[str, Optional[str]]] = field(default_factory=list)
    lin_vars: list[tuple[str, str]] = field(default_factory=list)
    objective: Optional[str] = None

    def identifiers(self) -> set[str]:
        out = {i for _, i in self.atoms if i} | {i for _, i in self.lin_vars}
        if self.objective:
            out.add(self.objective)
        return out


def output_spec(m: ConstraintModel, atoms: Mapping[int, str],
                lin_vars: Optional[Mapping[str, str]] = None,
                always: Iterable[str] = ()) -> OutputSpec:
    """Allowlist of shown atoms and linear variables, in the given order.

    ``atoms`` maps atom ids to display names, ``lin_vars`` linear variable
    names to display names; ``always`` are names shown unconditionally.
    """
    ident = identifiers(m)
    spec = OutputSpec()
    spec.atoms += [(d, None) for d in always]
    for a, d in atoms.items():
        if a in m.atom_var:
            spec.atoms.append((d, ident[m.atom_var[a]]))
    for v, d in (lin_vars or {}).items():
        if v in m.lin_var:
            spec.lin_vars.append((d, ident[m.lin_var[v]]))
    if m.objective:
        spec.objective = objective_identifier(m)
    return spec


def emit_output_spec(m: ConstraintModel, atoms: Mapping[int, str],
                     lin_vars: Optional[Mapping[str, str]] = None,
                     always: Iterable[str] = ()) -> str:
    return format_output_spec(output_spec(m, atoms, lin_vars, always))


def format_output_spec(spec: OutputSpec) -> str:
    lines = [SIDECAR_HEADER]
    for d, i in spec.atoms:
        lines.append(f"atom {d} = {i}" if i else f"always {d}")
    lines += [f"var {d} = {i}" for d, i in spec.lin_vars]
    if spec.objective:
        lines.append(f"objective = {spec.objective}")
    return "\n".join(lines) + "\n"


def parse_output_spec(text: str) -> OutputSpec:
    spec = OutputSpec()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        kind, _, rest = line.partition(" ")
        if kind == "always":
            spec.atoms.append((rest, None))
            continue
        if kind == "objective":
            ident = rest.partition("=")[2].strip()
            if not _IDENT.match(ident):
                raise FznSyntaxError(n, f"bad output spec line {raw!r}")
            spec.objective = ident
            continue
        display, sep, ident = rest.rpartition(" = ")
        if not sep or kind not in ("atom", "var") or not _IDENT.match(ident):
            raise FznSyntaxError(n, f"bad output spec line {raw!r}")
        (spec.atoms if kind == "atom" else spec.lin_vars).append((display, ident))
    return spec


# --- reader ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<range>-?\d+\s*\.\.\s*-?\d+)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<punct>::|[\[\](),;:=])
""", re.VERBOSE)


@dataclass
class FznModel:
    bools: dict[str, Optional[bool]] = field(default_factory=dict)
    ints: dict[str, tuple[int, int]] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    constraints: list[tuple[str, list]] = field(default_factory=list)
    predicates: list[str] = field(default_factory=list)
    solve: tuple[str, Optional[str]] = ("satisfy", None)


def _tokenize(text: str):
    pos = 0
    line = 1
    out = []
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise FznSyntaxError(line, f"unexpected character {text[pos]!r}")
        kind = mt.lastgroup
        val = mt.group()
        if kind != "ws":
            out.append((kind, val, line))
        line += val.count("\n")
        pos = mt.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", "", self.toks[-1][2] if self.toks else 1)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, val: str):
        t = self.next()
        if t[1] != val:
            raise FznSyntaxError(t[2], f"expected {val!r}, got {t[1]!r}")
        return t

    def ident(self) -> str:
        t = self.next()
        if t[0] != "ident" or t[1] in KEYWORDS:
            raise FznSyntaxError(t[2], f"expected identifier, got {t[1]!r}")
        return t[1]

    def annotations(self) -> list[str]:
        anns = []
        while self.peek()[1] == "::":
            self.next()
            anns.append(self.ident())
        return anns

    def expr(self):
        t = self.next()
        if t[0] == "int":
            return int(t[1])
        if t[1] in ("true", "false"):
            return t[1] == "true"
        if t[0] == "ident":
            return t[1]
        if t[1] == "[":
            items = []
            if self.peek()[1] != "]":
                items.append(self.expr())
                while self.peek()[1] == ",":
                    self.next()
                    items.append(self.expr())
            self.expect("]")
            return items
        raise FznSyntaxError(t[2], f"unexpected {t[1]!r}")

    def parse(self) -> FznModel:
        fm = FznModel()
        seen: set[str] = set()

        def declare(name: str, line: int):
            if name in seen:
                raise FznSyntaxError(line, f"duplicate declaration of {name}")
            seen.add(name)

        phase = 0  # predicates, declarations, constraints, solve
        while self.peek()[0] != "eof":
            kind, val, line = self.peek()
            if val == "predicate":
                if phase > 0:
                    raise FznSyntaxError(line, "predicate after declarations")
                self.next()
                name = self.ident()
                depth = 0
                while True:
                    t = self.next()
                    if t[0] == "eof":
                        raise FznSyntaxError(line, "unterminated predicate")
                    depth += t[1] == "("
                    depth -= t[1] == ")"
                    if t[1] == ";" and depth == 0:
                        break
                fm.predicates.append(name)
            elif val == "var":
                if phase > 1:
                    raise FznSyntaxError(line, "declaration after constraints")
                phase = 1
                self.next()
                t = self.next()
                if t[1] == "bool":
                    typ = None
                elif t[0] == "range":
                    lo, hi = (int(x) for x in t[1].split(".."))
                    if lo > hi:
                        raise FznSyntaxError(line, f"empty domain {t[1]}")
                    typ = (lo, hi)
                else:
                    raise FznSyntaxError(t[2], f"unsupported type {t[1]!r}")
                self.expect(":")
                name = self.ident()
                declare(name, line)
                anns = self.annotations()
                value = None
                if self.peek()[1] == "=":
                    self.next()
                    value = self.expr()
                self.expect(";")
                if typ is None:
                    if value is not None and not isinstance(value, bool):
                        raise FznSyntaxError(line, f"bad Boolean value for {name}")
                    fm.bools[name] = value
                else:
                    if value is not None:
                        if not isinstance(value, int) or isinstance(value, bool):
                            raise FznSyntaxError(line, f"bad integer value for {name}")
                        typ = (value, value)
                    fm.ints[name] = typ
                if "output_var" in anns:
                    fm.outputs.append(name)
            elif val == "constraint":
                if phase > 2:
                    raise FznSyntaxError(line, "constraint after solve")
                phase = 2
                self.next()
                name = self.ident()
                self.expect("(")
                args = []
                if self.peek()[1] != ")":
                    args.append(self.expr())
                    while self.peek()[1] == ",":
                        self.next()
                        args.append(self.expr())
                self.expect(")")
                self.annotations()
                self.expect(";")
                for a in args:
                    for x in (a if isinstance(a, list) else [a]):
                        if isinstance(x, str) and x not in seen:
                            raise FznSyntaxError(line, f"undeclared identifier {x}")
                fm.constraints.append((name, args))
            elif val == "solve":
                if phase > 2:
                    raise FznSyntaxError(line, "second solve item")
                phase = 3
                self.next()
                self.annotations()
                goal = self.next()
                if goal[1] == "satisfy":
                    fm.solve = ("satisfy", None)
                elif goal[1] in ("minimize", "maximize"):
                    target = self.ident()
                    if target not in seen:
                        raise FznSyntaxError(line, f"undeclared objective {target}")
                    fm.solve = (goal[1], target)
                else:
                    raise FznSyntaxError(line, f"bad solve goal {goal[1]!r}")
                self.expect(";")
            else:
                raise FznSyntaxError(line, f"unexpected {val!r}")
        if phase != 3:
            raise FznSyntaxError(self.peek()[2], "missing solve item")
        return fm


def parse_fzn(text: str) -> FznModel:
    return _Parser(text).parse()


def _arity(fm: FznModel, name: str, args: list, n: int) -> None:
    if len(args) != n:
        raise FznSyntaxError(0, f"{name} expects {n} arguments, got {len(args)}")


def fzn_to_model(fm: FznModel) -> ConstraintModel:
    """Rebuild an IR model from parsed FlatZinc (builtins emitted here only)."""
    m = ConstraintModel()
    for name, fixed in fm.bools.items():
        m.add_bool(name, fixed)
    for name, (lo, hi) in fm.ints.items():
        m.add_int(name, lo, hi)

    def lit(x, neg: bool = False) -> Lit:
        if isinstance(x, bool):
            raise FznSyntaxError(0, "Boolean constants in literal positions are not supported")
        return Lit(x, neg)

    def operand(x):
        return int(x) if isinstance(x, bool) else x

    for name, args in fm.constraints:
        base = name[:-5] if name.endswith("_reif") else name
        if name == "bool_clause":
            _arity(fm, name, args, 2)
            m.add(Clause(tuple(lit(x) for x in args[0]) + tuple(lit(x, True) for x in args[1])))
        elif name in ("array_bool_and", "array_bool_or"):
            _arity(fm, name, args, 2)
            cls = ReifAnd if name == "array_bool_and" else ReifOr
            m.add(cls(args[1], tuple(lit(x) for x in args[0])))
        elif name == "bool_not":
            _arity(fm, name, args, 2)
            m.add(ReifAnd(args[1], (lit(args[0], True),)))
        elif name == "bool_eq":
            _arity(fm, name, args, 2)
            a, b = args
            if isinstance(b, bool):
                m.add(Clause((lit(a, not b),)))
            else:
                m.add(ReifAnd(b, (lit(a),)))
        elif name == "bool2int":
            _arity(fm, name, args, 2)
            m.add(Linear(((args[1], 1), (args[0], -1)), "=", 0))
        elif name in ("int_le", "int_eq"):
            _arity(fm, name, args, 2)
            a, b = args
            terms, rhs = [], 0
            for x, c in ((a, 1), (b, -1)):
                if isinstance(x, int):
                    rhs -= c * x
                else:
                    terms.append((x, c))
            m.add(Linear(tuple(terms), "<=" if name == "int_le" else "=", rhs))
        elif base in ("int_lin_le", "int_lin_eq", "int_lin_ne"):
            op = {"int_lin_le": "<=", "int_lin_eq": "=", "int_lin_ne": "!="}[base]
            terms = tuple(zip(args[1], args[0]))
            if name.endswith("_reif"):
                _arity(fm, name, args, 4)
                m.add(ReifLinear(args[3], terms, op, args[2]))
            else:
                _arity(fm, name, args, 3)
                m.add(Linear(terms, op, args[2]))
        elif name == "fzn_all_different_int":
            _arity(fm, name, args, 1)
            m.add(AllDifferent(tuple(operand(x) for x in args[0])))
        elif name == "fzn_disjunctive":
            _arity(fm, name, args, 2)
            m.add(Disjunctive(tuple(zip(map(operand, args[0]), map(operand, args[1])))))
        elif name == "fzn_cumulative":
            _arity(fm, name, args, 4)
            tasks = tuple(zip(map(operand, args[0]), map(operand, args[1]), map(operand, args[2])))
            m.add(Cumulative(tasks, args[3]))
        else:
            raise FznSyntaxError(0, f"unsupported constraint {name}")
    if fm.solve[1] is not None:
        m.objective = ((fm.solve[1], 1 if fm.solve[0] == "minimize" else -1),)
    return m


def check_fzn(text: str) -> list[str]:
    """Grammar and scoping errors of ``text`` (empty when well formed)."""
    try:
        fm = parse_fzn(text)
        undeclared = [p for p in ("fzn_all_different_int", "fzn_disjunctive", "fzn_cumulative")
                      if any(n == p for n, _ in fm.constraints) and p not in fm.predicates]
        if undeclared:
            return [f"missing predicate declaration {p}" for p in undeclared]
        fzn_to_model(fm)
    except FznSyntaxError as e:
        return [str(e)]
    return []

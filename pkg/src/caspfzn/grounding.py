"""Obtain ASPIF for non-ground input files.

The external ``gringo`` executable is used when present; otherwise the
``clingo`` Python module grounds in-process and an observer writes ASPIF.
The theory definition for ``&sum``/``&dom``/... is supplied automatically
unless an input already declares ``#theory cp``.
"""
from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from typing import Optional, Sequence

from .theory import THEORY_DEFINITION


class GroundingError(Exception):
    pass


class GrounderNotFound(GroundingError):
    pass


_THEORY_DECL = re.compile(r"#theory\s+cp\b")


def needs_theory(paths: Sequence[str]) -> bool:
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            if _THEORY_DECL.search(fh.read()):
                return False
    return True


def ground_with_gringo(paths: Sequence[str], gringo: str = "gringo",
                       extra_args: Sequence[str] = ()) -> str:
    exe = shutil.which(gringo)
    if exe is None:
        raise GrounderNotFound(f"grounder executable {gringo!r} not found")
    with tempfile.TemporaryDirectory() as tmp:
        files = list(paths)
        if needs_theory(paths):
            theory = os.path.join(tmp, "theory.lp")
            with open(theory, "w", encoding="utf-8") as fh:
                fh.write(THEORY_DEFINITION)
            files.insert(0, theory)
        proc = subprocess.run([exe, "--output=aspif", *extra_args, *files],
                              capture_output=True, text=True)
    if proc.returncode not in (0, 10, 20, 30):
        raise GroundingError(proc.stderr.strip() or f"{gringo} exited with {proc.returncode}")
    return proc.stdout


def _ints(xs) -> str:
    return " ".join(str(x) for x in xs)


class AspifObserver:
    """clingo backend observer that records ASPIF statements."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def _emit(self, *parts) -> None:
        self.lines.append(" ".join(str(p) for p in parts if p != ""))

    def rule(self, choice, head, body):
        self._emit(1, int(choice), len(head), _ints(head), 0, len(body), _ints(body))

    def weight_rule(self, choice, head, lower_bound, body):
        lits = " ".join(f"{l} {w}" for l, w in body)
        self._emit(1, int(choice), len(head), _ints(head), 1, lower_bound, len(body), lits)

    def minimize(self, priority, literals):
        self._emit(2, priority, len(literals), " ".join(f"{l} {w}" for l, w in literals))

    def project(self, atoms):
        self._emit(3, len(atoms), _ints(atoms))

    def output_atom(self, symbol, atom):
        s = str(symbol)
        if atom == 0:
            self._emit(4, len(s.encode()), s, 0)
        else:
            self._emit(4, len(s.encode()), s, 1, atom)

    def output_term(self, symbol, condition):
        s = str(symbol)
        self._emit(4, len(s.encode()), s, len(condition), _ints(condition))

    def external(self, atom, value):
        code = {"Free": 0, "True": 1, "False": 2, "Release": 3}.get(getattr(value, "name", ""), value)
        self._emit(5, atom, int(code))

    def assume(self, literals):
        self._emit(6, len(literals), _ints(literals))

    def heuristic(self, atom, type_, bias, priority, condition):
        self._emit(7, int(getattr(type_, "value", type_)), atom, bias, priority,
                   len(condition), _ints(condition))

    def acyc_edge(self, node_u, node_v, condition):
        self._emit(8, node_u, node_v, len(condition), _ints(condition))

    def theory_term_number(self, term_id, number):
        self._emit(9, 0, term_id, number)

    def theory_term_string(self, term_id, name):
        self._emit(9, 1, term_id, len(name.encode()), name)

    def theory_term_compound(self, term_id, name_id_or_type, arguments):
        self._emit(9, 2, term_id, name_id_or_type, len(arguments), _ints(arguments))

    def theory_element(self, element_id, terms, condition):
        self._emit(9, 4, element_id, len(terms), _ints(terms), len(condition), _ints(condition))

    def theory_atom(self, atom_id_or_zero, term_id, elements):
        self._emit(9, 5, atom_id_or_zero, term_id, len(elements), _ints(elements))

    def theory_atom_with_guard(self, atom_id_or_zero, term_id, elements, operator_id, right_hand_side_id):
        self._emit(9, 6, atom_id_or_zero, term_id, len(elements), _ints(elements),
                   operator_id, right_hand_side_id)

    def text(self) -> str:
        return "asp 1 0 0\n" + "\n".join(self.lines + ["0"]) + "\n"


def ground_with_clingo(paths: Sequence[str]) -> str:
    try:
        import clingo
    except ImportError as e:
        raise GrounderNotFound("neither gringo nor the clingo Python module is available") from e
    obs = AspifObserver()
    ctl = clingo.Control(["--warn=none"])
    ctl.register_observer(obs)
    if needs_theory(paths):
        ctl.add("base", [], THEORY_DEFINITION)
    try:
        for p in paths:
            ctl.load(p)
        ctl.ground([("base", [])])
    except RuntimeError as e:
        raise GroundingError(str(e)) from e
    return obs.text()


def ground(paths: Sequence[str], gringo: Optional[str] = None) -> str:
    """ASPIF for ``paths``; an explicit ``gringo`` path must exist."""
    for p in paths:
        if not os.path.exists(p):
            raise GroundingError(f"input file {p} does not exist")
    if gringo is not None:
        return ground_with_gringo(paths, gringo)
    if shutil.which("gringo"):
        return ground_with_gringo(paths)
    return ground_with_clingo(paths)

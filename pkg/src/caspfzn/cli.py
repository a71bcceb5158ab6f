"""Command-line front end: ground, translate, emit, solve through MiniZinc, verify."""
from __future__ import annotations

import argparse
import json
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, TextIO

from . import __version__
from .aspif import AspifError, GroundProgram, parse_aspif
from .analysis import NotHcfError
from .flatzinc import EmitError, OutputSpec, emit_fzn, format_output_spec, output_spec
from .grounding import GroundingError, ground
from .ir import ModelError
from .oracle import (check_correspondence, enumerate_answer_sets, interpretation_cost,
                     optimal_cost, sorted_interps)
from .pipeline import compile_program
from .search import SearchSpaceTooLarge
from .theory import DEFAULT_FALLBACK, TheoryError

SEPARATOR = "----------"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISMATCH = 3
EXIT_UNSAT = 20

MIP_SOLVERS = frozenset({"gurobi", "cplex", "scip", "highs", "cbc", "coin-bc", "osicbc",
                         "xpress", "mip"})


def is_mip_solver(solver_id: str) -> bool:
    s = solver_id.lower()
    return s in MIP_SOLVERS or s.startswith("org.minizinc.mip")


class DecodeError(Exception):
    def __init__(self, line: str, reason: str):
        super().__init__(f"{reason}: {line!r}")
        self.line = line


@dataclass
class Solution:
    atoms: list[str]
    lin_vars: dict[str, int] = field(default_factory=dict)
    cost: Optional[int] = None

    def text(self) -> str:
        parts = list(self.atoms) + [f"{v}={x}" for v, x in self.lin_vars.items()]
        return "".join(p + " " for p in parts)

    def as_json(self) -> dict:
        return {"atoms": self.atoms, "lin_vars": self.lin_vars, "cost": self.cost}


@dataclass
class Status:
    kind: str  # COMPLETE, UNSATISFIABLE, UNKNOWN, UNBOUNDED, UNSATorUNBOUNDED, ERROR


_STATUS = {
    "==========": "COMPLETE",
    "=====UNSATISFIABLE=====": "UNSATISFIABLE",
    "=====UNKNOWN=====": "UNKNOWN",
    "=====UNBOUNDED=====": "UNBOUNDED",
    "=====UNSATorUNBOUNDED=====": "UNSATorUNBOUNDED",
    "=====ERROR=====": "ERROR",
}


def _parse_value(raw: str, line: str) -> int:
    if raw == "true":
        return 1
    if raw == "false":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DecodeError(line, "unsupported value") from None


def decode_solutions(lines: Iterable[str], spec: OutputSpec) -> Iterator[Solution | Status]:
    """Turn solver output into solutions and a trailing status.

    A solution block is a run of ``ident = value;`` lines closed by ten
    dashes; ``%`` comments and blank lines are ignored.
    """
    current: dict[str, int] = {}
    pending = False
    finished = False
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if finished:
            raise DecodeError(line, "output after final status")
        if line == SEPARATOR:
            yield _solution(current, spec)
            current = {}
            pending = False
            continue
        if line in _STATUS:
            if pending:
                raise DecodeError(line, "status inside an unterminated solution")
            finished = True
            yield Status(_STATUS[line])
            continue
        name, sep, value = line.partition("=")
        if not sep or not value.strip().endswith(";"):
            raise DecodeError(line, "expected 'name = value;'")
        name = name.strip()
        if name in current:
            raise DecodeError(line, "variable assigned twice in one solution")
        current[name] = _parse_value(value.strip()[:-1].strip(), line)
        pending = True
    if pending:
        raise DecodeError("<eof>", "unterminated solution")


def _solution(values: dict[str, int], spec: OutputSpec) -> Solution:
    atoms = []
    for display, ident in spec.atoms:
        if ident is None:
            atoms.append(display)
            continue
        if ident not in values:
            raise DecodeError(ident, "shown variable missing from solution")
        if values[ident]:
            atoms.append(display)
    lins = {}
    for display, ident in spec.lin_vars:
        if ident not in values:
            raise DecodeError(ident, "shown variable missing from solution")
        lins[display] = values[ident]
    cost = values.get(spec.objective) if spec.objective else None
    return Solution(atoms, lins, cost)


# --- shows ---------------------------------------------------------------

def show_table(p: GroundProgram, warn: Optional[TextIO] = None) -> tuple[dict[int, str], list[str]]:
    """Shown atoms (id -> name) and names shown unconditionally."""
    atoms: dict[int, str] = {}
    always: list[str] = []
    for s in p.shows:
        if not s.condition:
            always.append(s.name)
        elif len(s.condition) == 1 and s.condition[0] > 0:
            atoms.setdefault(s.condition[0], s.name)
        elif warn is not None:
            print(f"warning: show term {s.name} with a compound condition is ignored", file=warn)
    return atoms, always


# --- driver --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="caspfzn",
        description="Solve (constraint) ASP programs through FlatZinc solvers.")
    ap.add_argument("input_files", nargs="*", metavar="INPUT_FILES",
                    help="input files, grounded with gringo; ASPIF is read from stdin if none")
    ap.add_argument("-f", "--output-fzn", metavar="FZN_FILE", help="write the FlatZinc model")
    ap.add_argument("-o", "--output-ozn", metavar="OZN_FILE", help="write the output spec")
    ap.add_argument("--non-strict-ranking", action="store_true",
                    help="drop the gap constraints (many-to-one model correspondence)")
    ap.add_argument("--linearize", action="store_true",
                    help="emit linear constraints only; implied for MIP solvers")
    ap.add_argument("--reject-globals", action="store_true",
                    help="fail instead of decomposing global constraints when linearizing")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("-s", "--solver-id", metavar="SOLVER_ID",
                    help="MiniZinc solver id used to solve the FlatZinc directly")
    ap.add_argument("-t", "--time-limit", type=float, metavar="SECONDS")
    ap.add_argument("-p", "--parallel", type=int, metavar="N_THREADS")
    ap.add_argument("-a", "--all-solutions", action="store_true",
                    help="all solutions, or every improving solution when optimizing")
    ap.add_argument("--solution-json", action="store_true", help="print solutions as JSON lines")
    ap.add_argument("--solver-args", default="", metavar="SOLVER_ARGS")
    ap.add_argument("--gringo-path", metavar="GRINGO_PATH")
    ap.add_argument("--minizinc-path", metavar="MINIZINC_PATH")
    ap.add_argument("--show-lin-vars", action="store_true",
                    help="print linear variable values with every answer set")
    ap.add_argument("--verify", action="store_true",
                    help="check the translation against the brute-force oracle")
    ap.add_argument("--enumerate-oracle", action="store_true",
                    help="print answer sets computed by the brute-force oracle")
    ap.add_argument("--fallback-bounds", nargs=2, type=int, metavar=("LB", "UB"),
                    default=list(DEFAULT_FALLBACK),
                    help="domain for linear variables without &dom")
    ap.add_argument("-V", "--version", action="version", version=f"%(prog)s {__version__}")
    return ap


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


class Driver:
    def __init__(self, args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO):
        self.args = args
        self.stdin = stdin
        self.out = stdout
        self.err = stderr

    def log(self, msg: str) -> None:
        if self.args.verbose:
            print(msg, file=self.err)

    def read_program(self) -> GroundProgram:
        a = self.args
        if a.input_files:
            text = ground(a.input_files, a.gringo_path)
        else:
            text = self.stdin.read()
        return parse_aspif(text)

    def emit(self, sol: Solution) -> None:
        if self.args.solution_json:
            print(json.dumps(sol.as_json(), sort_keys=True), file=self.out)
        else:
            print(sol.text(), file=self.out)
            print(SEPARATOR, file=self.out)

    def status(self, kind: str) -> None:
        if self.args.solution_json:
            print(json.dumps({"status": kind}), file=self.out)
        else:
            print(kind, file=self.out)

    def run(self) -> int:
        a = self.args
        mip = bool(a.solver_id) and is_mip_solver(a.solver_id)
        linear = a.linearize or mip
        p = self.read_program()
        compiled = compile_program(p, strict=not a.non_strict_ranking, linear=linear,
                                   fallback=tuple(a.fallback_bounds),
                                   reject_globals=a.reject_globals)
        m = compiled.model
        self.log(f"% {len(m.vars)} variables, {len(m.constraints)} constraints"
                 + (", linearized" if linear else ""))
        atoms, always = show_table(p, self.err)
        lins = {v: v for v in compiled.spec.sorted_vars()} if a.show_lin_vars else {}
        spec = output_spec(m, atoms, lins, always)
        if a.verify:
            return self.verify(compiled)
        if a.enumerate_oracle:
            return self.oracle(compiled, atoms, always, lins)
        fzn = emit_fzn(m, linearized=linear)
        if a.solver_id:
            return self.solve(fzn, spec, bool(m.objective))
        if a.output_fzn:
            _write(a.output_fzn, fzn)
        if a.output_ozn:
            _write(a.output_ozn, format_output_spec(spec))
        if not a.output_fzn:
            self.out.write(fzn)
        return EXIT_OK

    def verify(self, c) -> int:
        v = check_correspondence(c.program, c.spec, c.model, strict=not self.args.non_strict_ranking)
        print(v, file=self.out)
        return EXIT_OK if v.ok else EXIT_MISMATCH

    def oracle(self, c, atoms: dict[int, str], always: list[str], lins: dict[str, str]) -> int:
        sets = sorted_interps(enumerate_answer_sets(c.original, c.spec))
        if not sets:
            self.status("UNSATISFIABLE")
            return EXIT_UNSAT
        optimizing = bool(c.original.minimize or c.spec.lin_objective)
        best = optimal_cost(c.original, c.spec, sets) if optimizing else None
        for e in sets:
            value = interpretation_cost(c.original, c.spec, e) if optimizing else None
            if optimizing and not self.args.all_solutions and value != best:
                continue
            names = list(always) + [d for i, d in atoms.items() if i in e.atoms]
            delta = e.delta
            self.emit(Solution(names, {d: delta[v] for v, d in lins.items()}, value))
        return EXIT_OK

    def solve(self, fzn: str, spec: OutputSpec, optimizing: bool) -> int:
        a = self.args
        exe = _find_minizinc(a.minizinc_path)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "model.fzn")
            _write(path, fzn)
            cmd = [exe, "--solver", a.solver_id]
            if a.all_solutions:
                cmd.append("-a")
            if a.parallel:
                cmd += ["-p", str(a.parallel)]
            if a.time_limit:
                cmd += ["--time-limit", str(int(a.time_limit * 1000))]
            cmd += shlex.split(a.solver_args)
            cmd.append(path)
            self.log("% " + " ".join(shlex.quote(x) for x in cmd))
            proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            msg = proc.stderr.strip() or f"solver exited with status {proc.returncode}"
            raise CliError(msg, proc.returncode)
        if proc.stderr and a.verbose:
            self.err.write(proc.stderr)
        items = list(decode_solutions(proc.stdout.splitlines(), spec))
        sols = [x for x in items if isinstance(x, Solution)]
        status = next((x.kind for x in items if isinstance(x, Status)), None)
        if not sols:
            kind = status or "UNKNOWN"
            self.status(kind)
            return EXIT_UNSAT if kind == "UNSATISFIABLE" else EXIT_OK
        if optimizing and not a.all_solutions:
            sols = sols[-1:]
        seen: set[tuple] = set()
        for s in sols:
            key = (tuple(s.atoms), tuple(s.lin_vars.items()), s.cost)
            if not optimizing and key in seen:
                continue
            seen.add(key)
            self.emit(s)
        if optimizing and status == "COMPLETE" and not a.solution_json:
            print("OPTIMUM FOUND", file=self.out)
        return EXIT_OK


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _find_minizinc(path: Optional[str]) -> str:
    if path:
        exe = path
        if os.path.isdir(path):
            exe = os.path.join(path, "bin", "minizinc")
            if not os.path.exists(exe):
                exe = os.path.join(path, "minizinc")
        if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
            raise CliError(f"MiniZinc executable not found at {path}")
        return exe
    exe = shutil.which("minizinc")
    if exe is None:
        raise CliError("MiniZinc executable not found in PATH; use --minizinc-path")
    return exe


def main(argv: Optional[Sequence[str]] = None, *, stdin: Optional[TextIO] = None,
         stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.solver_id and (args.output_fzn or args.output_ozn):
        print("caspfzn: -f/-o cannot be combined with --solver-id", file=stderr)
        return EXIT_USAGE
    if args.fallback_bounds[0] > args.fallback_bounds[1]:
        print("caspfzn: empty --fallback-bounds", file=stderr)
        return EXIT_USAGE
    try:
        return Driver(args, stdin, stdout, stderr).run()
    except CliError as e:
        print(f"caspfzn: {e}", file=stderr)
        return e.code
    except (AspifError, GroundingError, TheoryError, NotHcfError, EmitError, DecodeError,
            ModelError, SearchSpaceTooLarge, OSError) as e:
        print(f"caspfzn: {type(e).__name__}: {e}", file=stderr)
        return EXIT_ERROR

"""Desk-scale FlatZinc solver over the exhaustive search kernel.

It reads the FlatZinc subset this package emits and prints solutions in the
usual solver protocol (``ident = value;`` lines, ``----------`` after each
solution, ``==========`` when the search completed).  Meant for tests and
small programs, not as a competitive backend.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence, TextIO

from .flatzinc import FznSyntaxError, fzn_to_model, parse_fzn
from .search import SearchSpaceTooLarge, run_search

SEPARATOR = "----------"
COMPLETE = "=========="
UNSAT = "=====UNSATISFIABLE====="
UNKNOWN = "=====UNKNOWN====="


def solve(text: str, *, all_solutions: bool = False, max_nodes: Optional[int] = None):
    """Solutions (as ``{ident: value}`` over output vars) and whether search completed."""
    fm = parse_fzn(text)
    m = fzn_to_model(fm)
    outputs = list(fm.outputs)
    goal, target = fm.solve
    project = outputs if goal == "satisfy" else list(dict.fromkeys(outputs + [target]))
    kw = {} if max_nodes is None else {"max_nodes": max_nodes}
    res = run_search(m, project=project, priority=project, **kw)
    sols = [{v: a[v] for v in outputs} | ({target: a[target]} if target else {})
            for a in res.assignments()]
    if goal == "satisfy":
        return (sols if all_solutions else sols[:1]), True
    sign = 1 if goal == "minimize" else -1
    if not sols:
        return [], True
    if all_solutions:
        improving, best = [], None
        for s in sols:
            if best is None or sign * s[target] < sign * best:
                improving.append(s)
                best = s[target]
        return improving, True
    return [min(sols, key=lambda s: sign * s[target])], True


def _value(fm_bools: set[str], name: str, v: int) -> str:
    return ("true" if v else "false") if name in fm_bools else str(v)


def main(argv: Optional[Sequence[str]] = None, out: TextIO = sys.stdout) -> int:
    ap = argparse.ArgumentParser(prog="caspfzn-fzn", description=__doc__.splitlines()[0])
    ap.add_argument("file")
    ap.add_argument("-a", "--all-solutions", action="store_true")
    ap.add_argument("--max-nodes", type=int)
    args = ap.parse_args(argv)
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    try:
        fm = parse_fzn(text)
        bools = set(fm.bools)
        sols, complete = solve(text, all_solutions=args.all_solutions, max_nodes=args.max_nodes)
    except FznSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SearchSpaceTooLarge:
        print(UNKNOWN, file=out)
        return 0
    if not sols:
        print(UNSAT, file=out)
        return 0
    for s in sols:
        for name, v in s.items():
            print(f"{name} = {_value(bools, name, v)};", file=out)
        print(SEPARATOR, file=out)
    if complete and (args.all_solutions or fm.solve[0] != "satisfy"):
        print(COMPLETE, file=out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

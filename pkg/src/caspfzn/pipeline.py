"""Ground program to constraint model, in one call."""
from __future__ import annotations

from dataclasses import dataclass

from .analysis import SccInfo, build_dep_graph, partially_shift
from .aspif import GroundProgram
from .ir import ConstraintModel, linearize
from .theory import DEFAULT_FALLBACK, CaspSpec, bound_or_default, extract_casp, strip_theory_heads
from .translate import translate


@dataclass
class Compiled:
    original: GroundProgram  # theory directives stripped, before shifting
    program: GroundProgram   # partially shifted
    spec: CaspSpec
    scc: SccInfo
    model: ConstraintModel


def compile_program(p: GroundProgram, *, strict: bool = True, linear: bool = False,
                    fallback: tuple[int, int] = DEFAULT_FALLBACK,
                    reject_globals: bool = False) -> Compiled:
    base = strip_theory_heads(p)
    spec = bound_or_default(extract_casp(base), fallback)
    shifted = partially_shift(base)
    scc = build_dep_graph(shifted)
    model = translate(shifted, spec, strict=strict, scc=scc)
    if linear:
        model = linearize(model, reject_globals)
    return Compiled(base, shifted, spec, scc, model)

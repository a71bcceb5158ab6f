"""Compare the compiled and pure-Python search kernels on translated programs.

    python3 benchmarks/bench_search.py [--seeds N] [--repeat K]
"""
import argparse
import statistics
import time

from caspfzn import search
from caspfzn.gen import GenConfig, random_program
from caspfzn.pipeline import compile_program


def workload(seeds: int):
    cfg = GenConfig(lin_vars=2)
    models = []
    for seed in range(seeds):
        p = random_program(seed, cfg)
        models.append(compile_program(p, strict=True).model)
    # a few larger, non-tight instances
    big = GenConfig(max_atoms=12, max_rules=16, cycle_ratio=1.0)
    for seed in range(5):
        models.append(compile_program(random_program(10_000 + seed, big), strict=False).model)
    return models


def timed(backend: str, models, repeat: int):
    runs = []
    nodes = 0
    sols = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        nodes = 0
        sols = []
        for m in models:
            r = search.run_search(m, backend=backend)
            nodes += r.nodes
            sols.append(sorted(r.solutions))
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), nodes, sols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    models = workload(args.seeds)
    print(f"{len(models)} models")
    py_t, py_nodes, py_sols = timed("python", models, args.repeat)
    print(f"python  {py_t:8.3f} s  {py_nodes:>10} nodes  {py_nodes / py_t:12.0f} nodes/s")
    if search.BACKEND != "cython":
        print("compiled kernel not built; nothing to compare")
        return
    cy_t, cy_nodes, cy_sols = timed("cython", models, args.repeat)
    print(f"cython  {cy_t:8.3f} s  {cy_nodes:>10} nodes  {cy_nodes / cy_t:12.0f} nodes/s")
    assert cy_sols == py_sols and cy_nodes == py_nodes, "kernels disagree"
    print(f"speedup {py_t / cy_t:.1f}x (identical solutions and node counts)")


if __name__ == "__main__":
    main()

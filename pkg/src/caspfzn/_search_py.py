"""Pure-Python depth-first model enumeration (fallback for the compiled kernel).

The model is flattened into integer arrays, see ``search.FlatModel``.
Constraint kinds: 0 linear (optionally reified), 1 all-different,
2 cumulative (tasks as start/length/resource triples, ``rhs`` is the bound).
Operators: 0 ``<=``, 1 ``=``, 2 ``!=``.
"""

LIN, DISTINCT, CUMUL = 0, 1, 2
LE, EQ, NE = 0, 1, 2

OK, NODE_LIMIT, SOLUTION_LIMIT = 0, 1, 2


def _check(c, kind, op, reif, rhs, ts, te, tvar, tcoef, assigned, val, lb, ub):
    if kind[c] == LIN:
        r = reif[c]
        if r >= 0:
            if not assigned[r]:
                return True
            want = val[r]
        else:
            want = 1
        mn = mx = 0
        for k in range(ts[c], te[c]):
            v = tvar[k]
            w = tcoef[k]
            if assigned[v]:
                mn += w * val[v]
                mx += w * val[v]
            elif w > 0:
                mn += w * lb[v]
                mx += w * ub[v]
            else:
                mn += w * ub[v]
                mx += w * lb[v]
        g = rhs[c]
        o = op[c]
        if o == LE:
            return mn <= g if want else mx > g
        if o == EQ:
            if want:
                return mn <= g <= mx
            return not (mn == mx == g)
        if want:
            return not (mn == mx == g)
        return mn <= g <= mx
    if kind[c] == DISTINCT:
        seen = set()
        for k in range(ts[c], te[c]):
            v = tvar[k]
            if assigned[v]:
                if val[v] in seen:
                    return False
                seen.add(val[v])
        return True
    for k in range(ts[c], te[c]):
        if not assigned[tvar[k]]:
            return True
    starts = []
    for k in range(ts[c], te[c], 3):
        s, l, r = val[tvar[k]], val[tvar[k + 1]], val[tvar[k + 2]]
        if l < 0 or r < 0:
            return False
        starts.append((s, l, r))
    for s0, l0, _ in starts:
        if l0 <= 0:
            continue
        load = 0
        for s, l, r in starts:
            if s <= s0 < s + l:
                load += r
        if load > rhs[c]:
            return False
    return True


def search(n, lb, ub, order, jump_depth, kind, op, reif, rhs, ts, te, tvar, tcoef,
           vstart, vcons, max_solutions, max_nodes):
    """Enumerate assignments; returns ``(status, solutions, nodes)``.

    With ``jump_depth >= 0`` only one completion per assignment of
    ``order[:jump_depth + 1]`` is produced.
    """
    lb, ub, order, kind, op, reif, rhs, ts, te, tvar, tcoef, vstart, vcons = (
        list(map(int, a)) for a in (lb, ub, order, kind, op, reif, rhs, ts, te, tvar, tcoef,
                                    vstart, vcons))
    solutions = []
    nodes = 0
    if n == 0:
        for c in range(len(kind)):
            if not _check(c, kind, op, reif, rhs, ts, te, tvar, tcoef, [], [], lb, ub):
                return OK, solutions, nodes
        solutions.append(())
        return OK, solutions, nodes
    assigned = [0] * n
    val = [0] * n
    started = [False] * n
    depth = 0
    while depth >= 0:
        v = order[depth]
        x = val[v] + 1 if started[depth] else lb[v]
        started[depth] = True
        ok = False
        assigned[v] = 1
        while x <= ub[v]:
            val[v] = x
            nodes += 1
            ok = True
            for k in range(vstart[v], vstart[v + 1]):
                if not _check(vcons[k], kind, op, reif, rhs, ts, te, tvar, tcoef,
                              assigned, val, lb, ub):
                    ok = False
                    break
            if ok:
                break
            x += 1
        if nodes > max_nodes:
            return NODE_LIMIT, solutions, nodes
        if not ok:
            assigned[v] = 0
            started[depth] = False
            depth -= 1
            continue
        if depth == n - 1:
            solutions.append(tuple(val))
            if len(solutions) > max_solutions:
                return SOLUTION_LIMIT, solutions, nodes
            if jump_depth >= 0:
                while depth > jump_depth:
                    assigned[order[depth]] = 0
                    started[depth] = False
                    depth -= 1
        else:
            depth += 1
    return OK, solutions, nodes

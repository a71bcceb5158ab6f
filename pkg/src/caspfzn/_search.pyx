# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled depth-first model enumeration; same contract as ``_search_py.search``."""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

cdef enum:
    LIN = 0
    DISTINCT = 1
    LE = 0
    EQ = 1

OK, NODE_LIMIT, SOLUTION_LIMIT = 0, 1, 2


cdef bint _check(Py_ssize_t c, const long long[:] kind, const long long[:] op,
                 const long long[:] reif, const long long[:] rhs,
                 const long long[:] ts, const long long[:] te,
                 const long long[:] tvar, const long long[:] tcoef,
                 char* assigned, long long* val,
                 const long long[:] lb, const long long[:] ub) nogil:
    cdef Py_ssize_t k, j, v, r
    cdef long long mn = 0, mx = 0, w, g, load, s0, l0
    cdef int want, o
    if kind[c] == LIN:
        r = reif[c]
        if r >= 0:
            if not assigned[r]:
                return True
            want = <int>val[r]
        else:
            want = 1
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
        o = <int>op[c]
        if o == LE:
            return (mn <= g) if want else (mx > g)
        if o == EQ:
            if want:
                return mn <= g and g <= mx
            return not (mn == mx and mx == g)
        if want:
            return not (mn == mx and mx == g)
        return mn <= g and g <= mx
    if kind[c] == DISTINCT:
        for k in range(ts[c], te[c]):
            if not assigned[tvar[k]]:
                continue
            for j in range(k + 1, te[c]):
                if assigned[tvar[j]] and val[tvar[j]] == val[tvar[k]]:
                    return False
        return True
    for k in range(ts[c], te[c]):
        if not assigned[tvar[k]]:
            return True
    k = ts[c]
    while k < te[c]:
        if val[tvar[k + 1]] < 0 or val[tvar[k + 2]] < 0:
            return False
        k += 3
    k = ts[c]
    while k < te[c]:
        s0 = val[tvar[k]]
        l0 = val[tvar[k + 1]]
        if l0 > 0:
            load = 0
            j = ts[c]
            while j < te[c]:
                if val[tvar[j]] <= s0 and s0 < val[tvar[j]] + val[tvar[j + 1]]:
                    load += val[tvar[j + 2]]
                j += 3
            if load > rhs[c]:
                return False
        k += 3
    return True


def search(Py_ssize_t n, const long long[:] lb, const long long[:] ub,
           const long long[:] order, Py_ssize_t jump_depth,
           const long long[:] kind, const long long[:] op, const long long[:] reif,
           const long long[:] rhs, const long long[:] ts, const long long[:] te,
           const long long[:] tvar, const long long[:] tcoef,
           const long long[:] vstart, const long long[:] vcons,
           long long max_solutions, long long max_nodes):
    cdef list solutions = []
    cdef long long nodes = 0
    cdef Py_ssize_t depth, k, v, c, ncons = kind.shape[0]
    cdef long long x
    cdef bint ok
    cdef char* assigned
    cdef char* started
    cdef long long* val
    if n == 0:
        for c in range(ncons):
            if not _check(c, kind, op, reif, rhs, ts, te, tvar, tcoef, NULL, NULL, lb, ub):
                return OK, solutions, nodes
        solutions.append(())
        return OK, solutions, nodes
    assigned = <char*>malloc(n)
    started = <char*>malloc(n)
    val = <long long*>malloc(n * sizeof(long long))
    if assigned == NULL or started == NULL or val == NULL:
        free(assigned); free(started); free(val)
        raise MemoryError()
    memset(assigned, 0, n)
    memset(started, 0, n)
    memset(val, 0, n * sizeof(long long))
    status = OK
    try:
        depth = 0
        while depth >= 0:
            v = order[depth]
            x = val[v] + 1 if started[depth] else lb[v]
            started[depth] = 1
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
                status = NODE_LIMIT
                break
            if not ok:
                assigned[v] = 0
                started[depth] = 0
                depth -= 1
                continue
            if depth == n - 1:
                solutions.append(tuple([val[k] for k in range(n)]))
                if len(solutions) > max_solutions:
                    status = SOLUTION_LIMIT
                    break
                if jump_depth >= 0:
                    while depth > jump_depth:
                        assigned[order[depth]] = 0
                        started[depth] = 0
                        depth -= 1
            else:
                depth += 1
    finally:
        free(assigned)
        free(started)
        free(val)
    return status, solutions, nodes

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled 1-minimality propagation. See ``_propagate.py`` for the layout."""

from libc.stdlib cimport malloc, calloc, free


def propagate(const int[:] scope_off, const int[:] scope_var,
              const int[:] data_off, const int[:] tup_off,
              const int[:] tup_data, const int[:] adj_off, const int[:] adj,
              long long[:] dom, signed char[:] alive, const int[:] seeds):
    cdef Py_ssize_t m = scope_off.shape[0] - 1
    cdef Py_ssize_t cap = m + 1
    cdef int *queue = <int *> malloc(cap * sizeof(int))
    cdef char *inq = <char *> calloc(m if m > 0 else 1, sizeof(char))
    cdef long long *supp = NULL
    cdef int maxr = 0
    cdef Py_ssize_t head = 0, tail = 0, size = 0
    cdef Py_ssize_t c, c2, k, g, g0, g1, off, base, s0, p, v, i
    cdef int r, val
    cdef bint seen, ok
    cdef long long nd
    if queue == NULL or inq == NULL:
        free(queue)
        free(inq)
        raise MemoryError()
    for c in range(m):
        r = scope_off[c + 1] - scope_off[c]
        if r > maxr:
            maxr = r
    supp = <long long *> malloc((maxr + 1) * sizeof(long long))
    if supp == NULL:
        free(queue)
        free(inq)
        raise MemoryError()
    try:
        if seeds.shape[0] == 0:
            for c in range(m):
                queue[tail] = <int> c
                tail = (tail + 1) % cap
                inq[c] = 1
                size += 1
        else:
            for i in range(seeds.shape[0]):
                v = seeds[i]
                for k in range(adj_off[v], adj_off[v + 1]):
                    c = adj[k]
                    if not inq[c]:
                        inq[c] = 1
                        queue[tail] = <int> c
                        tail = (tail + 1) % cap
                        size += 1
        while size > 0:
            c = queue[head]
            head = (head + 1) % cap
            size -= 1
            inq[c] = 0
            s0 = scope_off[c]
            r = scope_off[c + 1] - s0
            for p in range(r):
                supp[p] = 0
            g0 = tup_off[c]
            g1 = tup_off[c + 1]
            base = data_off[c]
            seen = False
            for g in range(g0, g1):
                if not alive[g]:
                    continue
                off = base + (g - g0) * r
                ok = True
                for p in range(r):
                    val = tup_data[off + p]
                    if not ((dom[scope_var[s0 + p]] >> val) & 1):
                        ok = False
                        break
                if not ok:
                    alive[g] = 0
                    continue
                seen = True
                for p in range(r):
                    supp[p] |= (<long long> 1) << tup_data[off + p]
            if not seen:
                return False
            for p in range(r):
                v = scope_var[s0 + p]
                nd = dom[v] & supp[p]
                if nd != dom[v]:
                    dom[v] = nd
                    for k in range(adj_off[v], adj_off[v + 1]):
                        c2 = adj[k]
                        if not inq[c2]:
                            inq[c2] = 1
                            queue[tail] = <int> c2
                            tail = (tail + 1) % cap
                            size += 1
        return True
    finally:
        free(queue)
        free(inq)
        free(supp)

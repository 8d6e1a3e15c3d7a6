"""Pure-Python 1-minimality propagation over a packed instance.

Mirror of ``_kernel.pyx``; both must stay behaviourally identical.

Packed layout (all ``array.array``):

- ``scope_off[c]:scope_off[c+1]`` slices ``scope_var`` to the scope of ``c``
- ``tup_off[c]:tup_off[c+1]`` are the global tuple ids of ``c``; tuple ``g``
  of ``c`` occupies ``tup_data[data_off[c] + (g - tup_off[c]) * arity]``
- ``adj_off[v]:adj_off[v+1]`` slices ``adj`` to the constraints mentioning ``v``
- ``dom[v]`` is a value bitmask, ``alive[g]`` is 0/1

``seeds`` lists variables whose domains changed; when empty every
constraint is queued. Returns False on a wipe-out (empty domain or
constraint), leaving ``dom``/``alive`` in an unspecified state.
"""

from collections import deque


def propagate(scope_off, scope_var, data_off, tup_off, tup_data, adj_off, adj,
              dom, alive, seeds):
    m = len(scope_off) - 1
    inq = bytearray(m)
    queue = deque()
    if len(seeds) == 0:
        queue.extend(range(m))
        for c in range(m):
            inq[c] = 1
    else:
        for v in seeds:
            for k in range(adj_off[v], adj_off[v + 1]):
                c = adj[k]
                if not inq[c]:
                    inq[c] = 1
                    queue.append(c)
    while queue:
        c = queue.popleft()
        inq[c] = 0
        s0 = scope_off[c]
        r = scope_off[c + 1] - s0
        svars = scope_var[s0:s0 + r]
        masks = [dom[v] for v in svars]
        supp = [0] * r
        g0 = tup_off[c]
        base = data_off[c]
        seen = False
        for g in range(g0, tup_off[c + 1]):
            if not alive[g]:
                continue
            off = base + (g - g0) * r
            row = tup_data[off:off + r]
            for p in range(r):
                if not (masks[p] >> row[p]) & 1:
                    alive[g] = 0
                    break
            else:
                seen = True
                for p in range(r):
                    supp[p] |= 1 << row[p]
        if not seen:
            return False
        for p in range(r):
            v = svars[p]
            nd = dom[v] & supp[p]
            if nd != dom[v]:
                dom[v] = nd
                for k in range(adj_off[v], adj_off[v + 1]):
                    c2 = adj[k]
                    if not inq[c2]:
                        inq[c2] = 1
                        queue.append(c2)
    return True

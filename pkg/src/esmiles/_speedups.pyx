# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: bit-for-bit twins of the pure-Python hot paths.

Three kernels live here: the FNV-1a hash, neighborhood-invariant
refinement (fingerprints + canonical ranking) and the depth-first SMILES
component writer.  The parity suite in ``tests/test_kernels.py`` checks
them against ``esmiles._pykernels`` / the pure writer on random inputs.
"""

import array as _array

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, uint8_t

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL

_DIGIT_TOKENS = tuple(str(d) if d < 10 else "%%%02d" % d for d in range(100))


cdef inline uint64_t fnv_byte(uint64_t h, uint8_t b) nogil:
    return (h ^ b) * FNV_PRIME


cdef inline uint64_t fnv_u64(uint64_t h, uint64_t v) nogil:
    cdef int shift
    for shift in range(56, -8, -8):
        h = (h ^ ((v >> shift) & 0xFF)) * FNV_PRIME
    return h


def fnv1a64(data):
    """FNV-1a 64-bit hash of a byte string."""
    cdef const uint8_t[:] buf = data
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(buf.shape[0]):
        h = fnv_byte(h, buf[i])
    return h


cdef void _round(Py_ssize_t n, const long[:] adj_start, const long[:] adj_flat,
                 const long[:] bond_codes, uint64_t* inv, uint64_t* out,
                 uint64_t* scratch) nogil:
    cdef Py_ssize_t i, k, m, j
    cdef uint64_t h, c
    for i in range(n):
        m = 0
        for k in range(adj_start[i], adj_start[i + 1]):
            c = fnv_u64(fnv_byte(FNV_OFFSET, <uint8_t> bond_codes[k]),
                        inv[adj_flat[k]])
            scratch[m] = c
            m += 1
        for k in range(1, m):
            c = scratch[k]
            j = k
            while j > 0 and scratch[j - 1] > c:
                scratch[j] = scratch[j - 1]
                j -= 1
            scratch[j] = c
        h = fnv_u64(FNV_OFFSET, inv[i])
        for k in range(m):
            h = fnv_u64(h, scratch[k])
        out[i] = h


cdef void _sort_u64(uint64_t* a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef uint64_t c
    for i in range(1, n):
        c = a[i]
        j = i
        while j > 0 and a[j - 1] > c:
            a[j] = a[j - 1]
            j -= 1
        a[j] = c


cdef Py_ssize_t _count_distinct(Py_ssize_t n, uint64_t* inv, uint64_t* tmp) nogil:
    cdef Py_ssize_t i, d
    for i in range(n):
        tmp[i] = inv[i]
    _sort_u64(tmp, n)
    d = 1
    for i in range(1, n):
        if tmp[i] != tmp[i - 1]:
            d += 1
    return d


cdef Py_ssize_t _max_degree(Py_ssize_t n, const long[:] adj_start) nogil:
    cdef Py_ssize_t i, d = 1
    for i in range(n):
        if adj_start[i + 1] - adj_start[i] > d:
            d = adj_start[i + 1] - adj_start[i]
    return d


def build_csr(Py_ssize_t n, list bond_list):
    """CSR adjacency arrays from (a, b, order, direction) bond tuples."""
    cdef Py_ssize_t m = len(bond_list)
    cdef Py_ssize_t i, k, bi
    cdef long a, b, o
    starts = _array.array("l", bytes(8 * (n + 1)))
    cdef long[:] starts_v = starts
    cdef long[:] flat_v, codes_v, ids_v
    cdef long* ea = <long*> malloc((m + 1) * sizeof(long))
    cdef long* eb = <long*> malloc((m + 1) * sizeof(long))
    cdef long* eo = <long*> malloc((m + 1) * sizeof(long))
    cdef long* fill = <long*> malloc((n + 1) * sizeof(long))
    try:
        for i in range(n + 1):
            starts_v[i] = 0
        for bi in range(m):
            t = <tuple> bond_list[bi]
            a = t[0]
            b = t[1]
            o = t[2]
            ea[bi] = a
            eb[bi] = b
            eo[bi] = o
            starts_v[a + 1] += 1
            starts_v[b + 1] += 1
        for i in range(n):
            starts_v[i + 1] += starts_v[i]
        flat = _array.array("l", bytes(8 * starts_v[n]))
        codes = _array.array("l", bytes(8 * starts_v[n]))
        bond_ids = _array.array("l", bytes(8 * starts_v[n]))
        flat_v = flat
        codes_v = codes
        ids_v = bond_ids
        for i in range(n):
            fill[i] = starts_v[i]
        for bi in range(m):
            k = fill[ea[bi]]
            flat_v[k] = eb[bi]
            codes_v[k] = eo[bi]
            ids_v[k] = bi
            fill[ea[bi]] = k + 1
            k = fill[eb[bi]]
            flat_v[k] = ea[bi]
            codes_v[k] = eo[bi]
            ids_v[k] = bi
            fill[eb[bi]] = k + 1
        return starts, flat, codes, bond_ids
    finally:
        free(ea)
        free(eb)
        free(eo)
        free(fill)


def neighborhood_hashes(Py_ssize_t n, adj_start_o, adj_flat_o, bond_codes_o,
                        init, Py_ssize_t radius):
    """Invariant hash of every atom's radius-r neighborhood, r = 0..radius."""
    cdef const long[:] adj_start = adj_start_o
    cdef const long[:] adj_flat = adj_flat_o
    cdef const long[:] bond_codes = bond_codes_o
    cdef const uint64_t[:] init_v = init
    cdef Py_ssize_t i, r, maxdeg = _max_degree(n, adj_start)
    cdef uint64_t* inv = <uint64_t*> malloc(n * sizeof(uint64_t))
    cdef uint64_t* nxt = <uint64_t*> malloc(n * sizeof(uint64_t))
    cdef uint64_t* scratch = <uint64_t*> malloc(maxdeg * sizeof(uint64_t))
    cdef uint64_t* swap
    out = []
    try:
        for i in range(n):
            inv[i] = init_v[i]
            out.append(inv[i])
        for r in range(radius):
            _round(n, adj_start, adj_flat, bond_codes, inv, nxt, scratch)
            swap = inv
            inv = nxt
            nxt = swap
            for i in range(n):
                out.append(inv[i])
        return out
    finally:
        free(inv)
        free(nxt)
        free(scratch)


def canonical_ranks(Py_ssize_t n, adj_start_o, adj_flat_o, bond_codes_o, init):
    """Discrete canonical ranking; see the pure twin for the contract."""
    if n == 0:
        return []
    cdef const long[:] adj_start = adj_start_o
    cdef const long[:] adj_flat = adj_flat_o
    cdef const long[:] bond_codes = bond_codes_o
    cdef const uint64_t[:] init_v = init
    cdef Py_ssize_t i, j, maxdeg = _max_degree(n, adj_start)
    cdef uint64_t* inv = <uint64_t*> malloc(n * sizeof(uint64_t))
    cdef uint64_t* nxt = <uint64_t*> malloc(n * sizeof(uint64_t))
    cdef uint64_t* tmp = <uint64_t*> malloc(n * sizeof(uint64_t))
    cdef uint64_t* scratch = <uint64_t*> malloc(maxdeg * sizeof(uint64_t))
    cdef long* idx = <long*> malloc(n * sizeof(long))
    cdef uint64_t* swap
    cdef Py_ssize_t ndistinct, nd, splits = 0
    cdef uint64_t target
    cdef bint fallback = False
    cdef long[:] ranks_v
    try:
        for i in range(n):
            inv[i] = init_v[i]
        ndistinct = _count_distinct(n, inv, tmp)
        while True:
            while ndistinct < n:
                _round(n, adj_start, adj_flat, bond_codes, inv, nxt, scratch)
                nd = _count_distinct(n, nxt, tmp)
                if nd == ndistinct:
                    break
                swap = inv
                inv = nxt
                nxt = swap
                ndistinct = nd
            if ndistinct == n:
                break
            splits += 1
            if splits > 4 * n:
                fallback = True
                break
            for i in range(n):
                tmp[i] = inv[i]
            _sort_u64(tmp, n)
            target = 0
            for i in range(1, n):
                if tmp[i] == tmp[i - 1]:
                    target = tmp[i]
                    break
            for i in range(n):
                if inv[i] == target:
                    inv[i] = fnv_u64(fnv_byte(FNV_OFFSET, 0x53), inv[i])
                    break
            ndistinct = _count_distinct(n, inv, tmp)
        # rank by value via insertion sort of indices (stable on index ties
        # only in the fallback path, where (value, index) pairs are unique)
        for i in range(n):
            idx[i] = i
        for i in range(1, n):
            j = i
            while j > 0 and (inv[idx[j - 1]] > inv[idx[j]] or
                             (fallback and inv[idx[j - 1]] == inv[idx[j]]
                              and idx[j - 1] > idx[j])):
                idx[j - 1], idx[j] = idx[j], idx[j - 1]
                j -= 1
        ranks = _array.array("l", bytes(8 * n))
        ranks_v = ranks
        for i in range(n):
            ranks_v[idx[i]] = i
        return ranks
    finally:
        free(inv)
        free(nxt)
        free(tmp)
        free(scratch)
        free(idx)


def write_component(Py_ssize_t root, adj_start_o, adj_flat_o, adj_bond_o,
                    key_o, bond_a_o, list atom_toks, list bond_fwd,
                    list bond_rev, visited_o, list emit_order):
    """Serialize one connected component depth-first from ``root``.

    Exact compiled twin of the per-component body of the pure writer:
    neighbors are visited in ascending (key, atom, bond) order, ring
    closures open at the earlier endpoint, digits are reused smallest
    first.  ``visited`` is shared across calls so multi-fragment callers
    can walk their components in sequence.  Appends emitted atom ids to
    ``emit_order`` and returns the component's string.
    """
    cdef const long[:] adj_start = adj_start_o
    cdef const long[:] adj_flat = adj_flat_o
    cdef const long[:] adj_bond = adj_bond_o
    cdef const long[:] bond_a = bond_a_o
    cdef uint8_t[:] visited = visited_o
    cdef const long[:] key
    cdef bint has_key = key_o is not None
    if has_key:
        key = key_o
    cdef Py_ssize_t n = visited.shape[0]
    cdef Py_ssize_t m = bond_a.shape[0]
    cdef Py_ssize_t total_adj = adj_flat.shape[0]
    cdef Py_ssize_t maxdeg = _max_degree(n, adj_start)

    cdef long* visit_pos = <long*> malloc(n * sizeof(long))
    cdef long* tree_bond = <long*> malloc(n * sizeof(long))
    cdef long* child_v = <long*> malloc((total_adj + 1) * sizeof(long))
    cdef long* child_b = <long*> malloc((total_adj + 1) * sizeof(long))
    cdef long* child_cnt = <long*> malloc(n * sizeof(long))
    cdef long* ring_b = <long*> malloc((total_adj + 1) * sizeof(long))
    cdef long* ring_cnt = <long*> malloc(n * sizeof(long))
    cdef uint8_t* used_bond = <uint8_t*> malloc((m + 1) * sizeof(uint8_t))
    cdef long* dfs_atom = <long*> malloc((total_adj + 2) * sizeof(long))
    cdef long* dfs_via = <long*> malloc((total_adj + 2) * sizeof(long))
    cdef long* sk = <long*> malloc(3 * maxdeg * sizeof(long))
    cdef long* sv = <long*> malloc(3 * maxdeg * sizeof(long))
    cdef long* sb = <long*> malloc(3 * maxdeg * sizeof(long))
    cdef long* digit_of = <long*> malloc((m + 1) * sizeof(long))
    cdef uint8_t* digit_used = <uint8_t*> malloc(100 * sizeof(uint8_t))
    cdef long* stk_atom = <long*> malloc((4 * n + 8) * sizeof(long))
    cdef long* stk_bond = <long*> malloc((4 * n + 8) * sizeof(long))
    cdef long* stk_par = <long*> malloc((4 * n + 8) * sizeof(long))

    cdef Py_ssize_t i, k, u, v, bi, via, sp, cnt, kk, j, d, pos_u, other
    cdef Py_ssize_t order_n = 0
    cdef long kv, kb, u_swap_v, u_swap_b
    out = []
    try:
        for i in range(m + 1):
            used_bond[i] = 0
        for i in range(100):
            digit_used[i] = 0

        # pass 1: DFS preorder, classify tree edges and ring closures
        for i in range(n):
            ring_cnt[i] = 0
            child_cnt[i] = 0
            tree_bond[i] = -1
        sp = 0
        dfs_atom[0] = root
        dfs_via[0] = -1
        sp = 1
        while sp > 0:
            sp -= 1
            u = dfs_atom[sp]
            via = dfs_via[sp]
            if visited[u]:
                continue
            visited[u] = 1
            visit_pos[u] = order_n
            order_n += 1
            if via >= 0:
                tree_bond[u] = via
                used_bond[via] = 1
            # gather and sort neighbors by (key, v, bi)
            cnt = 0
            for k in range(adj_start[u], adj_start[u + 1]):
                v = adj_flat[k]
                bi = adj_bond[k]
                sk[cnt] = key[v] if has_key else v
                sv[cnt] = v
                sb[cnt] = bi
                cnt += 1
            for k in range(1, cnt):
                kv = sk[k]
                u_swap_v = sv[k]
                u_swap_b = sb[k]
                j = k
                while j > 0 and (sk[j - 1] > kv or
                                 (sk[j - 1] == kv and sv[j - 1] > u_swap_v)):
                    sk[j] = sk[j - 1]
                    sv[j] = sv[j - 1]
                    sb[j] = sb[j - 1]
                    j -= 1
                sk[j] = kv
                sv[j] = u_swap_v
                sb[j] = u_swap_b
            kk = 0
            for k in range(cnt):
                v = sv[k]
                bi = sb[k]
                if used_bond[bi]:
                    continue
                if visited[v]:
                    used_bond[bi] = 1
                    ring_b[adj_start[u] + ring_cnt[u]] = bi
                    ring_cnt[u] += 1
                    ring_b[adj_start[v] + ring_cnt[v]] = bi
                    ring_cnt[v] += 1
                else:
                    child_v[adj_start[u] + kk] = v
                    child_b[adj_start[u] + kk] = bi
                    kk += 1
            child_cnt[u] = kk
            for k in range(kk - 1, -1, -1):
                dfs_atom[sp] = child_v[adj_start[u] + k]
                dfs_via[sp] = child_b[adj_start[u] + k]
                sp += 1

        # pass 2: emission
        sp = 0
        stk_atom[0] = root
        stk_bond[0] = -1
        stk_par[0] = -1
        sp = 1
        while sp > 0:
            sp -= 1
            u = stk_atom[sp]
            if u == -2:
                out.append("(")
                continue
            if u == -3:
                out.append(")")
                continue
            bi = stk_bond[sp]
            if bi >= 0:
                tok = bond_fwd[bi] if bond_a[bi] == stk_par[sp] else bond_rev[bi]
                if len(<str> tok):
                    out.append(tok)
            out.append(atom_toks[u])
            emit_order.append(u)
            cnt = ring_cnt[u]
            if cnt:
                pos_u = visit_pos[u]
                # opens then closes, each ordered by partner visit position
                kk = 0
                for k in range(cnt):
                    bi = ring_b[adj_start[u] + k]
                    other = _bond_other(adj_bond, adj_start, adj_flat, bi, u)
                    sk[kk] = visit_pos[other]
                    sb[kk] = bi
                    kk += 1
                for k in range(1, kk):
                    kv = sk[k]
                    kb = sb[k]
                    j = k
                    while j > 0 and sk[j - 1] > kv:
                        sk[j] = sk[j - 1]
                        sb[j] = sb[j - 1]
                        j -= 1
                    sk[j] = kv
                    sb[j] = kb
                for k in range(kk):
                    if sk[k] > pos_u:          # opening
                        bi = sb[k]
                        d = 1
                        while d < 100 and digit_used[d]:
                            d += 1
                        if d == 100:
                            raise ValueError("ring closure digits exhausted")
                        digit_used[d] = 1
                        digit_of[bi] = d
                        tok = bond_fwd[bi] if bond_a[bi] == u else bond_rev[bi]
                        if len(<str> tok):
                            out.append(tok)
                        out.append(_DIGIT_TOKENS[d])
                for k in range(kk):
                    if sk[k] < pos_u:          # closing
                        bi = sb[k]
                        d = digit_of[bi]
                        digit_used[d] = 0
                        out.append(_DIGIT_TOKENS[d])
            # children confirmed as tree edges
            kk = 0
            for k in range(child_cnt[u]):
                v = child_v[adj_start[u] + k]
                bi = child_b[adj_start[u] + k]
                if tree_bond[v] == bi:
                    sv[kk] = v
                    sb[kk] = bi
                    kk += 1
            if kk:
                stk_atom[sp] = sv[kk - 1]
                stk_bond[sp] = sb[kk - 1]
                stk_par[sp] = u
                sp += 1
                for k in range(kk - 2, -1, -1):
                    stk_atom[sp] = -3
                    sp += 1
                    stk_atom[sp] = sv[k]
                    stk_bond[sp] = sb[k]
                    stk_par[sp] = u
                    sp += 1
                    stk_atom[sp] = -2
                    sp += 1
        return "".join(out)
    finally:
        free(visit_pos)
        free(tree_bond)
        free(child_v)
        free(child_b)
        free(child_cnt)
        free(ring_b)
        free(ring_cnt)
        free(used_bond)
        free(dfs_atom)
        free(dfs_via)
        free(sk)
        free(sv)
        free(sb)
        free(digit_of)
        free(digit_used)
        free(stk_atom)
        free(stk_bond)
        free(stk_par)


cdef inline long _bond_other(const long[:] adj_bond, const long[:] adj_start,
                             const long[:] adj_flat,
                             Py_ssize_t bi, Py_ssize_t u) nogil:
    # the adjacency slot of u that carries bond bi names the partner
    cdef Py_ssize_t k
    for k in range(adj_start[u], adj_start[u + 1]):
        if adj_bond[k] == bi:
            return adj_flat[k]
    return -1

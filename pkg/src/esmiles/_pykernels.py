"""Pure-Python kernels: reference implementation of the hot loops.

The compiled extension (``esmiles._speedups``) implements the same three
functions with identical arithmetic; ``esmiles.kernels`` picks whichever is
importable.  Everything here must stay bit-for-bit equal to the compiled
twin — the parity test suite compares them on random inputs.

Hash scheme
-----------
All neighborhood invariants are 64-bit FNV-1a values (offset basis
``0xcbf29ce484222325``, prime ``0x100000001b3``) folded over big-endian
byte encodings:

* seed invariant: FNV-1a over a caller-supplied byte string,
* neighbor code:  FNV-1a over ``bond_code`` (1 byte) + neighbor value (8 bytes),
* round update:   FNV-1a over own value (8 bytes) + each neighbor code
  (8 bytes) in ascending code order.

Sorting the neighbor codes makes every value independent of atom input
order, so the derived ranking is invariant under graph relabeling.
"""

from __future__ import annotations

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def _fnv_u64(h: int, v: int) -> int:
    """Fold the 8 big-endian bytes of ``v`` into running hash ``h``."""
    for shift in (56, 48, 40, 32, 24, 16, 8, 0):
        h = ((h ^ ((v >> shift) & 0xFF)) * _FNV_PRIME) & _MASK
    return h


def _round(n, adj_start, adj_flat, bond_codes, inv):
    """One refinement round: mix each value with its sorted neighbor codes."""
    out = [0] * n
    for i in range(n):
        codes = []
        for k in range(adj_start[i], adj_start[i + 1]):
            c = _fnv_u64((_FNV_OFFSET ^ bond_codes[k]) * _FNV_PRIME & _MASK,
                         inv[adj_flat[k]])
            codes.append(c)
        codes.sort()
        h = _fnv_u64(_FNV_OFFSET, inv[i])
        for c in codes:
            h = _fnv_u64(h, c)
        out[i] = h
    return out


def build_csr(n, bond_list):
    """CSR adjacency arrays from (a, b, order, direction) bond tuples.

    Returns (starts, neighbors, bond orders, bond ids) as ``array('l')``;
    per-atom slot order follows bond list order.
    """
    import array

    counts = [0] * n
    for a, b, _o, _d in bond_list:
        counts[a] += 1
        counts[b] += 1
    starts = array.array("l", bytes(8 * (n + 1)))
    for i in range(n):
        starts[i + 1] = starts[i] + counts[i]
    total = starts[n]
    flat = array.array("l", bytes(8 * total))
    codes = array.array("l", bytes(8 * total))
    bond_ids = array.array("l", bytes(8 * total))
    fill = list(starts[:n])
    for bi, (a, b, o, _d) in enumerate(bond_list):
        k = fill[a]
        flat[k] = b
        codes[k] = o
        bond_ids[k] = bi
        fill[a] = k + 1
        k = fill[b]
        flat[k] = a
        codes[k] = o
        bond_ids[k] = bi
        fill[b] = k + 1
    return starts, flat, codes, bond_ids


def neighborhood_hashes(n, adj_start, adj_flat, bond_codes, init, radius):
    """Invariant hash of every atom's radius-r neighborhood, r = 0..radius.

    Returns a flat list of length ``(radius + 1) * n``; entry ``r * n + i``
    is atom i's value after r rounds (round 0 is ``init`` itself).
    """
    out = list(init)
    inv = list(init)
    for _ in range(radius):
        inv = _round(n, adj_start, adj_flat, bond_codes, inv)
        out.extend(inv)
    return out


def canonical_ranks(n, adj_start, adj_flat, bond_codes, init):
    """Discrete canonical ranking of the atoms of one graph.

    Iterates neighborhood refinement until the partition stops splitting;
    while classes remain ambiguous, forces a split of the lowest-valued
    class (its lowest-index member gets a perturbed value) and resumes.
    Result is a permutation: ranks[i] = canonical position of atom i.
    """
    if n == 0:
        return []
    inv = list(init)
    ndistinct = len(set(inv))
    splits = 0
    while True:
        # refine to a fixed point
        while ndistinct < n:
            nxt = _round(n, adj_start, adj_flat, bond_codes, inv)
            nd = len(set(nxt))
            if nd == ndistinct:
                break
            inv = nxt
            ndistinct = nd
        if ndistinct == n:
            break
        # split: lowest ambiguous value, lowest atom index wins
        splits += 1
        if splits > 4 * n:
            # hash-collision livelock guard; falls back to index order
            order = sorted(range(n), key=lambda i: (inv[i], i))
            ranks = [0] * n
            for pos, i in enumerate(order):
                ranks[i] = pos
            return ranks
        counts = {}
        for v in inv:
            counts[v] = counts.get(v, 0) + 1
        target = min(v for v, c in counts.items() if c > 1)
        for i in range(n):
            if inv[i] == target:
                inv[i] = _fnv_u64((_FNV_OFFSET ^ 0x53) * _FNV_PRIME & _MASK,
                                  inv[i])
                break
        ndistinct = len(set(inv))
    order = sorted(range(n), key=inv.__getitem__)
    ranks = [0] * n
    for pos, i in enumerate(order):
        ranks[i] = pos
    return ranks

"""SMILES string <-> molecular graph: parse, validate, write, canonicalize.

The graph is stored column-wise (one list per atom attribute) so the hot
paths stay allocation-light; ``Atom``/``Bond`` dataclass views are built
lazily for callers that want objects.  Graphs are immutable after
construction and safe to share between threads.

Accepted grammar: organic-subset atoms, bracket atoms (isotope, chirality
markers, H count, charge, atom class), ``*`` pseudo-atoms, ring closures
(digits and ``%nn``), branches, bond symbols ``- = # : / \\``, lowercase
aromatic atoms and dot-separated fragments.  Chirality and bond-direction
markers are stored and re-emitted but take no part in canonicalization.
"""

from __future__ import annotations

import array
import re
from dataclasses import dataclass
from functools import cached_property

from esmiles import kernels
from esmiles.elements import (
    AROMATIC_ELEMENTS,
    AROMATIC_ORGANIC,
    ORGANIC_SUBSET,
    PERIODIC_TABLE,
    STAR,
    implicit_hydrogens,
    max_valence,
)
from esmiles.errors import EmptyInputError, SmilesSyntaxError, ValenceError

SINGLE, DOUBLE, TRIPLE, AROMATIC_BOND = 1, 2, 3, 4

_BOND_CHARS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC_BOND,
               "/": SINGLE, "\\": SINGLE}
_BOND_SYMBOL = {DOUBLE: "=", TRIPLE: "#"}

_BRACKET_RE = re.compile(
    r"^(\d+)?([A-Z][a-z]?|[a-z][a-z]?|\*)(@@|@)?(H\d*)?"
    r"(\+\+|--|[+-]\d+|[+-])?(?::(\d+))?$"
)


@dataclass(frozen=True)
class Atom:
    """One atom; ``element`` is a periodic symbol or ``*``."""

    element: str
    charge: int = 0
    explicit_h: int | None = None
    aromatic: bool = False
    isotope: int | None = None
    chiral: str | None = None
    atom_class: int | None = None

    @property
    def is_star(self) -> bool:
        return self.element == STAR


@dataclass(frozen=True)
class Bond:
    """Bond between atom indices ``a`` and ``b`` (a < b on parse output)."""

    a: int
    b: int
    order: int = SINGLE
    direction: str | None = None

    @property
    def aromatic(self) -> bool:
        return self.order == AROMATIC_BOND


@dataclass(frozen=True)
class ValenceViolation:
    atom_index: int
    element: str
    bond_order_sum: float
    explicit_h: int
    allowed: int

    def __str__(self) -> str:
        return (f"atom {self.atom_index} ({self.element}): bond order sum "
                f"{self.bond_order_sum:g} + {self.explicit_h}H exceeds "
                f"allowed valence {self.allowed}")


class MolGraph:
    """Attributed molecular graph with stable first-appearance atom order."""

    __slots__ = ("element", "charge", "explicit_h", "aromatic", "isotope",
                 "chiral", "atom_class", "bond_list", "__dict__")

    def __init__(self, element, charge, explicit_h, aromatic, isotope,
                 chiral, atom_class, bond_list):
        self.element = element
        self.charge = charge
        self.explicit_h = explicit_h
        self.aromatic = aromatic
        self.isotope = isotope
        self.chiral = chiral
        self.atom_class = atom_class
        self.bond_list = bond_list          # (a, b, order, direction)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_atoms_bonds(cls, atoms, bonds) -> "MolGraph":
        """Build from ``Atom`` and ``Bond`` sequences (used by generators)."""
        element, charge, eh, arom, iso, chiral, acls = [], [], [], [], [], [], []
        for at in atoms:
            element.append(at.element)
            charge.append(at.charge)
            eh.append(at.explicit_h)
            arom.append(at.aromatic)
            iso.append(at.isotope)
            chiral.append(at.chiral)
            acls.append(at.atom_class)
        bond_list = []
        seen = set()
        n = len(element)
        for bd in bonds:
            a, b = bd.a, bd.b
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise SmilesSyntaxError(f"bad bond endpoints ({a}, {b})")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise SmilesSyntaxError(f"duplicate bond {key}")
            seen.add(key)
            bond_list.append((a, b, bd.order, bd.direction))
        return cls(element, charge, eh, arom, iso, chiral, acls, bond_list)

    def permuted(self, perm) -> "MolGraph":
        """Relabel atoms: old index i becomes ``perm[i]``."""
        n = self.n_atoms
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        cols = [[col[inv[j]] for j in range(n)]
                for col in (self.element, self.charge, self.explicit_h,
                            self.aromatic, self.isotope, self.chiral,
                            self.atom_class)]
        bonds = [(perm[a], perm[b], o, d) for a, b, o, d in self.bond_list]
        return MolGraph(*cols, bonds)

    # -- basic accessors ---------------------------------------------------

    @property
    def n_atoms(self) -> int:
        return len(self.element)

    @property
    def n_bonds(self) -> int:
        return len(self.bond_list)

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(
            Atom(self.element[i], self.charge[i], self.explicit_h[i],
                 self.aromatic[i], self.isotope[i], self.chiral[i],
                 self.atom_class[i])
            for i in range(self.n_atoms))

    @cached_property
    def bonds(self) -> tuple[Bond, ...]:
        return tuple(Bond(min(a, b), max(a, b), o, d)
                     for a, b, o, d in self.bond_list)

    def degree(self, i: int) -> int:
        starts = self.flat_adjacency[0]
        return starts[i + 1] - starts[i]

    @property
    def star_indices(self) -> list[int]:
        return [i for i, e in enumerate(self.element) if e == STAR]

    def bond_order_sum(self, i: int, aromatic_value: float = 1.0) -> float:
        """Sum of bond orders at atom i; aromatic bonds weigh ``aromatic_value``."""
        total = 0.0
        for _nb, bi in self.adj[i]:
            order = self.bond_list[bi][2]
            total += aromatic_value if order == AROMATIC_BOND else order
        return total

    def h_count(self, i: int) -> int:
        """Hydrogens on atom i: the bracket count, or table-derived."""
        if self.explicit_h[i] is not None:
            return self.explicit_h[i]
        if self.element[i] == STAR:
            return 0
        return implicit_hydrogens(self.element[i],
                                  self.bond_order_sum(i, aromatic_value=1.5),
                                  self.charge[i])

    @cached_property
    def adj(self) -> list[list[tuple[int, int]]]:
        """Per-atom neighbor list of (neighbor, bond index) pairs."""
        out = [[] for _ in self.element]
        for bi, (a, b, _o, _d) in enumerate(self.bond_list):
            out[a].append((b, bi))
            out[b].append((a, bi))
        return out

    @cached_property
    def flat_adjacency(self):
        """CSR adjacency arrays: (starts, neighbors, bond orders, bond ids).

        Slot order per atom matches :attr:`adj` (bond list order).
        """
        return kernels.build_csr(self.n_atoms, self.bond_list)

    @cached_property
    def writer_tables(self):
        """Prebuilt serialization tables: atom tokens, forward/reverse bond
        tokens and the bond 'a' endpoints."""
        pair = _bond_tokens(self)
        return (_atom_tokens(self),
                [p[0] for p in pair], [p[1] for p in pair],
                array.array("l", [b[0] for b in self.bond_list]))

    @cached_property
    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest member."""
        n = self.n_atoms
        if self.__dict__.get("_single_fragment"):
            return [list(range(n))]
        seen = [False] * n
        comps = []
        for start in range(n):
            if seen[start]:
                continue
            comp = [start]
            seen[start] = True
            queue = [start]
            while queue:
                u = queue.pop()
                for v, _bi in self.adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comp.sort()
            comps.append(comp)
        return comps

    # -- rings -------------------------------------------------------------

    @cached_property
    def rings(self) -> list[list[int]]:
        """Deterministic smallest set of smallest rings.

        Candidates are the smallest cycle through every bond (BFS with the
        bond removed); rings enter the set smallest-first as long as their
        bond set is GF(2)-independent of what was already taken, until the
        cyclomatic number is reached.  Output rings are sorted atom-index
        lists, ordered by (smallest member, size).
        """
        n_cycles = self.n_bonds - self.n_atoms + len(self.components)
        if n_cycles <= 0:
            return []
        candidates = []
        for bi, (a, b, _o, _d) in enumerate(self.bond_list):
            path = self._shortest_path_avoiding(a, b, bi)
            if path is None:
                continue
            atoms = tuple(sorted(path))
            bond_mask = 1 << bi
            for u, v in zip(path, path[1:]):
                bond_mask |= 1 << self._bond_index(u, v)
            candidates.append((len(atoms), atoms, bond_mask))
        candidates.sort(key=lambda c: (c[0], c[1]))
        basis: list[int] = []
        chosen = []
        seen_atom_sets = set()
        for _size, atoms, mask in candidates:
            if atoms in seen_atom_sets:
                continue
            reduced = mask
            for vec in basis:
                reduced = min(reduced, reduced ^ vec)
            if reduced == 0:
                continue
            basis.append(reduced)
            chosen.append(list(atoms))
            seen_atom_sets.add(atoms)
            if len(chosen) == n_cycles:
                break
        chosen.sort(key=lambda r: (r[0], len(r), r))
        return chosen

    def _bond_index(self, a: int, b: int) -> int:
        for nb, bi in self.adj[a]:
            if nb == b:
                return bi
        raise KeyError((a, b))

    def _shortest_path_avoiding(self, src, dst, skip_bond):
        """Shortest src->dst path ignoring one bond; None when disconnected."""
        prev = {src: None}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v, bi in self.adj[u]:
                    if bi == skip_bond or v in prev:
                        continue
                    prev[v] = u
                    if v == dst:
                        path = [v]
                        while path[-1] != src:
                            path.append(prev[path[-1]])
                        path.reverse()
                        return path
                    nxt.append(v)
            frontier = nxt
        return None

    # -- equality ----------------------------------------------------------

    def _key(self):
        return (tuple(self.element), tuple(self.charge),
                tuple(self.explicit_h), tuple(self.aromatic),
                tuple(self.isotope), tuple(self.chiral),
                tuple(self.atom_class),
                tuple(sorted((min(a, b), max(a, b), o, d)
                             for a, b, o, d in self.bond_list)))

    def __eq__(self, other):
        return isinstance(other, MolGraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"MolGraph({self.n_atoms} atoms, {self.n_bonds} bonds)"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _parse_bracket(content: str, pos: int):
    m = _BRACKET_RE.match(content)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom [{content}]", pos)
    iso_s, sym, chiral, h_s, charge_s, cls_s = m.groups()
    aromatic = sym[0].islower()
    element = sym.capitalize() if sym != STAR else STAR
    if element != STAR and element not in PERIODIC_TABLE:
        raise SmilesSyntaxError(f"unknown element {sym!r}", pos)
    if aromatic and element != STAR and element not in AROMATIC_ELEMENTS:
        raise SmilesSyntaxError(f"element {element} cannot be aromatic", pos)
    isotope = int(iso_s) if iso_s else None
    if isotope is not None and isotope <= 0:
        raise SmilesSyntaxError("isotope must be positive", pos)
    explicit_h = 0
    if h_s:
        explicit_h = int(h_s[1:]) if len(h_s) > 1 else 1
    charge = 0
    if charge_s:
        if charge_s == "++":
            charge = 2
        elif charge_s == "--":
            charge = -2
        elif len(charge_s) == 1:
            charge = 1 if charge_s == "+" else -1
        else:
            charge = int(charge_s)
    if not -4 <= charge <= 4:
        raise SmilesSyntaxError(f"charge {charge} out of range [-4, 4]", pos)
    atom_class = int(cls_s) if cls_s else None
    return element, charge, explicit_h, aromatic, isotope, chiral, atom_class


# dispatch codes for the scanner; simple atoms carry (element, aromatic)
_SIMPLE_ATOM = {}
for _el in ("B", "C", "N", "O", "P", "S", "F", "I"):
    _SIMPLE_ATOM[_el] = (_el, False)
for _el in AROMATIC_ORGANIC:
    _SIMPLE_ATOM[_el] = (_el.upper(), True)
_SIMPLE_ATOM[STAR] = (STAR, False)
_DIGITS = frozenset("0123456789")


def parse_smiles(text: str, strict: bool = True) -> MolGraph:
    """Parse a SMILES string into a :class:`MolGraph`.

    Atom indices follow first appearance in the input.  ``strict`` turns
    valence violations into :class:`ValenceError`; lenient mode keeps the
    graph and leaves reporting to :func:`validate_valence`.
    """
    if not text or not text.strip():
        raise EmptyInputError("empty SMILES input")
    text = text.strip()

    rows = []                       # (element, charge, eh, arom, iso, chi, cls)
    arom_flags = []
    bond_list = []
    bond_keys = set()

    prev = -1                       # previous atom index, -1 = none
    pending = 0                     # pending bond order, 0 = unset
    pending_dir = None
    branch_stack = []
    open_rings: dict[int, tuple] = {}   # number -> (atom, order, dir, pos)

    def add_bond(a, b, order, direction, pos):
        if a == b:
            raise SmilesSyntaxError("ring bond to the same atom", pos)
        key = (a, b) if a < b else (b, a)
        if key in bond_keys:
            raise SmilesSyntaxError(f"duplicate bond between {a} and {b}", pos)
        bond_keys.add(key)
        bond_list.append((a, b, order, direction))

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        simple = _SIMPLE_ATOM.get(ch)
        if simple is not None:
            if ch == "C" and i + 1 < n and text[i + 1] == "l":
                sym, ar = "Cl", False
                i += 2
            elif ch == "B" and i + 1 < n and text[i + 1] == "r":
                sym, ar = "Br", False
                i += 2
            else:
                sym, ar = simple
                i += 1
            idx = len(rows)
            rows.append((sym, 0, None, ar, None, None, None))
            arom_flags.append(ar)
            if prev >= 0:
                order = pending or (AROMATIC_BOND
                                    if arom_flags[prev] and ar else SINGLE)
                add_bond(prev, idx, order, pending_dir, i)
            pending = 0
            pending_dir = None
            prev = idx
        elif ch in _DIGITS or ch == "%":
            if prev < 0:
                raise SmilesSyntaxError("ring closure before any atom", i)
            if ch == "%":
                if i + 2 >= n or not text[i + 1: i + 3].isdigit():
                    raise SmilesSyntaxError("'%' needs two digits", i)
                num = int(text[i + 1: i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in open_rings:
                o_atom, o_order, o_dir, _o_pos = open_rings.pop(num)
                if o_order and pending and o_order != pending:
                    raise SmilesSyntaxError(
                        f"ring {num} bond symbols disagree", i)
                order = o_order or pending
                if order == 0:
                    order = (AROMATIC_BOND
                             if arom_flags[o_atom] and arom_flags[prev]
                             else SINGLE)
                direction = o_dir
                if direction is None and pending_dir is not None:
                    direction = "/" if pending_dir == "\\" else "\\"
                add_bond(o_atom, prev, order, direction, i)
            else:
                open_rings[num] = (prev, pending, pending_dir, i)
            pending = 0
            pending_dir = None
        elif ch == "(":
            if prev < 0:
                raise SmilesSyntaxError("branch before any atom", i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched ')'", i)
            if pending:
                raise SmilesSyntaxError("dangling bond before ')'", i)
            prev = branch_stack.pop()
            i += 1
        elif ch in _BOND_CHARS:
            if pending:
                raise SmilesSyntaxError("two bond symbols in a row", i)
            if prev < 0:
                raise SmilesSyntaxError("bond symbol before any atom", i)
            pending = _BOND_CHARS[ch]
            if ch == "/" or ch == "\\":
                pending_dir = ch
            i += 1
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError("unclosed bracket atom", i)
            row = _parse_bracket(text[i + 1: end], i)
            idx = len(rows)
            rows.append(row)
            arom_flags.append(row[3])
            if prev >= 0:
                order = pending or (AROMATIC_BOND
                                    if arom_flags[prev] and row[3] else SINGLE)
                add_bond(prev, idx, order, pending_dir, i)
            pending = 0
            pending_dir = None
            prev = idx
            i = end + 1
        elif ch == ".":
            if pending:
                raise SmilesSyntaxError("bond symbol before '.'", i)
            if branch_stack:
                raise SmilesSyntaxError("'.' inside a branch", i)
            prev = -1
            i += 1
        else:
            raise SmilesSyntaxError(f"unexpected character {ch!r}", i)

    if branch_stack:
        raise SmilesSyntaxError("unclosed branch", n)
    if pending:
        raise SmilesSyntaxError("dangling bond at end of input", n)
    if open_rings:
        num, (_a, _o, _d, pos) = next(iter(open_rings.items()))
        raise SmilesSyntaxError(f"dangling ring closure {num}", pos)
    if not rows:
        raise EmptyInputError("no atoms in input")

    cols = list(zip(*rows))
    g = MolGraph(list(cols[0]), list(cols[1]), list(cols[2]), list(cols[3]),
                 list(cols[4]), list(cols[5]), list(cols[6]), bond_list)
    if "." not in text:
        g.__dict__["_single_fragment"] = True
    if strict:
        violations = validate_valence(g)
        if violations:
            raise ValenceError("; ".join(str(v) for v in violations))
    return g


# ---------------------------------------------------------------------------
# valence
# ---------------------------------------------------------------------------


def validate_valence(g: MolGraph) -> list[ValenceViolation]:
    """Report every non-star atom whose bonding exceeds the valence table.

    Aromatic bonds are counted as one bond each here, which keeps fused
    aromatic junctions and lone-pair heteroaromatics (furan oxygen) clean
    without aromaticity perception.
    """
    sums = [0] * g.n_atoms
    for a, b, order, _d in g.bond_list:
        w = 1 if order == AROMATIC_BOND else order
        sums[a] += w
        sums[b] += w
    out = []
    for i, el in enumerate(g.element):
        if el == STAR:
            continue
        allowed = max_valence(el, g.charge[i])
        if allowed is None:
            continue
        eh = g.explicit_h[i] or 0
        if sums[i] + eh > allowed:
            out.append(ValenceViolation(i, el, float(sums[i]), eh, allowed))
    return out


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _atom_token(g: MolGraph, i: int) -> str:
    el = g.element[i]
    arom = g.aromatic[i]
    needs_bracket = (
        g.charge[i] != 0 or g.explicit_h[i] is not None
        or g.isotope[i] is not None or g.chiral[i] is not None
        or g.atom_class[i] is not None
        or (el != STAR and not arom and el not in ORGANIC_SUBSET)
        or (arom and el.lower() not in AROMATIC_ORGANIC and el != STAR))
    sym = el.lower() if arom and el != STAR else el
    if not needs_bracket:
        return sym
    parts = ["["]
    if g.isotope[i] is not None:
        parts.append(str(g.isotope[i]))
    parts.append(sym)
    if g.chiral[i]:
        parts.append(g.chiral[i])
    eh = g.explicit_h[i]
    if eh:
        parts.append("H" if eh == 1 else f"H{eh}")
    ch = g.charge[i]
    if ch:
        sign = "+" if ch > 0 else "-"
        parts.append(sign if abs(ch) == 1 else f"{sign}{abs(ch)}")
    if g.atom_class[i] is not None:
        parts.append(f":{g.atom_class[i]}")
    parts.append("]")
    return "".join(parts)


_atom_token_cache: dict[tuple, str] = {}

# bare tokens for undecorated atoms, keyed (element, aromatic)
_PLAIN_TOKEN = {(el, False): el for el in ORGANIC_SUBSET | {STAR}}
_PLAIN_TOKEN.update({(s.capitalize(), True): s for s in AROMATIC_ORGANIC})


def _atom_tokens(g: MolGraph) -> list[str]:
    cache = _atom_token_cache
    plain = _PLAIN_TOKEN
    element, charge, eh = g.element, g.charge, g.explicit_h
    arom, iso, chi, acl = g.aromatic, g.isotope, g.chiral, g.atom_class
    out = []
    for i in range(g.n_atoms):
        if (charge[i] == 0 and eh[i] is None and iso[i] is None
                and chi[i] is None and acl[i] is None):
            tok = plain.get((element[i], arom[i]))
            if tok is not None:
                out.append(tok)
                continue
        key = (element[i], charge[i], eh[i], arom[i], iso[i], chi[i], acl[i])
        tok = cache.get(key)
        if tok is None:
            tok = _atom_token(g, i)
            if len(cache) < 65536:
                cache[key] = tok
        out.append(tok)
    return out


_BOND_TOKEN_TABLE = {}
for _ab in (False, True):
    _BOND_TOKEN_TABLE[(SINGLE, None, _ab)] = ("-", "-") if _ab else ("", "")
    _BOND_TOKEN_TABLE[(DOUBLE, None, _ab)] = ("=", "=")
    _BOND_TOKEN_TABLE[(TRIPLE, None, _ab)] = ("#", "#")
    _BOND_TOKEN_TABLE[(AROMATIC_BOND, None, _ab)] = ("", "") if _ab else (":", ":")
    _BOND_TOKEN_TABLE[(SINGLE, "/", _ab)] = ("/", "\\")
    _BOND_TOKEN_TABLE[(SINGLE, "\\", _ab)] = ("\\", "/")


_EMPTY_PAIR = ("", "")
_DASH_PAIR = ("-", "-")


def _bond_tokens(g: MolGraph) -> list[tuple[str, str]]:
    """Per bond: serialization prefix when traversed a->b and b->a."""
    arom = g.aromatic
    table = _BOND_TOKEN_TABLE
    return [(_DASH_PAIR if arom[a] and arom[b] else _EMPTY_PAIR)
            if (order == SINGLE and direction is None)
            else table[(order, direction, arom[a] and arom[b])]
            for a, b, order, direction in g.bond_list]


def _other_end(g: MolGraph, bi: int, u: int) -> int:
    a, b, _o, _d = g.bond_list[bi]
    return b if a == u else a


def _write_py(g: MolGraph, component_roots, key=None) -> tuple[str, list[int]]:
    """Pure-Python serializer; components start at the given roots,
    neighbors follow ascending ``key`` (atom index when None).

    Returns the string and the emission order (old atom index per output
    position).
    """
    n = g.n_atoms
    bond_list = g.bond_list
    adj = g.adj
    atom_tok = _atom_tokens(g)
    bond_tok = _bond_tokens(g)
    visited = [False] * n
    visit_pos = [0] * n
    tree_bond = [-1] * n
    children: list = [None] * n
    ring_at: list = [None] * n
    emit_order: list[int] = []
    pieces: list[str] = []

    for root in component_roots:
        if visited[root]:
            continue
        # pass 1: DFS preorder; classify tree edges and ring closures
        used_bond = set()
        stack = [(root, -1)]
        order_local: list[int] = []
        while stack:
            u, via = stack.pop()
            if visited[u]:
                continue
            visited[u] = True
            visit_pos[u] = len(order_local)
            order_local.append(u)
            if via >= 0:
                tree_bond[u] = via
                used_bond.add(via)
            if key is None:
                nbrs = sorted(adj[u])
            else:
                nbrs = sorted(((key[v], v, bi) for v, bi in adj[u]))
                nbrs = [(v, bi) for _k, v, bi in nbrs]
            kids = []
            for v, bi in nbrs:
                if bi in used_bond:
                    continue
                if visited[v]:
                    used_bond.add(bi)
                    lst = ring_at[u]
                    if lst is None:
                        ring_at[u] = [bi]
                    else:
                        lst.append(bi)
                    lst = ring_at[v]
                    if lst is None:
                        ring_at[v] = [bi]
                    else:
                        lst.append(bi)
                else:
                    kids.append((v, bi))
            children[u] = kids
            for v, bi in reversed(kids):
                stack.append((v, bi))

        digit_of: dict[int, int] = {}
        free = list(range(99, 0, -1))
        out: list[str] = []
        emit_stack: list = [(root, "")]
        while emit_stack:
            item = emit_stack.pop()
            if type(item) is str:
                out.append(item)
                continue
            u, prefix = item
            out.append(prefix)
            out.append(atom_tok[u])
            emit_order.append(u)
            rbonds = ring_at[u]
            if rbonds:
                pos_u = visit_pos[u]
                opens = []
                closes = []
                for bi in rbonds:
                    a, b, _o, _d = bond_list[bi]
                    other = b if a == u else a
                    if visit_pos[other] > pos_u:
                        opens.append((visit_pos[other], bi))
                    else:
                        closes.append((visit_pos[other], bi))
                opens.sort()
                closes.sort()
                for _p, bi in opens:
                    d = free.pop()
                    digit_of[bi] = d
                    out.append(bond_tok[bi][0 if bond_list[bi][0] == u else 1])
                    out.append(str(d) if d < 10 else f"%{d:02d}")
                for _p, bi in closes:
                    d = digit_of.pop(bi)
                    free.append(d)
                    free.sort(reverse=True)
                    out.append(str(d) if d < 10 else f"%{d:02d}")
            kids = [kv for kv in children[u] if tree_bond[kv[0]] == kv[1]]
            if kids:
                last_v, last_bi = kids[-1]
                emit_stack.append(
                    (last_v, bond_tok[last_bi][0 if bond_list[last_bi][0] == u else 1]))
                for v, bi in reversed(kids[:-1]):
                    emit_stack.append(")")
                    emit_stack.append(
                        (v, bond_tok[bi][0 if bond_list[bi][0] == u else 1]))
                    emit_stack.append("(")
        pieces.append("".join(out))

    return ".".join(pieces), emit_order


def _write_cy(g: MolGraph, component_roots, key=None) -> tuple[str, list[int]]:
    """Compiled serializer: same contract as :func:`_write_py`."""
    adj_start, adj_flat, _codes, adj_bond = g.flat_adjacency
    atom_toks, bond_fwd, bond_rev, bond_a = g.writer_tables
    if key is None or isinstance(key, array.array):
        key_arr = key
    else:
        key_arr = array.array("l", key)
    visited = bytearray(g.n_atoms)
    emit_order: list[int] = []
    pieces = []
    for root in component_roots:
        if visited[root]:
            continue
        pieces.append(kernels.write_component(
            root, adj_start, adj_flat, adj_bond, key_arr, bond_a,
            atom_toks, bond_fwd, bond_rev, visited, emit_order))
    return ".".join(pieces), emit_order


def _write(g: MolGraph, component_roots, key=None) -> tuple[str, list[int]]:
    if kernels.write_component is not None:
        return _write_cy(g, component_roots, key)
    return _write_py(g, component_roots, key)


def write_smiles(g: MolGraph, root: int = 0) -> str:
    """Deterministic depth-first serialization from ``root``.

    Branches follow ascending neighbor atom index; extra fragments follow
    the root's fragment ordered by their smallest atom index, each rooted
    at its smallest atom.
    """
    if not 0 <= root < g.n_atoms:
        raise IndexError(f"root {root} out of range for {g.n_atoms} atoms")
    roots = [root]
    if len(g.components) > 1:
        roots += [comp[0] for comp in g.components if root not in comp]
    return _write(g, roots)[0]


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------

_invariant_cache: dict[tuple, int] = {}


def initial_invariants(g: MolGraph, colors=None):
    """Seed hash per atom: element, charge, degree, aromatic, star flag,
    explicit H count, plus an optional caller color string."""
    out = array.array("Q", bytes(8 * g.n_atoms))
    cache = _invariant_cache
    starts = g.flat_adjacency[0]
    for i in range(g.n_atoms):
        key = (g.element[i], g.charge[i], starts[i + 1] - starts[i],
               g.aromatic[i], g.explicit_h[i],
               None if colors is None else colors[i])
        h = cache.get(key)
        if h is None:
            el, ch, deg, ar, eh, color = key
            s = (f"{el}|{ch}|{deg}|{int(ar)}|{int(el == STAR)}|"
                 f"{-1 if eh is None else eh}")
            if color is not None:
                s += f"|{color}"
            h = kernels.fnv1a64(s.encode())
            if len(cache) < 65536:
                cache[key] = h
        out[i] = h
    return out


def canonical_ranks(g: MolGraph, colors=None) -> list[int]:
    """Permutation-invariant discrete atom ranking."""
    adj_start, adj_flat, bond_codes, _ids = g.flat_adjacency
    return kernels.canonical_ranks(g.n_atoms, adj_start, adj_flat,
                                   bond_codes, initial_invariants(g, colors))


def canonical_smiles_with_order(g: MolGraph, colors=None) -> tuple[str, list[int]]:
    """Canonical serialization plus the emission order (old index per
    output position); the inverse permutation remaps atom indices."""
    ranks = canonical_ranks(g, colors)
    if g.__dict__.get("_single_fragment") or len(g.components) == 1:
        roots = [ranks.index(0)]
    else:
        comp_roots = []
        for comp in g.components:
            local_root = min(comp, key=ranks.__getitem__)
            comp_roots.append((ranks[local_root], local_root))
        comp_roots.sort()
        roots = [r for _rank, r in comp_roots]
    return _write(g, roots, key=ranks)


def canonical_smiles(g: MolGraph) -> str:
    """Unique serialization per isomorphism class: neighborhood-invariant
    refinement ranking, written from the rank-0 atom with branches in rank
    order."""
    return canonical_smiles_with_order(g)[0]


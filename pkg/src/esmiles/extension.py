"""The extension layer: ``SMILES<sep>EXTENSION`` documents.

An extension is a sequence of XML-like elements annotating the molecule:
``<a>ATOM_INDEX:NAME</a>`` marks a named substituent on an atom (usually a
``*`` pseudo-atom), ``<r>RING_INDEX:NAME</r>`` a group attached somewhere
on a ring, and ``<c>CIRCLE_INDEX:NAME</c>`` an abstract (drawn-as-circle)
ring.  ``NAME`` may be the connection-point token ``<dum>`` and may carry
a ``?label`` repeat suffix (``<a>1:R[5]?n</a>``).

Ring indices count the deterministic SSSR ordered by (smallest member
atom, ring size).  Abstract rings bind to the ``*`` atoms not consumed by
substituent entries, in ascending atom-index order; circle indices count
``<c>`` elements from zero in document order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property

from esmiles.errors import (
    AnnotationIndexError,
    EmptyInputError,
    SmilesSyntaxError,
)
from esmiles.molgraph import (
    MolGraph,
    canonical_smiles_with_order,
    parse_smiles,
    write_smiles,
)

SEP = "<sep>"
DUM = "<dum>"

SUBSTITUENT = "substituent"
RING_ATTACHMENT = "ring-attachment"
ABSTRACT_RING = "abstract-ring"

_KIND_BY_TAG = {"a": SUBSTITUENT, "r": RING_ATTACHMENT, "c": ABSTRACT_RING}
_TAG_BY_KIND = {v: k for k, v in _KIND_BY_TAG.items()}
_KIND_ORDER = {SUBSTITUENT: 0, RING_ATTACHMENT: 1, ABSTRACT_RING: 2}

_ELEMENT_RE = re.compile(r"<([arc])>(.*?)</\1>", re.DOTALL)


@dataclass(frozen=True)
class Annotation:
    """One extension element.

    ``index`` is an atom index for substituents, a ring index for ring
    attachments and a circle index for abstract rings.  ``bound_atom`` is
    the resolved ``*`` atom of an abstract ring (None when unresolvable).
    """

    kind: str
    index: int
    group_name: str
    repeat: str | None = None
    bound_atom: int | None = None

    def payload(self) -> str:
        text = f"{self.index}:{self.group_name}"
        if self.repeat is not None:
            text += f"?{self.repeat}"
        return text


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    annotation: Annotation | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ESmilesDoc:
    """A molecule plus its ordered extension annotations."""

    graph: MolGraph
    annotations: tuple[Annotation, ...] = ()
    raw: str = field(default="", compare=False)

    @property
    def has_extension(self) -> bool:
        return bool(self.annotations)

    @cached_property
    def smiles_part(self) -> str:
        if self.raw:
            return self.raw.split(SEP, 1)[0]
        return write_smiles(self.graph, 0)

    def __eq__(self, other):
        if not isinstance(other, ESmilesDoc):
            return NotImplemented
        return (self.graph == other.graph
                and sorted(self.annotations, key=_sort_key)
                == sorted(other.annotations, key=_sort_key))

    def __hash__(self):
        return hash((self.graph,
                     tuple(sorted(self.annotations, key=_sort_key))))


def _sort_key(a: Annotation):
    return (a.index, _KIND_ORDER[a.kind], a.group_name, a.repeat or "")


def split_esmiles(text: str) -> tuple[str, str | None]:
    """Split at the first ``<sep>``; extension is None when absent."""
    if SEP in text:
        smiles, ext = text.split(SEP, 1)
        return smiles, ext
    return text, None


def _parse_extension(ext: str, offset: int) -> list[tuple[str, str, int]]:
    """Extension text -> list of (tag, payload, position) triples."""
    out = []
    pos = 0
    while pos < len(ext):
        m = _ELEMENT_RE.match(ext, pos)
        if m is None:
            raise SmilesSyntaxError(
                f"malformed extension element near {ext[pos:pos + 20]!r}",
                offset + pos)
        out.append((m.group(1), m.group(2), offset + pos))
        pos = m.end()
    return out


def _parse_payload(tag: str, payload: str, pos: int, circle_counter: int):
    head, sep, rest = payload.partition(":")
    if not sep:
        raise SmilesSyntaxError(f"missing ':' in <{tag}> payload", pos)
    if not head.isdigit():
        raise SmilesSyntaxError(f"bad index {head!r} in <{tag}> payload", pos)
    index = int(head)
    name, qmark, repeat = rest.partition("?")
    if not name:
        raise SmilesSyntaxError(f"empty group name in <{tag}> payload", pos)
    if qmark and (not repeat or "?" in repeat):
        raise SmilesSyntaxError(f"bad repeat suffix in <{tag}> payload", pos)
    return Annotation(_KIND_BY_TAG[tag], index, name,
                      repeat if qmark else None)


def resolve_abstract_rings(graph: MolGraph,
                           annotations: list[Annotation]) -> list[Annotation]:
    """Bind ``<c>`` entries to the stars not consumed by substituents,
    ascending atom index, in circle-index order."""
    consumed = {a.index for a in annotations if a.kind == SUBSTITUENT}
    free_stars = [i for i in graph.star_indices if i not in consumed]
    circles = sorted((a for a in annotations if a.kind == ABSTRACT_RING),
                     key=lambda a: a.index)
    binding = {}
    for slot, ann in enumerate(circles):
        binding[id(ann)] = free_stars[slot] if slot < len(free_stars) else None
    return [replace(a, bound_atom=binding[id(a)])
            if a.kind == ABSTRACT_RING else a
            for a in annotations]


def parse_esmiles(text: str, strict: bool = True) -> ESmilesDoc:
    """Parse an E-SMILES string.

    Strict mode propagates valence errors from the molecule part and
    rejects out-of-range annotation indices; lenient mode keeps everything
    for :func:`validate_esmiles` to report.
    """
    if not text or not text.strip():
        raise EmptyInputError("empty E-SMILES input")
    text = text.strip()
    smiles, ext = split_esmiles(text)
    if not smiles:
        raise SmilesSyntaxError("missing SMILES part before <sep>", 0)
    graph = parse_smiles(smiles, strict=strict)
    annotations: list[Annotation] = []
    if ext is not None:
        circle_count = 0
        for tag, payload, pos in _parse_extension(ext, len(smiles) + len(SEP)):
            ann = _parse_payload(tag, payload, pos, circle_count)
            if tag == "c":
                circle_count += 1
            annotations.append(ann)
        if strict:
            for ann in annotations:
                if ann.kind == SUBSTITUENT and ann.index >= graph.n_atoms:
                    raise AnnotationIndexError(
                        f"substituent atom index {ann.index} out of range "
                        f"({graph.n_atoms} atoms)")
                if ann.kind == RING_ATTACHMENT and ann.index >= len(graph.rings):
                    raise AnnotationIndexError(
                        f"ring index {ann.index} out of range "
                        f"({len(graph.rings)} rings)")
        annotations = resolve_abstract_rings(graph, annotations)
    return ESmilesDoc(graph, tuple(annotations), raw=text)


def validate_esmiles(doc: ESmilesDoc, mode: str = "strict") -> list[Violation]:
    """Check annotation consistency; empty list means valid.

    Structural checks (index ranges, circle ordering, repeat placement)
    apply in both modes; star coverage and the substituent-on-star rule
    are strict-mode only.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown mode {mode!r}")
    g = doc.graph
    out = []
    stars = set(g.star_indices)
    coverage: dict[int, int] = {}
    circle_seen = 0
    for ann in doc.annotations:
        if ann.kind == SUBSTITUENT:
            if ann.index >= g.n_atoms:
                out.append(Violation(
                    "substituent-index-range",
                    f"atom index {ann.index} out of range ({g.n_atoms} atoms)",
                    ann))
            else:
                if ann.index in stars:
                    coverage[ann.index] = coverage.get(ann.index, 0) + 1
                elif mode == "strict":
                    out.append(Violation(
                        "substituent-not-star",
                        f"atom {ann.index} is not a '*' pseudo-atom", ann))
        elif ann.kind == RING_ATTACHMENT:
            if ann.index >= len(g.rings):
                out.append(Violation(
                    "ring-index-range",
                    f"ring index {ann.index} out of range "
                    f"({len(g.rings)} rings)", ann))
        else:
            if ann.index != circle_seen:
                out.append(Violation(
                    "abstract-ring-order",
                    f"circle index {ann.index} out of document order "
                    f"(expected {circle_seen})", ann))
            circle_seen += 1
            if ann.bound_atom is not None:
                coverage[ann.bound_atom] = coverage.get(ann.bound_atom, 0) + 1
            elif mode == "strict":
                out.append(Violation(
                    "abstract-ring-unbound",
                    f"no free '*' atom left for circle {ann.index}", ann))
            if ann.repeat is not None:
                out.append(Violation(
                    "repeat-on-abstract-ring",
                    "abstract rings cannot carry a repeat suffix", ann))
    if mode == "strict":
        for idx in sorted(stars):
            hits = coverage.get(idx, 0)
            if hits == 0:
                out.append(Violation(
                    "star-uncovered",
                    f"'*' atom {idx} has no substituent or abstract-ring "
                    f"annotation"))
            elif hits > 1:
                out.append(Violation(
                    "star-multi-covered",
                    f"'*' atom {idx} is annotated {hits} times"))
    return out


def _serialize_annotations(annotations) -> str:
    parts = []
    for ann in sorted(annotations, key=_sort_key):
        tag = _TAG_BY_KIND[ann.kind]
        parts.append(f"<{tag}>{ann.payload()}</{tag}>")
    return "".join(parts)


def write_esmiles(doc: ESmilesDoc) -> str:
    """Serialize: molecule from atom 0, annotations sorted by
    (index, substituent < ring-attachment < abstract-ring, name).  A doc
    without annotations becomes a plain SMILES string."""
    smiles = write_smiles(doc.graph, 0)
    if not doc.annotations:
        return smiles
    return smiles + SEP + _serialize_annotations(doc.annotations)


def canonical_esmiles(doc: ESmilesDoc) -> str:
    """Canonical string: one output per (molecule, annotation set) class.

    The molecule is canonicalized with annotated atoms colored by their
    annotation content, so symmetric positions carrying different group
    names cannot swap; substituent indices and abstract-ring bindings are
    remapped through the atom permutation, ring indices are recomputed on
    the canonical graph's ring list, and circle indices are renumbered by
    ascending bound atom.
    """
    g = doc.graph
    if not doc.annotations:
        return canonical_smiles_with_order(g)[0]

    colors: list = [None] * g.n_atoms
    for ann in doc.annotations:
        atom = None
        if ann.kind == SUBSTITUENT and ann.index < g.n_atoms:
            atom = ann.index
        elif ann.kind == ABSTRACT_RING and ann.bound_atom is not None:
            atom = ann.bound_atom
        if atom is not None:
            tag = f"{_KIND_ORDER[ann.kind]}:{ann.group_name}:{ann.repeat or ''}"
            colors[atom] = tag if colors[atom] is None else colors[atom] + "|" + tag

    smiles, emit_order = canonical_smiles_with_order(g, colors)
    new_index = [0] * g.n_atoms
    for new_pos, old in enumerate(emit_order):
        new_index[old] = new_pos

    new_graph = parse_smiles(smiles, strict=False)
    remapped: list[Annotation] = []
    circles: list[Annotation] = []
    for ann in doc.annotations:
        if ann.kind == SUBSTITUENT:
            remapped.append(replace(ann, index=new_index[ann.index]))
        elif ann.kind == RING_ATTACHMENT:
            old_ring = g.rings[ann.index]
            target = sorted(new_index[a] for a in old_ring)
            new_rings = new_graph.rings
            try:
                ring_idx = new_rings.index(target)
            except ValueError:
                ring_idx = _best_ring_match(new_rings, target, ann.index)
            remapped.append(replace(ann, index=ring_idx))
        else:
            bound = (None if ann.bound_atom is None
                     else new_index[ann.bound_atom])
            circles.append(replace(ann, bound_atom=bound))
    circles.sort(key=lambda a: (a.bound_atom if a.bound_atom is not None
                                else len(new_index), a.group_name))
    for slot, ann in enumerate(circles):
        remapped.append(replace(ann, index=slot))

    if not remapped:
        return smiles
    return smiles + SEP + _serialize_annotations(remapped)


def _best_ring_match(rings: list[list[int]], target: list[int],
                     fallback: int) -> int:
    """Closest ring by member overlap when the SSSR basis shifted."""
    if not rings:
        return fallback
    tset = set(target)
    scored = [(-len(tset & set(r)), i) for i, r in enumerate(rings)]
    scored.sort()
    return scored[0][1]

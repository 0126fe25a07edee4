"""Formal concept analysis over transactions.

Object and attribute sets are held as Python int bitsets: bit ``i`` of an
extent marks object ``i``; bit ``j`` of an intent marks attribute ``j``.
The public query functions accept and return ordinary sets of indices.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import DomainError, LatticeBoundError
from .fmt import fixed
from .rules import AssociationRule, RuleConstraints

DEFAULT_MAX_ATTRIBUTES = 64


def bits_of(indices: Iterable[int]) -> int:
    b = 0
    for i in indices:
        b |= 1 << i
    return b


def indices_of(bits: int) -> frozenset[int]:
    return frozenset(i for i, ch in enumerate(reversed(bin(bits)[2:])) if ch == "1")


def _sorted_indices(bits: int) -> tuple[int, ...]:
    return tuple(sorted(indices_of(bits)))


class FormalContext:
    """Objects x attributes incidence, stored row-wise and column-wise."""

    def __init__(self, objects: Sequence, attributes: Sequence, rows: Sequence[Iterable[int]]):
        if len(rows) != len(objects):
            raise ValueError("incidence rows do not match the object count")
        self.objects = list(objects)
        self.attributes = list(attributes)
        m = len(self.attributes)
        self.rows = []
        for r in rows:
            b = bits_of(r)
            if b >> m:
                raise ValueError("incidence refers to an attribute outside the context")
            self.rows.append(b)
        self.cols = [0] * m
        for g, b in enumerate(self.rows):
            for j in indices_of(b):
                self.cols[j] |= 1 << g
        self.all_objects = (1 << len(self.objects)) - 1
        self.all_attributes = (1 << m) - 1

    @classmethod
    def from_transactions(cls, transactions, attributes: Sequence[int] | None = None) -> "FormalContext":
        """Objects are transactions; attributes are item ids (default: every
        item that occurs, ascending)."""
        txs = list(transactions)
        item_lists = [tuple(getattr(t, "items", t)) for t in txs]
        if attributes is None:
            attributes = sorted(set().union(*map(set, item_lists))) if item_lists else []
        pos = {a: j for j, a in enumerate(attributes)}
        rows = [[pos[x] for x in items if x in pos] for items in item_lists]
        objects = [getattr(t, "id", g) for g, t in enumerate(txs)]
        return cls(objects, attributes, rows)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def has(self, g: int, m: int) -> bool:
        return bool(self.rows[g] >> m & 1)

    # bitset derivations
    def intent_of(self, extent: int) -> int:
        out = 0
        for j, col in enumerate(self.cols):
            if col & extent == extent:
                out |= 1 << j
        return out

    def extent_of(self, intent: int) -> int:
        ext = self.all_objects
        j = 0
        while intent:
            if intent & 1:
                ext &= self.cols[j]
            intent >>= 1
            j += 1
        return ext

    def close(self, intent: int) -> int:
        return self.intent_of(self.extent_of(intent))

    def _check(self, idx: Iterable[int], bound: int, what: str) -> list[int]:
        idx = list(idx)
        for i in idx:
            if not 0 <= i < bound:
                raise DomainError(f"{what} index {i} out of range")
        return idx


def derive_objects_to_attrs(context: FormalContext, objs: Iterable[int]) -> frozenset[int]:
    objs = context._check(objs, context.n_objects, "object")
    return indices_of(context.intent_of(bits_of(objs)))


def derive_attrs_to_objects(context: FormalContext, attrs: Iterable[int]) -> frozenset[int]:
    attrs = context._check(attrs, context.n_attributes, "attribute")
    return indices_of(context.extent_of(bits_of(attrs)))


def closure(context: FormalContext, attrs: Iterable[int]) -> frozenset[int]:
    return derive_objects_to_attrs(context, derive_attrs_to_objects(context, attrs))


@dataclass(frozen=True)
class FormalConcept:
    extent_bits: int
    intent_bits: int
    n_objects: int

    @cached_property
    def extent(self) -> frozenset[int]:
        return indices_of(self.extent_bits)

    @cached_property
    def intent(self) -> frozenset[int]:
        return indices_of(self.intent_bits)

    @property
    def extent_size(self) -> int:
        return self.extent_bits.bit_count()

    @property
    def extent_fraction(self) -> Fraction:
        return Fraction(self.extent_size, self.n_objects)

    @property
    def extent_percent(self) -> Fraction:
        return self.extent_fraction * 100

    def leq(self, other: "FormalConcept") -> bool:
        return self.extent_bits & other.extent_bits == self.extent_bits


@dataclass
class ConceptLattice:
    context: FormalContext
    concepts: list[FormalConcept]
    cover_edges: list[tuple[int, int]]  # (lower, upper)
    top: int
    bottom: int
    _by_intent: dict[int, int] = field(default_factory=dict, repr=False)
    _upper: list[list[int]] = field(default_factory=list, repr=False)
    _lower: list[list[int]] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._by_intent = {c.intent_bits: i for i, c in enumerate(self.concepts)}
        self._upper = [[] for _ in self.concepts]
        self._lower = [[] for _ in self.concepts]
        for lo, up in self.cover_edges:
            self._upper[lo].append(up)
            self._lower[up].append(lo)

    def __len__(self) -> int:
        return len(self.concepts)

    def index_of_intent(self, intent_bits: int) -> int:
        return self._by_intent[intent_bits]

    def upper_covers(self, c: int) -> list[int]:
        return list(self._upper[c])

    def lower_covers(self, c: int) -> list[int]:
        return list(self._lower[c])

    def intent_items(self, c: int) -> list:
        """Attribute labels (item ids) of a concept's intent, ascending."""
        return [self.context.attributes[j] for j in sorted(self.concepts[c].intent)]


def next_closure_intents(context: FormalContext) -> list[int]:
    """All closed intents in lectic order (canonical-closure enumeration)."""
    m = context.n_attributes
    a = context.close(0)
    out = [a]
    while a != context.all_attributes:
        for i in range(m - 1, -1, -1):
            bit = 1 << i
            if a & bit:
                continue
            lower = bit - 1
            b = context.close((a & lower) | bit)
            if b & lower == a & lower:
                a = b
                break
        else:
            break
        out.append(a)
    return out


def _lower_cover_intents(context: FormalContext, intent: int) -> set[int]:
    m = context.n_attributes
    cands = set()
    for j in range(m):
        if not intent >> j & 1:
            cands.add(context.close(intent | (1 << j)))
    # lower covers are the minimal candidate intents (maximal extents)
    return {x for x in cands if not any(y != x and y & x == y for y in cands)}


def build_lattice(context: FormalContext, max_attributes: int = DEFAULT_MAX_ATTRIBUTES) -> ConceptLattice:
    """Enumerate every formal concept and the Hasse covering relation.

    Concepts are ordered by extent size (descending), then by intent as a
    sorted tuple of attribute indices.
    """
    if context.n_objects == 0 or context.n_attributes == 0:
        raise DomainError("lattice needs at least one object and one attribute")
    if context.n_attributes > max_attributes:
        raise LatticeBoundError(
            f"context has {context.n_attributes} attributes (limit {max_attributes}); filter with a semantic frame first"
        )
    intents = next_closure_intents(context)
    concepts = [FormalConcept(context.extent_of(b), b, context.n_objects) for b in intents]
    concepts.sort(key=lambda c: (-c.extent_size, _sorted_indices(c.intent_bits)))
    index = {c.intent_bits: i for i, c in enumerate(concepts)}
    edges = []
    for up, c in enumerate(concepts):
        for low_intent in _lower_cover_intents(context, c.intent_bits):
            edges.append((index[low_intent], up))
    edges.sort()
    return ConceptLattice(context, concepts, edges, top=0, bottom=len(concepts) - 1)


def _check_concept(lattice: ConceptLattice, c: int) -> None:
    if not 0 <= c < len(lattice.concepts):
        raise DomainError(f"concept index {c} out of range")


def _walk(start: int, step: Callable[[int], list[int]]) -> frozenset[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in step(queue.popleft()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


def order_ideal(lattice: ConceptLattice, c: int) -> frozenset[int]:
    """Every concept below ``c`` in the lattice, ``c`` included."""
    _check_concept(lattice, c)
    return _walk(c, lattice._lower.__getitem__)


def order_filter(lattice: ConceptLattice, c: int) -> frozenset[int]:
    """Every concept above ``c`` in the lattice, ``c`` included."""
    _check_concept(lattice, c)
    return _walk(c, lattice._upper.__getitem__)


def concept_for_intent(lattice: ConceptLattice, attrs: Iterable[int]) -> FormalConcept:
    return lattice.concepts[concept_index_for_intent(lattice, attrs)]


def concept_index_for_intent(lattice: ConceptLattice, attrs: Iterable[int]) -> int:
    ctx = lattice.context
    attrs = ctx._check(attrs, ctx.n_attributes, "attribute")
    return lattice.index_of_intent(ctx.close(bits_of(attrs)))


def _frequent_attribute_sets(context: FormalContext, min_support: Fraction, max_size: int | None):
    """Depth-first enumeration of attribute sets with |A'|/|G| > min_support."""
    n = context.n_objects
    m = context.n_attributes
    out: list[tuple[tuple[int, ...], int]] = []

    def grow(prefix: tuple[int, ...], ext: int, start: int) -> None:
        for j in range(start, m):
            e = ext & context.cols[j]
            c = e.bit_count()
            if Fraction(c, n) > min_support:
                s = prefix + (j,)
                out.append((s, e))
                if max_size is None or len(s) < max_size:
                    grow(s, e, j + 1)

    grow((), context.all_objects, 0)
    return out


def fca_rules(context: FormalContext, constraints: RuleConstraints = RuleConstraints()) -> list[AssociationRule]:
    """Association rules read directly off the context's derivations.

    Support of A -> B is |(A u B)'| / |G|, confidence |(A u B)'| / |A'|.
    Antecedents with empty derivation are skipped. Items in the returned
    rules are attribute labels, so they compare equal to rules mined from the
    originating transactions.
    """
    if context.n_objects == 0 or context.n_attributes == 0:
        raise DomainError("rules need at least one object and one attribute")
    n = context.n_objects
    labels = context.attributes
    out = []
    for attrs, ext in _frequent_attribute_sets(context, constraints.min_support, None):
        if len(attrs) < 2:
            continue
        both = ext.bit_count()
        for size in range(1, len(attrs)):
            for ante in combinations(attrs, size):
                cons = tuple(j for j in attrs if j not in ante)
                a_lab = tuple(sorted(labels[j] for j in ante))
                c_lab = tuple(sorted(labels[j] for j in cons))
                if not constraints.admits(a_lab, c_lab):
                    continue
                a_ext = context.extent_of(bits_of(ante)).bit_count()
                if a_ext == 0 or Fraction(both, a_ext) < constraints.min_confidence:
                    continue
                c_ext = context.extent_of(bits_of(cons)).bit_count()
                out.append(AssociationRule(a_lab, c_lab, both, a_ext, c_ext, n))
    return out


def _label(lattice: ConceptLattice, c: int, decode) -> str:
    items = lattice.intent_items(c)
    names = sorted(decode(items)) if decode else [str(x) for x in items]
    pct = fixed(lattice.concepts[c].extent_percent, 2)
    return "{" + ", ".join(names) + "}\\n" + pct + "%"


def export_dot(lattice: ConceptLattice, decode=None) -> str:
    lines = ["digraph lattice {", "  rankdir=BT;", "  node [shape=box];"]
    for i in range(len(lattice.concepts)):
        lines.append(f'  c{i} [label="{_label(lattice, i, decode)}"];')
    for lo, up in lattice.cover_edges:
        lines.append(f"  c{lo} -> c{up};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_EDGE_RE = re.compile(r"^\s*c(\d+)\s*->\s*c(\d+)\s*;", re.M)


def parse_dot_edges(dot: str) -> list[tuple[int, int]]:
    return sorted((int(a), int(b)) for a, b in _EDGE_RE.findall(dot))


def concept_record(lattice: ConceptLattice, c: int, decode=None) -> dict:
    con = lattice.concepts[c]
    items = lattice.intent_items(c)
    return {
        "index": c,
        "intent": sorted(decode(items)) if decode else items,
        "extent_size": con.extent_size,
        "extent_percent": float(fixed(con.extent_percent, 2)),
    }


def concepts_to_json(lattice: ConceptLattice, decode=None) -> list[dict]:
    return [concept_record(lattice, i, decode) for i in range(len(lattice.concepts))]


def query_to_json(lattice: ConceptLattice, c: int, mode: str, decode=None) -> dict:
    if mode == "ideal":
        members = order_ideal(lattice, c)
    elif mode == "filter":
        members = order_filter(lattice, c)
    else:
        raise ValueError(f"unknown query mode {mode!r}")
    return {
        "concept": concept_record(lattice, c, decode),
        "mode": mode,
        "members": [
            {"index": i, "intent": concept_record(lattice, i, decode)["intent"]} for i in sorted(members)
        ],
    }


def write_json(path: str | Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")

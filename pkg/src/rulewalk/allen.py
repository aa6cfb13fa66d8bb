"""Allen's thirteen-relation interval algebra over closed integer intervals.

Relation sets are plain ints: a 13-bit mask with one bit per base relation
(EMPTY_SET means inconsistent, FULL_SET means unconstrained).  The algebra
here is extended to degenerate point intervals by classifying with a fixed
branch order: EQUAL, then start-equality (STARTS/STARTED_BY), end-equality
(FINISHES/FINISHED_BY), endpoint adjacency (MEETS/MET_BY), disjointness
(BEFORE/AFTER), and finally containment/overlap.  Under that order a point
never MEETS anything: [3,3] vs [3,5] is STARTS, [5,5] vs [3,5] is FINISHES,
[4,4] vs [3,5] is DURING.

The composition table is a frozen constant; it was produced once by
exhaustive enumeration of integer endpoint triples (see
`enumerate_composition_table`), and the test suite regenerates it the same
way rather than trusting any transcription.
"""
from __future__ import annotations

from enum import IntEnum
from typing import Iterator


class Relation(IntEnum):
    """Base interval relations; adjacent even/odd values are inverse pairs."""

    BEFORE = 0
    AFTER = 1
    MEETS = 2
    MET_BY = 3
    OVERLAPS = 4
    OVERLAPPED_BY = 5
    STARTS = 6
    STARTED_BY = 7
    DURING = 8
    CONTAINS = 9
    FINISHES = 10
    FINISHED_BY = 11
    EQUAL = 12


RelationSet = int

EMPTY_SET: RelationSet = 0
FULL_SET: RelationSet = (1 << 13) - 1

_EVEN_MASK = sum(1 << r for r in range(0, 12, 2))
_ODD_MASK = sum(1 << r for r in range(1, 12, 2))
_EQUAL_BIT = 1 << Relation.EQUAL


def rel_set(*relations: Relation) -> RelationSet:
    """Bitmask holding exactly the given base relations."""
    mask = 0
    for r in relations:
        mask |= 1 << r
    return mask


def members(s: RelationSet) -> tuple[Relation, ...]:
    """Base relations present in `s`, in enum order."""
    return tuple(r for r in Relation if s & (1 << r))


def iter_members(s: RelationSet) -> Iterator[Relation]:
    for r in Relation:
        if s & (1 << r):
            yield r


def inverse(r: Relation) -> Relation:
    """Converse relation: classify(a, b) == inverse(classify(b, a))."""
    if r is Relation.EQUAL:
        return Relation.EQUAL
    return Relation(r ^ 1)


def inverse_set(s: RelationSet) -> RelationSet:
    """Elementwise converse; swaps each even/odd inverse pair of bits."""
    return ((s & _EVEN_MASK) << 1) | ((s & _ODD_MASK) >> 1) | (s & _EQUAL_BIT)


def classify(a, b) -> Relation:
    """The unique base relation holding between intervals `a` and `b`.

    Determined solely by endpoint comparisons; total over all valid
    intervals, degenerate points included.
    """
    if a.start == b.start:
        if a.end == b.end:
            return Relation.EQUAL
        return Relation.STARTS if a.end < b.end else Relation.STARTED_BY
    if a.end == b.end:
        return Relation.FINISHES if a.start > b.start else Relation.FINISHED_BY
    if a.end == b.start:
        return Relation.MEETS
    if b.end == a.start:
        return Relation.MET_BY
    if a.end < b.start:
        return Relation.BEFORE
    if b.end < a.start:
        return Relation.AFTER
    # endpoints pairwise distinct and the intervals overlap
    if a.start < b.start:
        return Relation.CONTAINS if a.end > b.end else Relation.OVERLAPS
    return Relation.DURING if a.end < b.end else Relation.OVERLAPPED_BY


def compose(r1: Relation, r2: Relation) -> RelationSet:
    """All relations r such that A r1 B and B r2 C admit A r C."""
    return COMPOSITION_TABLE[r1][r2]


def compose_sets(s1: RelationSet, s2: RelationSet) -> RelationSet:
    """Union of compose(r1, r2) over the cross product of the two sets."""
    out = 0
    for r1 in iter_members(s1):
        row = COMPOSITION_TABLE[r1]
        for r2 in iter_members(s2):
            out |= row[r2]
            if out == FULL_SET:
                return out
    return out


def intersect(s1: RelationSet, s2: RelationSet) -> RelationSet:
    return s1 & s2


def union(s1: RelationSet, s2: RelationSet) -> RelationSet:
    return s1 | s2


def format_set(s: RelationSet) -> str:
    """Human-readable `{BEFORE,MEETS}` form used in rule files."""
    return "{" + ",".join(r.name for r in iter_members(s)) + "}"


def parse_set(text: str) -> RelationSet:
    """Inverse of `format_set`; raises KeyError on unknown relation names."""
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    if not body:
        return EMPTY_SET
    return rel_set(*(Relation[name.strip()] for name in body.split(",")))


def enumerate_composition_table(max_endpoint: int = 8) -> tuple[tuple[int, ...], ...]:
    """Rebuild the composition table by brute force over integer endpoints.

    Every (A, B, C) triple of intervals with endpoints in [0, max_endpoint]
    contributes classify(A, C) to cell [classify(A, B)][classify(B, C)].
    Nine endpoint values are enough to realise every ordering of the six
    endpoints involved, so the result is exact.
    """
    from .hypergraph import Interval

    intervals = [
        Interval(s, e)
        for s in range(max_endpoint + 1)
        for e in range(s, max_endpoint + 1)
    ]
    table = [[0] * 13 for _ in range(13)]
    pair = {}
    for a in intervals:
        for b in intervals:
            pair[(a, b)] = classify(a, b)
    for a in intervals:
        for b in intervals:
            r1 = pair[(a, b)]
            row = table[r1]
            for c in intervals:
                row[pair[(b, c)]] |= 1 << pair[(a, c)]
    return tuple(tuple(row) for row in table)


# Frozen output of enumerate_composition_table(8); indexed [r1][r2].
COMPOSITION_TABLE: tuple[tuple[int, ...], ...] = (
    (1, 8191, 1, 341, 1, 341, 1, 1, 341, 1, 341, 1, 1),
    (8191, 2, 1322, 2, 1322, 2, 1322, 2, 1322, 2, 2, 2, 2),
    (1, 682, 1, 7168, 1, 336, 4, 2052, 336, 1, 336, 1, 4),
    (2581, 2, 4288, 2, 1312, 2, 1312, 2, 1312, 2, 8, 136, 8),
    (1, 682, 1, 672, 21, 8176, 16, 2576, 336, 2581, 336, 21, 16),
    (2581, 2, 2576, 2, 8176, 42, 1312, 42, 1312, 682, 32, 672, 32),
    (1, 2, 1, 1032, 21, 1312, 64, 4288, 256, 2581, 256, 21, 64),
    (2581, 2, 2576, 8, 2576, 32, 4288, 128, 1312, 512, 40, 512, 128),
    (1, 2, 1, 2, 341, 1322, 256, 1322, 256, 8191, 256, 341, 256),
    (2581, 682, 2576, 672, 2576, 672, 2576, 512, 8176, 512, 672, 512, 512),
    (1, 2, 68, 2, 336, 42, 256, 42, 256, 682, 1024, 7168, 1024),
    (1, 682, 4, 672, 16, 672, 20, 512, 336, 512, 7168, 2048, 2048),
    (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096),
)

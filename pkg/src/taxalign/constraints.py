"""Structural constraints between candidate connections.

A constraint rule is coded by three characters.  The first two give the
recursion scope on the source and target side: ``I`` matches only the
immediate hypernym/hyponym, ``A`` matches any ancestor/descendant.  The
third gives the direction: ``E`` looks upward (hypernyms), ``O`` looks
downward (hyponyms), and ``B`` demands both directions at once.

A rule *supports* a candidate connection (s, t) through every other
candidate connection (s', t') whose endpoints stand in the required
structural relation to s and t in their respective taxonomies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, NamedTuple

from .candidates import CandidateSet
from .errors import ConstraintFormatError
from .taxonomy import ClosureIndex

DEFAULT_S_MAX = 10.0

PACK_PATTERNS = ("II*", "AI*", "IA*", "AA*")


class Scope(Enum):
    IMMEDIATE = "I"
    ANY = "A"


class Direction(Enum):
    HYPERNYM = "E"
    HYPONYM = "O"
    BOTH = "B"


@dataclass(frozen=True)
class ConstraintRule:
    src_scope: Scope
    tgt_scope: Scope
    direction: Direction

    @property
    def code(self) -> str:
        return self.src_scope.value + self.tgt_scope.value + self.direction.value


class Connection(NamedTuple):
    """A candidate link from a source node to one of its target candidates."""

    src: str
    tgt: str


def parse_constraint(code: str) -> ConstraintRule:
    """Decode a three-character rule code such as ``IIE`` or ``aab``."""
    if len(code) != 3:
        raise ConstraintFormatError(f"constraint code must be 3 characters, got {code!r}")
    x, y, z = code.upper()
    try:
        return ConstraintRule(Scope(x), Scope(y), Direction(z))
    except ValueError:
        raise ConstraintFormatError(
            f"invalid constraint code {code!r}: scopes must be I or A, "
            "direction must be E, O or B") from None


@dataclass(frozen=True)
class ConstraintPack:
    """A set of rules applied together, usually the E/O/B triple of one scope pair."""

    rules: tuple[ConstraintRule, ...]
    pattern: str

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.rules)

    def __len__(self) -> int:
        return len(self.rules)


def expand_pack(pattern: str) -> ConstraintPack:
    """Expand ``XY*`` into the rules XYE, XYO, XYB; a full code gives a singleton."""
    cleaned = pattern.strip().upper()
    if len(cleaned) != 3:
        raise ConstraintFormatError(f"pack pattern must be 3 characters, got {pattern!r}")
    if cleaned.endswith("*"):
        rules = tuple(parse_constraint(cleaned[:2] + z) for z in "EOB")
        return ConstraintPack(rules, cleaned)
    return ConstraintPack((parse_constraint(cleaned),), cleaned)


def _up_set(index: ClosureIndex, nid: str, scope: Scope) -> frozenset[str]:
    if scope is Scope.IMMEDIATE:
        return index.hypernyms_of(nid)
    return index.ancestors_of(nid)


def _down_set(index: ClosureIndex, nid: str, scope: Scope) -> frozenset[str]:
    if scope is Scope.IMMEDIATE:
        return index.hyponyms_of(nid)
    return index.descendants_of(nid)


def directional_supporters(rule: ConstraintRule, direction: Direction, conn: Connection,
                           src_index: ClosureIndex, tgt_index: ClosureIndex,
                           cand: CandidateSet) -> frozenset[Connection]:
    """Supporters of ``conn`` looking only up (E) or only down (O).

    For a B rule this evaluates one of its two component directions.
    """
    if direction is Direction.HYPERNYM:
        src_side = _up_set(src_index, conn.src, rule.src_scope)
        tgt_side = _up_set(tgt_index, conn.tgt, rule.tgt_scope)
    else:
        src_side = _down_set(src_index, conn.src, rule.src_scope)
        tgt_side = _down_set(tgt_index, conn.tgt, rule.tgt_scope)
    found = set()
    for s2 in src_side:
        if s2 not in cand:
            continue
        for t2 in tgt_side & cand.candidate_set_of(s2):
            found.add(Connection(s2, t2))
    return frozenset(found)


def supporters(rule: ConstraintRule, conn: Connection, src_index: ClosureIndex,
               tgt_index: ClosureIndex, cand: CandidateSet) -> frozenset[Connection]:
    """Every candidate connection that supports ``conn`` under ``rule``.

    A B rule is satisfied only when both its hypernym-side and hyponym-side
    supporter sets are non-empty; if either side is empty it yields nothing.
    """
    if rule.direction is Direction.BOTH:
        up = directional_supporters(rule, Direction.HYPERNYM, conn, src_index, tgt_index, cand)
        down = directional_supporters(rule, Direction.HYPONYM, conn, src_index, tgt_index, cand)
        if not up or not down:
            return frozenset()
        return up | down
    return directional_supporters(rule, rule.direction, conn, src_index, tgt_index, cand)


def support(pack: ConstraintPack, conn: Connection, weights, src_index: ClosureIndex,
            tgt_index: ClosureIndex, cand: CandidateSet, *,
            strengths: Mapping[str, float] | None = None,
            s_max: float = DEFAULT_S_MAX) -> float:
    """Accumulated evidence for ``conn`` from the current weights of its supporters.

    Each E or O rule contributes the sum of its supporters' weights; a B
    rule contributes the minimum of its two directional sums, which is zero
    whenever one side has no supporters.  Rule strengths default to 1.
    The result is clamped to [0, s_max].
    """
    total = 0.0
    for rule in pack.rules:
        strength = 1.0 if strengths is None else strengths.get(rule.code, 1.0)
        if rule.direction is Direction.BOTH:
            up = directional_supporters(rule, Direction.HYPERNYM, conn,
                                        src_index, tgt_index, cand)
            down = directional_supporters(rule, Direction.HYPONYM, conn,
                                          src_index, tgt_index, cand)
            up_sum = sum(weights.weight(c.src, c.tgt) for c in sorted(up))
            down_sum = sum(weights.weight(c.src, c.tgt) for c in sorted(down))
            total += strength * min(up_sum, down_sum)
        else:
            found = supporters(rule, conn, src_index, tgt_index, cand)
            total += strength * sum(weights.weight(c.src, c.tgt) for c in sorted(found))
    return min(max(total, 0.0), s_max)

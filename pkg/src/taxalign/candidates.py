"""Candidate connections: which target concepts may label each source sense.

A bilingual word dictionary links source words to target words; a source
node's candidates are all target nodes carrying (as main word or synonym
member) some translation of the node's word.  Sense indices play no role
here: every sense of a word gets the same candidate set.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, TextIO

from .errors import ParseError, UnknownNodeError
from .taxonomy import TaxonomyGraph

NO_TRANSLATION = "no-translation"
MONOSEMOUS = "monosemous"
POLYSEMOUS = "polysemous"


def normalize_word(word: str) -> str:
    """Canonical lookup form: trimmed, lowercased, inner whitespace as ``_``."""
    return "_".join(word.strip().lower().split())


class BilingualDict:
    """Multimap from source words to their possible target-word translations."""

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        self._map: dict[str, set[str]] = defaultdict(set)
        self._size = 0
        for src, tgt in pairs:
            src_n, tgt_n = normalize_word(src), normalize_word(tgt)
            if not src_n or not tgt_n:
                raise ValueError("dictionary words must be non-empty")
            if tgt_n not in self._map[src_n]:
                self._map[src_n].add(tgt_n)
                self._size += 1

    def __len__(self) -> int:
        """Number of distinct (source word, target word) pairs."""
        return self._size

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self._map

    def translations_of(self, word: str) -> frozenset[str]:
        return frozenset(self._map.get(normalize_word(word), ()))

    def source_words(self) -> Iterator[str]:
        return iter(self._map)


def load_dict(stream: TextIO, path: str | None = None) -> BilingualDict:
    """Parse ``src_word<TAB>tgt_word`` lines; ``#`` comments and blanks skipped."""
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise ParseError("dictionary line needs exactly src_word<TAB>tgt_word",
                             path=path, line=lineno)
        pairs.append((fields[0], fields[1]))
    return BilingualDict(pairs)


class CandidateSet:
    """Per source node, the admissible target node ids in lexicographic order.

    The per-node status is derived from the candidate count: none, exactly
    one (monosemous), or several (polysemous).
    """

    def __init__(self, mapping: Mapping[str, Iterable[str]]):
        self._cands: dict[str, tuple[str, ...]] = {}
        self._sets: dict[str, frozenset[str]] = {}
        for nid, cands in mapping.items():
            ordered = tuple(cands)
            self._cands[nid] = ordered
            self._sets[nid] = frozenset(ordered)

    def __contains__(self, nid: str) -> bool:
        return nid in self._cands

    def __len__(self) -> int:
        return len(self._cands)

    def candidates_of(self, nid: str) -> tuple[str, ...]:
        return self._cands[nid]

    def candidate_set_of(self, nid: str) -> frozenset[str]:
        return self._sets[nid]

    def status_of(self, nid: str) -> str:
        k = len(self._cands[nid])
        if k == 0:
            return NO_TRANSLATION
        if k == 1:
            return MONOSEMOUS
        return POLYSEMOUS

    def source_ids(self) -> tuple[str, ...]:
        return tuple(self._cands)

    def connected_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, c in self._cands.items() if c)

    def polysemous_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, c in self._cands.items() if len(c) > 1)

    def items(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        return iter(self._cands.items())


def generate_candidates(src: TaxonomyGraph, tgt: TaxonomyGraph, dictionary: BilingualDict,
                        pins: Mapping[str, str] | None = None) -> CandidateSet:
    """Build the candidate set of every source node.

    ``pins`` forces individual source nodes (e.g. a virtual top) to a single
    fixed target; a pinned node's candidate list is exactly its pin.
    """
    pins = dict(pins or {})
    for src_id, tgt_id in pins.items():
        if src_id not in src:
            raise UnknownNodeError(f"pin references unknown source node {src_id!r}")
        if tgt_id not in tgt:
            raise UnknownNodeError(f"pin references unknown target node {tgt_id!r}")

    by_word: dict[str, set[str]] = defaultdict(set)
    for node in tgt.nodes():
        by_word[normalize_word(node.word)].add(node.id)
        for member in node.syn:
            by_word[normalize_word(member)].add(node.id)

    out: dict[str, tuple[str, ...]] = {}
    for node in src.nodes():
        if node.id in pins:
            out[node.id] = (pins[node.id],)
            continue
        hits: set[str] = set()
        for translation in dictionary.translations_of(node.word):
            hits.update(by_word.get(translation, ()))
        out[node.id] = tuple(sorted(hits))
    return CandidateSet(out)


@dataclass(frozen=True)
class ConnectionStats:
    """Coverage and polysemy statistics of a candidate set.

    Percentages are in [0, 100]; a value is ``None`` when its denominator
    is empty (never silently reported as zero).
    """

    n_nodes: int
    n_connected: int
    n_polysemous: int
    pct_connected: float | None
    pct_polysemous: float | None
    mean_polysemy: float | None


def connection_stats(cand: CandidateSet) -> ConnectionStats:
    """Fraction of nodes with candidates, polysemy share, and mean candidate count."""
    n_nodes = len(cand)
    counts = [len(c) for _, c in cand.items() if c]
    n_connected = len(counts)
    n_polysemous = sum(1 for k in counts if k > 1)
    pct_connected = 100.0 * n_connected / n_nodes if n_nodes else None
    pct_polysemous = 100.0 * n_polysemous / n_connected if n_connected else None
    mean_polysemy = sum(counts) / n_connected if n_connected else None
    return ConnectionStats(n_nodes, n_connected, n_polysemous,
                           pct_connected, pct_polysemous, mean_polysemy)

"""Coverage, precision, and baseline metrics against a gold standard.

Precision is scored at two levels: *file* (the selected concept's semantic
file matches the gold one) and *node* (the exact concept matches).  Gold
entries carry a quality tag: hierarchies that were wrongly extracted
(``T_NOK``) are excluded from every denominator; hierarchies that were well
built but filed under the wrong semantic file (``T_OK_F_NOK``) are scored
in their own column, since a selection can still be right there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, TextIO

import numpy as np

from .candidates import CandidateSet
from .errors import ParseError, UnknownNodeError
from .relaxation import (Mapping, RelaxTrace, STATUS_MONOSEMOUS,
                         STATUS_NO_TRANSLATION, STATUS_TIED)
from .taxonomy import TaxonomyGraph

T_OK_F_OK = "T_OK_F_OK"
T_OK_F_NOK = "T_OK_F_NOK"
T_NOK = "T_NOK"

_QUALITY_CODES = {"ok": T_OK_F_OK, "oknf": T_OK_F_NOK, "nok": T_NOK}

GOLD_NODE = "node"
GOLD_FILE = "file"

LEVEL_FILE = "file"
LEVEL_NODE = "node"

SCOPE_ALL = "all"
SCOPE_POLYSEMOUS = "polysemous"
SCOPE_MONOSEMOUS = "monosemous"


class GoldEntry(NamedTuple):
    kind: str      # GOLD_NODE or GOLD_FILE
    value: str     # target node id, or semantic-file tag
    quality: str   # T_OK_F_OK / T_OK_F_NOK / T_NOK


class GoldStandard:
    """Per source node: the right target node or semantic file, plus quality."""

    def __init__(self, entries: dict[str, GoldEntry]):
        self.entries = dict(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, src_id: str) -> bool:
        return src_id in self.entries

    def get(self, src_id: str) -> GoldEntry | None:
        return self.entries.get(src_id)

    def gold_file_of(self, src_id: str, tgt: TaxonomyGraph) -> str | None:
        """The gold semantic file, resolving node-level gold through ``tgt``."""
        entry = self.entries[src_id]
        if entry.kind == GOLD_FILE:
            return entry.value
        if entry.value not in tgt:
            raise UnknownNodeError(
                f"gold for {src_id!r} references unknown target node {entry.value!r}")
        return tgt.node(entry.value).semfile


def load_gold(stream: TextIO, path: str | None = None) -> GoldStandard:
    """Parse ``src_id<TAB>node:<id>|file:<tag>[<TAB>ok|oknf|nok]`` lines."""
    entries: dict[str, GoldEntry] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise ParseError("gold line needs src_id, gold and an optional quality tag",
                             path=path, line=lineno)
        src_id, gold = fields[0], fields[1]
        kind, sep, value = gold.partition(":")
        if not sep or kind not in (GOLD_NODE, GOLD_FILE) or not value:
            raise ParseError(f"gold value must be node:<id> or file:<tag>, got {gold!r}",
                             path=path, line=lineno)
        quality = T_OK_F_OK
        if len(fields) == 3:
            if fields[2] not in _QUALITY_CODES:
                raise ParseError(f"quality tag must be one of ok/oknf/nok, got {fields[2]!r}",
                                 path=path, line=lineno)
            quality = _QUALITY_CODES[fields[2]]
        if src_id in entries:
            raise ParseError(f"duplicate gold entry for {src_id!r}", path=path, line=lineno)
        entries[src_id] = GoldEntry(kind, value, quality)
    return GoldStandard(entries)


# -- coverage ---------------------------------------------------------------

def coverage(trace: RelaxTrace, cand: CandidateSet) -> tuple[int, float | None]:
    """Connected nodes whose weights were ever changed by a constraint."""
    connected = set(cand.connected_ids())
    count = len(trace.touched & connected)
    pct = 100.0 * count / len(connected) if connected else None
    return count, pct


def coverage_from_mapping(mapping: Mapping) -> tuple[int, float | None]:
    """Coverage recomputed from a serialized mapping's status column.

    Only nodes with several candidates can be touched, and those appear as
    ``resolved`` or ``tied``; ``untouched`` and ``monosemous`` never moved.
    """
    connected = [e for e in mapping.entries.values() if e.status != STATUS_NO_TRANSLATION]
    count = sum(1 for e in connected if e.status in ("resolved", "tied"))
    pct = 100.0 * count / len(connected) if connected else None
    return count, pct


# -- precision ----------------------------------------------------------------

@dataclass(frozen=True)
class PrecisionCell:
    n: int
    correct: int

    @property
    def pct(self) -> float | None:
        return 100.0 * self.correct / self.n if self.n else None


@dataclass(frozen=True)
class PrecisionSlice:
    """Right/wrong counts for one (level, scope), split by gold quality tag."""

    level: str
    scope: str
    ok: PrecisionCell
    oknf: PrecisionCell
    n_tnok_excluded: int
    n_unevaluated: int
    n_tied: int

    @property
    def total(self) -> PrecisionCell:
        return PrecisionCell(self.ok.n + self.oknf.n, self.ok.correct + self.oknf.correct)


def _in_scope(entry, scope: str) -> bool:
    if entry.status == STATUS_NO_TRANSLATION:
        return False
    if scope == SCOPE_POLYSEMOUS:
        return entry.status != STATUS_MONOSEMOUS
    if scope == SCOPE_MONOSEMOUS:
        return entry.status == STATUS_MONOSEMOUS
    return True


def precision(mapping: Mapping, gold: GoldStandard, tgt: TaxonomyGraph,
              level: str = LEVEL_FILE, scope: str = SCOPE_ALL) -> PrecisionSlice:
    """Score the mapping against gold at the given level over the given scope.

    Nodes missing from the gold, and node-level scoring of file-only gold,
    count as unevaluated rather than wrong.  Ties are scored by whatever the
    tie-break selected and additionally counted in ``n_tied``.
    """
    counts = {T_OK_F_OK: [0, 0], T_OK_F_NOK: [0, 0]}
    n_tnok = 0
    n_unevaluated = 0
    n_tied = 0
    for src_id, entry in mapping.entries.items():
        if not _in_scope(entry, scope):
            continue
        g = gold.get(src_id)
        if g is None:
            n_unevaluated += 1
            continue
        if g.quality == T_NOK:
            n_tnok += 1
            continue
        if level == LEVEL_NODE:
            if g.kind != GOLD_NODE:
                n_unevaluated += 1
                continue
            good = entry.target == g.value
        else:
            gold_file = gold.gold_file_of(src_id, tgt)
            if gold_file is None:
                n_unevaluated += 1
                continue
            if entry.target not in tgt:
                raise UnknownNodeError(
                    f"mapping for {src_id!r} references unknown target {entry.target!r}")
            good = tgt.node(entry.target).semfile == gold_file
        if entry.status == STATUS_TIED:
            n_tied += 1
        counts[g.quality][0] += 1
        counts[g.quality][1] += int(good)
    return PrecisionSlice(
        level=level, scope=scope,
        ok=PrecisionCell(*counts[T_OK_F_OK]),
        oknf=PrecisionCell(*counts[T_OK_F_NOK]),
        n_tnok_excluded=n_tnok, n_unevaluated=n_unevaluated, n_tied=n_tied)


def baseline_random(cand: CandidateSet, gold: GoldStandard, tgt: TaxonomyGraph,
                    level: str = LEVEL_FILE) -> float | None:
    """Expected accuracy of picking a candidate uniformly at random.

    The mean over evaluable connected nodes of (gold-consistent candidates /
    all candidates), as a fraction in [0, 1]; ``None`` when nothing is
    evaluable.
    """
    ratios = []
    for src_id, cands in cand.items():
        if not cands:
            continue
        g = gold.get(src_id)
        if g is None or g.quality == T_NOK:
            continue
        if level == LEVEL_NODE:
            if g.kind != GOLD_NODE:
                continue
            hits = sum(1 for c in cands if c == g.value)
        else:
            gold_file = gold.gold_file_of(src_id, tgt)
            if gold_file is None:
                continue
            hits = sum(1 for c in cands if tgt.node(c).semfile == gold_file)
        ratios.append(hits / len(cands))
    if not ratios:
        return None
    return float(np.mean(ratios))


# -- report -------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    coverage_count: int
    coverage_pct: float | None
    n_connected: int
    n_polysemous: int
    slices: tuple[PrecisionSlice, ...]


def build_report(mapping: Mapping, gold: GoldStandard, tgt: TaxonomyGraph,
                 levels: tuple[str, ...] = (LEVEL_FILE, LEVEL_NODE)) -> EvalReport:
    cov_count, cov_pct = coverage_from_mapping(mapping)
    connected = [e for e in mapping.entries.values() if e.status != STATUS_NO_TRANSLATION]
    n_poly = sum(1 for e in connected if e.status != STATUS_MONOSEMOUS)
    slices = tuple(precision(mapping, gold, tgt, level=level, scope=scope)
                   for level in levels
                   for scope in (SCOPE_POLYSEMOUS, SCOPE_ALL))
    return EvalReport(cov_count, cov_pct, len(connected), n_poly, slices)


def _fmt_pct(value: float | None) -> str:
    return f"{value:.1f}%" if value is not None else "n/a"


def _fmt_cell(cell: PrecisionCell) -> str:
    if cell.n == 0:
        return "-"
    return f"{cell.correct}/{cell.n} ({_fmt_pct(cell.pct)})"

def render_report(report: EvalReport) -> str:
    """Human-readable tables: coverage, then one precision table per level."""
    lines = []
    cov = f"{report.coverage_count} of {report.n_connected} connected nodes"
    lines.append(f"coverage: {cov} ({_fmt_pct(report.coverage_pct)})")
    lines.append(f"connected nodes: {report.n_connected} "
                 f"({report.n_polysemous} polysemous)")
    levels = []
    for s in report.slices:
        if s.level not in levels:
            levels.append(s.level)
    for level in levels:
        lines.append("")
        lines.append(f"{level}-level precision")
        header = f"{'scope':<12} {'T_OK_F_OK':>18} {'T_OK_F_NOK':>18} {'total T_OK':>18}"
        lines.append(header)
        lines.append("-" * len(header))
        for s in report.slices:
            if s.level != level:
                continue
            lines.append(f"{s.scope:<12} {_fmt_cell(s.ok):>18} "
                         f"{_fmt_cell(s.oknf):>18} {_fmt_cell(s.total):>18}")
        any_slice = next(s for s in report.slices if s.level == level)
        lines.append(f"excluded T_NOK: {any_slice.n_tnok_excluded}   "
                     f"unevaluated: {any_slice.n_unevaluated}   "
                     f"ties: {any_slice.n_tied}")
    return "\n".join(lines) + "\n"


def report_tsv_lines(report: EvalReport) -> list[str]:
    """Machine-readable rows: one line per (level, scope, tag) cell."""
    lines = ["# kind\tlevel\tscope\ttag\tn\tcorrect\tpct"]
    pct = f"{report.coverage_pct:.4f}" if report.coverage_pct is not None else "-"
    lines.append(f"coverage\t-\t-\t-\t{report.n_connected}\t{report.coverage_count}\t{pct}")
    for s in report.slices:
        for tag, cell in ((T_OK_F_OK, s.ok), (T_OK_F_NOK, s.oknf), ("T_OK", s.total)):
            pct = f"{cell.pct:.4f}" if cell.pct is not None else "-"
            lines.append(f"precision\t{s.level}\t{s.scope}\t{tag}\t"
                         f"{cell.n}\t{cell.correct}\t{pct}")
        lines.append(f"excluded\t{s.level}\t{s.scope}\tT_NOK\t{s.n_tnok_excluded}\t-\t-")
    return lines

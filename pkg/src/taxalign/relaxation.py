"""The iterative solver: weight init, synchronous updates, convergence, selection.

Updates are Jacobi-style: every support value for one iteration is computed
against the incoming weight snapshot, then all variables commit at once.
The per-label update is multiplicative,

    w'[j] = w[j] * (1 + S[j]) / sum_k w[k] * (1 + S[k]),

so weights stay normalized and a label at exactly zero never recovers.
The supporter structure does not depend on weights, so it is enumerated
once up front and each iteration reduces to indexed gather/sum work.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping as TMapping, NamedTuple

import numpy as np

from .candidates import CandidateSet, MONOSEMOUS, NO_TRANSLATION
from .constraints import (ConstraintPack, ConstraintRule, Connection, Direction,
                          DEFAULT_S_MAX, directional_supporters)
from .taxonomy import ClosureIndex, TaxonomyGraph, build_closure

INIT_UNIFORM = "uniform"
INIT_RANDOM = "random"

TIE_EPSILON = 1e-9

STATUS_MONOSEMOUS = MONOSEMOUS
STATUS_RESOLVED = "resolved"
STATUS_TIED = "tied"
STATUS_UNTOUCHED = "untouched"
STATUS_NO_TRANSLATION = NO_TRANSLATION

_MAPPING_STATUSES = (STATUS_MONOSEMOUS, STATUS_RESOLVED, STATUS_TIED,
                     STATUS_UNTOUCHED, STATUS_NO_TRANSLATION)


@dataclass(frozen=True)
class RelaxConfig:
    """Solver configuration; ``seed`` is required for random initialization."""

    pack: ConstraintPack
    init: str = INIT_UNIFORM
    seed: int | None = None
    epsilon: float = 1e-4
    max_iters: int = 500
    s_max: float = DEFAULT_S_MAX
    strengths: TMapping[str, float] | None = None

    def __post_init__(self):
        if self.init not in (INIT_UNIFORM, INIT_RANDOM):
            raise ValueError(f"init must be {INIT_UNIFORM!r} or {INIT_RANDOM!r}")
        if self.init == INIT_RANDOM and self.seed is None:
            raise ValueError("random initialization requires a seed")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.s_max <= 0:
            raise ValueError("s_max must be positive")


class WeightTable:
    """Normalized weight vectors for every connected source node.

    Variables are kept in sorted id order; each vector is aligned with the
    node's candidate list.  The flat value array is shared metadata-free
    between iterations via :meth:`with_values`.
    """

    def __init__(self, var_ids: tuple[str, ...], cands: tuple[tuple[str, ...], ...],
                 values: np.ndarray, offsets: np.ndarray,
                 var_pos: dict[str, int] | None = None,
                 conn_pos: dict[Connection, int] | None = None):
        self.var_ids = var_ids
        self.cands = cands
        self.values = values
        self.offsets = offsets
        if var_pos is None:
            var_pos = {nid: i for i, nid in enumerate(var_ids)}
        if conn_pos is None:
            conn_pos = {}
            for i, nid in enumerate(var_ids):
                base = int(offsets[i])
                for j, tgt in enumerate(cands[i]):
                    conn_pos[Connection(nid, tgt)] = base + j
        self._var_pos = var_pos
        self._conn_pos = conn_pos

    @classmethod
    def skeleton(cls, cand: CandidateSet) -> "WeightTable":
        var_ids = tuple(sorted(cand.connected_ids()))
        cands = tuple(cand.candidates_of(nid) for nid in var_ids)
        counts = np.array([len(c) for c in cands], dtype=np.int64)
        offsets = np.zeros(len(cands) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        values = np.zeros(int(offsets[-1]), dtype=np.float64)
        return cls(var_ids, cands, values, offsets)

    @property
    def n_vars(self) -> int:
        return len(self.var_ids)

    @property
    def n_connections(self) -> int:
        return int(self.offsets[-1])

    def __contains__(self, nid: str) -> bool:
        return nid in self._var_pos

    def vector_of(self, nid: str) -> np.ndarray:
        i = self._var_pos[nid]
        return self.values[int(self.offsets[i]):int(self.offsets[i + 1])]

    def weight(self, src_id: str, tgt_id: str) -> float:
        return float(self.values[self._conn_pos[Connection(src_id, tgt_id)]])

    def position_of(self, conn: Connection) -> int:
        return self._conn_pos[conn]

    def with_values(self, values: np.ndarray) -> "WeightTable":
        return WeightTable(self.var_ids, self.cands, values, self.offsets,
                           self._var_pos, self._conn_pos)

    def items(self) -> Iterator[tuple[str, str, float]]:
        """All (source, target, weight) triples, sorted by (source, target)."""
        for i, nid in enumerate(self.var_ids):
            base = int(self.offsets[i])
            for j, tgt in enumerate(self.cands[i]):
                yield nid, tgt, float(self.values[base + j])


def init_weights(cand: CandidateSet, cfg: RelaxConfig) -> WeightTable:
    """Uniform 1/k vectors, or seeded positive random vectors normalized to 1.

    Nodes with a single candidate get weight exactly 1 either way.  Random
    draws happen in sorted variable order, so a seed fixes the table.
    """
    table = WeightTable.skeleton(cand)
    rng = np.random.default_rng(cfg.seed) if cfg.init == INIT_RANDOM else None
    for i in range(table.n_vars):
        lo, hi = int(table.offsets[i]), int(table.offsets[i + 1])
        k = hi - lo
        if rng is None or k == 1:
            table.values[lo:hi] = 1.0 / k
        else:
            draw = 1.0 - rng.random(k)  # in (0, 1]: never an exact zero
            table.values[lo:hi] = draw / draw.sum()
    return table


def update_rule(weights: np.ndarray, supports: np.ndarray) -> np.ndarray:
    """One variable's proportional-to-support update (reference form)."""
    w = np.asarray(weights, dtype=np.float64)
    s = np.asarray(supports, dtype=np.float64)
    scaled = w * (1.0 + s)
    return scaled / scaled.sum()


@dataclass(frozen=True)
class RelaxTrace:
    """What happened during a run: per-iteration deltas and the touched set."""

    iterations_run: int
    deltas: tuple[float, ...]
    touched: frozenset[str]
    converged: bool


class MappingEntry(NamedTuple):
    source: str
    target: str | None
    weight: float | None
    status: str


class Mapping:
    """Final per-node selection with its weight and resolution status."""

    def __init__(self, entries: Iterator[MappingEntry] | list[MappingEntry]):
        self.entries: dict[str, MappingEntry] = {}
        for e in entries:
            self.entries[e.source] = e

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, src_id: str) -> MappingEntry:
        return self.entries[src_id]

    def __contains__(self, src_id: str) -> bool:
        return src_id in self.entries

    def target_of(self, src_id: str) -> str | None:
        return self.entries[src_id].target

    def to_lines(self) -> list[str]:
        """Serialized rows sorted by source id; ``-`` marks absent values."""
        lines = ["# source\ttarget\tweight\tstatus"]
        for src_id in sorted(self.entries):
            e = self.entries[src_id]
            tgt = e.target if e.target is not None else "-"
            w = f"{e.weight:.6f}" if e.weight is not None else "-"
            lines.append(f"{src_id}\t{tgt}\t{w}\t{e.status}")
        return lines

    @classmethod
    def parse(cls, stream, path: str | None = None) -> "Mapping":
        from .errors import ParseError
        entries = []
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError("mapping line needs source, target, weight, status",
                                 path=path, line=lineno)
            src, tgt, w, status = fields
            if status not in _MAPPING_STATUSES:
                raise ParseError(f"unknown mapping status {status!r}", path=path, line=lineno)
            target = None if tgt == "-" else tgt
            try:
                weight = None if w == "-" else float(w)
            except ValueError:
                raise ParseError(f"bad weight {w!r}", path=path, line=lineno) from None
            entries.append(MappingEntry(src, target, weight, status))
        return cls(entries)


@dataclass(frozen=True)
class RelaxResult:
    weights: WeightTable
    mapping: Mapping
    trace: RelaxTrace


def select_mapping(w: WeightTable, cand: CandidateSet, touched: frozenset[str],
                   source_ids: Iterator[str] | tuple[str, ...]) -> Mapping:
    """Argmax selection over final weights, with tie and untouched reporting.

    Candidates within ``TIE_EPSILON`` of the maximum count as tied; the
    lexicographically smallest target id among them is selected and the
    status records the tie.  A variable whose weights never moved reports
    ``untouched`` instead.
    """
    entries = []
    for nid in source_ids:
        cands = cand.candidates_of(nid)
        if not cands:
            entries.append(MappingEntry(nid, None, None, STATUS_NO_TRANSLATION))
            continue
        if len(cands) == 1:
            entries.append(MappingEntry(nid, cands[0], 1.0, STATUS_MONOSEMOUS))
            continue
        vec = w.vector_of(nid)
        top = float(vec.max())
        tied = np.flatnonzero(top - vec < TIE_EPSILON)
        sel = int(tied[0])  # candidates are sorted, so this is the smallest id
        if nid not in touched:
            status = STATUS_UNTOUCHED
        elif len(tied) > 1:
            status = STATUS_TIED
        else:
            status = STATUS_RESOLVED
        entries.append(MappingEntry(nid, cands[sel], float(vec[sel]), status))
    return Mapping(entries)


class RelaxationEngine:
    """Precomputes the supporter structure once, then iterates cheaply.

    Support index arrays are enumerated from the same per-connection
    supporter sets the reference functions use, in deterministic order, so
    identical inputs give bit-identical runs regardless of thread settings.
    """

    def __init__(self, cand: CandidateSet, cfg: RelaxConfig,
                 src_graph: TaxonomyGraph, tgt_graph: TaxonomyGraph,
                 src_index: ClosureIndex | None = None,
                 tgt_index: ClosureIndex | None = None):
        self.cand = cand
        self.cfg = cfg
        self.src_graph = src_graph
        self.tgt_graph = tgt_graph
        self.src_index = src_index if src_index is not None else build_closure(src_graph)
        self.tgt_index = tgt_index if tgt_index is not None else build_closure(tgt_graph)
        self._skeleton = WeightTable.skeleton(cand)
        self._counts = np.diff(self._skeleton.offsets)
        self._precompute()

    def _precompute(self) -> None:
        table = self._skeleton
        needed: set[tuple] = set()
        for rule in self.cfg.pack.rules:
            if rule.direction is Direction.BOTH:
                needed.add((rule.src_scope, rule.tgt_scope, Direction.HYPERNYM))
                needed.add((rule.src_scope, rule.tgt_scope, Direction.HYPONYM))
            else:
                needed.add((rule.src_scope, rule.tgt_scope, rule.direction))

        arrays: dict[tuple, tuple[list[int], list[int]]] = {key: ([], []) for key in needed}
        for i, nid in enumerate(table.var_ids):
            if self._counts[i] < 2:
                continue  # single-candidate weights never move; skip their supports
            base = int(table.offsets[i])
            for j, tgt in enumerate(table.cands[i]):
                conn = Connection(nid, tgt)
                for key in needed:
                    src_scope, tgt_scope, direction = key
                    rule = ConstraintRule(src_scope, tgt_scope, direction)
                    sups = directional_supporters(rule, direction, conn, self.src_index,
                                                  self.tgt_index, self.cand)
                    conn_list, ref_list = arrays[key]
                    for sup in sorted(sups):
                        conn_list.append(base + j)
                        ref_list.append(table.position_of(sup))
        self._side_arrays = {
            key: (np.asarray(conns, dtype=np.int64), np.asarray(refs, dtype=np.int64))
            for key, (conns, refs) in arrays.items()
        }

    @property
    def n_supporter_links(self) -> int:
        return sum(len(conns) for conns, _ in self._side_arrays.values())

    def initial_weights(self) -> WeightTable:
        return init_weights(self.cand, self.cfg)

    def supports(self, w: WeightTable) -> np.ndarray:
        """Support for every connection under the incoming weight snapshot."""
        m = w.n_connections
        sums: dict[tuple, np.ndarray] = {}
        for key, (conns, refs) in self._side_arrays.items():
            if len(conns):
                sums[key] = np.bincount(conns, weights=w.values[refs], minlength=m)
            else:
                sums[key] = np.zeros(m)
        total = np.zeros(m)
        for rule in self.cfg.pack.rules:
            strength = (1.0 if self.cfg.strengths is None
                        else self.cfg.strengths.get(rule.code, 1.0))
            if rule.direction is Direction.BOTH:
                up = sums[(rule.src_scope, rule.tgt_scope, Direction.HYPERNYM)]
                down = sums[(rule.src_scope, rule.tgt_scope, Direction.HYPONYM)]
                total += strength * np.minimum(up, down)
            else:
                total += strength * sums[(rule.src_scope, rule.tgt_scope, rule.direction)]
        np.clip(total, 0.0, self.cfg.s_max, out=total)
        return total

    def step(self, w: WeightTable) -> tuple[WeightTable, float]:
        """One synchronous update; returns the new table and the max weight change.

        Variables whose every support is zero are copied bit-for-bit, so a
        fully unsupported table is an exact fixed point.
        """
        if w.n_connections == 0:
            return w, 0.0
        supports = self.supports(w)
        scaled = w.values * (1.0 + supports)
        starts = w.offsets[:-1]
        var_sums = np.add.reduceat(scaled, starts)
        var_active = np.add.reduceat(supports, starts) > 0.0
        active = np.repeat(var_active, self._counts)
        new_values = np.where(active, scaled / np.repeat(var_sums, self._counts), w.values)
        delta = float(np.max(np.abs(new_values - w.values)))
        return w.with_values(new_values), delta

    def run(self, w0: WeightTable | None = None) -> RelaxResult:
        """Iterate until the largest per-weight change drops below epsilon.

        Hitting ``max_iters`` without converging is reported in the trace,
        not raised.
        """
        w = w0 if w0 is not None else self.initial_weights()
        deltas: list[float] = []
        touched = np.zeros(w.n_vars, dtype=bool)
        converged = False
        for _ in range(self.cfg.max_iters):
            w_next, delta = self.step(w)
            if w.n_connections:
                changed = np.abs(w_next.values - w.values)
                touched |= np.maximum.reduceat(changed, w.offsets[:-1]) > 0.0
            deltas.append(delta)
            w = w_next
            if delta < self.cfg.epsilon:
                converged = True
                break
        touched_ids = frozenset(nid for nid, hit in zip(w.var_ids, touched) if hit)
        trace = RelaxTrace(len(deltas), tuple(deltas), touched_ids, converged)
        mapping = select_mapping(w, self.cand, touched_ids, self.src_graph.ids)
        return RelaxResult(w, mapping, trace)


def run(cand: CandidateSet, cfg: RelaxConfig, src_graph: TaxonomyGraph,
        tgt_graph: TaxonomyGraph, src_index: ClosureIndex | None = None,
        tgt_index: ClosureIndex | None = None,
        w0: WeightTable | None = None) -> RelaxResult:
    """Convenience wrapper: build an engine and run it to convergence."""
    engine = RelaxationEngine(cand, cfg, src_graph, tgt_graph, src_index, tgt_index)
    return engine.run(w0)


def cost_estimate(n_vars: int, n_constraint_applications: int) -> int:
    """Work-unit estimate: variables times constraint applications."""
    if n_vars < 0 or n_constraint_applications < 0:
        raise ValueError("counts must be non-negative")
    return n_vars * n_constraint_applications

"""Shared test utilities: random instances and independent reference oracles.

The oracles deliberately avoid the library's closure index and support
paths: reachability is recomputed by BFS over raw edges (or boolean matrix
composition), and support is re-derived by a plain quadruple loop over
(rule, side, context node, context label).
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from taxalign.candidates import CandidateSet
from taxalign.constraints import Connection, ConstraintPack, Direction, Scope
from taxalign.evaluation import GOLD_NODE, GoldEntry, GoldStandard, T_OK_F_OK
from taxalign.relaxation import Mapping, MappingEntry, STATUS_MONOSEMOUS, STATUS_RESOLVED
from taxalign.taxonomy import TaxNode, TaxonomyGraph


# -- random instances ---------------------------------------------------------

def random_taxonomy(rng: np.random.Generator, max_nodes: int = 30,
                    prefix: str = "n", p_extra_parent: float = 0.15,
                    p_new_root: float = 0.12) -> TaxonomyGraph:
    """A random DAG: edges only run from earlier nodes to later ones."""
    n = int(rng.integers(2, max_nodes + 1))
    ids = [f"{prefix}{i:03d}" for i in range(n)]
    nodes = [TaxNode(ids[i], f"{prefix}word{i}") for i in range(n)]
    edges = []
    for i in range(1, n):
        if rng.random() < p_new_root:
            continue
        p = int(rng.integers(0, i))
        edges.append((ids[p], ids[i]))
        if rng.random() < p_extra_parent:
            q = int(rng.integers(0, i))
            if q != p:
                edges.append((ids[q], ids[i]))
    return TaxonomyGraph(nodes, edges)


def random_instance(rng: np.random.Generator, max_src: int = 30, max_tgt: int = 40,
                    max_cands: int = 6):
    """Random (source graph, target graph, candidate set) triple."""
    src = random_taxonomy(rng, max_src, prefix="s")
    tgt = random_taxonomy(rng, max_tgt, prefix="t")
    tgt_ids = list(tgt.ids)
    cands = {}
    for nid in src.ids:
        k = int(rng.integers(0, min(max_cands, len(tgt_ids)) + 1))
        if k == 0:
            cands[nid] = ()
        else:
            pick = rng.choice(len(tgt_ids), size=k, replace=False)
            cands[nid] = tuple(sorted(tgt_ids[int(i)] for i in pick))
    return src, tgt, CandidateSet(cands)


def layered_instance(n_vars: int, k: int = 10, depth: int = 8, seed: int = 0):
    """Benchmark instance: fixed-depth trees of growing width, mirrored.

    Source and target share one tree shape; every source node's candidate
    list contains its mirror image plus random fillers, so support chains
    run along the mirrored ancestry and per-node supporter counts stay
    roughly flat as the instance grows.
    """
    assert n_vars >= depth
    rng = np.random.default_rng(seed)
    levels = [i if i < depth else int(rng.integers(1, depth)) for i in range(n_vars)]
    by_level: dict[int, list[int]] = defaultdict(list)
    edges_idx = []
    for i, lv in enumerate(levels):
        if lv > 0:
            pool = by_level[lv - 1]
            edges_idx.append((pool[int(rng.integers(0, len(pool)))], i))
        by_level[lv].append(i)

    def build(prefix: str) -> TaxonomyGraph:
        ids = [f"{prefix}{i:05d}" for i in range(n_vars)]
        nodes = [TaxNode(ids[i], f"{prefix}word{i}") for i in range(n_vars)]
        return TaxonomyGraph(nodes, [(ids[a], ids[b]) for a, b in edges_idx])

    src, tgt = build("s"), build("t")
    tgt_ids = tgt.ids
    cands = {}
    for i, sid in enumerate(src.ids):
        fillers = [int(j) for j in rng.permutation(n_vars) if int(j) != i][:k - 1]
        chosen = sorted({i, *fillers})
        cands[sid] = tuple(tgt_ids[j] for j in chosen)
    return src, tgt, CandidateSet(cands)


# -- closure oracle -------------------------------------------------------------

def ancestors_by_matrix(g: TaxonomyGraph) -> dict[str, frozenset[str]]:
    """Ancestor sets by repeated boolean composition of the edge relation."""
    ids = list(g.ids)
    pos = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    up = np.zeros((n, n), dtype=bool)
    for hyper, hypo in g.edges():
        up[pos[hypo], pos[hyper]] = True
    closure = up.copy()
    while True:
        grown = closure | ((closure.astype(np.int64) @ up.astype(np.int64)) > 0)
        if (grown == closure).all():
            break
        closure = grown
    return {ids[i]: frozenset(ids[j] for j in np.flatnonzero(closure[i]))
            for i in range(n)}


# -- support oracle -------------------------------------------------------------

def _bfs(adjacent, start: str) -> frozenset[str]:
    seen: set[str] = set()
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in adjacent(node):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


class ReachabilityOracle:
    """Per-graph BFS reachability, independent of the closure index."""

    def __init__(self, g: TaxonomyGraph):
        self._up = {nid: _bfs(g.hypernyms_of, nid) for nid in g.ids}
        self._down = {nid: _bfs(g.hyponyms_of, nid) for nid in g.ids}
        self._parents = {nid: frozenset(g.hypernyms_of(nid)) for nid in g.ids}
        self._children = {nid: frozenset(g.hyponyms_of(nid)) for nid in g.ids}

    def related(self, ctx: str, base: str, scope: Scope, upward: bool) -> bool:
        if scope is Scope.IMMEDIATE:
            return ctx in (self._parents[base] if upward else self._children[base])
        return ctx in (self._up[base] if upward else self._down[base])


def oracle_support(pack: ConstraintPack, conn: Connection, weights,
                   src_reach: ReachabilityOracle, tgt_reach: ReachabilityOracle,
                   src_ids, cand: CandidateSet, s_max: float = 10.0) -> float:
    """Quadruple-loop support recomputation: rule, side, context node, context label."""

    def side_sum(rule, upward: bool) -> float:
        acc = 0.0
        for s2 in src_ids:
            if not src_reach.related(s2, conn.src, rule.src_scope, upward):
                continue
            for t2 in cand.candidates_of(s2):
                if tgt_reach.related(t2, conn.tgt, rule.tgt_scope, upward):
                    acc += weights.weight(s2, t2)
        return acc

    total = 0.0
    for rule in pack.rules:
        if rule.direction is Direction.BOTH:
            total += min(side_sum(rule, True), side_sum(rule, False))
        elif rule.direction is Direction.HYPERNYM:
            total += side_sum(rule, True)
        else:
            total += side_sum(rule, False)
    return min(max(total, 0.0), s_max)


# -- planted evaluation fixture ---------------------------------------------------

class PlantedFixture:
    """20 scored nodes with exactly 3 planted file-level errors (17/20 right).

    Selections always differ from the gold node, so node-level precision is
    0% while file-level is 85%.  Three nodes are monosemous to exercise the
    polysemous/monosemous/all accounting.
    """

    N = 20
    ERRORS = (17, 18, 19)
    MONOSEMOUS = (0, 7, 14)

    def __init__(self):
        tgt_nodes = []
        entries = []
        gold = {}
        cands = {}
        for i in range(self.N):
            sid = f"m{i:02d}"
            sel_id, gold_id, extra_id = f"sel{i:02d}", f"gold{i:02d}", f"x{i:02d}"
            gold_file = f"file{i:02d}" if i not in self.ERRORS else f"other{i:02d}"
            tgt_nodes.append(TaxNode(sel_id, f"selword{i}", semfile=f"file{i:02d}"))
            tgt_nodes.append(TaxNode(gold_id, f"goldword{i}", semfile=gold_file))
            tgt_nodes.append(TaxNode(extra_id, f"xword{i}", semfile="file.extra"))
            if i in self.MONOSEMOUS:
                status = STATUS_MONOSEMOUS
                cands[sid] = (sel_id,)
            else:
                status = STATUS_RESOLVED
                cands[sid] = tuple(sorted((sel_id, gold_id, extra_id)))
            entries.append(MappingEntry(sid, sel_id, 0.9, status))
            gold[sid] = GoldEntry(GOLD_NODE, gold_id, T_OK_F_OK)
        self.target = TaxonomyGraph(tgt_nodes, [])
        self.mapping = Mapping(entries)
        self.gold = GoldStandard(gold)
        self.cand = CandidateSet(cands)

    def write(self, directory):
        """Materialize mapping/gold/target as files for CLI-level tests."""
        directory.mkdir(parents=True, exist_ok=True)
        mapping_path = directory / "mapping.tsv"
        mapping_path.write_text("\n".join(self.mapping.to_lines()) + "\n", encoding="utf-8")
        gold_lines = [f"{sid}\tnode:{e.value}\tok" for sid, e in sorted(self.gold.entries.items())]
        gold_path = directory / "gold.tsv"
        gold_path.write_text("\n".join(gold_lines) + "\n", encoding="utf-8")
        target_path = directory / "target.tax"
        from taxalign.taxonomy import dump_taxonomy
        with open(target_path, "w", encoding="utf-8") as fh:
            dump_taxonomy(self.target, fh)
        return mapping_path, gold_path, target_path

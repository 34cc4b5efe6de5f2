"""Hypernym hierarchies: loading, validation, transforms, and closure queries.

Taxonomies are directed acyclic graphs whose edges point from hypernym
(more general) to hyponym (more specific).  Graphs are immutable once
built; every transform returns a new graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import CycleError, DanglingEdgeError, DuplicateNodeError, ParseError

VIRTUAL_TOP_ID = "__TOP__"


@dataclass(frozen=True)
class TaxNode:
    """One taxonomy node: a dictionary sense (source side) or a concept (target side).

    ``syn`` holds the additional member words of a concept node; ``semfile``
    is the coarse category tag (e.g. ``noun.animal``) used for file-level
    evaluation.
    """

    id: str
    word: str
    sense: int | None = None
    semfile: str | None = None
    syn: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not self.word:
            raise ValueError(f"node {self.id!r}: word must be non-empty")
        if self.sense is not None and self.sense < 1:
            raise ValueError(f"node {self.id!r}: sense index must be >= 1")


class TaxonomyGraph:
    """Immutable hypernym DAG.

    Construction validates that edge endpoints exist and that the edge
    relation is acyclic; a node may have several hypernyms.
    """

    def __init__(self, nodes: Iterable[TaxNode], edges: Iterable[tuple[str, str]]):
        self._nodes: dict[str, TaxNode] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise DuplicateNodeError(f"duplicate node id {node.id!r}")
            self._nodes[node.id] = node

        self._parents: dict[str, tuple[str, ...]] = {}
        self._children: dict[str, tuple[str, ...]] = {}
        parents: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        children: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        self._edges: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for hyper, hypo in edges:
            if hyper not in self._nodes:
                raise DanglingEdgeError(f"edge references unknown hypernym {hyper!r}")
            if hypo not in self._nodes:
                raise DanglingEdgeError(f"edge references unknown hyponym {hypo!r}")
            if (hyper, hypo) in seen:
                continue
            seen.add((hyper, hypo))
            self._edges.append((hyper, hypo))
            parents[hypo].append(hyper)
            children[hyper].append(hypo)
        for nid in self._nodes:
            self._parents[nid] = tuple(parents[nid])
            self._children[nid] = tuple(children[nid])

        self._topo_order = self._toposort()
        self._roots = tuple(nid for nid in self._nodes if not self._parents[nid])

    def _toposort(self) -> tuple[str, ...]:
        indegree = {nid: len(self._parents[nid]) for nid in self._nodes}
        queue = deque(nid for nid in self._nodes if indegree[nid] == 0)
        order: list[str] = []
        while queue:
            nid = queue.popleft()
            order.append(nid)
            for child in self._children[nid]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    queue.append(child)
        if len(order) < len(self._nodes):
            # Every remaining node sits on or below a cycle; walk parent
            # links inside the remainder until a node repeats.
            remaining = {nid for nid in self._nodes if indegree[nid] > 0}
            nid = next(iter(remaining))
            seen = set()
            while nid not in seen:
                seen.add(nid)
                nid = next(p for p in self._parents[nid] if p in remaining)
            raise CycleError(nid)
        return tuple(order)

    # -- queries ---------------------------------------------------------

    def __contains__(self, nid: str) -> bool:
        return nid in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    @property
    def roots(self) -> tuple[str, ...]:
        return self._roots

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def node(self, nid: str) -> TaxNode:
        return self._nodes[nid]

    def nodes(self) -> Iterator[TaxNode]:
        return iter(self._nodes.values())

    def edges(self) -> Iterator[tuple[str, str]]:
        return iter(self._edges)

    def hypernyms_of(self, nid: str) -> tuple[str, ...]:
        """Immediate hypernyms (parents) of ``nid``."""
        return self._parents[nid]

    def hyponyms_of(self, nid: str) -> tuple[str, ...]:
        """Immediate hyponyms (children) of ``nid``."""
        return self._children[nid]

    def topological_order(self) -> tuple[str, ...]:
        """Node ids with every hypernym before its hyponyms."""
        return self._topo_order


@dataclass(frozen=True)
class ClosureIndex:
    """Transitive ancestor/descendant sets plus the immediate neighbourhoods.

    A node is never a member of its own ancestor or descendant set.
    """

    _ancestors: dict[str, frozenset[str]] = field(repr=False)
    _descendants: dict[str, frozenset[str]] = field(repr=False)
    _parents: dict[str, frozenset[str]] = field(repr=False)
    _children: dict[str, frozenset[str]] = field(repr=False)

    def ancestors_of(self, nid: str) -> frozenset[str]:
        return self._ancestors[nid]

    def descendants_of(self, nid: str) -> frozenset[str]:
        return self._descendants[nid]

    def hypernyms_of(self, nid: str) -> frozenset[str]:
        return self._parents[nid]

    def hyponyms_of(self, nid: str) -> frozenset[str]:
        return self._children[nid]


def build_closure(g: TaxonomyGraph) -> ClosureIndex:
    """Compute ancestor/descendant closures of ``g`` in one topological sweep."""
    ancestors: dict[str, frozenset[str]] = {}
    for nid in g.topological_order():
        acc: set[str] = set()
        for p in g.hypernyms_of(nid):
            acc.add(p)
            acc.update(ancestors[p])
        ancestors[nid] = frozenset(acc)
    descendants: dict[str, frozenset[str]] = {}
    for nid in reversed(g.topological_order()):
        acc = set()
        for c in g.hyponyms_of(nid):
            acc.add(c)
            acc.update(descendants[c])
        descendants[nid] = frozenset(acc)
    parents = {nid: frozenset(g.hypernyms_of(nid)) for nid in g.ids}
    children = {nid: frozenset(g.hyponyms_of(nid)) for nid in g.ids}
    return ClosureIndex(ancestors, descendants, parents, children)


# -- file format -----------------------------------------------------------

_NODE_KEYS = ("sense", "file", "syn")


def load_taxonomy(stream: TextIO, path: str | None = None) -> TaxonomyGraph:
    """Parse the tab-separated taxonomy format into a validated graph.

    Records: ``N<TAB>id<TAB>word[<TAB>sense=k][<TAB>file=tag][<TAB>syn=w1,w2]``
    and ``E<TAB>hypernym_id<TAB>hyponym_id``.  Lines starting with ``#`` and
    blank lines are ignored.  Node records must precede edges using them.
    """
    nodes: list[TaxNode] = []
    ids: set[str] = set()
    edges: list[tuple[str, str]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        kind = fields[0]
        if kind == "N":
            if len(fields) < 3:
                raise ParseError("node record needs id and word", path=path, line=lineno)
            nid, word = fields[1], fields[2]
            sense: int | None = None
            semfile: str | None = None
            syn: tuple[str, ...] = ()
            for extra in fields[3:]:
                key, sep, value = extra.partition("=")
                if not sep or key not in _NODE_KEYS:
                    raise ParseError(f"unrecognized node field {extra!r}", path=path, line=lineno)
                if key == "sense":
                    try:
                        sense = int(value)
                    except ValueError:
                        raise ParseError(f"sense must be an integer, got {value!r}",
                                         path=path, line=lineno) from None
                elif key == "file":
                    semfile = value
                else:
                    syn = tuple(w for w in value.split(",") if w)
            if nid in ids:
                raise DuplicateNodeError(f"duplicate node id {nid!r}", path=path, line=lineno)
            try:
                node = TaxNode(nid, word, sense=sense, semfile=semfile, syn=syn)
            except ValueError as exc:
                raise ParseError(str(exc), path=path, line=lineno) from None
            ids.add(nid)
            nodes.append(node)
        elif kind == "E":
            if len(fields) != 3:
                raise ParseError("edge record needs exactly hypernym and hyponym ids",
                                 path=path, line=lineno)
            hyper, hypo = fields[1], fields[2]
            for endpoint in (hyper, hypo):
                if endpoint not in ids:
                    raise DanglingEdgeError(f"edge references undeclared node {endpoint!r}",
                                            path=path, line=lineno)
            edges.append((hyper, hypo))
        else:
            raise ParseError(f"unknown record type {kind!r}", path=path, line=lineno)
    return TaxonomyGraph(nodes, edges)


def dump_taxonomy(g: TaxonomyGraph, stream: TextIO) -> None:
    """Write ``g`` in the same format ``load_taxonomy`` reads."""
    for node in g.nodes():
        fields = ["N", node.id, node.word]
        if node.sense is not None:
            fields.append(f"sense={node.sense}")
        if node.semfile is not None:
            fields.append(f"file={node.semfile}")
        if node.syn:
            fields.append("syn=" + ",".join(node.syn))
        stream.write("\t".join(fields) + "\n")
    for hyper, hypo in g.edges():
        stream.write(f"E\t{hyper}\t{hypo}\n")


# -- transforms ------------------------------------------------------------

def add_virtual_top(g: TaxonomyGraph, top_word: str = "__top__",
                    attach_to: str | None = None) -> tuple[TaxonomyGraph, dict[str, str]]:
    """Insert a fresh single root above every current root.

    Returns ``(new_graph, pins)``.  The new top is the graph's only root.
    When ``attach_to`` names the target concept the top is anchored to,
    ``pins`` maps the top's id to it so the caller can feed it to candidate
    generation; otherwise ``pins`` is empty.
    """
    top_id = VIRTUAL_TOP_ID
    counter = 2
    while top_id in g:
        top_id = f"{VIRTUAL_TOP_ID}{counter}"
        counter += 1
    nodes = [TaxNode(top_id, top_word)]
    nodes.extend(g.nodes())
    edges = [(top_id, r) for r in g.roots]
    edges.extend(g.edges())
    out = TaxonomyGraph(nodes, edges)
    pins = {top_id: attach_to} if attach_to is not None else {}
    return out, pins


def collapse_sense_siblings(g: TaxonomyGraph) -> tuple[TaxonomyGraph, dict[str, str]]:
    """Merge sibling sense nodes that share a word.

    Nodes are merged only when both their word and their full immediate
    hypernym set coincide; merging repeats until no such group remains, so
    applying the transform twice is a no-op.  Returns the new graph and a
    map sending every original id to its surviving id.
    """
    parents: dict[str, set[str]] = {nid: set(g.hypernyms_of(nid)) for nid in g.ids}
    children: dict[str, set[str]] = {nid: set(g.hyponyms_of(nid)) for nid in g.ids}
    alive: dict[str, bool] = {nid: True for nid in g.ids}
    merged_into: dict[str, str] = {}
    was_merged: set[str] = set()

    while True:
        groups: dict[tuple[str, frozenset[str]], list[str]] = {}
        for nid in g.ids:
            if not alive[nid]:
                continue
            key = (g.node(nid).word, frozenset(parents[nid]))
            groups.setdefault(key, []).append(nid)
        mergeable = [members for members in groups.values() if len(members) > 1]
        if not mergeable:
            break
        for members in mergeable:
            survivor = min(members)
            was_merged.add(survivor)
            for other in members:
                if other == survivor:
                    continue
                merged_into[other] = survivor
                was_merged.add(other)
                for child in children[other]:
                    parents[child].discard(other)
                    parents[child].add(survivor)
                    children[survivor].add(child)
                for parent in parents[other]:
                    children[parent].discard(other)
                alive[other] = False

    merge_map: dict[str, str] = {}
    for nid in g.ids:
        target = nid
        while target in merged_into:
            target = merged_into[target]
        merge_map[nid] = target

    if not merged_into:
        return TaxonomyGraph(g.nodes(), g.edges()), merge_map

    nodes: list[TaxNode] = []
    for nid in g.ids:
        if not alive[nid]:
            continue
        original = g.node(nid)
        if nid in was_merged:
            syn = sorted({w for member, tgt in merge_map.items() if tgt == nid
                          for w in g.node(member).syn})
            nodes.append(TaxNode(nid, original.word, sense=None,
                                 semfile=original.semfile, syn=tuple(syn)))
        else:
            nodes.append(original)
    edges = sorted((hyper, hypo)
                   for hyper in g.ids if alive[hyper]
                   for hypo in children[hyper])
    return TaxonomyGraph(nodes, edges), merge_map

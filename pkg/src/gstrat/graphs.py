"""Labeled simple graphs, isomorphism-aware interning, and the graph text format.

Graphs are undirected and simple (no loops, no parallel edges) with arbitrary
string labels on vertices and edges.  Instances are immutable once built;
derived data (structural signature, refinement colors) is cached lazily, which
is what makes the isomorphism and interning hot loops cheap.
"""
from __future__ import annotations

import hashlib
from collections.abc import Iterable, Iterator, Mapping

from gstrat import lex
from gstrat.lex import ParseError, TokenStream


class GraphError(ValueError):
    """Structurally invalid graph (duplicate vertex, loop, parallel edge...)."""


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


# Process-wide interning of refinement-color signatures.  Two vertices (in
# any graphs) get the same id iff their refinement signatures are equal, so
# colors stay comparable across graphs while staying cheap small ints.
_COLOR_IDS: dict[tuple, int] = {}


def _color_id(signature: tuple) -> int:
    cid = _COLOR_IDS.get(signature)
    if cid is None:
        cid = len(_COLOR_IDS)
        _COLOR_IDS[signature] = cid
    return cid


class Graph:
    """Immutable simple undirected graph with string vertex and edge labels."""

    __slots__ = ("_labels", "_adj", "_edge_count", "_signature", "_hash",
                 "_wl_colors", "_wl_hist", "_sorted_adj")

    def __init__(self, vertices: Iterable[tuple[int, str]],
                 edges: Iterable[tuple[int, int, str]] = ()):
        labels: dict[int, str] = {}
        for vid, label in vertices:
            if vid in labels:
                raise GraphError(f"duplicate vertex id {vid}")
            labels[vid] = label
        adj: dict[int, dict[int, str]] = {v: {} for v in labels}
        count = 0
        for u, v, label in edges:
            if u == v:
                raise GraphError(f"self-loop on vertex {u}")
            if u not in labels or v not in labels:
                raise GraphError(f"edge {u}-{v} references an undeclared vertex")
            if v in adj[u]:
                raise GraphError(f"parallel edge {u}-{v}")
            adj[u][v] = label
            adj[v][u] = label
            count += 1
        self._labels = labels
        self._adj = adj
        self._edge_count = count
        self._signature: tuple | None = None
        self._hash: int | None = None
        self._wl_colors: dict[int, int] | None = None
        self._wl_hist: tuple[tuple[int, int], ...] | None = None
        self._sorted_adj: dict[int, tuple[int, ...]] | None = None

    @property
    def vertex_count(self) -> int:
        return len(self._labels)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def vertex_ids(self) -> list[int]:
        return sorted(self._labels)

    def vertices(self) -> Iterator[tuple[int, str]]:
        """Yield (id, label) in ascending id order."""
        for vid in sorted(self._labels):
            yield vid, self._labels[vid]

    def edges(self) -> Iterator[tuple[int, int, str]]:
        """Yield (u, v, label) with u < v, in ascending (u, v) order."""
        for u in sorted(self._adj):
            nbrs = self._adj[u]
            for v in sorted(nbrs):
                if u < v:
                    yield u, v, nbrs[v]

    def label(self, vid: int) -> str:
        return self._labels[vid]

    def has_vertex(self, vid: int) -> bool:
        return vid in self._labels

    def neighbors(self, vid: int) -> Mapping[int, str]:
        """Adjacency of vid as a read-only neighbor -> edge label mapping."""
        return self._adj[vid]

    def sorted_neighbors(self, vid: int) -> tuple[int, ...]:
        if self._sorted_adj is None:
            self._sorted_adj = {v: tuple(sorted(n)) for v, n in self._adj.items()}
        return self._sorted_adj[vid]

    def degree(self, vid: int) -> int:
        return len(self._adj[vid])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def edge_label(self, u: int, v: int) -> str:
        return self._adj[u][v]

    @property
    def signature(self) -> tuple:
        """Permutation-invariant structural summary.

        Built from the sorted vertex-label multiset, the sorted multiset of
        edge signatures (min endpoint label, edge label, max endpoint label),
        and the sorted degree sequence.  Isomorphic graphs always agree;
        collisions are resolved by a full isomorphism search.
        """
        if self._signature is None:
            labels = tuple(sorted(self._labels.values()))
            edge_sigs = []
            for u, v, el in self.edges():
                lu, lv = self._labels[u], self._labels[v]
                if lv < lu:
                    lu, lv = lv, lu
                edge_sigs.append((lu, el, lv))
            degrees = tuple(sorted(len(n) for n in self._adj.values()))
            self._signature = (labels, tuple(sorted(edge_sigs)), degrees)
        return self._signature

    @property
    def structural_hash(self) -> int:
        """Deterministic integer digest of the signature."""
        if self._hash is None:
            digest = hashlib.blake2b(repr(self.signature).encode(), digest_size=8)
            self._hash = int.from_bytes(digest.digest(), "big")
        return self._hash

    def refinement_colors(self) -> dict[int, int]:
        """Stable vertex colors from iterated neighborhood refinement.

        Colors are interned process-wide, so they are comparable across
        graphs; the refinement runs until the partition stops splitting.
        Isomorphic graphs produce equal color multisets; matching candidates
        may be pruned to equal-color vertices.
        """
        if self._wl_colors is None:
            colors = {v: _color_id(("v", self._labels[v])) for v in self._labels}
            classes = len(set(colors.values()))
            for _ in range(max(1, len(colors))):
                nxt = {}
                for v in colors:
                    around = tuple(sorted(
                        (el, colors[u]) for u, el in self._adj[v].items()))
                    nxt[v] = _color_id((colors[v], around))
                new_classes = len(set(nxt.values()))
                colors = nxt
                if new_classes == classes:
                    break
                classes = new_classes
            self._wl_colors = colors
        return self._wl_colors

    def color_histogram(self) -> tuple[tuple[int, int], ...]:
        if self._wl_hist is None:
            counts: dict[int, int] = {}
            for c in self.refinement_colors().values():
                counts[c] = counts.get(c, 0) + 1
            self._wl_hist = tuple(sorted(counts.items()))
        return self._wl_hist

    @property
    def is_connected(self) -> bool:
        if not self._labels:
            return False
        seen = self._reach(next(iter(self._labels)))
        return len(seen) == len(self._labels)

    def _reach(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in self._adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def connected_components(self) -> list[Graph]:
        """Split into connected components, preserving original vertex ids.

        Components are returned in ascending order of their smallest vertex
        id; the identity on vertex ids is the mapping back into this graph.
        """
        remaining = set(self._labels)
        components = []
        for vid in sorted(self._labels):
            if vid not in remaining:
                continue
            seen = self._reach(vid)
            remaining -= seen
            verts = [(v, self._labels[v]) for v in sorted(seen)]
            edges = [(u, v, el) for u, v, el in self.edges() if u in seen]
            components.append(Graph(verts, edges))
        return components

    def renumbered(self) -> tuple[Graph, dict[int, int]]:
        """Copy with dense ids 0..n-1 (sorted order); returns (graph, old->new)."""
        mapping = {vid: i for i, vid in enumerate(sorted(self._labels))}
        verts = [(mapping[v], l) for v, l in self.vertices()]
        edges = [(mapping[u], mapping[v], el) for u, v, el in self.edges()]
        return Graph(verts, edges), mapping

    def __repr__(self) -> str:
        return f"Graph({self.vertex_count} vertices, {self.edge_count} edges)"


def isomorphic(g: Graph, h: Graph) -> bool:
    """Label-preserving isomorphism test: signature filter, then full search."""
    from gstrat import matching

    return matching.find_isomorphism(g, h) is not None


class GraphRepository:
    """Interning store mapping isomorphism classes to dense integer ids.

    Stored graphs are renumbered to dense vertex ids and never mutated.
    A structural-hash index buckets candidates; bucket members are compared
    by full isomorphism search, so no two stored ids are isomorphic.
    """

    def __init__(self) -> None:
        self._graphs: list[Graph] = []
        self._buckets: dict[int, list[int]] = {}
        # Finer candidate index: same-formula isomers collide massively on
        # the structural hash, so intern scans group by refinement colors
        # too (a prefix of the full search's own rejection tests).
        self._candidates: dict[tuple, list[int]] = {}
        self._names: dict[int, str] = {}
        self._by_name: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._graphs)

    def ids(self) -> range:
        return range(len(self._graphs))

    def graph(self, gid: int) -> Graph:
        return self._graphs[gid]

    def intern(self, g: Graph) -> tuple[int, bool]:
        gid, is_new, _ = self.intern_mapped(g)
        return gid, is_new

    def intern_mapped(self, g: Graph) -> tuple[int, bool, dict[int, int]]:
        """Intern g; also return the vertex map from g into the stored graph."""
        from gstrat import matching

        if not g.is_connected:
            raise GraphError("cannot intern a disconnected (or empty) graph")
        canonical, renumber = g.renumbered()
        key = (canonical.structural_hash, canonical.color_histogram())
        candidates = self._candidates.setdefault(key, [])
        for gid in candidates:
            iso = matching.find_isomorphism(canonical, self._graphs[gid])
            if iso is not None:
                return gid, False, {old: iso[new] for old, new in renumber.items()}
        gid = len(self._graphs)
        self._graphs.append(canonical)
        candidates.append(gid)
        self._buckets.setdefault(canonical.structural_hash, []).append(gid)
        return gid, True, renumber

    def find(self, g: Graph) -> int | None:
        """Id of the stored graph isomorphic to g, if any (no interning)."""
        from gstrat import matching

        if not g.is_connected:
            return None
        canonical, _ = g.renumbered()
        key = (canonical.structural_hash, canonical.color_histogram())
        for gid in self._candidates.get(key, ()):
            if matching.find_isomorphism(canonical, self._graphs[gid]) is not None:
                return gid
        return None

    def set_name(self, gid: int, name: str) -> None:
        """Attach a display name; the first name for an id wins."""
        self._names.setdefault(gid, name)
        self._by_name.setdefault(name, gid)

    def name(self, gid: int) -> str:
        return self._names.get(gid, f"g{gid}")

    def id_by_name(self, name: str) -> int | None:
        return self._by_name.get(name)

    def buckets(self) -> dict[int, list[int]]:
        """Hash -> bucket view, for duplicate-free stress checks."""
        return {h: list(b) for h, b in self._buckets.items()}


# -- text format --------------------------------------------------------------
#
# graph <name> {
#   v <id> "<label>"; ...
#   e <id> <id> "<label>"; ...
# }
#
# '#' starts a comment; multiple graphs per file; names unique per file.


def _parse_graph_body(ts: TokenStream) -> Graph:
    vertices: list[tuple[int, str]] = []
    edges: list[tuple[int, int, str]] = []
    seen_ids: set[int] = set()
    seen_edges: set[tuple[int, int]] = set()
    while True:
        tok = ts.peek()
        if not (tok.kind == lex.NAME and tok.value in ("v", "e")):
            break
        ts.next()
        if tok.value == "v":
            vid = ts.expect_int()
            label = ts.expect(lex.STRING).value
            if vid in seen_ids:
                raise tok.error(f"duplicate vertex id {vid}")
            seen_ids.add(vid)
            vertices.append((vid, label))
        else:
            u = ts.expect_int()
            v = ts.expect_int()
            label = ts.expect(lex.STRING).value
            if u == v:
                raise tok.error(f"self-loop on vertex {u} is forbidden")
            if u not in seen_ids or v not in seen_ids:
                raise tok.error(f"edge {u}-{v} references an unknown vertex")
            key = _edge_key(u, v)
            if key in seen_edges:
                raise tok.error(f"parallel edge {u}-{v}")
            seen_edges.add(key)
            edges.append((u, v, label))
        ts.expect(lex.PUNCT, ";")
    return Graph(vertices, edges)


def parse_graphs(text: str) -> dict[str, Graph]:
    """Parse a graph file into an ordered name -> graph mapping."""
    ts = TokenStream(lex.tokenize(text))
    graphs: dict[str, Graph] = {}
    while not ts.at(lex.EOF):
        kw = ts.expect(lex.NAME, "graph")
        name = ts.expect(lex.NAME).value
        if name in graphs:
            raise kw.error(f"duplicate graph name {name!r}")
        ts.expect(lex.PUNCT, "{")
        graphs[name] = _parse_graph_body(ts)
        ts.expect(lex.PUNCT, "}")
    return graphs


def parse_graph(text: str) -> Graph:
    """Parse a single graph: either one `graph name { ... }` or a bare body."""
    ts = TokenStream(lex.tokenize(text))
    if ts.at(lex.NAME, "graph"):
        graphs = parse_graphs(text)
        if len(graphs) != 1:
            raise ParseError("expected exactly one graph", 1, 1)
        return next(iter(graphs.values()))
    g = _parse_graph_body(ts)
    ts.expect_eof()
    return g


def serialize_graph(g: Graph, name: str = "g") -> str:
    """Render in the graph file format; vertices then edges in ascending order."""
    lines = [f"graph {name} {{"]
    for vid, label in g.vertices():
        lines.append(f"  v {vid} {lex.quote(label)};")
    for u, v, label in g.edges():
        lines.append(f"  e {u} {v} {lex.quote(label)};")
    lines.append("}")
    return "\n".join(lines) + "\n"

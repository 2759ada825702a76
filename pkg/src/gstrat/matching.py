"""Enumeration of injective label-preserving subgraph embeddings.

The search is a VF2-style backtracking over a static, connectivity-first
ordering of the pattern vertices.  Embeddings are monomorphisms: every
pattern edge must map to a host edge with the same label, but extra host
edges between image vertices are allowed.  Candidate host vertices are
visited in ascending id order, so results are deterministic for a fixed
vertex numbering.
"""
from __future__ import annotations

import threading
from collections.abc import Iterable, Mapping
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from gstrat.graphs import Graph


class MatchError(ValueError):
    pass


class QueryCounter:
    """Monotone counter of embedding-enumeration calls (atomic increments)."""

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def bump(self) -> None:
        with self._lock:
            self._value += 1

    @property
    def value(self) -> int:
        return self._value


#: Global counter: one unit per enumerate_embeddings call.  Reported run
#: statistics use deltas of this counter, never resets.
queries = QueryCounter()


def _pattern_order(pattern: Graph) -> list[int]:
    """Static search order: start at a max-degree vertex, then always extend
    with the vertex most constrained by already-ordered neighbors."""
    ids = pattern.vertex_ids()
    if not ids:
        return []
    start = max(ids, key=lambda v: (pattern.degree(v), -v))
    order = [start]
    placed = {start}
    while len(order) < len(ids):
        best = None
        best_key = None
        for v in ids:
            if v in placed:
                continue
            anchored = sum(1 for u in pattern.neighbors(v) if u in placed)
            key = (anchored, pattern.degree(v), -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        order.append(best)
        placed.add(best)
    return order


def enumerate_embeddings(pattern: Graph, host: Graph) -> list[dict[int, int]]:
    """All injective label- and edge-preserving maps of pattern into host.

    The pattern must be connected.  Returns vertex maps (pattern id -> host
    id) in a deterministic order; empty list when nothing matches.
    """
    if not pattern.is_connected:
        raise MatchError("pattern must be a connected non-empty graph")
    queries.bump()

    order = _pattern_order(pattern)
    # For each position: the pattern neighbors already placed, with edge labels.
    placed_before: list[list[tuple[int, str]]] = []
    seen: set[int] = set()
    for v in order:
        placed_before.append(
            [(u, el) for u, el in sorted(pattern.neighbors(v).items()) if u in seen])
        seen.add(v)

    results: list[dict[int, int]] = []
    assignment: dict[int, int] = {}
    used: set[int] = set()
    host_ids = host.vertex_ids()

    def extend(i: int) -> None:
        if i == len(order):
            results.append(dict(assignment))
            return
        pv = order[i]
        plabel = pattern.label(pv)
        pdeg = pattern.degree(pv)
        anchors = placed_before[i]
        if anchors:
            first_pn, first_el = anchors[0]
            candidates = host.sorted_neighbors(assignment[first_pn])
        else:
            candidates = host_ids
        for c in candidates:
            if c in used or host.label(c) != plabel or host.degree(c) < pdeg:
                continue
            ok = True
            for pn, el in anchors:
                mapped = assignment[pn]
                if not host.has_edge(mapped, c) or host.edge_label(mapped, c) != el:
                    ok = False
                    break
            if not ok:
                continue
            assignment[pv] = c
            used.add(c)
            extend(i + 1)
            used.discard(c)
            del assignment[pv]

    extend(0)
    return results


def merge_maps(maps: Iterable[Mapping[int, int]]) -> dict[int, int] | None:
    """Union of vertex maps with pairwise-disjoint images; None on conflict.

    Keys are assumed disjoint (each map covers a distinct pattern component);
    a shared image vertex violates injectivity and signals the conflict.
    """
    merged: dict[int, int] = {}
    used: set[int] = set()
    for m in maps:
        for k, v in m.items():
            if v in used:
                return None
            merged[k] = v
            used.add(v)
    return merged


def find_isomorphism(g: Graph, h: Graph) -> dict[int, int] | None:
    """A label-preserving vertex bijection inducing an edge bijection, or None.

    Fast rejections first (counts, structural signature, refinement-color
    histogram), then a backtracking search with candidates restricted to
    equal refinement colors.  With equal vertex and edge counts, any
    edge-preserving injection is automatically an isomorphism.
    """
    if g.vertex_count != h.vertex_count or g.edge_count != h.edge_count:
        return None
    if g.vertex_count == 0:
        return {}
    if g.signature != h.signature:
        return None
    gc = g.refinement_colors()
    hc = h.refinement_colors()
    if g.color_histogram() != h.color_histogram():
        return None

    by_color: dict[int, list[int]] = {}
    for v in h.vertex_ids():
        by_color.setdefault(hc[v], []).append(v)

    # Cheap connectivity-first order: breadth-first from a max-degree vertex,
    # restarting per component.  Color-class pruning does the heavy lifting.
    order: list[int] = []
    seen: set[int] = set()
    for root in sorted(g.vertex_ids(), key=lambda v: (-g.degree(v), v)):
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in g.sorted_neighbors(v):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    placed_before: list[list[tuple[int, str]]] = []
    seen = set()
    for v in order:
        placed_before.append(
            [(u, el) for u, el in sorted(g.neighbors(v).items()) if u in seen])
        seen.add(v)

    assignment: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> dict[int, int] | None:
        if i == len(order):
            return dict(assignment)
        gv = order[i]
        anchors = placed_before[i]
        for c in by_color.get(gc[gv], ()):
            if c in used or h.degree(c) != g.degree(gv):
                continue
            ok = True
            for pn, el in anchors:
                mapped = assignment[pn]
                if not h.has_edge(mapped, c) or h.edge_label(mapped, c) != el:
                    ok = False
                    break
            if not ok:
                continue
            assignment[gv] = c
            used.add(c)
            found = extend(i + 1)
            if found is not None:
                return found
            used.discard(c)
            del assignment[gv]
        return None

    return extend(0)

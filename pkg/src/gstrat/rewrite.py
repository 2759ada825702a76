"""Rule application and discovery of proper derivations by partial binding.

A rule is applied to a multiset of interned graphs.  The multiset is
assembled into one disjoint-union host; a full match maps every left-graph
vertex into that union.  Instead of testing every k-multisubset of a
universe, derivations are enumerated by binding host graphs to the rule one
copy at a time: each copy receives a nonempty subset of the remaining left
components, so every produced derivation is automatically proper.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from gstrat.graphs import Graph, GraphRepository, _edge_key
from gstrat.matching import enumerate_embeddings
from gstrat.rules import CONTEXT, LEFT, RIGHT, Rule


@dataclass(frozen=True)
class Assembly:
    """Concrete disjoint union of stored graph copies.

    Copy i contributes vertices offset[i] .. offset[i] + n_i - 1, i.e. the
    stored graph's dense ids shifted by the copy offset.
    """

    graph_ids: tuple[int, ...]
    graph: Graph
    offsets: tuple[int, ...]

    def copy_of(self, union_vid: int) -> int:
        for i in range(len(self.offsets) - 1, -1, -1):
            if union_vid >= self.offsets[i]:
                return i
        raise ValueError(f"vertex {union_vid} not in assembly")

    def local_id(self, union_vid: int) -> tuple[int, int]:
        i = self.copy_of(union_vid)
        return i, union_vid - self.offsets[i]


def assemble(repo: GraphRepository, graph_ids: Sequence[int]) -> Assembly:
    vertices: list[tuple[int, str]] = []
    edges: list[tuple[int, int, str]] = []
    offsets: list[int] = []
    offset = 0
    for gid in graph_ids:
        g = repo.graph(gid)
        offsets.append(offset)
        vertices.extend((v + offset, l) for v, l in g.vertices())
        edges.extend((u + offset, v + offset, el) for u, v, el in g.edges())
        offset += g.vertex_count
    return Assembly(tuple(graph_ids), Graph(vertices, edges), tuple(offsets))


class Morphism:
    """A match of (part of) a rule's left graph into an assembled host."""

    __slots__ = ("assembly", "vertex_map")

    def __init__(self, assembly: Assembly, vertex_map: dict[int, int]):
        self.assembly = assembly
        self.vertex_map = vertex_map

    def host_index(self, rule_vid: int) -> int:
        """Which copy of the host multiset the image of rule_vid lies in."""
        return self.assembly.copy_of(self.vertex_map[rule_vid])

    def touched_copies(self) -> set[int]:
        return {self.assembly.copy_of(v) for v in self.vertex_map.values()}

    def edge_map(self, rule: Rule) -> dict[tuple[int, int], tuple[int, int]]:
        """Induced map on left-graph edges."""
        m = self.vertex_map
        return {(u, v): _edge_key(m[u], m[v])
                for (u, v), re in rule.edges.items()
                if re.kind in (LEFT, CONTEXT) and u in m and v in m}

    def __repr__(self) -> str:
        return f"Morphism({self.vertex_map})"


class MatchCache:
    """Memoized embeddings of rule left components into stored graphs."""

    def __init__(self) -> None:
        self._data: dict[tuple, tuple[dict[int, int], ...]] = {}

    def embeddings(self, rule: Rule, comp_idx: int, gid: int,
                   repo: GraphRepository) -> tuple[dict[int, int], ...]:
        key = (rule, comp_idx, gid)
        cached = self._data.get(key)
        if cached is None:
            pattern = rule.left_components()[comp_idx]
            cached = tuple(enumerate_embeddings(pattern, repo.graph(gid)))
            self._data[key] = cached
        return cached


@dataclass(frozen=True)
class Derivation:
    """One proper derivation: inputs => outputs under a rule at a match."""

    rule: Rule
    inputs: tuple[int, ...]        # graph ids with multiplicity, sorted
    outputs: tuple[int, ...]       # graph ids with multiplicity, sorted
    match: Morphism
    atom_map: dict[tuple[int, int], tuple[int, int]] | None

    def __post_init__(self):
        touched = self.match.touched_copies()
        if touched != set(range(len(self.match.assembly.graph_ids))):
            raise ValueError("derivation is not proper: untouched input component")

    @property
    def key(self) -> tuple:
        """Dedup key: derivations differing only in the match are duplicates."""
        return (self.rule.name, self.inputs, self.outputs)


@dataclass(frozen=True)
class ApplyResult:
    outputs: tuple[int, ...]
    # raw output vertex id -> (output position, stored vertex id)
    vertex_fates: dict[int, tuple[int, int]]


def validate_match(rule: Rule, host: Graph, vertex_map: dict[int, int]) -> bool:
    """Check vertex_map is an injective label/edge-preserving match of L."""
    left = rule.left_graph()
    images = set()
    for vid in left.vertex_ids():
        m = vertex_map.get(vid)
        if m is None or m in images or not host.has_vertex(m):
            return False
        if host.label(m) != left.label(vid):
            return False
        images.add(m)
    for u, v, el in left.edges():
        mu, mv = vertex_map[u], vertex_map[v]
        if not host.has_edge(mu, mv) or host.edge_label(mu, mv) != el:
            return False
    return True


def apply_at(rule: Rule, assembly: Assembly, vertex_map: dict[int, int],
             repo: GraphRepository, validate: bool = True) -> ApplyResult | None:
    """Apply rule at a full match; None on dangling or simplicity rejection.

    The preserved part keeps its host vertex ids; created vertices get
    fresh ids.  Output components are interned in ascending-raw-id order.
    """
    host = assembly.graph
    if validate and not validate_match(rule, host, vertex_map):
        raise ValueError("vertex map is not a match of the rule's left graph")

    deleted_vertices = {vertex_map[vid] for vid, rv in rule.vertices.items()
                        if rv.kind == LEFT}
    left_edge_images = set()
    deleted_edge_images = set()
    for (u, v), re in rule.edges.items():
        if re.kind in (LEFT, CONTEXT):
            key = _edge_key(vertex_map[u], vertex_map[v])
            left_edge_images.add(key)
            if re.kind == LEFT:
                deleted_edge_images.add(key)

    # Dangling condition: every host edge at a deleted vertex must be the
    # image of a left-graph edge (and is then itself deleted).
    for d in deleted_vertices:
        for n in host.neighbors(d):
            if _edge_key(d, n) not in left_edge_images:
                return None

    labels: dict[int, str] = {}
    for vid, label in host.vertices():
        if vid not in deleted_vertices:
            labels[vid] = label
    created: dict[int, int] = {}
    next_id = max(labels, default=-1) + 1
    for vid in sorted(rule.vertices):
        rv = rule.vertices[vid]
        if rv.kind == CONTEXT and rv.left_label != rv.right_label:
            labels[vertex_map[vid]] = rv.right_label
        elif rv.kind == RIGHT:
            created[vid] = next_id
            labels[next_id] = rv.right_label
            next_id += 1

    out_edges: dict[tuple[int, int], str] = {}
    for u, v, el in host.edges():
        if u in deleted_vertices or v in deleted_vertices:
            continue
        if (u, v) in deleted_edge_images:
            continue
        out_edges[(u, v)] = el
    for (u, v), re in rule.edges.items():
        if re.kind == CONTEXT and re.left_label != re.right_label:
            out_edges[_edge_key(vertex_map[u], vertex_map[v])] = re.right_label
    for (u, v), re in rule.edges.items():
        if re.kind != RIGHT:
            continue
        mu = created.get(u, vertex_map.get(u))
        mv = created.get(v, vertex_map.get(v))
        key = _edge_key(mu, mv)
        if key in out_edges:
            return None  # created edge would parallel an existing one
        out_edges[key] = re.right_label

    result = Graph(labels.items(),
                   [(u, v, el) for (u, v), el in out_edges.items()])
    outputs: list[int] = []
    fates: dict[int, tuple[int, int]] = {}
    for pos, comp in enumerate(result.connected_components()):
        gid, _, vmap = repo.intern_mapped(comp)
        outputs.append(gid)
        for raw, stored in vmap.items():
            fates[raw] = (pos, stored)
    return ApplyResult(tuple(outputs), fates)


def _atom_map(rule: Rule, assembly: Assembly, result: ApplyResult
              ) -> dict[tuple[int, int], tuple[int, int]] | None:
    """(input position, vertex) -> (output position, vertex) for chemical rules.

    Chemical rules preserve every host vertex, so each union vertex has a
    fate in exactly one output component.
    """
    if not rule.is_chemical:
        return None
    total = assembly.graph.vertex_count
    bounds = assembly.offsets + (total,)
    mapping: dict[tuple[int, int], tuple[int, int]] = {}
    for i in range(len(assembly.graph_ids)):
        for svid in range(bounds[i + 1] - bounds[i]):
            mapping[(i, svid)] = result.vertex_fates[bounds[i] + svid]
    return mapping


class BindError(ValueError):
    pass


@dataclass(frozen=True)
class BoundCopy:
    graph_id: int
    components: frozenset[int]
    vertex_map: tuple[tuple[int, int], ...]  # rule vid -> stored vid, sorted


class PartialRule:
    """A rule with some left components bound to host graph content.

    Each bound copy fixes a nonempty set of left components and an injective
    merged embedding into one stored graph.  When no components remain the
    partial rule is complete and encodes a full derivation.
    """

    __slots__ = ("rule", "bound", "_remaining")

    def __init__(self, rule: Rule, bound: tuple[BoundCopy, ...] = ()):
        self.rule = rule
        self.bound = bound
        taken: set[int] = set()
        for bc in bound:
            taken |= bc.components
        self._remaining = tuple(i for i in range(len(rule.left_components()))
                                if i not in taken)

    @property
    def remaining_components(self) -> tuple[int, ...]:
        return self._remaining

    @property
    def complete(self) -> bool:
        return not self._remaining

    def bound_graph_ids(self) -> tuple[int, ...]:
        return tuple(bc.graph_id for bc in self.bound)

    def right_graph(self, repo: GraphRepository) -> Graph:
        """The combined right side: transformed bound hosts glued with the
        part of the rule's right graph not yet identified with host content."""
        assembly = assemble(repo, self.bound_graph_ids())
        host = assembly.graph
        vmap: dict[int, int] = {}
        for i, bc in enumerate(self.bound):
            for rv, sv in bc.vertex_map:
                vmap[rv] = sv + assembly.offsets[i]

        deleted = {vmap[vid] for vid, rv in self.rule.vertices.items()
                   if rv.kind == LEFT and vid in vmap}
        deleted_edges = {_edge_key(vmap[u], vmap[v])
                         for (u, v), re in self.rule.edges.items()
                         if re.kind == LEFT and u in vmap and v in vmap}
        labels = {v: l for v, l in host.vertices() if v not in deleted}
        for vid, rv in self.rule.vertices.items():
            if rv.kind == CONTEXT and vid in vmap and rv.left_label != rv.right_label:
                labels[vmap[vid]] = rv.right_label
        edges = {}
        for u, v, el in host.edges():
            if u in deleted or v in deleted or (u, v) in deleted_edges:
                continue
            edges[(u, v)] = el
        for (u, v), re in self.rule.edges.items():
            if re.kind == CONTEXT and u in vmap and v in vmap \
                    and re.left_label != re.right_label:
                edges[_edge_key(vmap[u], vmap[v])] = re.right_label

        # Unbound rule vertices of the right side live beside the host part.
        base = max(labels, default=-1) + 1
        fresh: dict[int, int] = {}
        for vid in sorted(self.rule.vertices):
            rv = self.rule.vertices[vid]
            if rv.kind == RIGHT or (rv.kind == CONTEXT and vid not in vmap):
                fresh[vid] = base + vid
                labels[base + vid] = rv.right_label
        for (u, v), re in self.rule.edges.items():
            if re.kind == CONTEXT and (u not in vmap or v not in vmap):
                mu = fresh.get(u, vmap.get(u))
                mv = fresh.get(v, vmap.get(v))
                edges[_edge_key(mu, mv)] = re.right_label
            elif re.kind == RIGHT:
                mu = fresh.get(u, vmap.get(u))
                mv = fresh.get(v, vmap.get(v))
                key = _edge_key(mu, mv)
                if key in edges:
                    raise BindError("bound right side is not simple")
                edges[key] = re.right_label
        return Graph(labels.items(), [(u, v, el) for (u, v), el in edges.items()])

    def __repr__(self) -> str:
        done = len(self.rule.left_components()) - len(self._remaining)
        return (f"PartialRule({self.rule.name!r}, "
                f"{done}/{len(self.rule.left_components())} components bound)")


def _copy_viable(rule: Rule, vmap: dict[int, int], g: Graph) -> bool:
    """Copy-local gluing checks for one bound copy.

    A binding that deletes a vertex with an unmatched incident edge, or
    creates an edge that would parallel a surviving host edge inside this
    copy, can never complete into a valid derivation.
    """
    left_images = set()
    deleted_images = set()
    for (u, v), re in rule.edges.items():
        if re.kind in (LEFT, CONTEXT) and u in vmap and v in vmap:
            key = _edge_key(vmap[u], vmap[v])
            left_images.add(key)
            if re.kind == LEFT:
                deleted_images.add(key)
    for vid, rv in rule.vertices.items():
        if rv.kind == LEFT and vid in vmap:
            d = vmap[vid]
            for n in g.neighbors(d):
                if _edge_key(d, n) not in left_images:
                    return False
    for (u, v), re in rule.edges.items():
        if re.kind == RIGHT and u in vmap and v in vmap:
            key = _edge_key(vmap[u], vmap[v])
            if g.has_edge(*key) and key not in deleted_images:
                return False
    return True


def _merged_component_maps(rule: Rule, comp_indices: Sequence[int], gid: int,
                           repo: GraphRepository, cache: MatchCache
                           ) -> Iterator[dict[int, int]]:
    """Injective merges of one embedding per component into stored graph gid."""
    per_comp = [cache.embeddings(rule, ci, gid, repo) for ci in comp_indices]
    if any(not maps for maps in per_comp):
        return
    merged: dict[int, int] = {}
    used: set[int] = set()

    def descend(i: int) -> Iterator[dict[int, int]]:
        if i == len(per_comp):
            yield dict(merged)
            return
        for m in per_comp[i]:
            if any(v in used for v in m.values()):
                continue
            merged.update(m)
            used.update(m.values())
            yield from descend(i + 1)
            for k, v in m.items():
                del merged[k]
                used.discard(v)

    yield from descend(0)


def _bind_copy(partial: PartialRule, gid: int, comp_indices: tuple[int, ...],
               repo: GraphRepository, cache: MatchCache) -> list[PartialRule]:
    rule = partial.rule
    g = repo.graph(gid)
    out = []
    for vmap in _merged_component_maps(rule, comp_indices, gid, repo, cache):
        if not _copy_viable(rule, vmap, g):
            continue
        bc = BoundCopy(gid, frozenset(comp_indices), tuple(sorted(vmap.items())))
        out.append(PartialRule(rule, partial.bound + (bc,)))
    return out


def _nonempty_subsets(items: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    for mask in range(1, 1 << len(items)):
        yield tuple(items[i] for i in range(len(items)) if mask >> i & 1)


def bind_graph(rule_or_partial: Rule | PartialRule, gid: int,
               repo: GraphRepository, cache: MatchCache | None = None
               ) -> list[PartialRule]:
    """Bind one more host graph: all nonempty subsets of the remaining left
    components, with every injective merged embedding into the graph.

    Bindings violating the gluing conditions locally (dangling deletion,
    non-simple creation inside the copy) are dropped: they can never extend
    to a valid derivation.  Partial rules with no remaining components are
    complete and encode full derivations.
    """
    partial = (rule_or_partial if isinstance(rule_or_partial, PartialRule)
               else PartialRule(rule_or_partial))
    cache = cache or MatchCache()
    results: list[PartialRule] = []
    for subset in _nonempty_subsets(partial.remaining_components):
        results.extend(_bind_copy(partial, gid, subset, repo, cache))
    return results


def complete_derivation(partial: PartialRule, repo: GraphRepository
                        ) -> Derivation | None:
    """Turn a complete partial rule into a derivation by applying the rule."""
    if not partial.complete:
        raise BindError("partial rule still has unbound components")
    assembly = assemble(repo, partial.bound_graph_ids())
    vertex_map: dict[int, int] = {}
    for i, bc in enumerate(partial.bound):
        offset = assembly.offsets[i]
        for rv, sv in bc.vertex_map:
            vertex_map[rv] = sv + offset
    result = apply_at(partial.rule, assembly, vertex_map, repo, validate=False)
    if result is None:
        return None
    return Derivation(
        rule=partial.rule,
        inputs=tuple(sorted(assembly.graph_ids)),
        outputs=tuple(sorted(result.outputs)),
        match=Morphism(assembly, vertex_map),
        atom_map=_atom_map(partial.rule, assembly, result),
    )


def enumerate_proper_derivations(
        rule: Rule,
        universe: Sequence[int],
        required: Sequence[int] = (),
        repo: GraphRepository | None = None,
        cache: MatchCache | None = None,
        max_components: int | None = None,
        left_filter: Callable[[tuple[int, ...]], bool] | None = None,
) -> list[Derivation]:
    """All proper derivations with inputs drawn (with repetition) from the
    universe, every input component matched, and - when required is nonempty -
    at least one input from required.

    Binding starts at the required graphs and extends over the universe, so
    work is proportional to what the required set can actually initiate.
    Derivations agreeing on (rule, input classes, output classes) are
    deduplicated; discovery order is deterministic.
    """
    if repo is None:
        raise ValueError("a graph repository is required")
    cache = cache or MatchCache()
    comps = rule.left_components()
    k = len(comps)
    if k == 0:
        return []
    cap = min(max_components, k) if max_components else k
    universe = list(universe)
    required = list(required)
    if not set(required) <= set(universe):
        raise ValueError("required graphs must be part of the universe")

    found: dict[tuple, Derivation] = {}

    def finish(partial: PartialRule) -> None:
        inputs = tuple(sorted(partial.bound_graph_ids()))
        if left_filter is not None and not left_filter(inputs):
            return
        d = complete_derivation(partial, repo)
        if d is not None and d.key not in found:
            found[d.key] = d

    def extend(partial: PartialRule) -> None:
        remaining = partial.remaining_components
        if not remaining:
            finish(partial)
            return
        if len(partial.bound) >= cap:
            return
        first, rest = remaining[0], remaining[1:]
        for tail in _subsets_including_empty(rest):
            subset = (first,) + tail
            for gid in universe:
                for nxt in _bind_copy(partial, gid, subset, repo, cache):
                    extend(nxt)

    empty = PartialRule(rule)
    if required:
        all_comps = tuple(range(k))
        for start_gid in required:
            for subset in _nonempty_subsets(all_comps):
                for partial in _bind_copy(empty, start_gid, subset, repo, cache):
                    extend(partial)
    else:
        for start_gid in universe:
            rest = tuple(range(1, k))
            for tail in _subsets_including_empty(rest):
                subset = (0,) + tail
                for partial in _bind_copy(empty, start_gid, subset, repo, cache):
                    extend(partial)
    return list(found.values())


def _subsets_including_empty(items: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    for mask in range(1 << len(items)):
        yield tuple(items[i] for i in range(len(items)) if mask >> i & 1)

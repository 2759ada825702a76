"""The derivation hypergraph: accumulated rewriting history over graph classes.

Vertices are interned graph ids; hyperedges are deduplicated derivations
with stoichiometric multiplicities on both sides.  Exports follow the
bipartite drawing convention: a rule application becomes an intermediate
box node with one arc per multiplicity unit, except 1-to-1 derivations,
which are drawn as a single labeled arc.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

from gstrat.graphs import GraphRepository, serialize_graph
from gstrat.rewrite import Derivation


def _multiset(ids: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    counts = Counter(ids)
    return tuple(sorted(counts.items()))


@dataclass(frozen=True)
class HyperEdge:
    inputs: tuple[tuple[int, int], ...]   # (graph id, multiplicity), sorted
    rule_name: str
    outputs: tuple[tuple[int, int], ...]

    @property
    def is_one_to_one(self) -> bool:
        return (len(self.inputs) == 1 and self.inputs[0][1] == 1
                and len(self.outputs) == 1 and self.outputs[0][1] == 1)


class DerivationGraph:
    """Single-writer accumulator of derivations as a directed multihypergraph."""

    def __init__(self) -> None:
        self._vertices: dict[int, None] = {}
        self._edges: list[HyperEdge] = []
        self._keys: set[tuple] = set()

    @property
    def vertex_ids(self) -> list[int]:
        return list(self._vertices)

    @property
    def edges(self) -> list[HyperEdge]:
        return list(self._edges)

    def __len__(self) -> int:
        return len(self._edges)

    def record(self, derivation: Derivation) -> bool:
        """Insert the derivation's hyperedge; False if already present."""
        key = derivation.key
        if key in self._keys:
            return False
        self._keys.add(key)
        edge = HyperEdge(_multiset(derivation.inputs), derivation.rule.name,
                         _multiset(derivation.outputs))
        for gid in derivation.inputs + derivation.outputs:
            self._vertices.setdefault(gid, None)
        self._edges.append(edge)
        return True

    def to_dot(self, repo: GraphRepository) -> str:
        lines = ["digraph derivations {"]
        for gid in sorted(self._vertices):
            lines.append(f'  g{gid} [label="{repo.name(gid)}"];')
        for i, edge in enumerate(self._edges):
            if edge.is_one_to_one:
                src = edge.inputs[0][0]
                dst = edge.outputs[0][0]
                lines.append(f'  g{src} -> g{dst} [label="{edge.rule_name}"];')
                continue
            lines.append(f'  e{i} [shape=box, label="{edge.rule_name}"];')
            for gid, count in edge.inputs:
                for _ in range(count):
                    lines.append(f"  g{gid} -> e{i};")
            for gid, count in edge.outputs:
                for _ in range(count):
                    lines.append(f"  e{i} -> g{gid};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self, repo: GraphRepository) -> str:
        graphs = [{"id": gid,
                   "name": repo.name(gid),
                   "gml": serialize_graph(repo.graph(gid), repo.name(gid))}
                  for gid in sorted(self._vertices)]
        edges = [{"in": [{"id": gid, "count": count} for gid, count in e.inputs],
                  "rule": e.rule_name,
                  "out": [{"id": gid, "count": count} for gid, count in e.outputs]}
                 for e in self._edges]
        return json.dumps({"format": 1, "graphs": graphs, "edges": edges},
                          indent=2) + "\n"

    def find_path(self, source: int, target: int,
                  free_inputs: tuple[int, ...] = (),
                  edge_filter=None) -> list[HyperEdge] | None:
        """A shortest sequence of hyperedges leading from source to target.

        An edge can fire once all its inputs are reached; the search starts
        from the source plus the designated always-available inputs.  An
        edge_filter callable restricts which hyperedges may be used.  Returns
        the firing sequence in dependency order, the empty list when source
        equals target, or None when the target is unreachable.
        """
        if source == target:
            return []
        edges = self._edges
        if edge_filter is not None:
            edges = [e for e in edges if edge_filter(e)]
        reached = {source, *free_inputs}
        parent: dict[int, HyperEdge] = {}
        while True:
            fired_any = False
            newly: list[int] = []
            for edge in edges:
                if not all(gid in reached for gid, _ in edge.inputs):
                    continue
                for gid, _ in edge.outputs:
                    if gid not in reached and gid not in parent:
                        parent[gid] = edge
                        newly.append(gid)
                        fired_any = True
            if not fired_any:
                return None
            reached.update(newly)
            if target in reached:
                break

        path: list[HyperEdge] = []
        seen_edges: set[int] = set()

        def build(gid: int) -> None:
            if gid == source or gid in free_inputs:
                return
            edge = parent[gid]
            if id(edge) in seen_edges:
                return
            seen_edges.add(id(edge))
            for in_gid, _ in edge.inputs:
                build(in_gid)
            path.append(edge)

        build(target)
        return path

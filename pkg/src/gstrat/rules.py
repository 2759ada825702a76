"""DPO transformation rules: a span of left, context and right graphs.

A rule is stored as one set of vertices and edges, each element flagged as
left-only (deleted), context (preserved, possibly relabeled) or right-only
(created).  Context elements carry a label pair (left label, right label);
equal labels mean no relabeling.  The left and right graphs are projections
of this structure and must each be valid simple labeled graphs.
"""
from __future__ import annotations

from dataclasses import dataclass

from gstrat import lex
from gstrat.graphs import Graph, GraphError, _edge_key
from gstrat.lex import TokenStream

LEFT = "left"
CONTEXT = "context"
RIGHT = "right"


@dataclass(frozen=True)
class RuleVertex:
    kind: str
    left_label: str | None
    right_label: str | None


@dataclass(frozen=True)
class RuleEdge:
    kind: str
    left_label: str | None
    right_label: str | None


class RuleError(ValueError):
    pass


class Rule:
    """A named DPO rule.  Instances are immutable; equality is identity."""

    def __init__(self, name: str, vertices: dict[int, RuleVertex],
                 edges: dict[tuple[int, int], RuleEdge]):
        self.name = name
        self.vertices = dict(vertices)
        self.edges = {_edge_key(u, v): e for (u, v), e in edges.items()}
        self._left: Graph | None = None
        self._right: Graph | None = None
        self._left_components: tuple[Graph, ...] | None = None

    @classmethod
    def build(cls, name: str,
              left_vertices: list[tuple[int, str]] = (),
              context_vertices: list[tuple[int, str, str]] = (),
              right_vertices: list[tuple[int, str]] = (),
              left_edges: list[tuple[int, int, str]] = (),
              context_edges: list[tuple[int, int, str, str]] = (),
              right_edges: list[tuple[int, int, str]] = ()) -> Rule:
        """Convenience constructor from per-section element lists.

        A vertex pair appearing with both a left and a right edge is a
        delete-plus-create on the same endpoints; since the intermediate
        graph is never observable this is stored as a context relabel.
        """
        vertices: dict[int, RuleVertex] = {}
        for vid, label in left_vertices:
            vertices[vid] = RuleVertex(LEFT, label, None)
        for vid, ll, rl in context_vertices:
            vertices[vid] = RuleVertex(CONTEXT, ll, rl)
        for vid, label in right_vertices:
            vertices[vid] = RuleVertex(RIGHT, None, label)
        edges: dict[tuple[int, int], RuleEdge] = {}
        for u, v, label in left_edges:
            key = _edge_key(u, v)
            if key in edges:
                raise RuleError(f"duplicate left edge {u}-{v}")
            edges[key] = RuleEdge(LEFT, label, None)
        for u, v, ll, rl in context_edges:
            key = _edge_key(u, v)
            if key in edges:
                raise RuleError(f"edge {u}-{v} declared in two sections")
            edges[key] = RuleEdge(CONTEXT, ll, rl)
        for u, v, label in right_edges:
            key = _edge_key(u, v)
            prior = edges.get(key)
            if prior is not None:
                if prior.kind != LEFT:
                    raise RuleError(f"edge {u}-{v} declared in two sections")
                edges[key] = RuleEdge(CONTEXT, prior.left_label, label)
            else:
                edges[key] = RuleEdge(RIGHT, None, label)
        return cls(name, vertices, edges)

    def left_graph(self) -> Graph:
        if self._left is None:
            verts = [(vid, rv.left_label) for vid, rv in self.vertices.items()
                     if rv.kind in (LEFT, CONTEXT)]
            edges = [(u, v, re.left_label) for (u, v), re in self.edges.items()
                     if re.kind in (LEFT, CONTEXT)]
            self._left = Graph(verts, edges)
        return self._left

    def right_graph(self) -> Graph:
        if self._right is None:
            verts = [(vid, rv.right_label) for vid, rv in self.vertices.items()
                     if rv.kind in (CONTEXT, RIGHT)]
            edges = [(u, v, re.right_label) for (u, v), re in self.edges.items()
                     if re.kind in (CONTEXT, RIGHT)]
            self._right = Graph(verts, edges)
        return self._right

    def left_components(self) -> tuple[Graph, ...]:
        """Connected components of the left graph (vertex ids are rule ids)."""
        if self._left_components is None:
            self._left_components = tuple(self.left_graph().connected_components())
        return self._left_components

    def context_vertex_ids(self) -> list[int]:
        return [vid for vid, rv in self.vertices.items() if rv.kind == CONTEXT]

    @property
    def is_chemical(self) -> bool:
        """Vertex-bijective: no vertex is created or deleted."""
        return all(rv.kind == CONTEXT for rv in self.vertices.values())

    def inverted(self) -> Rule:
        """The reverse rule: swap left/right memberships and label pairs."""
        verts = {}
        for vid, rv in self.vertices.items():
            if rv.kind == LEFT:
                verts[vid] = RuleVertex(RIGHT, None, rv.left_label)
            elif rv.kind == RIGHT:
                verts[vid] = RuleVertex(LEFT, rv.right_label, None)
            else:
                verts[vid] = RuleVertex(CONTEXT, rv.right_label, rv.left_label)
        edges = {}
        for key, re in self.edges.items():
            if re.kind == LEFT:
                edges[key] = RuleEdge(RIGHT, None, re.left_label)
            elif re.kind == RIGHT:
                edges[key] = RuleEdge(LEFT, re.right_label, None)
            else:
                edges[key] = RuleEdge(CONTEXT, re.right_label, re.left_label)
        name = (self.name[:-3] if self.name.endswith("^-1")
                else self.name + "^-1")
        return Rule(name, verts, edges)

    def same_structure(self, other: Rule) -> bool:
        return self.vertices == other.vertices and self.edges == other.edges

    def __repr__(self) -> str:
        return f"Rule({self.name!r}, {len(self.vertices)} vertices, {len(self.edges)} edges)"


def validate_rule(rule: Rule, chemical_mode: bool = False) -> list[str]:
    """Structural diagnostics; empty list means the rule is well-formed."""
    problems: list[str] = []
    for (u, v), re in rule.edges.items():
        for endpoint in (u, v):
            if endpoint not in rule.vertices:
                problems.append(f"edge {u}-{v} references undeclared vertex {endpoint}")
                continue
            vkind = rule.vertices[endpoint].kind
            if re.kind == CONTEXT and vkind != CONTEXT:
                problems.append(f"context edge {u}-{v} touches non-context vertex {endpoint}")
            if re.kind == LEFT and vkind == RIGHT:
                problems.append(f"left edge {u}-{v} touches right-only vertex {endpoint}")
            if re.kind == RIGHT and vkind == LEFT:
                problems.append(f"right edge {u}-{v} touches left-only vertex {endpoint}")
    if not problems:
        try:
            left = rule.left_graph()
            if left.vertex_count == 0:
                problems.append("rule has an empty left side")
            rule.right_graph()
        except GraphError as err:
            problems.append(f"invalid rule side: {err}")
    if chemical_mode:
        for vid, rv in rule.vertices.items():
            if rv.kind == LEFT:
                problems.append(f"chemical rule deletes vertex {vid}")
            elif rv.kind == RIGHT:
                problems.append(f"chemical rule creates vertex {vid}")
    return problems


# -- text format --------------------------------------------------------------
#
# rule <name> {
#   left    { v <id> "<label>"; e <id> <id> "<label>"; }
#   context { v <id> "<L>" "<R>"; e <id> <id> "<L>" "<R>"; }
#   right   { v <id> "<label>"; e <id> <id> "<label>"; }
# }
#
# Vertex ids are shared across sections.  A context entry with a single
# label keeps that label on both sides.


def parse_rule_body(ts: TokenStream, name: str) -> Rule:
    vertices: dict[int, RuleVertex] = {}
    left_edges: list[tuple[int, int, str]] = []
    context_edges: list[tuple[int, int, str, str]] = []
    right_edges: list[tuple[int, int, str]] = []
    section_edges: dict[str, set[tuple[int, int]]] = {LEFT: set(), CONTEXT: set(),
                                                      RIGHT: set()}
    seen_sections: set[str] = set()
    while not ts.at(lex.PUNCT, "}"):
        section_tok = ts.expect(lex.NAME)
        section = section_tok.value
        if section not in (LEFT, CONTEXT, RIGHT):
            raise section_tok.error(f"expected a rule section, got {section!r}")
        if section in seen_sections:
            raise section_tok.error(f"duplicate section {section!r}")
        seen_sections.add(section)
        ts.expect(lex.PUNCT, "{")
        while not ts.at(lex.PUNCT, "}"):
            tok = ts.expect(lex.NAME)
            if tok.value == "v":
                vid = ts.expect_int()
                first = ts.expect(lex.STRING).value
                second = first
                if section == CONTEXT and ts.at(lex.STRING):
                    second = ts.next().value
                if vid in vertices:
                    raise tok.error(f"duplicate rule vertex id {vid}")
                if section == LEFT:
                    vertices[vid] = RuleVertex(LEFT, first, None)
                elif section == RIGHT:
                    vertices[vid] = RuleVertex(RIGHT, None, first)
                else:
                    vertices[vid] = RuleVertex(CONTEXT, first, second)
            elif tok.value == "e":
                u = ts.expect_int()
                v = ts.expect_int()
                first = ts.expect(lex.STRING).value
                second = first
                if section == CONTEXT and ts.at(lex.STRING):
                    second = ts.next().value
                if u == v:
                    raise tok.error(f"self-loop on rule vertex {u}")
                key = _edge_key(u, v)
                if key in section_edges[section]:
                    raise tok.error(f"duplicate rule edge {u}-{v}")
                section_edges[section].add(key)
                if section == LEFT:
                    left_edges.append((u, v, first))
                elif section == RIGHT:
                    right_edges.append((u, v, first))
                else:
                    context_edges.append((u, v, first, second))
            else:
                raise tok.error(f"expected 'v' or 'e', got {tok.value!r}")
            ts.expect(lex.PUNCT, ";")
        ts.expect(lex.PUNCT, "}")
    try:
        rule = Rule.build(name, left_edges=left_edges, context_edges=context_edges,
                          right_edges=right_edges)
    except RuleError as err:
        raise lex.ParseError(str(err), 1, 1) from err
    return Rule(name, vertices, rule.edges)


def parse_rules(text: str) -> dict[str, Rule]:
    """Parse a rule file into an ordered name -> rule mapping."""
    ts = TokenStream(lex.tokenize(text))
    rules: dict[str, Rule] = {}
    while not ts.at(lex.EOF):
        kw = ts.expect(lex.NAME, "rule")
        name = ts.expect(lex.NAME).value
        if name in rules:
            raise kw.error(f"duplicate rule name {name!r}")
        ts.expect(lex.PUNCT, "{")
        rules[name] = parse_rule_body(ts, name)
        ts.expect(lex.PUNCT, "}")
    return rules


def format_rule(rule: Rule) -> str:
    lines = [f"rule {rule.name} {{"]
    for section in (LEFT, CONTEXT, RIGHT):
        entries: list[str] = []
        for vid in sorted(rule.vertices):
            rv = rule.vertices[vid]
            if rv.kind != section:
                continue
            if section == LEFT:
                entries.append(f"v {vid} {lex.quote(rv.left_label)};")
            elif section == RIGHT:
                entries.append(f"v {vid} {lex.quote(rv.right_label)};")
            elif rv.left_label == rv.right_label:
                entries.append(f"v {vid} {lex.quote(rv.left_label)};")
            else:
                entries.append(
                    f"v {vid} {lex.quote(rv.left_label)} {lex.quote(rv.right_label)};")
        for (u, v) in sorted(rule.edges):
            re = rule.edges[(u, v)]
            if re.kind != section:
                continue
            if section == LEFT:
                entries.append(f"e {u} {v} {lex.quote(re.left_label)};")
            elif section == RIGHT:
                entries.append(f"e {u} {v} {lex.quote(re.right_label)};")
            elif re.left_label == re.right_label:
                entries.append(f"e {u} {v} {lex.quote(re.left_label)};")
            else:
                entries.append(
                    f"e {u} {v} {lex.quote(re.left_label)} {lex.quote(re.right_label)};")
        if entries:
            lines.append(f"  {section} {{ " + " ".join(entries) + " }")
    lines.append("}")
    return "\n".join(lines) + "\n"

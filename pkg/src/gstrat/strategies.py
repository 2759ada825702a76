"""Graph states and the strategy combinator algebra.

A graph state is an ordered universe of interned graph ids together with an
ordered subset that drives rule application: every derivation must consume
at least one subset graph.  Strategies are state-to-state functions built
from rule application, parallel and sequential composition, repetition,
revive, derivation predicates, filter/sort/take/add and the alternate
application mode.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from collections.abc import Sequence as SequenceOf
from typing import Callable

from gstrat.derivations import DerivationGraph
from gstrat.graphs import Graph, GraphRepository
from gstrat.rewrite import MatchCache, enumerate_proper_derivations
from gstrat.rules import Rule

DEFAULT_REPEAT_CAP = 2**31 - 1

#: Predicate over one derivation side: (rule, graph ids with multiplicity, ctx).
DerivationPredicate = Callable[[Rule, tuple[int, ...], "EvalContext"], bool]
#: Predicate for filters: (graph id, state, ctx).
GraphPredicate = Callable[[int, "GraphState", "EvalContext"], bool]
#: Sort key for sort strategies: (graph id, ctx) -> comparable.
SortKey = Callable[[int, "EvalContext"], object]


class StrategyError(RuntimeError):
    """Evaluation failure, annotated with the strategy-tree path."""


@dataclass(frozen=True)
class GraphState:
    universe: tuple[int, ...]
    subset: tuple[int, ...]

    def __post_init__(self):
        u = set(self.universe)
        s = set(self.subset)
        if len(u) != len(self.universe) or len(s) != len(self.subset):
            raise ValueError("graph state lists must not contain duplicates")
        if not s <= u:
            raise ValueError("subset must be contained in the universe")

    def same_sets(self, other: GraphState) -> bool:
        """Fixed-point comparison: order-insensitive equality of both lists."""
        return (set(self.universe) == set(other.universe)
                and set(self.subset) == set(other.subset))


EMPTY_STATE = GraphState((), ())


@dataclass
class RunStats:
    new_graphs: int = 0
    derivations: int = 0


class EvalContext:
    """Mutable evaluation environment threaded through a strategy run."""

    def __init__(self, repo: GraphRepository | None = None,
                 sink: DerivationGraph | None = None,
                 max_repeat: int | None = None,
                 max_components: int | None = None):
        self.repo = repo if repo is not None else GraphRepository()
        self.sink = sink if sink is not None else DerivationGraph()
        self.cache = MatchCache()
        self.stats = RunStats()
        self.alt_mode = False
        self.left_predicates: list[DerivationPredicate] = []
        self.right_predicates: list[DerivationPredicate] = []
        self.names: dict[str, int] = {}
        if max_repeat is None:
            raw = os.environ.get("GSTRAT_MAX_REPEAT", "")
            try:
                max_repeat = int(raw) if raw else DEFAULT_REPEAT_CAP
            except ValueError:
                raise ValueError(
                    f"GSTRAT_MAX_REPEAT must be an integer, got {raw!r}") from None
        self.max_repeat = max_repeat
        self.max_components = max_components
        self._consumed_stack: list[set[int]] = [set()]
        self._known: set[int] = set()
        self._path: list[str] = []

    # -- graph accounting ----------------------------------------------------

    def register_known(self, gid: int) -> None:
        """Mark a graph as already known (inputs, additions): not counted new."""
        self._known.add(gid)

    def count_discovered(self, gid: int) -> None:
        if gid not in self._known:
            self._known.add(gid)
            self.stats.new_graphs += 1

    # -- consumed tracking for revive ------------------------------------------

    def push_consumed_frame(self) -> None:
        self._consumed_stack.append(set())

    def pop_consumed_frame(self) -> set[int]:
        frame = self._consumed_stack.pop()
        self._consumed_stack[-1] |= frame
        return frame

    def mark_consumed(self, gids: SequenceOf[int]) -> None:
        self._consumed_stack[-1].update(gids)

    # -- error paths -----------------------------------------------------------

    def enter(self, label: str) -> None:
        self._path.append(label)

    def leave(self) -> None:
        self._path.pop()

    def strategy_path(self) -> str:
        return " -> ".join(self._path) if self._path else "<top>"


class Strategy:
    """Base class: a function from graph states to graph states."""

    def label(self) -> str:
        return type(self).__name__

    def apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        ctx.enter(self.label())
        try:
            return self._apply(state, ctx)
        except StrategyError:
            raise
        except Exception as err:
            raise StrategyError(f"at {ctx.strategy_path()}: {err}") from err
        finally:
            ctx.leave()

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        raise NotImplementedError


def _ordered_union(base: SequenceOf[int], extra: SequenceOf[int]) -> tuple[int, ...]:
    seen = set(base)
    out = list(base)
    for gid in extra:
        if gid not in seen:
            seen.add(gid)
            out.append(gid)
    return tuple(out)


class RuleApplication(Strategy):
    """Apply one rule to the state: subset-driven discovery.

    New output graphs extend the universe in discovery order.  By default
    the resulting subset holds only graphs unknown to the input universe;
    in alternate mode it holds every derived graph.
    """

    def __init__(self, rule: Rule):
        self.rule = rule

    def label(self) -> str:
        return f"rule {self.rule.name}"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        if not state.subset:
            return GraphState(state.universe, ())
        left_preds = list(ctx.left_predicates)
        left_filter = None
        if left_preds:
            def left_filter(inputs: tuple[int, ...]) -> bool:
                return all(p(self.rule, inputs, ctx) for p in left_preds)
        derivations = enumerate_proper_derivations(
            self.rule, state.universe, state.subset,
            repo=ctx.repo, cache=ctx.cache,
            max_components=ctx.max_components,
            left_filter=left_filter)
        universe_set = set(state.universe)
        derived: list[int] = []
        derived_seen: set[int] = set()
        for d in derivations:
            if not all(p(self.rule, d.outputs, ctx)
                       for p in ctx.right_predicates):
                continue
            if ctx.sink.record(d):
                ctx.stats.derivations += 1
            ctx.mark_consumed(d.inputs)
            for gid in d.outputs:
                if gid not in derived_seen:
                    derived_seen.add(gid)
                    derived.append(gid)
        for gid in derived:
            ctx.count_discovered(gid)
        universe = _ordered_union(state.universe, derived)
        if ctx.alt_mode:
            subset = tuple(derived)
        else:
            subset = tuple(g for g in derived if g not in universe_set)
        return GraphState(universe, subset)


class Sequence(Strategy):
    """Left-to-right composition; the empty sequence is the identity."""

    def __init__(self, parts: SequenceOf[Strategy]):
        self.parts = tuple(parts)

    def label(self) -> str:
        return "sequence"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        for part in self.parts:
            state = part.apply(state, ctx)
        return state


class Parallel(Strategy):
    """Evaluate every branch on the same input; union the results in branch
    order, deduplicating by first occurrence."""

    def __init__(self, branches: SequenceOf[Strategy]):
        self.branches = tuple(branches)

    def label(self) -> str:
        return "parallel"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        universe: tuple[int, ...] = ()
        subset: tuple[int, ...] = ()
        for branch in self.branches:
            result = branch.apply(state, ctx)
            universe = _ordered_union(universe, result.universe)
            subset = _ordered_union(subset, result.subset)
        return GraphState(universe, subset)


class Repeat(Strategy):
    """Iterate the inner strategy to a fixed point, an empty subset, or the
    bound.  On a fixed point that state is returned; when the subset of the
    next state is empty, the previous state is returned; Repeat(_, 0) is the
    identity.  An unset bound uses the context's repetition cap."""

    def __init__(self, inner: Strategy, count: int | None = None):
        if count is not None and count < 0:
            raise ValueError("repeat bound must be non-negative")
        self.inner = inner
        self.count = count

    def label(self) -> str:
        bound = "" if self.count is None else str(self.count)
        return f"repeat[{bound}]"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        bound = self.count if self.count is not None else ctx.max_repeat
        previous = state
        for _ in range(bound):
            nxt = self.inner.apply(previous, ctx)
            if nxt.same_sets(previous):
                return nxt
            if not nxt.subset:
                return previous
            previous = nxt
        return previous


class Revive(Strategy):
    """Run the inner strategy, then put back the input-subset graphs that
    survived in the universe and were not consumed by any inner derivation."""

    def __init__(self, inner: Strategy):
        self.inner = inner

    def label(self) -> str:
        return "revive"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        ctx.push_consumed_frame()
        try:
            result = self.inner.apply(state, ctx)
        finally:
            consumed = ctx.pop_consumed_frame()
        universe_set = set(result.universe)
        subset = list(result.subset)
        present = set(subset)
        for gid in state.subset:
            if gid in universe_set and gid not in consumed and gid not in present:
                subset.append(gid)
                present.add(gid)
        return GraphState(result.universe, tuple(subset))


class LeftPredicate(Strategy):
    """Require every derivation found inside to satisfy P(rule, inputs)."""

    side = "left"

    def __init__(self, predicate: DerivationPredicate, inner: Strategy):
        self.predicate = predicate
        self.inner = inner

    def label(self) -> str:
        return f"{self.side}Predicate"

    def _stack(self, ctx: EvalContext) -> list[DerivationPredicate]:
        return ctx.left_predicates

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        stack = self._stack(ctx)
        stack.append(self.predicate)
        try:
            return self.inner.apply(state, ctx)
        finally:
            stack.pop()


class RightPredicate(LeftPredicate):
    """Require every derivation found inside to satisfy P(rule, outputs)."""

    side = "right"

    def _stack(self, ctx: EvalContext) -> list[DerivationPredicate]:
        return ctx.right_predicates


class FilterSubset(Strategy):
    def __init__(self, predicate: GraphPredicate):
        self.predicate = predicate

    def label(self) -> str:
        return "filterSubset"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        subset = tuple(g for g in state.subset if self.predicate(g, state, ctx))
        return GraphState(state.universe, subset)


class FilterUniverse(Strategy):
    def __init__(self, predicate: GraphPredicate):
        self.predicate = predicate

    def label(self) -> str:
        return "filterUniverse"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        universe = tuple(g for g in state.universe
                         if self.predicate(g, state, ctx))
        kept = set(universe)
        subset = tuple(g for g in state.subset
                       if g in kept and self.predicate(g, state, ctx))
        return GraphState(universe, subset)


class SortSubset(Strategy):
    def __init__(self, key: SortKey, descending: bool = False):
        self.key = key
        self.descending = descending

    def label(self) -> str:
        return "sortSubset"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        subset = tuple(sorted(state.subset,
                              key=lambda g: self.key(g, ctx),
                              reverse=self.descending))
        return GraphState(state.universe, subset)


class SortUniverse(Strategy):
    def __init__(self, key: SortKey, descending: bool = False):
        self.key = key
        self.descending = descending

    def label(self) -> str:
        return "sortUniverse"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        universe = tuple(sorted(state.universe,
                                key=lambda g: self.key(g, ctx),
                                reverse=self.descending))
        return GraphState(universe, state.subset)


class TakeSubset(Strategy):
    def __init__(self, count: int):
        if count < 0:
            raise ValueError("take bound must be non-negative")
        self.count = count

    def label(self) -> str:
        return f"takeSubset[{self.count}]"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        return GraphState(state.universe, state.subset[:self.count])


class TakeUniverse(Strategy):
    def __init__(self, count: int):
        if count < 0:
            raise ValueError("take bound must be non-negative")
        self.count = count

    def label(self) -> str:
        return f"takeUniverse[{self.count}]"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        universe = state.universe[:self.count]
        kept = set(universe)
        subset = tuple(g for g in state.subset if g in kept)
        return GraphState(universe, subset)


class AddUniverse(Strategy):
    """Append the given graphs (interned on use) to the universe."""

    adds_to_subset = False

    def __init__(self, graphs: SequenceOf[Graph]):
        self.graphs = tuple(graphs)

    def label(self) -> str:
        return "addUniverse"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        ids = []
        for g in self.graphs:
            gid, _ = ctx.repo.intern(g)
            ctx.register_known(gid)
            ids.append(gid)
        universe = _ordered_union(state.universe, ids)
        if not self.adds_to_subset:
            return GraphState(universe, state.subset)
        return GraphState(universe, _ordered_union(state.subset, ids))


class AddSubset(AddUniverse):
    """Append the given graphs to both the universe and the subset."""

    adds_to_subset = True

    def label(self) -> str:
        return "addSubset"


class AltRuleApplication(Strategy):
    """Evaluate the inner strategy with rule applications keeping every
    derived graph in the subset (not only previously unknown ones)."""

    def __init__(self, inner: Strategy):
        self.inner = inner

    def label(self) -> str:
        return "altRuleApp"

    def _apply(self, state: GraphState, ctx: EvalContext) -> GraphState:
        saved = ctx.alt_mode
        ctx.alt_mode = True
        try:
            return self.inner.apply(state, ctx)
        finally:
            ctx.alt_mode = saved

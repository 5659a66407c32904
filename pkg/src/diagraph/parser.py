"""Top-down, depth-first rule solving.

A rule is solved against an inherited context (a tagged set of candidate
objects).  Body clauses run in source order: each one narrows the context
through its context expression, solves its constituent type inside the
narrowed context, prunes candidates with per-clause constraints, then the
search recurses.  Rule-level constraints prune completed tuples, and every
surviving tuple becomes a derived object that is installed in the spatial
index right away so later clauses and rules can query it.

Solving the same type in the same context is memoized, and a derived object
is created once per (type, constituents) signature, so one object can serve
as a constituent of many solutions.

A single parse is single-threaded (it installs derived objects into its
index as it goes); separate diagrams can be parsed concurrently, each with
its own index and state.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .config import EngineConfig
from .constraints import (
    GER_NAMES,
    ConstraintTypeError,
    EvalEnv,
    eval_constraint,
    eval_expr,
    filter_context,
    ger_partition,
    ger_relation,
)
from .errors import ParseEngineError, SearchLimitError
from .geometry import TYPE_NAME_TO_KIND, CharacteristicLengths, characteristic_lengths
from .grammar import Grammar, OrdinaryRule, SetRule, canon, format_expr
from .model import DerivedObject, TaggedSet, leaf_tags
from .spatial import SpatialIndex, build_index

SET_PLACEHOLDER_TAG = -1


@dataclass
class TraceEvent:
    kind: str  # enter / exit / solution / reject / null-bind
    name: str
    detail: dict

    def render(self) -> str:
        inner = " ".join(f"{k}={v}" for k, v in sorted(self.detail.items())
                         if k != "context_tags")
        return f"{self.kind} {self.name} {inner}".rstrip()


def render_trace(events: list[TraceEvent]) -> str:
    return "\n".join(e.render() for e in events)


class ParseState:
    def __init__(self, grammar: Grammar, index: SpatialIndex, env: EvalEnv,
                 trace: bool = False) -> None:
        self.grammar = grammar
        self.index = index
        self.env = env
        self.trace: list[TraceEvent] | None = [] if trace else None
        self.tuples_examined = 0
        self.depth = 0
        self._solve_cache: dict[tuple[str, frozenset[int]], list[DerivedObject]] = {}
        self._derived_cache: dict[tuple, DerivedObject] = {}
        self._next_tag = max((obj.tag for obj in index.all_objects()), default=0) + 1

    def alloc_tag(self) -> int:
        tag = self._next_tag
        self._next_tag += 1
        return tag

    def note(self, kind: str, name: str, **detail) -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(kind, self.grammar.display_name(name), detail))

    def count_tuple(self) -> None:
        self.tuples_examined += 1
        if self.tuples_examined > self.env.config.search_cap:
            raise SearchLimitError(
                f"search cap exceeded: {self.env.config.search_cap} tuples examined")


def solve(type_name: str, context: TaggedSet, state: ParseState) -> list:
    """All objects of `type_name` derivable from the context: primitives are
    filtered by kind, rule names run every alternative in source order."""
    kind = TYPE_NAME_TO_KIND.get(type_name)
    if kind is not None:
        return [obj for obj in context if getattr(obj, "kind", None) == kind]
    key = (type_name, context.tags())
    cached = state._solve_cache.get(key)
    if cached is not None:
        return list(cached)
    alternatives = state.grammar.alternatives(type_name)
    if not alternatives:
        raise ParseEngineError(f"unknown type '{type_name}'")
    if state.trace is not None:
        state.note("enter", type_name, context_size=len(context), depth=state.depth,
                   context_tags=context.tags())
    state.depth += 1
    solutions: list[DerivedObject] = []
    for rule in alternatives:
        if isinstance(rule, SetRule):
            solutions.extend(solve_set_rule(rule, context, state))
        else:
            solutions.extend(solve_rule(rule, context, state))
    solutions = dedupe(solutions)
    state.depth -= 1
    state.note("exit", type_name, solutions=len(solutions), depth=state.depth)
    state._solve_cache[key] = list(solutions)
    return solutions


def solve_rule(rule: OrdinaryRule, context: TaggedSet, state: ParseState) -> list:
    env = state.env
    results: list[DerivedObject] = []

    def step(idx: int, bindings: dict) -> None:
        if idx == len(rule.clauses):
            for expr in rule.constraints:
                if not eval_constraint(expr, bindings, env):
                    state.note("reject", rule.lhs,
                               constraint=format_expr(expr, state.grammar.display))
                    return
            obj = make_derived(rule, bindings, state)
            if obj is not None:
                results.append(obj)
            return
        clause = rule.clauses[idx]
        sub_context = context
        dispatch = clause.name
        share_anchor = None
        if clause.context_form is not None:
            form_kind = clause.context_form[0]
            if form_kind == "type":
                dispatch = clause.context_form[1]
            elif form_kind == "share":
                share_anchor = clause.context_form[1]
            else:
                sub_context = filter_context(clause.context_form[1], bindings,
                                             context, env)
        candidates = solve(dispatch, sub_context, state)
        if share_anchor is not None:
            anchor_obj = bindings.get(share_anchor)
            if anchor_obj is not None:
                anchor_leaves = leaf_tags(anchor_obj)
                candidates = [c for c in candidates if leaf_tags(c) & anchor_leaves]
        surviving = []
        for cand in candidates:
            state.count_tuple()
            trial = dict(bindings)
            trial[clause.name] = cand
            ok = True
            for expr in clause.constraints:
                if not eval_constraint(expr, trial, env):
                    state.note("reject", rule.lhs, candidate=cand.tag,
                               constraint=format_expr(expr, state.grammar.display))
                    ok = False
                    break
            if ok:
                surviving.append(cand)
        if not surviving and clause.name in rule.null_names:
            state.note("null-bind", rule.lhs, constituent=clause.name)
            nxt = dict(bindings)
            nxt[clause.name] = None
            step(idx + 1, nxt)
            return
        for cand in surviving:
            nxt = dict(bindings)
            nxt[clause.name] = cand
            step(idx + 1, nxt)

    step(0, {})
    return results


def solve_set_rule(rule: SetRule, context: TaggedSet, state: ParseState) -> list:
    env = state.env
    elements = solve(rule.element_type, context, state)
    kept = []
    for element in elements:
        bindings = {rule.element_type: element}
        if all(eval_constraint(expr, bindings, env) for expr in rule.element_constraints):
            kept.append(element)
    if not kept:
        return []

    ger_exprs: list[str] = []
    other_exprs: list = []
    for expr in rule.set_constraints:
        name = expr if isinstance(expr, str) else (expr[0] if expr else None)
        if isinstance(name, str) and name in GER_NAMES and (
                isinstance(expr, str) or len(expr) == 1):
            ger_exprs.append(name)
        else:
            other_exprs.append(expr)

    # Elements end up in the same group only if every named relation groups
    # them together (the common refinement of the relation partitions).
    labels: dict[int, list[int]] = {e.tag: [] for e in kept}
    for name in ger_exprs:
        components = ger_partition(kept, ger_relation(name, env), env)
        for comp_id, component in enumerate(components):
            for element in component:
                labels[element.tag].append(comp_id)
    grouped: dict[tuple, list] = {}
    for element in kept:
        grouped.setdefault(tuple(labels[element.tag]), []).append(element)
    groups = sorted(grouped.values(), key=lambda g: min(e.tag for e in g))

    passing = []
    for group in groups:
        state.count_tuple()
        members = tuple(sorted(group, key=lambda e: e.tag))
        proto = _set_object(SET_PLACEHOLDER_TAG, rule, members, state)
        bindings = {rule.lhs: proto, "self": proto}
        ok = True
        for expr in other_exprs:
            if not eval_constraint(expr, bindings, env):
                state.note("reject", rule.lhs,
                           members=tuple(m.tag for m in members),
                           constraint=format_expr(expr, state.grammar.display))
                ok = False
                break
        if ok:
            passing.append(members)
    if rule.largest and passing:
        top = max(len(m) for m in passing)
        passing = [m for m in passing if len(m) == top]
        if len(passing) > 1:
            passing = [min(passing, key=lambda m: m[0].tag)]
    return [make_set_derived(rule, members, state) for members in passing]


def _set_object(tag: int, rule: SetRule, members: tuple, state: ParseState) -> DerivedObject:
    bbox = members[0].bbox
    for member in members[1:]:
        bbox = bbox.union(member.bbox)
    return DerivedObject(
        tag=tag,
        type_name=rule.lhs,
        display_type=state.grammar.display_name(rule.lhs),
        bbox=bbox,
        members=members,
    )


def make_set_derived(rule: SetRule, members: tuple, state: ParseState) -> DerivedObject:
    signature = (rule.lhs, tuple(m.tag for m in members))
    cached = state._derived_cache.get(signature)
    if cached is not None:
        return cached
    obj = _set_object(state.alloc_tag(), rule, members, state)
    state.index.install(obj)
    state._derived_cache[signature] = obj
    state.note("solution", rule.lhs, tag=obj.tag,
               members=tuple(m.tag for m in members))
    return obj


def make_derived(rule: OrdinaryRule, bindings: dict, state: ParseState) -> DerivedObject | None:
    values = [(name, bindings.get(name)) for name in rule.constituents]
    if all(value is None for _, value in values):
        return None
    signature = (rule.lhs, tuple((n, v.tag if v is not None else None) for n, v in values))
    cached = state._derived_cache.get(signature)
    if cached is not None:
        return cached
    bbox = None
    for _, value in values:
        if value is not None:
            bbox = value.bbox if bbox is None else bbox.union(value.bbox)
    obj = DerivedObject(
        tag=state.alloc_tag(),
        type_name=rule.lhs,
        display_type=state.grammar.display_name(rule.lhs),
        bbox=bbox,
        constituents=tuple(values),
    )
    slot_bindings = dict(bindings)
    slot_bindings["self"] = obj
    for slot_name, expr in rule.slots:
        try:
            obj.slots[slot_name] = eval_expr(expr, slot_bindings, state.env)
        except ConstraintTypeError as exc:
            raise ParseEngineError(
                f"slot '{slot_name}' of {obj.display_type}: {exc}") from None
    state.index.install(obj)
    state._derived_cache[signature] = obj
    state.note("solution", rule.lhs, tag=obj.tag,
               constituents=tuple((n, v.tag if v else None) for n, v in values))
    return obj


def dedupe(solutions: list) -> list:
    """Drop solutions with the same type and constituent tag multiset,
    keeping first occurrences."""
    seen: set[tuple] = set()
    out = []
    for sol in solutions:
        if sol.members is not None:
            key = (sol.type_name, tuple(m.tag for m in sol.members))
        else:
            tags = sorted(v.tag for _, v in sol.constituents if v is not None)
            key = (sol.type_name, tuple(tags))
        if key not in seen:
            seen.add(key)
            out.append(sol)
    return out


@dataclass
class ParseOutcome:
    solutions: list[DerivedObject]
    index: SpatialIndex
    state: ParseState
    env: EvalEnv
    index_build_seconds: float = 0.0
    parse_seconds: float = 0.0

    @property
    def trace(self) -> list[TraceEvent]:
        return self.state.trace or []


def parse_diagram(grammar: Grammar, start_symbol: str, primitives: list, *,
                  config: EngineConfig | None = None, trace: bool = False,
                  levels: int | None = None) -> ParseOutcome:
    """Index a normalized diagram and solve the start symbol against the
    context of all installed objects."""
    config = config or EngineConfig()
    start = canon(start_symbol)
    if not grammar.defines(start) and start not in TYPE_NAME_TO_KIND:
        raise ParseEngineError(f"unknown start symbol '{start_symbol}'")
    t0 = time.perf_counter()
    index = build_index(primitives, levels=levels or config.levels)
    t1 = time.perf_counter()
    if primitives:
        cl = characteristic_lengths(primitives)
    else:
        cl = CharacteristicLengths(h=1.0, W=1.0)
    env = EvalEnv(index=index, cl=cl, config=config)
    state = ParseState(grammar, index, env, trace=trace)
    initial_context = index.all_objects()
    solutions = solve(start, initial_context, state) if primitives else []
    t2 = time.perf_counter()
    return ParseOutcome(
        solutions=solutions,
        index=index,
        state=state,
        env=env,
        index_build_seconds=t1 - t0,
        parse_seconds=t2 - t1,
    )

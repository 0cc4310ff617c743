"""Optimal planning for kitchen problems.

The objective is lexicographic: first minimize total clamped overtime
(sum over meals of how far past its deadline each delivery lands), then
total action cost. ``solve`` runs A* over full states (fluents, elapsed
cost, cook timers) with an admissible two-part heuristic, so ties in
overtime are broken by cost and the returned plan is exactly optimal.
``brute_force_solve`` is a deliberately plain breadth-first enumeration
used as an independent oracle in tests; it shares nothing with the A*
machinery beyond the state transition function.

Determinism: ground actions are expanded in their sorted grounding
order and the open list breaks ties by insertion order, so equal inputs
always produce byte-identical plans.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Protocol

from .model import (
    Fluent,
    GroundAction,
    Plan,
    PlanningProblem,
    State,
    Subgoal,
    apply,
    is_applicable,
    make_plan,
)


class PlanningError(Exception):
    pass


class UnsolvableError(PlanningError):
    """No plan exists from the given state."""


class PlanningCancelled(PlanningError):
    """The cooperative cancellation signal was set."""


class BudgetExhaustedError(PlanningError):
    """Search hit its expansion or wall-time budget.

    ``incumbent`` carries the best goal-reaching plan discovered before
    the budget ran out, if any; it is not guaranteed optimal.
    """

    def __init__(self, message: str, incumbent: Plan | None = None) -> None:
        super().__init__(message)
        self.incumbent = incumbent


class DepthBoundError(PlanningError):
    """Brute-force enumeration was truncated before finding any plan."""


class CancelSignal(Protocol):
    def is_set(self) -> bool: ...


@dataclass(frozen=True)
class PlannerBudget:
    """Bounds on a single solve call. ``tie_break`` names the one
    supported deterministic ordering: expansion follows the sorted
    grounding order, and the open list breaks f/g ties by insertion."""

    max_expansions: int = 2_000_000
    max_wall_time: float = 30.0
    tie_break: str = "grounding-order"

    def __post_init__(self) -> None:
        if self.max_expansions is None and self.max_wall_time is None:
            raise ValueError("at least one budget bound must be set")
        if self.tie_break != "grounding-order":
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")


@dataclass
class SearchNode:
    state: State
    g_cost: int
    g_overtime: int
    parent: SearchNode | None = None
    action: GroundAction | None = None


def _relaxed_reachable(problem: PlanningProblem, goal_fluents: frozenset[Fluent]) -> bool:
    """Delete-relaxation reachability: ignores deletes and time guards."""
    facts = set(problem.init.fluents)
    actions = list(problem.domain.ground_actions)
    changed = True
    while changed and not goal_fluents <= facts:
        changed = False
        remaining = []
        for a in actions:
            if a.pre <= facts:
                before = len(facts)
                facts |= a.add
                changed = changed or len(facts) > before
            else:
                remaining.append(a)
        actions = remaining
    return goal_fluents <= facts


class _Heuristic:
    """Admissible lower bounds on (future overtime, future cost).

    Each pending ingredient contributes its remaining itinerary: a cut
    if still raw, a hop to the cooking station plus both cooking steps
    if not yet cooked, a return plus the finishing step if mid-cook,
    and a hop to the plating station at the end. Every counted action
    names that ingredient, so itineraries never double-count and the
    sum is a sound serial-work bound. On top of that, every pickup of
    an ingredient still at the gather station after the first requires
    one extra arrival there (the chef leaves with each carry), and none
    of those arrivals is counted anywhere else.

    Per-meal delivery time is bounded below by the meal's own remaining
    work, and additionally by when its slowest cooking ingredient can
    possibly come off the heat. Cost sums itineraries once per shared
    ingredient.
    """

    GATHER = "gatherStation"
    CUT = "cutStation"
    COOK = "cookStation"
    PLATE = "plateStation"

    def __init__(self, problem: PlanningProblem) -> None:
        self.goals = problem.goals
        costs: dict[str, int] = {}
        for a in problem.domain.ground_actions:
            costs.setdefault(a.name, a.cost)
        self.c_move = costs.get("move-item", 1)
        self.c_cut = costs.get("cut", 1)
        self.c_start = costs.get("start-cook", 1)
        self.c_end = costs.get("end-cook", 1)
        self.c_prepare = costs.get("prepare-meal", 1)
        self.c_deliver = costs.get("deliver", 1)
        self.c_return = min(costs.get("move-chef", 1), self.c_move)
        self.requirements: dict[str, tuple[str, ...]] = {}
        self.durations: dict[str, int] = {}
        for a in problem.domain.ground_actions:
            if a.name == "prepare-meal":
                meal = a.args[2]
                self.requirements[meal] = tuple(
                    sorted(
                        f.args[0]
                        for f in a.pre
                        if f.predicate == "at" and f.args[0] not in ("chef", meal)
                    )
                )
            elif a.name == "end-cook" and a.guard is not None:
                self.durations[a.args[2]] = a.guard.duration

    def _route(
        self, ing: str, fluents: frozenset[Fluent], location: dict[str, str]
    ) -> tuple[int, bool]:
        """(remaining itinerary cost, whether it departs the gather station)."""
        total = 0
        loc = location.get(ing)
        departs_gather = loc == self.GATHER
        if Fluent("raw", (ing,)) in fluents:
            total += self.c_cut
            loc = self.CUT
        if Fluent("uncooked", (ing,)) in fluents:
            if loc != self.COOK:
                total += self.c_move
            total += self.c_start + self.c_end
            loc = self.COOK
        elif Fluent("cooking", (ing,)) in fluents:
            if loc != self.COOK:
                total += self.c_move
            total += self.c_end
            loc = self.COOK
        if loc != self.PLATE:
            total += self.c_move
        return total, departs_gather

    def __call__(self, state: State) -> tuple[int, int]:
        fluents = state.fluents
        elapsed = state.elapsed_cost
        location: dict[str, str] = {}
        for f in fluents:
            if f.predicate == "at":
                location[f.args[0]] = f.args[1]
        chef_free_visit = 1 if location.get("chef") == self.GATHER else 0
        h_over = 0
        h_cost = 0
        routes: dict[str, tuple[int, bool]] = {}
        timers = dict(state.cook_start)
        pending_deadlines: list[int] = []
        marginals: list[int] = []
        for goal in self.goals:
            if goal.satisfying_fluent in fluents:
                continue
            meal = goal.meal_id
            pending_deadlines.append(goal.deadline)
            h_cost += self.c_deliver
            if Fluent("plated", (meal,)) in fluents:
                marginals.append(self.c_deliver)
                bound = elapsed + self.c_deliver
            else:
                marginals.append(self.c_prepare + self.c_deliver)
                h_cost += self.c_prepare
                work = self.c_prepare + self.c_deliver
                pickups = 0
                ready_bound = 0
                for ing in self.requirements.get(meal, ()):
                    route = routes.get(ing)
                    if route is None:
                        route = routes[ing] = self._route(ing, fluents, location)
                    work += route[0]
                    pickups += route[1]
                    duration = self.durations.get(ing)
                    if duration is None:
                        continue
                    if Fluent("cooking", (ing,)) in fluents:
                        off_heat = timers[ing] + duration + self.c_end
                    elif Fluent("uncooked", (ing,)) in fluents:
                        off_heat = elapsed + self.c_start + duration + self.c_end
                    else:
                        continue
                    ready_bound = max(
                        ready_bound, off_heat + self.c_move + self.c_prepare + self.c_deliver
                    )
                work += max(0, pickups - chef_free_visit) * self.c_return
                bound = max(elapsed + work, ready_bound)
            h_over += max(0, bound - goal.deadline)
        total_pickups = 0
        for cost, departs in routes.values():
            h_cost += cost
            total_pickups += departs
        h_cost += max(0, total_pickups - chef_free_visit) * self.c_return
        # Deliveries are sequential, so the k-th one happens after at
        # least the k cheapest per-meal finishing works (and the last
        # after all remaining work); pairing sorted delivery bounds
        # with sorted deadlines minimizes total lateness over any
        # assignment of meals to delivery slots.
        if pending_deadlines:
            pending_deadlines.sort()
            marginals.sort()
            assign_over = 0
            running = 0
            last = len(pending_deadlines) - 1
            for k, deadline in enumerate(pending_deadlines):
                running = h_cost if k == last else running + marginals[k]
                assign_over += max(0, elapsed + running - deadline)
            h_over = max(h_over, assign_over)
        return h_over, h_cost


def _successor_index(
    problem: PlanningProblem,
) -> tuple[dict[Fluent, list[GroundAction]], list[GroundAction]]:
    """Bucket actions by a shared location precondition when one object
    (the chef) appears in every action's preconditions, so expansion
    only scans actions anchored at the current location. Buckets and
    the generic remainder keep the sorted grounding order."""
    actions = problem.domain.ground_actions
    common: set[str] | None = None
    for a in actions:
        holders = {f.args[0] for f in a.pre if f.predicate == "at"}
        common = holders if common is None else common & holders
        if not common:
            break
    buckets: dict[Fluent, list[GroundAction]] = {}
    generic: list[GroundAction] = []
    anchor_object = sorted(common)[0] if common else None
    for a in actions:
        anchor = None
        if anchor_object is not None:
            for f in sorted(a.pre):
                if f.predicate == "at" and f.args[0] == anchor_object:
                    anchor = f
                    break
        if anchor is None:
            generic.append(a)
        else:
            buckets.setdefault(anchor, []).append(a)
    return buckets, generic


_plan_cache: dict[PlanningProblem, Plan] = {}
_PLAN_CACHE_MAX = 4096


def clear_plan_cache() -> None:
    _plan_cache.clear()


def _delivery_delta(after: State, action: GroundAction, goals: Iterable[Subgoal]) -> int:
    delta = 0
    for goal in goals:
        if goal.satisfying_fluent in action.add:
            delta += max(0, after.elapsed_cost - goal.deadline)
    return delta


def _reconstruct(node: SearchNode, problem: PlanningProblem) -> Plan:
    steps: list[GroundAction] = []
    cursor: SearchNode | None = node
    while cursor is not None and cursor.action is not None:
        steps.append(cursor.action)
        cursor = cursor.parent
    steps.reverse()
    return make_plan(problem.init, steps, problem.goals)


def solve(
    problem: PlanningProblem,
    budget: PlannerBudget | None = None,
    cancel: CancelSignal | None = None,
) -> Plan:
    """Lexicographically optimal plan for the problem's pending goals.

    Goals already satisfied in the initial state are dropped from the
    objective. Raises :class:`UnsolvableError`, or
    :class:`BudgetExhaustedError` carrying any incumbent plan.

    Completed solves are memoized on the whole problem (domain, initial
    state, goals, time limit), since replanning revisits identical
    states constantly; budget and cancel signals only influence fresh
    searches. :func:`clear_plan_cache` empties the memo.
    """
    cached = _plan_cache.get(problem)
    if cached is not None:
        return cached
    budget = budget or PlannerBudget()
    pending = problem.pending_goals(problem.init)
    if not pending:
        return Plan(steps=(), cum_cost=(), deliveries=())
    goal_fluents = frozenset(g.satisfying_fluent for g in pending)
    if not _relaxed_reachable(problem, goal_fluents):
        raise UnsolvableError("goals are unreachable even ignoring delete effects")

    heuristic = _Heuristic(replace(problem, goals=pending))
    buckets, generic = _successor_index(problem)
    h0_over, h0_cost = heuristic(problem.init)
    root = SearchNode(state=problem.init, g_cost=0, g_overtime=0)
    counter = itertools.count()
    open_heap: list[tuple[int, int, int, int, int, SearchNode]] = [
        (h0_over, h0_cost, 0, 0, next(counter), root)
    ]
    best: dict[State, tuple[int, int]] = {problem.init: (0, 0)}
    # States with no active cook timers are interchangeable up to the
    # clock: the same fluents at a lower elapsed cost (and no worse
    # overtime or cost) can replay any suffix with every delivery
    # landing earlier, so the later copy is dominated.
    idle_best: dict[frozenset[Fluent], tuple[int, int, int]] = {}
    if not problem.init.cook_start:
        idle_best[problem.init.fluents] = (problem.init.elapsed_cost, 0, 0)
    incumbent: SearchNode | None = None
    incumbent_key: tuple[int, int] | None = None
    expansions = 0
    started = time.monotonic()

    while open_heap:
        f_over, f_cost, g_over, g_cost, _, node = heapq.heappop(open_heap)
        if best.get(node.state, (g_over, g_cost)) < (g_over, g_cost):
            continue
        if goal_fluents <= node.state.fluents:
            plan = _reconstruct(node, problem)
            if len(_plan_cache) >= _PLAN_CACHE_MAX:
                _plan_cache.clear()
            _plan_cache[problem] = plan
            return plan
        expansions += 1
        if expansions % 256 == 0:
            if cancel is not None and cancel.is_set():
                raise PlanningCancelled("planning was cancelled")
            if time.monotonic() - started > budget.max_wall_time:
                plan = _reconstruct(incumbent, problem) if incumbent else None
                raise BudgetExhaustedError(
                    f"wall time budget exceeded after {expansions} expansions", plan
                )
        if expansions > budget.max_expansions:
            plan = _reconstruct(incumbent, problem) if incumbent else None
            raise BudgetExhaustedError(f"expansion budget {budget.max_expansions} exceeded", plan)

        state = node.state
        matched: list[list[GroundAction]] = [
            bucket for f in state.fluents if (bucket := buckets.get(f))
        ]
        if not matched:
            candidates: Iterable[GroundAction] = generic
        elif len(matched) == 1 and not generic:
            candidates = matched[0]
        else:
            candidates = sorted(
                (a for group in (*matched, generic) for a in group),
                key=lambda a: a.sort_key,
            )
        for action in candidates:
            if not is_applicable(state, action):
                continue
            after = apply(state, action)
            g2_cost = node.g_cost + action.cost
            g2_over = node.g_overtime + _delivery_delta(after, action, pending)
            known = best.get(after)
            if known is not None and known <= (g2_over, g2_cost):
                continue
            if not after.cook_start:
                triple = (after.elapsed_cost, g2_over, g2_cost)
                idle = idle_best.get(after.fluents)
                if idle is not None and idle != triple and all(
                    a <= b for a, b in zip(idle, triple)
                ):
                    continue
                if idle is None or all(b <= a for a, b in zip(idle, triple)):
                    idle_best[after.fluents] = triple
            best[after] = (g2_over, g2_cost)
            child = SearchNode(
                state=after, g_cost=g2_cost, g_overtime=g2_over, parent=node, action=action
            )
            if goal_fluents <= after.fluents:
                key = (g2_over, g2_cost)
                if incumbent_key is None or key < incumbent_key:
                    incumbent, incumbent_key = child, key
            h_over, h_cost = heuristic(after)
            heapq.heappush(
                open_heap,
                (g2_over + h_over, g2_cost + h_cost, g2_over, g2_cost, next(counter), child),
            )
    raise UnsolvableError("search space exhausted without reaching the goals")


def replan(
    problem: PlanningProblem,
    current: State,
    budget: PlannerBudget | None = None,
    cancel: CancelSignal | None = None,
) -> Plan:
    """Optimal completion from ``current``; satisfied goals drop out."""
    return solve(replace(problem, init=current), budget=budget, cancel=cancel)


def brute_force_solve(problem: PlanningProblem, depth_bound: int) -> Plan | None:
    """Exhaustive breadth-first enumeration up to ``depth_bound`` steps.

    Keeps, per reached state, the least overtime accrued so far (cost
    ties are inherent: elapsed cost is part of the state), and returns
    the lexicographically best goal-reaching plan found. Returns None
    when the whole space within the bound is exhausted without a plan;
    raises :class:`DepthBoundError` if enumeration was truncated at the
    bound instead, since a deeper plan might still exist.

    Intended for micro instances as an oracle; no heuristics, no
    ordering tricks, just layer-by-layer expansion.
    """
    pending = problem.pending_goals(problem.init)
    if not pending:
        return Plan(steps=(), cum_cost=(), deliveries=())
    goal_fluents = frozenset(g.satisfying_fluent for g in pending)
    actions = problem.domain.ground_actions

    parents: dict[State, tuple[int, State | None, GroundAction | None]] = {
        problem.init: (0, None, None)
    }
    layer: dict[State, int] = {problem.init: 0}
    best_goal: tuple[int, int] | None = None
    best_goal_state: State | None = None
    truncated = False

    for depth in range(depth_bound):
        next_layer: dict[State, int] = {}
        for state, overtime in layer.items():
            for action in actions:
                if not is_applicable(state, action):
                    continue
                after = apply(state, action)
                over2 = overtime + _delivery_delta(after, action, pending)
                known = parents.get(after)
                if known is not None and known[0] <= over2:
                    continue
                parents[after] = (over2, state, action)
                next_layer[after] = over2
                if goal_fluents <= after.fluents:
                    key = (over2, after.elapsed_cost - problem.init.elapsed_cost)
                    if best_goal is None or key < best_goal:
                        best_goal, best_goal_state = key, after
        layer = next_layer
        if not layer:
            break
    else:
        truncated = bool(layer)

    if best_goal_state is None:
        if truncated:
            raise DepthBoundError(f"no plan within {depth_bound} steps; enumeration truncated")
        return None
    steps: list[GroundAction] = []
    cursor: State | None = best_goal_state
    while cursor is not None:
        _, prev, action = parents[cursor]
        if action is None:
            break
        steps.append(action)
        cursor = prev
    steps.reverse()
    return make_plan(problem.init, steps, problem.goals)

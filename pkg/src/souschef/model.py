"""Core planning formalism: fluents, states, ground actions, plans.

A state is a set of ground fluents plus an elapsed-cost counter and the
start times of any in-progress cooking. Actions are STRIPS style, with
positive preconditions, add and delete effects, a strictly positive
integer cost, and an optional minimum-elapsed-time guard used by
finish-cooking actions. Applying an action advances elapsed cost by the
action cost, so plan cost and in-game time are the same quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence


class Fluent(NamedTuple):
    """A ground fact: a predicate applied to object symbols."""

    predicate: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return " ".join((self.predicate, *self.args))


def fluent(predicate: str, *args: str) -> Fluent:
    """Shorthand constructor: ``fluent("at", "chef", "cutStation")``."""
    return Fluent(predicate, tuple(args))


def parse_fluent(line: str) -> Fluent:
    parts = line.split()
    if not parts:
        raise ValueError("empty fluent line")
    return Fluent(parts[0], tuple(parts[1:]))


@dataclass(frozen=True)
class CookGuard:
    """Minimum-elapsed-time condition: ``item`` must have been cooking
    for at least ``duration`` cost units."""

    item: str
    duration: int

    def holds(self, state: State) -> bool:
        started = state.cook_started(self.item)
        return started is not None and state.elapsed_cost - started >= self.duration


@dataclass(frozen=True)
class State:
    """Immutable world state.

    ``cook_start`` maps each currently cooking ingredient to the elapsed
    cost at which its cooking began. It is stored as a sorted tuple of
    pairs so states are hashable and serialize canonically.
    """

    fluents: frozenset[Fluent]
    elapsed_cost: int = 0
    cook_start: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.elapsed_cost < 0:
            raise ValueError("elapsed_cost must be non-negative")
        ordered = tuple(sorted(self.cook_start))
        if ordered != self.cook_start:
            object.__setattr__(self, "cook_start", ordered)

    def has(self, f: Fluent) -> bool:
        return f in self.fluents

    def cook_started(self, item: str) -> int | None:
        for name, start in self.cook_start:
            if name == item:
                return start
        return None

    @property
    def cook_start_map(self) -> dict[str, int]:
        return dict(self.cook_start)


class Param(NamedTuple):
    name: str
    kind: str


@dataclass(frozen=True)
class ActionSpec:
    """An action schema. Pattern fluents may use ``?name`` variables,
    each of which must be declared in ``params``.

    ``starts_timing`` / ``stops_timing`` name the parameter whose binding
    begins or ends cook timing; ``guard_param`` names the parameter the
    grounded time guard applies to (the guard's duration is supplied at
    grounding, since it depends on the ingredient).
    """

    name: str
    params: tuple[Param, ...]
    cost: int
    pre: tuple[Fluent, ...]
    add: tuple[Fluent, ...]
    delete: tuple[Fluent, ...]
    guard_param: str | None = None
    starts_timing: str | None = None
    stops_timing: str | None = None

    def __post_init__(self) -> None:
        if self.cost < 1:
            raise ValueError(f"{self.name}: cost must be a positive integer")
        declared = {p.name for p in self.params}
        for pattern in (*self.pre, *self.add, *self.delete):
            for arg in pattern.args:
                if arg.startswith("?") and arg[1:] not in declared:
                    raise ValueError(f"{self.name}: unbound pattern variable {arg}")
        for ref in (self.guard_param, self.starts_timing, self.stops_timing):
            if ref is not None and ref not in declared:
                raise ValueError(f"{self.name}: unknown parameter {ref}")

    def ground(self, binding: Mapping[str, str], guard_duration: int | None = None) -> GroundAction:
        """Substitute ``binding`` into the schema patterns."""

        def sub(pattern: Fluent) -> Fluent:
            return Fluent(
                pattern.predicate,
                tuple(binding[a[1:]] if a.startswith("?") else a for a in pattern.args),
            )

        missing = [p.name for p in self.params if p.name not in binding]
        if missing:
            raise ValueError(f"{self.name}: binding missing parameters {missing}")
        add = frozenset(sub(p) for p in self.add)
        delete = frozenset(sub(p) for p in self.delete)
        if add & delete:
            raise ValueError(f"{self.name}: add and delete effects overlap after grounding")
        guard = None
        if self.guard_param is not None:
            if guard_duration is None:
                raise ValueError(f"{self.name}: guard duration required")
            guard = CookGuard(binding[self.guard_param], guard_duration)
        return GroundAction(
            name=self.name,
            args=tuple(binding[p.name] for p in self.params),
            cost=self.cost,
            pre=frozenset(sub(p) for p in self.pre),
            add=add,
            delete=delete,
            guard=guard,
            starts_timing=binding[self.starts_timing] if self.starts_timing else None,
            stops_timing=binding[self.stops_timing] if self.stops_timing else None,
            spec=self,
        )


@dataclass(frozen=True)
class GroundAction:
    """A fully instantiated action. Identity (equality, hashing, ordering)
    is the ``name args...`` line, which is also the plan-file syntax."""

    name: str
    args: tuple[str, ...]
    cost: int = field(compare=False, default=1)
    pre: frozenset[Fluent] = field(compare=False, default=frozenset())
    add: frozenset[Fluent] = field(compare=False, default=frozenset())
    delete: frozenset[Fluent] = field(compare=False, default=frozenset())
    guard: CookGuard | None = field(compare=False, default=None)
    starts_timing: str | None = field(compare=False, default=None)
    stops_timing: str | None = field(compare=False, default=None)
    spec: ActionSpec | None = field(compare=False, default=None, repr=False)

    def line(self) -> str:
        return " ".join((self.name, *self.args))

    @property
    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)


class InapplicableActionError(ValueError):
    """Raised when an action's preconditions or guard fail in a state."""


def is_applicable(state: State, action: GroundAction) -> bool:
    if not action.pre <= state.fluents:
        return False
    return action.guard is None or action.guard.holds(state)


def apply(state: State, action: GroundAction) -> State:
    """Successor state, or raise :class:`InapplicableActionError`."""
    if not action.pre <= state.fluents:
        missing = sorted(str(f) for f in action.pre - state.fluents)
        raise InapplicableActionError(f"{action.line()}: missing {', '.join(missing)}")
    if action.guard is not None and not action.guard.holds(state):
        raise InapplicableActionError(f"{action.line()}: time guard not satisfied")
    elapsed = state.elapsed_cost + action.cost
    timing = dict(state.cook_start)
    if action.stops_timing is not None:
        timing.pop(action.stops_timing, None)
    if action.starts_timing is not None:
        timing[action.starts_timing] = elapsed
    return State(
        fluents=(state.fluents - action.delete) | action.add,
        elapsed_cost=elapsed,
        cook_start=tuple(sorted(timing.items())),
    )


@dataclass(frozen=True)
class Subgoal:
    """One meal to deliver: satisfied when ``satisfying_fluent`` holds."""

    meal_id: str
    satisfying_fluent: Fluent
    deadline: int

    def __post_init__(self) -> None:
        if self.deadline < 0:
            raise ValueError(f"{self.meal_id}: deadline must be non-negative")


@dataclass(frozen=True)
class Domain:
    """Predicate vocabulary, action schemas, and the full sorted grounding."""

    predicates: tuple[tuple[str, int], ...]
    specs: tuple[ActionSpec, ...]
    ground_actions: tuple[GroundAction, ...]

    def __post_init__(self) -> None:
        names = [p for p, _ in self.predicates]
        if len(names) != len(set(names)):
            raise ValueError("duplicate predicate declarations")
        ordered = tuple(sorted(self.ground_actions, key=lambda a: a.sort_key))
        if ordered != self.ground_actions:
            object.__setattr__(self, "ground_actions", ordered)

    def arity(self, predicate: str) -> int | None:
        for name, n in self.predicates:
            if name == predicate:
                return n
        return None

    def action(self, line: str) -> GroundAction:
        """Look up a ground action by its ``name args...`` line."""
        parts = line.split()
        if not parts:
            raise ValueError("empty action line")
        probe = GroundAction(name=parts[0], args=tuple(parts[1:]))
        for a in self.ground_actions:
            if a == probe:
                return a
        raise KeyError(f"unknown ground action: {line}")


@dataclass(frozen=True)
class PlanningProblem:
    domain: Domain
    init: State
    goals: tuple[Subgoal, ...]
    time_limit: int = 80

    def __post_init__(self) -> None:
        if not self.goals:
            raise ValueError("at least one subgoal is required")
        deadlines = [g.deadline for g in self.goals]
        if deadlines != sorted(deadlines):
            raise ValueError("subgoals must be ordered by non-decreasing deadline")
        meals = [g.meal_id for g in self.goals]
        if len(meals) != len(set(meals)):
            raise ValueError("duplicate subgoal meal ids")
        for f in self.init.fluents:
            arity = self.domain.arity(f.predicate)
            if arity is None:
                raise ValueError(f"init uses undeclared predicate {f.predicate}")
            if arity != len(f.args):
                raise ValueError(f"init fluent {f} has wrong arity")

    def goal(self, meal_id: str) -> Subgoal:
        for g in self.goals:
            if g.meal_id == meal_id:
                return g
        raise KeyError(meal_id)

    def pending_goals(self, state: State) -> tuple[Subgoal, ...]:
        return tuple(g for g in self.goals if g.satisfying_fluent not in state.fluents)


@dataclass(frozen=True)
class Plan:
    """An action sequence with its cumulative costs and realized delivery
    times. ``deliveries`` maps meal id to the absolute elapsed cost at
    which its subgoal fluent was added."""

    steps: tuple[GroundAction, ...]
    cum_cost: tuple[int, ...]
    deliveries: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        if len(self.cum_cost) != len(self.steps):
            raise ValueError("cum_cost must align with steps")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def delivery_map(self) -> dict[str, int]:
        return dict(self.deliveries)

    def lines(self) -> list[str]:
        return [a.line() for a in self.steps]


def make_plan(init: State, steps: Sequence[GroundAction], goals: Sequence[Subgoal]) -> Plan:
    """Build a :class:`Plan` by replaying ``steps`` from ``init``.

    Raises :class:`InapplicableActionError` if the sequence does not
    execute; use :func:`validate` for a non-raising check.
    """
    state = init
    cum: list[int] = []
    deliveries: list[tuple[str, int]] = []
    goal_fluents = {g.satisfying_fluent: g.meal_id for g in goals}
    running = 0
    for action in steps:
        state = apply(state, action)
        running += action.cost
        cum.append(running)
        for f in action.add:
            meal = goal_fluents.get(f)
            if meal is not None and all(m != meal for m, _ in deliveries):
                deliveries.append((meal, state.elapsed_cost))
    return Plan(steps=tuple(steps), cum_cost=tuple(cum), deliveries=tuple(deliveries))


def plan_cost(plan: Plan) -> int:
    return plan.cum_cost[-1] if plan.cum_cost else 0


def overtime_cost(
    deliveries: Mapping[str, int],
    goals: Sequence[Subgoal],
    time_limit: int,
    *,
    clamped: bool = True,
) -> int:
    """Total overtime over ``goals``: sum of (delivery time - deadline).

    Meals absent from ``deliveries`` count as delivered at ``time_limit``.
    With ``clamped`` (the default) early deliveries contribute zero;
    unclamped sums the raw signed differences.
    """
    total = 0
    for g in goals:
        t = deliveries.get(g.meal_id, time_limit)
        diff = t - g.deadline
        total += max(0, diff) if clamped else diff
    return total


def plan_overtime(plan: Plan, goals: Sequence[Subgoal], time_limit: int) -> int:
    return overtime_cost(plan.delivery_map, goals, time_limit)


@dataclass(frozen=True)
class PlanCheck:
    """Result of :func:`validate`: ``ok`` or the first violation found."""

    ok: bool
    step_index: int | None = None
    reason: str | None = None


def validate(problem: PlanningProblem, plan: Plan) -> PlanCheck:
    """Check that the plan executes from the problem's initial state and
    satisfies every subgoal. Step indices in violations are zero-based;
    a goal violation reports index ``len(plan)``."""
    state = problem.init
    for i, action in enumerate(plan.steps):
        if not is_applicable(state, action):
            if action.pre <= state.fluents:
                reason = f"{action.line()}: time guard not satisfied"
            else:
                missing = sorted(str(f) for f in action.pre - state.fluents)
                reason = f"{action.line()}: missing {', '.join(missing)}"
            return PlanCheck(ok=False, step_index=i, reason=reason)
        state = apply(state, action)
    for g in problem.goals:
        if g.satisfying_fluent not in state.fluents:
            return PlanCheck(
                ok=False,
                step_index=len(plan.steps),
                reason=f"subgoal {g.meal_id} unsatisfied at end of plan",
            )
    return PlanCheck(ok=True)

"""Action recommendations with optional controlled corruption.

The advisor keeps a pair of plans rooted at the player's state: the
optimal plan and, when a recommendation is drawn as corrupted, a
corrupted variant that swaps the current step for work belonging to a
meal with a strictly later deadline, followed by an optimal completion
of the mess that causes. Which plan supplies each recommendation is an
independent seeded draw, so a corruption probability of 0.15 means
roughly 15% of recommendations mislead.

Every emitted recommendation is applicable in the state it was issued
for, and its provenance (optimal or corrupted) is engine-side ground
truth for the metrics harness; client-facing views must never carry it.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .explain import (
    Lexicon,
    MODES,
    attribute_subgoals,
    extract_causal_links,
    meal_requirements,
    render,
)
from .model import (
    GroundAction,
    Plan,
    PlanningProblem,
    State,
    apply,
    is_applicable,
    make_plan,
    plan_overtime,
)
from .planner import (
    BudgetExhaustedError,
    PlannerBudget,
    PlanningError,
    UnsolvableError,
    replan,
)

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
CORRUPTED = "corrupted"

DEFAULT_CORRUPTION_PROB = 0.15

# Study conditions: a recommendation mode crossed with whether the
# recommendation stream is sometimes corrupted. The assessment stage
# always runs with mode "none" regardless of condition.
CONDITIONS: dict[str, tuple[str, float]] = {
    "none": ("none", 0.0),
    "optimal-action": ("action_only", 0.0),
    "optimal-clc": ("clc", 0.0),
    "optimal-subgoal": ("subgoal", 0.0),
    "suboptimal-action": ("action_only", DEFAULT_CORRUPTION_PROB),
    "suboptimal-clc": ("clc", DEFAULT_CORRUPTION_PROB),
    "suboptimal-subgoal": ("subgoal", DEFAULT_CORRUPTION_PROB),
}


class NoFutureMealError(ValueError):
    """Corruption needs a pending meal with a strictly later deadline."""


@dataclass(frozen=True)
class AdvisorConfig:
    mode: str = "subgoal"
    corruption_prob: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.corruption_prob <= 1.0:
            raise ValueError("corruption_prob must lie in [0, 1]")


def condition_config(condition: str, seed: int = 0) -> AdvisorConfig:
    try:
        mode, prob = CONDITIONS[condition]
    except KeyError:
        raise ValueError(f"unknown study condition {condition!r}") from None
    return AdvisorConfig(mode=mode, corruption_prob=prob, seed=seed)


@dataclass(frozen=True)
class Recommendation:
    action: GroundAction
    mode: str
    text: str | None
    provenance: str
    plan_snapshot: str
    payload: Mapping[str, object] = field(default_factory=dict)


@dataclass
class PlanPair:
    """The advisor's working plans, both rooted at ``root``.

    ``optimal`` is optimal from the root onward (after the player takes
    a corrupted suggestion it is refreshed to the corrupted plan, whose
    remaining suffix is an optimal completion). ``corrupted`` is filled
    in lazily the first time a corrupted draw happens at the current
    cursor and differs from ``optimal`` at exactly that index.
    """

    optimal: Plan
    corrupted: Plan | None
    cursor: int
    root: State
    snapshot_id: str


def draw_provenance(rng: random.Random, corruption_prob: float) -> str:
    return CORRUPTED if rng.random() < corruption_prob else OPTIMAL


def divergence_index(optimal: Plan, corrupted: Plan) -> int:
    for i, (a, b) in enumerate(zip(optimal.steps, corrupted.steps)):
        if a != b:
            return i
    raise ValueError("plans do not diverge")


def corruptible_positions(
    optimal: Plan, problem: PlanningProblem, root: State | None = None
) -> dict[int, dict[str, list[GroundAction]]]:
    """For each plan index, the applicable replacement actions grouped
    by the later-deadline meal they serve. Positions with no options
    are omitted.

    A replacement must be a later step of the plan itself, must not be
    a chef movement, and must only touch ingredients whose candidate
    meals all have strictly later deadlines than the displaced step's
    meal, so the swapped-in step reads as work for the wrong meal no
    matter how its explanation is attributed.
    """
    root = root if root is not None else problem.init
    attrs = attribute_subgoals(optimal, problem)
    deadlines = {g.meal_id: g.deadline for g in problem.goals}
    requirements = meal_requirements(problem)
    ingredient_arg = {"cut": 3, "move-item": 3, "start-cook": 2, "end-cook": 2}

    states = [root]
    for action in optimal.steps:
        states.append(apply(states[-1], action))
    delivered: list[set[str]] = []
    done: set[str] = set()
    for action in optimal.steps:
        delivered.append(set(done))
        if action.name == "deliver":
            done.add(action.args[3])

    def safe_for(action: GroundAction, displaced_deadline: int) -> bool:
        if action.name == "move-chef":
            return False
        ing_idx = ingredient_arg.get(action.name)
        if ing_idx is None:
            return True
        ingredient = action.args[ing_idx]
        users = [m for m, needs in requirements.items() if ingredient in needs]
        return bool(users) and all(deadlines[m] > displaced_deadline for m in users)

    out: dict[int, dict[str, list[GroundAction]]] = {}
    for i, displaced in enumerate(optimal.steps):
        displaced_deadline = deadlines[attrs[i].meal_id]
        pools: dict[str, list[GroundAction]] = {}
        for j in range(i + 1, len(optimal.steps)):
            candidate = optimal.steps[j]
            meal = attrs[j].meal_id
            if deadlines[meal] <= displaced_deadline or meal in delivered[i]:
                continue
            if candidate == displaced or not safe_for(candidate, displaced_deadline):
                continue
            if not is_applicable(states[i], candidate):
                continue
            pool = pools.setdefault(meal, [])
            if candidate not in pool:
                pool.append(candidate)
        if pools:
            out[i] = pools
    return out


def corrupt(
    optimal: Plan,
    problem: PlanningProblem,
    rng: random.Random,
    *,
    position: int | None = None,
    root: State | None = None,
    budget: PlannerBudget | None = None,
) -> Plan:
    """Swap one step of ``optimal`` for a later-deadline meal's work and
    complete optimally from the resulting state.

    The result is guaranteed strictly worse: its realized overtime
    exceeds the given plan's. Candidates for which even the best
    completion absorbs the swap (the work merely commutes) are skipped,
    so a returned plan is a genuine mistake, not a reordering.

    Draw order is position, then meal, then replacement action, all
    uniform; when the drawn candidate is absorbable the remaining ones
    are tried in deterministic order. Raises :class:`NoFutureMealError`
    when nothing qualifies at the given position (or anywhere, when no
    position is pinned).
    """
    root = root if root is not None else problem.init
    base_overtime = plan_overtime(optimal, problem.goals, problem.time_limit)
    options = corruptible_positions(optimal, problem, root)
    if position is None:
        positions = sorted(options)
        if not positions:
            raise NoFutureMealError("no plan step can be displaced by a later meal's work")
        drawn = positions[rng.randrange(len(positions))]
        ordered_positions = [drawn, *(p for p in positions if p != drawn)]
    elif position not in options:
        raise NoFutureMealError(f"step {position} cannot be displaced by a later meal's work")
    else:
        ordered_positions = [position]

    states = [root]
    for action in optimal.steps:
        states.append(apply(states[-1], action))

    for pos in ordered_positions:
        pools = options[pos]
        meals = sorted(pools)
        meal = meals[rng.randrange(len(meals))]
        pool = pools[meal]
        first = pool[rng.randrange(len(pool))]
        ordered: list[GroundAction] = [first, *(b for b in pool if b != first)]
        for other in meals:
            if other != meal:
                ordered.extend(pools[other])
        for replacement in ordered:
            after = apply(states[pos], replacement)
            completion = replan(problem, after, budget=budget)
            steps = (*optimal.steps[:pos], replacement, *completion.steps)
            candidate = make_plan(root, steps, problem.goals)
            if plan_overtime(candidate, problem.goals, problem.time_limit) > base_overtime:
                return candidate
    raise NoFutureMealError("every qualifying swap is absorbed by replanning")


class Advisor:
    """Stateful recommendation stream for one game.

    Call :meth:`next_recommendation` once per player turn with the
    current state and the action the player just took. Identical
    (problem, config, action trace) inputs reproduce the identical
    stream: all randomness flows through one seeded generator, drawn in
    a fixed order (provenance first, then any corruption choices).
    """

    def __init__(
        self,
        problem: PlanningProblem,
        lexicon: Lexicon,
        config: AdvisorConfig,
        budget: PlannerBudget | None = None,
    ) -> None:
        self.problem = problem
        self.lexicon = lexicon
        self.config = config
        self.budget = budget or PlannerBudget()
        self.rng = random.Random(config.seed)
        self.pair: PlanPair | None = None
        self.last: Recommendation | None = None
        self._snapshots = 0

    def _snapshot_id(self) -> str:
        self._snapshots += 1
        return f"plan-{self._snapshots}"

    def _solve_from(self, state: State) -> Plan | None:
        try:
            return replan(self.problem, state, budget=self.budget)
        except UnsolvableError:
            logger.warning("no plan exists from the current state; no suggestion")
            return None
        except BudgetExhaustedError as exc:
            if exc.incumbent is not None:
                logger.warning("planner budget exhausted; using best plan found")
                return exc.incumbent
            logger.warning("planner budget exhausted with no plan; no suggestion")
            return None

    def next_recommendation(
        self, state: State, last_user_action: str | None = None
    ) -> Recommendation | None:
        if self.config.mode == "none":
            return None
        if not self.problem.pending_goals(state):
            return None

        pair = self.pair
        conformed = (
            pair is not None
            and self.last is not None
            and last_user_action == self.last.action.line()
        )
        if conformed:
            followed = pair.corrupted if self.last.provenance == CORRUPTED else pair.optimal
            pair = PlanPair(
                optimal=followed,
                corrupted=None,
                cursor=pair.cursor + 1,
                root=pair.root,
                snapshot_id=pair.snapshot_id if followed is pair.optimal else self._snapshot_id(),
            )
        if (
            not conformed
            or pair.cursor >= len(pair.optimal.steps)
            or not is_applicable(state, pair.optimal.steps[pair.cursor])
        ):
            fresh = self._solve_from(state)
            if fresh is None or not fresh.steps:
                self.pair, self.last = None, None
                return None
            pair = PlanPair(
                optimal=fresh, corrupted=None, cursor=0, root=state, snapshot_id=self._snapshot_id()
            )
        self.pair = pair

        provenance = draw_provenance(self.rng, self.config.corruption_prob)
        chosen = pair.optimal
        if provenance == CORRUPTED:
            try:
                pair.corrupted = corrupt(
                    pair.optimal,
                    self.problem,
                    self.rng,
                    position=pair.cursor,
                    root=pair.root,
                    budget=self.budget,
                )
                chosen = pair.corrupted
            except NoFutureMealError:
                provenance = OPTIMAL
            except PlanningError:
                logger.warning("corruption replan failed; falling back to the optimal step")
                provenance = OPTIMAL
        action = chosen.steps[pair.cursor]

        if self.config.mode == "action_only":
            rendering = render(action, "action_only", self.lexicon)
        elif self.config.mode == "subgoal":
            attrs = attribute_subgoals(chosen, self.problem)
            rendering = render(
                action, "subgoal", self.lexicon, attribution=attrs[pair.cursor]
            )
        else:
            links = extract_causal_links(chosen, pair.cursor)
            rendering = render(action, "clc", self.lexicon, links=links, plan=chosen)

        rec = Recommendation(
            action=action,
            mode=self.config.mode,
            text=rendering.text,
            provenance=provenance,
            plan_snapshot=pair.snapshot_id,
            payload=rendering.payload,
        )
        assert is_applicable(state, rec.action), "recommended an inapplicable action"
        self.last = rec
        return rec

"""Turning plan steps into short imperative explanations.

Three modes are supported:

* ``action_only``: just the step, e.g. "Chop the tomato."
* ``clc``: the step plus the later plan steps it feeds, justified by
  causal links (an effect of this step that a later step needs, with no
  intermediate step deleting it), e.g. "Move to the gather station to
  move the tomato."
* ``subgoal``: the step plus the single meal it is working toward,
  e.g. "Chop the tomato for the salad meal."

All surface text comes from a per-game phrase lexicon, so wording stays
a data concern: station and ingredient display names, an imperative
verb per action, and per-meal clauses for the subgoal and causal-link
suffixes. Meal clauses are free text because games differ in phrasing
(one game may say "the salad meal" where another says "preparing the
soup").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import Fluent, GroundAction, Plan, PlanningProblem

_CHEF = "chef"

MODES = ("none", "action_only", "clc", "subgoal")

DEFAULT_VERBS = {
    "move-chef": "Move",
    "move-item": "Move",
    "cut": "Chop",
    "start-cook": "Start cooking",
    "end-cook": "Finish cooking",
    "prepare-meal": "Prepare",
    "deliver": "Deliver",
}

_INGREDIENT_ARG = {"cut": 3, "move-item": 3, "start-cook": 2, "end-cook": 2}
_MEAL_ARG = {"prepare-meal": 2, "deliver": 3}


class LexiconError(KeyError):
    """A symbol has no display phrase in the game lexicon."""


@dataclass(frozen=True)
class MealPhrases:
    """Display phrases for one meal.

    ``noun`` is the bare noun phrase ("salad meal"), ``subgoal_clause``
    completes "... for {subgoal_clause}." and ``link_clause`` completes
    "... for {link_clause}." when a plating step consumes this action's
    effects (several meals join as "... for A or B or C.").
    """

    noun: str
    subgoal_clause: str
    link_clause: str


@dataclass(frozen=True)
class Lexicon:
    stations: Mapping[str, str]
    ingredients: Mapping[str, str]
    meals: Mapping[str, MealPhrases]
    verbs: Mapping[str, str] = field(default_factory=dict)

    def station(self, symbol: str) -> str:
        try:
            return self.stations[symbol]
        except KeyError:
            raise LexiconError(f"no display name for station {symbol!r}") from None

    def ingredient(self, symbol: str) -> str:
        try:
            return self.ingredients[symbol]
        except KeyError:
            raise LexiconError(f"no display name for ingredient {symbol!r}") from None

    def meal(self, symbol: str) -> MealPhrases:
        try:
            return self.meals[symbol]
        except KeyError:
            raise LexiconError(f"no phrases for meal {symbol!r}") from None

    def verb(self, action_name: str) -> str:
        if action_name in self.verbs:
            return self.verbs[action_name]
        try:
            return DEFAULT_VERBS[action_name]
        except KeyError:
            raise LexiconError(f"no verb for action {action_name!r}") from None

    def check_coverage(
        self,
        stations: Iterable[str],
        ingredients: Iterable[str],
        meals: Iterable[str],
        actions: Iterable[str],
    ) -> None:
        for s in stations:
            self.station(s)
        for i in ingredients:
            self.ingredient(i)
        for m in meals:
            self.meal(m)
        for a in actions:
            self.verb(a)


@dataclass(frozen=True)
class SubgoalAttribution:
    """Which meal a plan step serves, and which rule decided that.

    ``direct`` covers steps that name a meal or touch one of its
    ingredients; ``movement-lookahead`` copies the attribution of the
    next non-movement step; ``deadline-fallback`` marks the cases the
    plan itself could not disambiguate.
    """

    step_index: int
    meal_id: str
    rule: str  # direct | movement-lookahead | deadline-fallback


@dataclass(frozen=True)
class CausalLink:
    """``producer`` adds ``fluent``, ``consumer`` needs it, and no step
    between them deletes it."""

    producer: int
    consumer: int
    fluent: Fluent

    def __post_init__(self) -> None:
        if not self.producer < self.consumer:
            raise ValueError("a causal link must point forward in the plan")


@dataclass(frozen=True)
class ExplanationRendering:
    mode: str
    text: str
    payload: Mapping[str, object] = field(default_factory=dict)


def meal_requirements(problem: PlanningProblem) -> dict[str, frozenset[str]]:
    """Meal id -> ingredient names, read off the grounded plating steps."""
    out: dict[str, frozenset[str]] = {}
    for action in problem.domain.ground_actions:
        if action.name != "prepare-meal":
            continue
        meal = action.args[_MEAL_ARG["prepare-meal"]]
        out[meal] = frozenset(
            f.args[0]
            for f in action.pre
            if f.predicate == "at" and f.args[0] not in (_CHEF, meal)
        )
    return out


def _delivered_before(plan: Plan) -> list[frozenset[str]]:
    """For each step index, the meals already delivered before it runs."""
    done: set[str] = set()
    out: list[frozenset[str]] = []
    for action in plan.steps:
        out.append(frozenset(done))
        if action.name == "deliver":
            done.add(action.args[_MEAL_ARG["deliver"]])
    return out


def attribute_subgoals(plan: Plan, problem: PlanningProblem) -> list[SubgoalAttribution]:
    """Attribute every plan step to the meal it serves.

    Steps naming a meal use it directly. Ingredient-touching steps use
    the meal that requires the ingredient; when several meals share it,
    the next plating step in the plan that consumes it decides, and
    failing that the earliest-deadline candidate still pending. Chef
    movements take the attribution of the next non-movement step, and
    trailing movements attach to the last pending meal.
    """
    requirements = meal_requirements(problem)
    deadline_order = [g.meal_id for g in problem.goals]
    rank = {meal: i for i, meal in enumerate(deadline_order)}
    delivered_before = _delivered_before(plan)

    resolved: dict[int, tuple[str, str]] = {}
    for i, action in enumerate(plan.steps):
        if action.name == "move-chef":
            continue
        if action.name in _MEAL_ARG:
            resolved[i] = (action.args[_MEAL_ARG[action.name]], "direct")
            continue
        ingredient = action.args[_INGREDIENT_ARG[action.name]]
        candidates = sorted(
            (m for m, needs in requirements.items() if ingredient in needs),
            key=lambda m: rank.get(m, len(rank)),
        )
        if len(candidates) == 1:
            resolved[i] = (candidates[0], "direct")
            continue
        if candidates:
            consumer = next(
                (
                    plan.steps[j].args[_MEAL_ARG["prepare-meal"]]
                    for j in range(i + 1, len(plan.steps))
                    if plan.steps[j].name == "prepare-meal"
                    and plan.steps[j].args[_MEAL_ARG["prepare-meal"]] in candidates
                ),
                None,
            )
            if consumer is not None:
                resolved[i] = (consumer, "direct")
                continue
            pending = [m for m in candidates if m not in delivered_before[i]]
            resolved[i] = ((pending or candidates)[0], "deadline-fallback")
            continue
        pending_all = [m for m in deadline_order if m not in delivered_before[i]]
        resolved[i] = ((pending_all or deadline_order)[0], "deadline-fallback")

    attributions: list[SubgoalAttribution] = []
    for i, action in enumerate(plan.steps):
        if action.name != "move-chef":
            meal, rule = resolved[i]
            attributions.append(SubgoalAttribution(i, meal, rule))
            continue
        follower = next((j for j in range(i + 1, len(plan.steps)) if j in resolved), None)
        if follower is not None:
            attributions.append(SubgoalAttribution(i, resolved[follower][0], "movement-lookahead"))
            continue
        pending = [m for m in deadline_order if m not in delivered_before[i]]
        meal = pending[-1] if pending else deadline_order[-1]
        attributions.append(SubgoalAttribution(i, meal, "movement-lookahead"))
    return attributions


def extract_causal_links(plan: Plan, step_index: int) -> list[CausalLink]:
    """Every causal link whose producer is ``step_index``, ordered by
    fluent then consumer. Consumers stop at the first later deleter."""
    producer = plan.steps[step_index]
    links: list[CausalLink] = []
    for f in sorted(producer.add):
        for j in range(step_index + 1, len(plan.steps)):
            later = plan.steps[j]
            if f in later.pre:
                links.append(CausalLink(producer=step_index, consumer=j, fluent=f))
            if f in later.delete:
                break
    links.sort(key=lambda l: (l.consumer, l.fluent))
    return links


def base_clause(action: GroundAction, lexicon: Lexicon) -> str:
    """The imperative clause for a step, without trailing punctuation."""
    verb = lexicon.verb(action.name)
    name = action.name
    if name == "cut":
        return f"{verb} the {lexicon.ingredient(action.args[3])}"
    if name == "move-item":
        return f"{verb} the {lexicon.ingredient(action.args[3])} to the {lexicon.station(action.args[2])}"
    if name == "move-chef":
        return f"{verb} to the {lexicon.station(action.args[2])}"
    if name in ("start-cook", "end-cook"):
        return f"{verb} the {lexicon.ingredient(action.args[2])}"
    if name == "prepare-meal":
        return f"{verb} the {lexicon.meal(action.args[2]).noun}"
    if name == "deliver":
        return f"{verb} the {lexicon.meal(action.args[3]).noun}"
    raise ValueError(f"no clause template for action {name!r}")


def _consumer_clause(consumer: GroundAction, lexicon: Lexicon) -> str:
    name = consumer.name
    if name == "move-item":
        return f"to move the {lexicon.ingredient(consumer.args[3])}"
    if name == "cut":
        return f"to chop the {lexicon.ingredient(consumer.args[3])}"
    if name == "start-cook":
        return f"to cook the {lexicon.ingredient(consumer.args[2])}"
    if name == "end-cook":
        return f"to finish cooking the {lexicon.ingredient(consumer.args[2])}"
    if name == "move-chef":
        return f"to move to the {lexicon.station(consumer.args[2])}"
    if name == "deliver":
        return f"to deliver the {lexicon.meal(consumer.args[3]).noun}"
    raise ValueError(f"no consumer clause for action {name!r}")


def render(
    action: GroundAction,
    mode: str,
    lexicon: Lexicon,
    *,
    attribution: SubgoalAttribution | None = None,
    links: Sequence[CausalLink] | None = None,
    plan: Plan | None = None,
) -> ExplanationRendering:
    """Render one recommendation text.

    ``subgoal`` mode needs ``attribution``; ``clc`` mode needs ``links``
    together with the ``plan`` they index into. A clc step whose effects
    feed no later step renders like ``action_only``.
    """
    if mode not in MODES or mode == "none":
        raise ValueError(f"cannot render mode {mode!r}")
    base = base_clause(action, lexicon)
    if mode == "action_only":
        return ExplanationRendering(mode=mode, text=f"{base}.")
    if mode == "subgoal":
        if attribution is None:
            raise ValueError("subgoal mode requires an attribution")
        clause = lexicon.meal(attribution.meal_id).subgoal_clause
        return ExplanationRendering(
            mode=mode,
            text=f"{base} for {clause}.",
            payload={"meal": attribution.meal_id, "rule": attribution.rule},
        )
    if links is None or plan is None:
        raise ValueError("clc mode requires links and the plan they index")
    consumer_order: list[int] = []
    for link in sorted(links, key=lambda l: (l.consumer, l.fluent)):
        if link.consumer not in consumer_order:
            consumer_order.append(link.consumer)
    plating_clauses: list[str] = []
    other_clauses: list[str] = []
    for j in consumer_order:
        consumer = plan.steps[j]
        if consumer.name == "prepare-meal":
            plating_clauses.append(lexicon.meal(consumer.args[_MEAL_ARG["prepare-meal"]]).link_clause)
        else:
            other_clauses.append(_consumer_clause(consumer, lexicon))
    segments: list[str] = []
    if plating_clauses:
        segments.append("for " + " or ".join(plating_clauses))
    segments.extend(other_clauses)
    text = f"{base} {' or '.join(segments)}." if segments else f"{base}."
    payload = {
        "links": [
            {"producer": l.producer, "consumer": l.consumer, "fluent": str(l.fluent)}
            for l in sorted(links, key=lambda l: (l.consumer, l.fluent))
        ]
    }
    return ExplanationRendering(mode=mode, text=text, payload=payload)

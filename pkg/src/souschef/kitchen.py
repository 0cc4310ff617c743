"""Kitchen game domain: config files, grounding, legal moves, stepping.

A game is one chef working five stations to assemble and deliver meals
before their deadlines. Seven action schemas exist:

* ``move-chef chef FROM TO`` walks the chef between stations.
* ``move-item chef FROM TO ITEM`` carries an ingredient along.
* ``cut chef FROM cutStation ITEM`` carries a raw ingredient to the
  cutting station (FROM may equal cutStation) and chops it.
* ``start-cook chef cookStation ITEM`` begins cooking.
* ``end-cook chef cookStation ITEM`` takes the item off the heat; legal
  only once the ingredient's cook duration has elapsed.
* ``prepare-meal chef plateStation MEAL`` plates a meal whose prepared
  ingredients are all at the plating station.
* ``deliver chef plateStation deliveryStation MEAL`` carries a plated
  meal out, satisfying its subgoal.

Plating does not consume ingredients, so one prepared ingredient can
count toward several meals that call for it.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .explain import Lexicon, MealPhrases
from .model import (
    ActionSpec,
    Domain,
    Fluent,
    GroundAction,
    InapplicableActionError,
    Param,
    Plan,
    PlanningProblem,
    State,
    Subgoal,
    apply,
    fluent,
    is_applicable,
)

CHEF = "chef"
GATHER = "gatherStation"
CUT = "cutStation"
COOK = "cookStation"
PLATE = "plateStation"
DELIVERY = "deliveryStation"
CANONICAL_STATIONS = (GATHER, CUT, COOK, PLATE, DELIVERY)

ACTION_NAMES = (
    "move-chef",
    "move-item",
    "cut",
    "start-cook",
    "end-cook",
    "prepare-meal",
    "deliver",
)

DEFAULT_ACTION_COSTS = {
    "move-chef": 1,
    "move-item": 1,
    "cut": 2,
    "start-cook": 1,
    "end-cook": 1,
    "prepare-meal": 2,
    "deliver": 1,
}

DEFAULT_STATION_DISPLAY = {
    GATHER: "gather station",
    CUT: "cutting station",
    COOK: "cooking station",
    PLATE: "plating station",
    DELIVERY: "delivery station",
}

PREDICATES = (
    ("at", 2),
    ("raw", 1),
    ("chopped", 1),
    ("uncooked", 1),
    ("cooking", 1),
    ("cooked", 1),
    ("unprepared", 1),
    ("plated", 1),
    ("delivered", 1),
)

DEFAULT_TIME_LIMIT = 80
MAX_GROUND_ACTIONS = 2000


class ConfigError(ValueError):
    """A game config failed schema validation."""


class IllegalActionError(InapplicableActionError):
    """The submitted action is not legal in the current game state."""


class GameOverError(IllegalActionError):
    """No further actions are accepted: the game timed out or finished."""


@dataclass(frozen=True)
class IngredientSpec:
    name: str
    display: str
    needs_chop: bool = False
    cook_duration: int | None = None

    def __post_init__(self) -> None:
        if self.cook_duration is not None and self.cook_duration < 1:
            raise ConfigError(f"{self.name}: cook_duration must be at least 1")


@dataclass(frozen=True)
class MealSpec:
    name: str
    display: str
    ingredients: tuple[str, ...]
    deadline: int
    subgoal_clause: str
    link_clause: str

    def __post_init__(self) -> None:
        if not self.ingredients:
            raise ConfigError(f"{self.name}: a meal needs at least one ingredient")
        if self.deadline < 1:
            raise ConfigError(f"{self.name}: deadline must be positive")


@dataclass(frozen=True)
class GameConfig:
    game_id: str
    title: str
    stations: tuple[str, ...]
    ingredients: tuple[IngredientSpec, ...]
    meals: tuple[MealSpec, ...]
    action_costs: Mapping[str, int]
    time_limit: int
    pre_performed: tuple[str, ...]
    lexicon: Lexicon

    def ingredient(self, name: str) -> IngredientSpec:
        for ing in self.ingredients:
            if ing.name == name:
                return ing
        raise KeyError(name)

    def meal(self, name: str) -> MealSpec:
        for m in self.meals:
            if m.name == name:
                return m
        raise KeyError(name)


@dataclass(frozen=True)
class KitchenEvent:
    kind: str  # action_taken | meal_delivered | timeout | game_complete
    at_cost: int
    data: Mapping[str, str] = field(default_factory=dict)


def _require_keys(mapping: Mapping, allowed: Iterable[str], required: Iterable[str], where: str) -> None:
    allowed = set(allowed)
    required = set(required)
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _as_int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_str(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def load_config(source: str | Path) -> GameConfig:
    """Parse and validate a game config from YAML text or a file path.

    Unknown keys are rejected so typos fail loudly rather than being
    silently ignored. Parse errors keep the YAML line/column marks.
    """
    if isinstance(source, Path):
        text = source.read_text()
    elif "\n" not in source and (source.endswith(".yaml") or source.endswith(".yml")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        raw = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return _config_from_dict(raw)


def _config_from_dict(raw: Mapping) -> GameConfig:
    _require_keys(
        raw,
        allowed=(
            "game_id",
            "title",
            "stations",
            "ingredients",
            "meals",
            "action_costs",
            "time_limit",
            "pre_performed",
            "lexicon",
        ),
        required=("game_id", "stations", "ingredients", "meals"),
        where="config",
    )
    game_id = _as_str(raw["game_id"], "game_id")
    title = _as_str(raw.get("title", game_id), "title")

    stations = tuple(_as_str(s, "stations") for s in raw["stations"])
    if sorted(stations) != sorted(CANONICAL_STATIONS):
        raise ConfigError(
            f"stations must be exactly {list(CANONICAL_STATIONS)} (got {list(stations)})"
        )

    ingredients = []
    for entry in raw["ingredients"]:
        _require_keys(
            entry,
            allowed=("name", "display", "needs_chop", "cook_duration"),
            required=("name", "display"),
            where="ingredients",
        )
        duration = entry.get("cook_duration")
        ingredients.append(
            IngredientSpec(
                name=_as_str(entry["name"], "ingredient name"),
                display=_as_str(entry["display"], "ingredient display"),
                needs_chop=bool(entry.get("needs_chop", False)),
                cook_duration=None if duration is None else _as_int(duration, "cook_duration"),
            )
        )
    names = [i.name for i in ingredients]
    if len(names) != len(set(names)):
        raise ConfigError("duplicate ingredient names")

    meals = []
    for entry in raw["meals"]:
        _require_keys(
            entry,
            allowed=("name", "display", "ingredients", "deadline", "subgoal_clause", "link_clause"),
            required=("name", "display", "ingredients", "deadline"),
            where="meals",
        )
        display = _as_str(entry["display"], "meal display")
        meals.append(
            MealSpec(
                name=_as_str(entry["name"], "meal name"),
                display=display,
                ingredients=tuple(_as_str(i, "meal ingredients") for i in entry["ingredients"]),
                deadline=_as_int(entry["deadline"], "deadline"),
                subgoal_clause=_as_str(
                    entry.get("subgoal_clause", f"preparing the {display}"), "subgoal_clause"
                ),
                link_clause=_as_str(entry.get("link_clause", f"the {display}"), "link_clause"),
            )
        )
    meal_names = [m.name for m in meals]
    if len(meal_names) != len(set(meal_names)):
        raise ConfigError("duplicate meal names")
    if set(meal_names) & set(names):
        raise ConfigError("meal names must not collide with ingredient names")
    for m in meals:
        unknown = set(m.ingredients) - set(names)
        if unknown:
            raise ConfigError(f"meal {m.name} references unknown ingredients {sorted(unknown)}")

    costs = dict(DEFAULT_ACTION_COSTS)
    for key, value in (raw.get("action_costs") or {}).items():
        if key not in ACTION_NAMES:
            raise ConfigError(f"action_costs: unknown action {key!r}")
        cost = _as_int(value, f"action_costs.{key}")
        if cost < 1:
            raise ConfigError(f"action_costs.{key}: must be at least 1")
        costs[key] = cost

    time_limit = _as_int(raw.get("time_limit", DEFAULT_TIME_LIMIT), "time_limit")
    if time_limit < 1:
        raise ConfigError("time_limit must be positive")

    pre_performed = tuple(_as_str(line, "pre_performed") for line in raw.get("pre_performed") or ())

    lex_raw = raw.get("lexicon") or {}
    _require_keys(lex_raw, allowed=("stations", "verbs"), required=(), where="lexicon")
    station_display = dict(DEFAULT_STATION_DISPLAY)
    for key, value in (lex_raw.get("stations") or {}).items():
        if key not in CANONICAL_STATIONS:
            raise ConfigError(f"lexicon.stations: unknown station {key!r}")
        station_display[key] = _as_str(value, "lexicon.stations")
    verbs = {k: _as_str(v, "lexicon.verbs") for k, v in (lex_raw.get("verbs") or {}).items()}
    unknown_verbs = set(verbs) - set(ACTION_NAMES)
    if unknown_verbs:
        raise ConfigError(f"lexicon.verbs: unknown actions {sorted(unknown_verbs)}")

    lexicon = Lexicon(
        stations=station_display,
        ingredients={i.name: i.display for i in ingredients},
        meals={
            m.name: MealPhrases(
                noun=m.display,
                subgoal_clause=m.subgoal_clause,
                link_clause=m.link_clause,
            )
            for m in meals
        },
        verbs=verbs,
    )

    config = GameConfig(
        game_id=game_id,
        title=title,
        stations=tuple(CANONICAL_STATIONS),
        ingredients=tuple(ingredients),
        meals=tuple(meals),
        action_costs=costs,
        time_limit=time_limit,
        pre_performed=pre_performed,
        lexicon=lexicon,
    )
    lexicon.check_coverage(
        stations=config.stations,
        ingredients=[i.name for i in config.ingredients],
        meals=[m.name for m in config.meals],
        actions=ACTION_NAMES,
    )
    return config


def bundled_game_ids() -> list[str]:
    root = resources.files("souschef").joinpath("games")
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_bundled(game_id: str) -> GameConfig:
    path = resources.files("souschef").joinpath("games", f"{game_id}.yaml")
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"no bundled game named {game_id!r}") from None
    return load_config(text)


def resolve_config(name_or_path: str) -> GameConfig:
    """Accept either a bundled game id or a path to a YAML file."""
    p = Path(name_or_path)
    if p.exists():
        return load_config(p)
    return load_bundled(name_or_path)


def _spec_move_chef(cost: int) -> ActionSpec:
    return ActionSpec(
        name="move-chef",
        params=(Param("chef", "chef"), Param("from", "station"), Param("to", "station")),
        cost=cost,
        pre=(fluent("at", "?chef", "?from"),),
        add=(fluent("at", "?chef", "?to"),),
        delete=(fluent("at", "?chef", "?from"),),
    )


def _spec_move_item(cost: int) -> ActionSpec:
    return ActionSpec(
        name="move-item",
        params=(
            Param("chef", "chef"),
            Param("from", "station"),
            Param("to", "station"),
            Param("item", "ingredient"),
        ),
        cost=cost,
        pre=(fluent("at", "?chef", "?from"), fluent("at", "?item", "?from")),
        add=(fluent("at", "?chef", "?to"), fluent("at", "?item", "?to")),
        delete=(fluent("at", "?chef", "?from"), fluent("at", "?item", "?from")),
    )


def _spec_cut_moving(cost: int) -> ActionSpec:
    return ActionSpec(
        name="cut",
        params=(
            Param("chef", "chef"),
            Param("from", "station"),
            Param("to", "station"),
            Param("item", "ingredient"),
        ),
        cost=cost,
        pre=(fluent("at", "?chef", "?from"), fluent("at", "?item", "?from"), fluent("raw", "?item")),
        add=(fluent("at", "?chef", "?to"), fluent("at", "?item", "?to"), fluent("chopped", "?item")),
        delete=(fluent("at", "?chef", "?from"), fluent("at", "?item", "?from"), fluent("raw", "?item")),
    )


def _spec_cut_in_place(cost: int) -> ActionSpec:
    # Same surface syntax as the moving variant, with FROM == cutStation.
    return ActionSpec(
        name="cut",
        params=(
            Param("chef", "chef"),
            Param("from", "station"),
            Param("to", "station"),
            Param("item", "ingredient"),
        ),
        cost=cost,
        pre=(fluent("at", "?chef", "?to"), fluent("at", "?item", "?to"), fluent("raw", "?item")),
        add=(fluent("chopped", "?item"),),
        delete=(fluent("raw", "?item"),),
    )


def _spec_start_cook(cost: int, chop_first: bool) -> ActionSpec:
    pre = [
        fluent("at", "?chef", "?station"),
        fluent("at", "?item", "?station"),
        fluent("uncooked", "?item"),
    ]
    if chop_first:
        pre.append(fluent("chopped", "?item"))
    return ActionSpec(
        name="start-cook",
        params=(Param("chef", "chef"), Param("station", "station"), Param("item", "ingredient")),
        cost=cost,
        pre=tuple(pre),
        add=(fluent("cooking", "?item"),),
        delete=(fluent("uncooked", "?item"),),
        starts_timing="item",
    )


def _spec_end_cook(cost: int) -> ActionSpec:
    return ActionSpec(
        name="end-cook",
        params=(Param("chef", "chef"), Param("station", "station"), Param("item", "ingredient")),
        cost=cost,
        pre=(
            fluent("at", "?chef", "?station"),
            fluent("at", "?item", "?station"),
            fluent("cooking", "?item"),
        ),
        add=(fluent("cooked", "?item"),),
        delete=(fluent("cooking", "?item"),),
        guard_param="item",
        stops_timing="item",
    )


def _spec_prepare(cost: int, meal: MealSpec, ingredients: Mapping[str, IngredientSpec]) -> ActionSpec:
    pre = [fluent("at", "?chef", "?station"), fluent("unprepared", "?meal")]
    for name in meal.ingredients:
        ing = ingredients[name]
        pre.append(fluent("at", name, "?station"))
        if ing.needs_chop:
            pre.append(fluent("chopped", name))
        if ing.cook_duration is not None:
            pre.append(fluent("cooked", name))
    return ActionSpec(
        name="prepare-meal",
        params=(Param("chef", "chef"), Param("station", "station"), Param("meal", "meal")),
        cost=cost,
        pre=tuple(pre),
        add=(fluent("plated", "?meal"), fluent("at", "?meal", "?station")),
        delete=(fluent("unprepared", "?meal"),),
    )


def _spec_deliver(cost: int) -> ActionSpec:
    return ActionSpec(
        name="deliver",
        params=(
            Param("chef", "chef"),
            Param("from", "station"),
            Param("to", "station"),
            Param("meal", "meal"),
        ),
        cost=cost,
        pre=(fluent("at", "?chef", "?from"), fluent("at", "?meal", "?from"), fluent("plated", "?meal")),
        add=(fluent("at", "?chef", "?to"), fluent("at", "?meal", "?to"), fluent("delivered", "?meal")),
        delete=(fluent("at", "?chef", "?from"), fluent("at", "?meal", "?from"), fluent("plated", "?meal")),
    )


def ground_kitchen(
    stations: Sequence[str],
    ingredients: Sequence[IngredientSpec],
    meals: Sequence[MealSpec],
    action_costs: Mapping[str, int] | None = None,
    time_limit: int = DEFAULT_TIME_LIMIT,
    max_ground_actions: int = MAX_GROUND_ACTIONS,
) -> PlanningProblem:
    """Ground the kitchen schemas over arbitrary station subsets.

    ``compile_game`` uses this with the five canonical stations; tests
    build smaller instances directly. ``stations`` must always include
    the gather, plating, and delivery stations, the cutting station when
    any ingredient needs chopping, and the cooking station when any
    ingredient cooks.
    """
    costs = dict(DEFAULT_ACTION_COSTS)
    costs.update(action_costs or {})
    stations = tuple(stations)
    for required in (GATHER, PLATE, DELIVERY):
        if required not in stations:
            raise ConfigError(f"station {required} is required")
    by_name = {i.name: i for i in ingredients}
    choppable = [i for i in ingredients if i.needs_chop]
    cookable = [i for i in ingredients if i.cook_duration is not None]
    if choppable and CUT not in stations:
        raise ConfigError("ingredients need chopping but there is no cutting station")
    if cookable and COOK not in stations:
        raise ConfigError("ingredients need cooking but there is no cooking station")
    for meal in meals:
        for name in meal.ingredients:
            if name not in by_name:
                raise ConfigError(f"meal {meal.name} references unknown ingredient {name}")

    move_chef = _spec_move_chef(costs["move-chef"])
    move_item = _spec_move_item(costs["move-item"])
    cut_moving = _spec_cut_moving(costs["cut"])
    cut_in_place = _spec_cut_in_place(costs["cut"])
    end_cook = _spec_end_cook(costs["end-cook"])
    deliver = _spec_deliver(costs["deliver"])
    start_specs = {
        True: _spec_start_cook(costs["start-cook"], chop_first=True),
        False: _spec_start_cook(costs["start-cook"], chop_first=False),
    }
    prepare_specs = {m.name: _spec_prepare(costs["prepare-meal"], m, by_name) for m in meals}

    actions: list[GroundAction] = []
    for a in stations:
        for b in stations:
            if a != b:
                actions.append(move_chef.ground({"chef": CHEF, "from": a, "to": b}))
    for ing in ingredients:
        for a in stations:
            for b in stations:
                if a != b:
                    actions.append(
                        move_item.ground({"chef": CHEF, "from": a, "to": b, "item": ing.name})
                    )
    for ing in choppable:
        for a in stations:
            spec = cut_in_place if a == CUT else cut_moving
            actions.append(spec.ground({"chef": CHEF, "from": a, "to": CUT, "item": ing.name}))
    for ing in cookable:
        actions.append(
            start_specs[ing.needs_chop].ground({"chef": CHEF, "station": COOK, "item": ing.name})
        )
        actions.append(
            end_cook.ground(
                {"chef": CHEF, "station": COOK, "item": ing.name},
                guard_duration=ing.cook_duration,
            )
        )
    for meal in meals:
        actions.append(prepare_specs[meal.name].ground({"chef": CHEF, "station": PLATE, "meal": meal.name}))
        actions.append(
            deliver.ground({"chef": CHEF, "from": PLATE, "to": DELIVERY, "meal": meal.name})
        )
    if len(actions) > max_ground_actions:
        raise ConfigError(f"grounding produced {len(actions)} actions (limit {max_ground_actions})")

    specs = (
        move_chef,
        move_item,
        cut_moving,
        cut_in_place,
        start_specs[True],
        start_specs[False],
        end_cook,
        deliver,
        *prepare_specs.values(),
    )
    domain = Domain(
        predicates=PREDICATES,
        specs=specs,
        ground_actions=tuple(actions),
    )

    init_fluents = {fluent("at", CHEF, GATHER)}
    for ing in ingredients:
        init_fluents.add(fluent("at", ing.name, GATHER))
        if ing.needs_chop:
            init_fluents.add(fluent("raw", ing.name))
        if ing.cook_duration is not None:
            init_fluents.add(fluent("uncooked", ing.name))
    for meal in meals:
        init_fluents.add(fluent("unprepared", meal.name))
    init = State(fluents=frozenset(init_fluents))

    goals = tuple(
        Subgoal(meal_id=m.name, satisfying_fluent=fluent("delivered", m.name), deadline=m.deadline)
        for m in sorted(meals, key=lambda m: (m.deadline, m.name))
    )
    return PlanningProblem(domain=domain, init=init, goals=goals, time_limit=time_limit)


def compile_game(config: GameConfig) -> PlanningProblem:
    """Ground a validated config into a planning problem, applying any
    pre-performed setup actions and restarting the clock at zero."""
    problem = ground_kitchen(
        stations=config.stations,
        ingredients=config.ingredients,
        meals=config.meals,
        action_costs=config.action_costs,
        time_limit=config.time_limit,
    )
    state = problem.init
    for line in config.pre_performed:
        action = problem.domain.action(line)
        if action.name in ("start-cook", "end-cook"):
            raise ConfigError(f"pre_performed may not include cooking steps: {line}")
        try:
            state = apply(state, action)
        except InapplicableActionError as exc:
            raise ConfigError(f"pre_performed step not applicable: {exc}") from exc
    if state is not problem.init:
        state = State(fluents=state.fluents, elapsed_cost=0, cook_start=())
        problem = replace(problem, init=state)
    return problem


def legal_actions(state: State, problem: PlanningProblem) -> list[GroundAction]:
    """All applicable ground actions, in grounding (sorted) order."""
    return [a for a in problem.domain.ground_actions if is_applicable(state, a)]


def step(
    state: State, action: GroundAction, problem: PlanningProblem
) -> tuple[State, list[KitchenEvent]]:
    """Apply one player action and report what happened.

    Raises :class:`GameOverError` once the game is over (time limit
    reached or every meal delivered) and :class:`IllegalActionError` for
    actions that are not applicable in ``state``.
    """
    if state.elapsed_cost >= problem.time_limit:
        raise GameOverError("the time limit has been reached")
    if not problem.pending_goals(state):
        raise GameOverError("every meal is already delivered")
    if not is_applicable(state, action):
        raise IllegalActionError(f"illegal action: {action.line()}")
    after = apply(state, action)
    events = [KitchenEvent(kind="action_taken", at_cost=after.elapsed_cost, data={"action": action.line()})]
    for goal in problem.goals:
        if goal.satisfying_fluent in action.add and goal.satisfying_fluent in after.fluents:
            events.append(
                KitchenEvent(
                    kind="meal_delivered",
                    at_cost=after.elapsed_cost,
                    data={"meal": goal.meal_id, "deadline": str(goal.deadline)},
                )
            )
    if not problem.pending_goals(after):
        events.append(KitchenEvent(kind="game_complete", at_cost=after.elapsed_cost))
    elif after.elapsed_cost >= problem.time_limit:
        events.append(KitchenEvent(kind="timeout", at_cost=after.elapsed_cost))
    return after, events


def check_state_invariants(state: State, config: GameConfig) -> list[str]:
    """Structural sanity checks; returns human-readable violations."""
    problems: list[str] = []
    locations: dict[str, list[str]] = {}
    for f in state.fluents:
        if f.predicate == "at":
            locations.setdefault(f.args[0], []).append(f.args[1])
    if len(locations.get(CHEF, [])) != 1:
        problems.append("chef must be at exactly one station")
    cooking = set()
    for ing in config.ingredients:
        spots = locations.get(ing.name, [])
        if len(spots) != 1:
            problems.append(f"{ing.name}: expected exactly one location, found {sorted(spots)}")
        if ing.needs_chop:
            marks = [p for p in ("raw", "chopped") if fluent(p, ing.name) in state.fluents]
            if len(marks) != 1:
                problems.append(f"{ing.name}: chop status must be exactly one of raw/chopped")
        if ing.cook_duration is not None:
            marks = [
                p for p in ("uncooked", "cooking", "cooked") if fluent(p, ing.name) in state.fluents
            ]
            if len(marks) != 1:
                problems.append(f"{ing.name}: cook status must be exactly one of uncooked/cooking/cooked")
            if fluent("cooking", ing.name) in state.fluents:
                cooking.add(ing.name)
    for meal in config.meals:
        marks = [
            p
            for p in ("unprepared", "plated", "delivered")
            if fluent(p, meal.name) in state.fluents
        ]
        if len(marks) != 1:
            problems.append(f"{meal.name}: meal status must be exactly one of unprepared/plated/delivered")
        placed = len(locations.get(meal.name, []))
        if marks == ["unprepared"] and placed:
            problems.append(f"{meal.name}: unprepared meals have no location")
        if marks != ["unprepared"] and placed != 1:
            problems.append(f"{meal.name}: plated or delivered meals have exactly one location")
    timed = {name for name, _ in state.cook_start}
    if timed != cooking:
        problems.append(f"cook timers {sorted(timed)} disagree with cooking items {sorted(cooking)}")
    return problems


def write_snapshot(state: State) -> str:
    """Canonical text form of a state: headers then sorted fluents."""
    lines = [f"elapsed_cost: {state.elapsed_cost}"]
    lines.append("cooking: " + " ".join(f"{k}={v}" for k, v in state.cook_start))
    lines.extend(sorted(str(f) for f in state.fluents))
    return "\n".join(lines).rstrip() + "\n"


def parse_snapshot(text: str) -> State:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2 or not lines[0].startswith("elapsed_cost:") or not lines[1].startswith("cooking:"):
        raise ValueError("snapshot must start with elapsed_cost and cooking headers")
    elapsed = int(lines[0].split(":", 1)[1].strip())
    cook_field = lines[1].split(":", 1)[1].strip()
    cook: list[tuple[str, int]] = []
    if cook_field:
        for chunk in cook_field.split():
            name, _, start = chunk.partition("=")
            cook.append((name, int(start)))
    fluents = frozenset(
        Fluent(parts[0], tuple(parts[1:])) for parts in (line.split() for line in lines[2:])
    )
    return State(fluents=fluents, elapsed_cost=elapsed, cook_start=tuple(sorted(cook)))


def write_plan_file(plan: Plan, goals: Sequence[Subgoal], time_limit: int) -> str:
    """Plan file format: two header lines, then one action line per step."""
    from .model import overtime_cost, plan_cost

    lines = [
        f"overtime: {overtime_cost(plan.delivery_map, goals, time_limit)}",
        f"total-cost: {plan_cost(plan)}",
    ]
    lines.extend(plan.lines())
    return "\n".join(lines) + "\n"


def parse_plan_file(text: str, problem: PlanningProblem) -> Plan:
    from .model import make_plan

    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("overtime:", "total-cost:", "#")):
            continue
        steps.append(problem.domain.action(line))
    return make_plan(problem.init, steps, problem.goals)

from __future__ import annotations

import functools
import random
from pathlib import Path

import pytest

from souschef.kitchen import (
    IngredientSpec,
    MealSpec,
    compile_game,
    ground_kitchen,
    load_bundled,
    load_config,
)
from souschef.model import PlanningProblem
from souschef.planner import solve

FIXTURES = Path(__file__).parent / "fixtures"

GATHER = "gatherStation"
CUT = "cutStation"
COOK = "cookStation"
PLATE = "plateStation"
DELIVERY = "deliveryStation"
ALL_STATIONS = (GATHER, CUT, COOK, PLATE, DELIVERY)


@functools.lru_cache(maxsize=None)
def bundled_problem(game_id: str):
    """(config, problem) for a bundled game, cached for the whole run."""
    config = load_bundled(game_id)
    return config, compile_game(config)


@functools.lru_cache(maxsize=None)
def bundled_plan(game_id: str):
    """(config, problem, optimal plan), cached for the whole run."""
    config, problem = bundled_problem(game_id)
    return config, problem, solve(problem)


@functools.lru_cache(maxsize=None)
def fixture_problem(name: str):
    config = load_config(FIXTURES / f"{name}.yaml")
    return config, compile_game(config)


def micro_instance(rng: random.Random, max_ingredients: int = 3) -> PlanningProblem:
    """A small random kitchen: at most 2 meals, 3 ingredients, and only
    the stations the ingredients actually need.

    Deadlines are drawn tight enough that many instances have forced
    overtime, which is the regime worth cross-checking. Sizes are capped
    so the enumeration oracle stays well under a second per instance.
    """
    n_ing = rng.randint(1, max_ingredients)
    # One prep station per instance keeps the station count at four or
    # fewer, which also keeps the enumeration oracle fast.
    prep = rng.choice(("chop", "cook", "plain"))
    ingredients = []
    for i in range(n_ing):
        needs_chop = prep == "chop" and rng.random() < 0.5
        cooks = prep == "cook" and rng.random() < 0.5
        ingredients.append(
            IngredientSpec(
                name=f"ing{i}",
                display=f"ingredient {i}",
                needs_chop=needs_chop,
                cook_duration=2 if cooks else None,
            )
        )
    n_meals = 1 if n_ing == 1 else rng.randint(1, 2)
    names = [i.name for i in ingredients]
    rng.shuffle(names)
    split = len(names) if n_meals == 1 else rng.randint(1, len(names) - 1)
    groups = [names[:split], names[split:]][:n_meals]
    groups = [g for g in groups if g]
    meals = [
        MealSpec(
            name=f"meal{k}",
            display=f"meal {k}",
            ingredients=tuple(group),
            deadline=rng.randint(4, 16),
            subgoal_clause=f"preparing meal {k}",
            link_clause=f"meal {k}",
        )
        for k, group in enumerate(groups)
    ]
    stations = [GATHER, PLATE, DELIVERY]
    if any(i.needs_chop for i in ingredients):
        stations.insert(1, CUT)
    if any(i.cook_duration for i in ingredients):
        stations.insert(-2, COOK)
    return ground_kitchen(
        stations=stations,
        ingredients=ingredients,
        meals=meals,
        time_limit=rng.randint(24, 40),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260818)

from __future__ import annotations

import textwrap

import pytest

from souschef.kitchen import (
    DEFAULT_ACTION_COSTS,
    ConfigError,
    GameOverError,
    IllegalActionError,
    bundled_game_ids,
    check_state_invariants,
    compile_game,
    legal_actions,
    load_bundled,
    load_config,
    parse_plan_file,
    parse_snapshot,
    step,
    write_plan_file,
    write_snapshot,
)
from souschef.model import apply, fluent, is_applicable
from souschef.planner import solve

from .conftest import ALL_STATIONS, bundled_plan, fixture_problem


def config_text(**overrides) -> str:
    base = textwrap.dedent(
        """
        game_id: tiny
        title: Tiny
        stations: [gatherStation, cutStation, cookStation, plateStation, deliveryStation]
        ingredients:
          - {name: cheese1, display: cheese}
        meals:
          - {name: snack, display: snack, ingredients: [cheese1], deadline: 4}
        """
    )
    import yaml

    raw = yaml.safe_load(base)
    raw.update(overrides)
    return yaml.safe_dump(raw)


def test_bundled_games_all_load_and_compile():
    ids = bundled_game_ids()
    assert ids == sorted(ids)
    assert set(ids) == {
        "asian_fusion",
        "burrito_tutorial",
        "dinner_rush",
        "italian_bistro",
        "practice_duo",
    }
    for game_id in ids:
        config = load_bundled(game_id)
        assert config.game_id == game_id
        assert tuple(config.stations) == ALL_STATIONS
        problem = compile_game(config)
        assert problem.time_limit == 80
        assert len(problem.goals) == len(config.meals)


def test_load_config_defaults():
    config = load_config(config_text())
    assert config.action_costs == DEFAULT_ACTION_COSTS
    assert config.time_limit == 80
    phrases = config.lexicon.meal("snack")
    assert phrases.subgoal_clause == "preparing the snack"
    assert phrases.link_clause == "the snack"


def test_load_config_rejects_unknown_keys_and_bad_stations():
    with pytest.raises(ConfigError, match="unknown"):
        load_config(config_text(extra_key=1))
    with pytest.raises(ConfigError, match="station"):
        load_config(config_text(stations=["gatherStation", "plateStation"]))


def test_load_config_rejects_bad_references():
    bad_meal = [{"name": "snack", "display": "snack", "ingredients": ["nope"], "deadline": 4}]
    with pytest.raises(ConfigError):
        load_config(config_text(meals=bad_meal))
    dup = [
        {"name": "cheese1", "display": "cheese"},
        {"name": "cheese1", "display": "cheese again"},
    ]
    with pytest.raises(ConfigError):
        load_config(config_text(ingredients=dup))


def test_load_config_rejects_bad_costs():
    with pytest.raises(ConfigError, match="action_costs"):
        load_config(config_text(action_costs={"move-chef": 0}))
    with pytest.raises(ConfigError, match="unknown action"):
        load_config(config_text(action_costs={"teleport": 1}))


def test_pre_performed_restarts_clock():
    config = load_config(
        config_text(pre_performed=["move-item chef gatherStation plateStation cheese1"])
    )
    problem = compile_game(config)
    assert problem.init.elapsed_cost == 0
    assert problem.init.has(fluent("at", "cheese1", "plateStation"))
    assert problem.init.has(fluent("at", "chef", "plateStation"))


def test_pre_performed_rejects_cooking_and_illegal_steps():
    with pytest.raises(ConfigError, match="not applicable"):
        load_and_compile(pre_performed=["deliver chef plateStation deliveryStation snack"])
    config = load_config(
        config_text(
            ingredients=[{"name": "egg1", "display": "egg", "cook_duration": 4}],
            meals=[{"name": "snack", "display": "snack", "ingredients": ["egg1"], "deadline": 9}],
            pre_performed=[
                "move-item chef gatherStation cookStation egg1",
                "start-cook chef cookStation egg1",
            ],
        )
    )
    with pytest.raises(ConfigError, match="cooking"):
        compile_game(config)


def load_and_compile(**overrides):
    return compile_game(load_config(config_text(**overrides)))


def test_step_reports_action_and_delivery_events():
    _, problem = fixture_problem("mini_duo")
    state = problem.init
    lines = [
        "move-item chef gatherStation plateStation cheese1",
        "prepare-meal chef plateStation snack",
        "deliver chef plateStation deliveryStation snack",
    ]
    seen = []
    for line in lines:
        state, events = step(state, problem.domain.action(line), problem)
        seen.extend(events)
    kinds = [e.kind for e in seen]
    assert kinds == ["action_taken", "action_taken", "action_taken", "meal_delivered"]
    delivered = seen[-1]
    assert delivered.at_cost == 4
    assert delivered.data == {"meal": "snack", "deadline": "4"}


def test_step_emits_game_complete_when_last_meal_lands():
    _, problem = fixture_problem("practice_mini")
    plan = solve(problem)
    state = problem.init
    events = []
    for action in plan.steps:
        state, evs = step(state, action, problem)
        events.extend(evs)
    assert [e.kind for e in events if e.kind != "action_taken"] == [
        "meal_delivered",
        "game_complete",
    ]
    with pytest.raises(GameOverError):
        step(state, plan.steps[0], problem)


def test_step_emits_timeout_at_the_limit():
    problem = load_and_compile(time_limit=2)
    move = problem.domain.action("move-chef chef gatherStation cutStation")
    back = problem.domain.action("move-chef chef cutStation gatherStation")
    state, _ = step(problem.init, move, problem)
    state, events = step(state, back, problem)
    assert [e.kind for e in events] == ["action_taken", "timeout"]
    with pytest.raises(GameOverError, match="time limit"):
        step(state, move, problem)


def test_step_rejects_illegal_actions():
    _, problem = fixture_problem("mini_duo")
    deliver = problem.domain.action("deliver chef plateStation deliveryStation snack")
    with pytest.raises(IllegalActionError):
        step(problem.init, deliver, problem)


def test_legal_actions_match_applicability():
    _, problem = fixture_problem("mini_duo")
    legal = legal_actions(problem.init, problem)
    assert legal
    for action in problem.domain.ground_actions:
        assert (action in legal) == is_applicable(problem.init, action)


def test_parallel_cook_timers_run_independently():
    from .conftest import bundled_problem

    _, problem = bundled_problem("practice_duo")
    state = problem.init
    for line in (
        "move-item chef gatherStation cookStation bacon1",
        "start-cook chef cookStation bacon1",
        "move-chef chef cookStation gatherStation",
        "move-item chef gatherStation cookStation sausage1",
        "start-cook chef cookStation sausage1",
    ):
        state = apply(state, problem.domain.action(line))
    assert state.cook_start_map == {"bacon1": 2, "sausage1": 5}
    end_bacon = problem.domain.action("end-cook chef cookStation bacon1")
    end_sausage = problem.domain.action("end-cook chef cookStation sausage1")
    # elapsed is 5: bacon has cooked 3 of 4 units, sausage 0 of 4.
    assert not is_applicable(state, end_bacon)
    there = problem.domain.action("move-chef chef cookStation gatherStation")
    back = problem.domain.action("move-chef chef gatherStation cookStation")
    state = apply(apply(state, there), back)
    assert is_applicable(state, end_bacon)
    assert not is_applicable(state, end_sausage)
    state = apply(state, end_bacon)
    assert state.cook_start_map == {"sausage1": 5}
    state = apply(apply(state, there), back)
    assert is_applicable(state, end_sausage)


def test_invariants_hold_along_optimal_play():
    config, problem, plan = bundled_plan("italian_bistro")
    state = problem.init
    assert check_state_invariants(state, config) == []
    for action in plan.steps:
        state = apply(state, action)
        assert check_state_invariants(state, config) == []


def test_invariants_flag_corrupt_states():
    config, problem = fixture_problem("mini_duo")
    broken = problem.init.fluents - {fluent("at", "chef", "gatherStation")}
    from souschef.model import State

    problems = check_state_invariants(State(fluents=broken), config)
    assert any("chef" in p for p in problems)


def test_snapshot_round_trip_mid_cook():
    _, problem = fixture_problem("practice_mini")
    state = problem.init
    for line in (
        "move-item chef gatherStation cookStation egg1",
        "start-cook chef cookStation egg1",
        "move-chef chef cookStation cutStation",
    ):
        state = apply(state, problem.domain.action(line))
    text = write_snapshot(state)
    assert text.startswith("elapsed_cost: 3\ncooking: egg1=2\n")
    assert parse_snapshot(text) == state


def test_parse_snapshot_rejects_missing_headers():
    with pytest.raises(ValueError):
        parse_snapshot("at chef gatherStation\n")


def test_plan_file_round_trip():
    _, problem = fixture_problem("mini_duo")
    plan = solve(problem)
    text = write_plan_file(plan, problem.goals, problem.time_limit)
    head = text.splitlines()[:2]
    assert head == ["overtime: 0", "total-cost: 11"]
    again = parse_plan_file(text, problem)
    assert again.steps == plan.steps
    assert again.delivery_map == plan.delivery_map


def test_parse_plan_file_skips_comments():
    _, problem = fixture_problem("mini_duo")
    text = "# warmup\nmove-item chef gatherStation plateStation cheese1\n"
    plan = parse_plan_file(text, problem)
    assert len(plan) == 1

from __future__ import annotations

import random

import pytest

from souschef.advisor import (
    CONDITIONS,
    CORRUPTED,
    OPTIMAL,
    Advisor,
    AdvisorConfig,
    NoFutureMealError,
    condition_config,
    corrupt,
    corruptible_positions,
    divergence_index,
    draw_provenance,
)
from souschef.model import apply, is_applicable, overtime_cost, plan_overtime

from .conftest import bundled_plan, bundled_problem, fixture_problem


def follow(problem, advisor, max_steps=240):
    """Take every recommendation until the advisor goes quiet."""
    state = problem.init
    deliveries: dict[str, int] = {}
    stream = []
    last = None
    while len(stream) < max_steps:
        rec = advisor.next_recommendation(state, last)
        if rec is None:
            break
        assert is_applicable(state, rec.action)
        stream.append(rec)
        state = apply(state, rec.action)
        if rec.action.name == "deliver":
            deliveries[rec.action.args[3]] = state.elapsed_cost
        last = rec.action.line()
    return state, deliveries, stream


def test_condition_table():
    assert set(CONDITIONS) == {
        "none",
        "optimal-action",
        "optimal-clc",
        "optimal-subgoal",
        "suboptimal-action",
        "suboptimal-clc",
        "suboptimal-subgoal",
    }
    for condition, (mode, prob) in CONDITIONS.items():
        config = condition_config(condition, seed=9)
        assert (config.mode, config.corruption_prob, config.seed) == (mode, prob, 9)
    assert condition_config("optimal-subgoal").corruption_prob == 0.0
    assert condition_config("suboptimal-clc").corruption_prob == 0.15
    with pytest.raises(ValueError):
        condition_config("subtle-sabotage")


def test_advisor_config_validation():
    with pytest.raises(ValueError):
        AdvisorConfig(mode="bogus")
    with pytest.raises(ValueError):
        AdvisorConfig(corruption_prob=1.5)


def test_provenance_draw_rate():
    rng = random.Random(7)
    draws = [draw_provenance(rng, 0.15) for _ in range(10_000)]
    fraction = draws.count(CORRUPTED) / len(draws)
    assert 0.14 <= fraction <= 0.16
    assert set(draws) == {CORRUPTED, OPTIMAL}
    assert all(d == OPTIMAL for d in (draw_provenance(rng, 0.0) for _ in range(100)))


def test_corruptible_positions_skip_shared_ingredients():
    config, problem = fixture_problem("shared_mini")
    plan = resolve_optimal(problem)
    options = corruptible_positions(plan, problem)
    assert set(options) == {0}
    pools = options[0]
    assert set(pools) == {"doubleToast"}
    lines = [a.line() for a in pools["doubleToast"]]
    assert lines == ["move-item chef gatherStation plateStation bread1"]
    for pools in options.values():
        for actions in pools.values():
            for action in actions:
                assert "tomato1" not in action.args
                assert action.name != "move-chef"


def resolve_optimal(problem):
    from souschef.planner import solve

    return solve(problem)


def test_corrupt_is_strictly_worse():
    config, problem = bundled_problem("practice_duo")
    _, _, plan = bundled_plan("practice_duo")
    base = plan_overtime(plan, problem.goals, problem.time_limit)
    assert base == 0
    for seed in range(4):
        worse = corrupt(plan, problem, random.Random(seed))
        assert plan_overtime(worse, problem.goals, problem.time_limit) > base
        pos = divergence_index(plan, worse)
        assert worse.steps[:pos] == plan.steps[:pos]
        assert worse.steps[pos] in plan.steps[pos + 1 :]
        assert worse.steps[pos].name != "move-chef"


def test_corrupt_pinned_position():
    config, problem = bundled_problem("practice_duo")
    _, _, plan = bundled_plan("practice_duo")
    options = corruptible_positions(plan, problem)
    position = sorted(options)[0]
    worse = corrupt(plan, problem, random.Random(0), position=position)
    assert divergence_index(plan, worse) == position
    with pytest.raises(NoFutureMealError):
        corrupt(plan, problem, random.Random(0), position=0)


def test_single_meal_game_cannot_be_corrupted():
    config, problem = bundled_problem("burrito_tutorial")
    _, _, plan = bundled_plan("burrito_tutorial")
    assert corruptible_positions(plan, problem) == {}
    with pytest.raises(NoFutureMealError):
        corrupt(plan, problem, random.Random(1))


def test_divergence_requires_a_difference():
    _, _, plan = bundled_plan("burrito_tutorial")
    with pytest.raises(ValueError):
        divergence_index(plan, plan)


def test_mode_none_gives_no_recommendations():
    config, problem = bundled_problem("burrito_tutorial")
    advisor = Advisor(problem, config.lexicon, condition_config("none"))
    assert advisor.next_recommendation(problem.init) is None


def test_conforming_player_walks_the_optimal_plan():
    config, problem = bundled_problem("burrito_tutorial")
    advisor = Advisor(problem, config.lexicon, condition_config("optimal-subgoal"))
    state, deliveries, stream = follow(problem, advisor)
    assert [r.action.line() for r in stream] == bundled_plan("burrito_tutorial")[2].lines()
    assert all(r.provenance == OPTIMAL for r in stream)
    assert all(r.plan_snapshot == "plan-1" for r in stream)
    assert all(r.text and r.text[0].isupper() and r.text.endswith(".") for r in stream)
    assert overtime_cost(deliveries, problem.goals, problem.time_limit) == 0
    assert not problem.pending_goals(state)
    assert advisor.next_recommendation(state, stream[-1].action.line()) is None


def test_deviating_player_triggers_a_replan():
    config, problem = bundled_problem("practice_duo")
    advisor = Advisor(problem, config.lexicon, condition_config("optimal-subgoal"))
    first = advisor.next_recommendation(problem.init)
    assert first.plan_snapshot == "plan-1"
    detour = next(
        a
        for a in problem.domain.ground_actions
        if a.name == "move-chef" and is_applicable(problem.init, a)
    )
    assert detour.line() != first.action.line()
    state = apply(problem.init, detour)
    second = advisor.next_recommendation(state, detour.line())
    assert second is not None
    assert second.plan_snapshot == "plan-2"
    assert is_applicable(state, second.action)


def test_always_corrupting_advisor_costs_overtime():
    config, problem = bundled_problem("practice_duo")
    advisor_config = AdvisorConfig(mode="subgoal", corruption_prob=1.0, seed=3)
    advisor = Advisor(problem, config.lexicon, advisor_config)
    state, deliveries, stream = follow(problem, advisor)
    assert any(r.provenance == CORRUPTED for r in stream)
    first_bad = next(i for i, r in enumerate(stream) if r.provenance == CORRUPTED)
    assert stream[first_bad + 1].plan_snapshot != stream[first_bad].plan_snapshot
    assert not problem.pending_goals(state)
    assert overtime_cost(deliveries, problem.goals, problem.time_limit) > 0


def test_recommendation_stream_is_deterministic():
    config, problem = bundled_problem("practice_duo")

    def run():
        advisor = Advisor(
            problem, config.lexicon, AdvisorConfig(mode="clc", corruption_prob=0.3, seed=11)
        )
        _, deliveries, stream = follow(problem, advisor)
        return deliveries, [(r.action.line(), r.provenance, r.text) for r in stream]

    assert run() == run()

from __future__ import annotations

import pytest

from souschef.explain import (
    CausalLink,
    Lexicon,
    LexiconError,
    attribute_subgoals,
    base_clause,
    extract_causal_links,
    render,
)
from souschef.model import fluent, make_plan

from .conftest import bundled_problem


def build(game_id: str, lines: list[str]):
    config, problem = bundled_problem(game_id)
    steps = [problem.domain.action(l) for l in lines]
    return config, problem, make_plan(problem.init, steps, problem.goals)


def waits(station_a: str, station_b: str, n: int) -> list[str]:
    out = []
    for k in range(n):
        src, dst = (station_a, station_b) if k % 2 == 0 else (station_b, station_a)
        out.append(f"move-chef chef {src} {dst}")
    return out


# A legal Italian Bistro prefix that plates salad, then pasta, then the
# veggie burger; the opening tomato chop serves all three.
BISTRO_THREE_PLATINGS = [
    "cut chef gatherStation cutStation tomato1",
    "move-item chef cutStation plateStation tomato1",
    "move-chef chef plateStation gatherStation",
    "cut chef gatherStation cutStation lettuce1",
    "move-item chef cutStation plateStation lettuce1",
    "prepare-meal chef plateStation salad",
    "move-chef chef plateStation gatherStation",
    "move-item chef gatherStation cookStation noodles1",
    "start-cook chef cookStation noodles1",
    *waits("cookStation", "cutStation", 4),
    "end-cook chef cookStation noodles1",
    "move-item chef cookStation plateStation noodles1",
    "prepare-meal chef plateStation pasta",
    "move-chef chef plateStation gatherStation",
    "move-item chef gatherStation cookStation patty1",
    "start-cook chef cookStation patty1",
    *waits("cookStation", "cutStation", 4),
    "end-cook chef cookStation patty1",
    "move-item chef cookStation plateStation patty1",
    "move-chef chef plateStation gatherStation",
    "move-item chef gatherStation plateStation bun1",
    "prepare-meal chef plateStation veggieBurger",
]

# A full soup: simmer the broth, then chop the carrot while nothing
# else is on the fire.
FUSION_BROTH_SOUP = [
    "move-item chef gatherStation cookStation broth1",
    "start-cook chef cookStation broth1",
    *waits("cookStation", "cutStation", 6),
    "end-cook chef cookStation broth1",
    "move-item chef cookStation plateStation broth1",
    "move-chef chef plateStation gatherStation",
    "cut chef gatherStation cutStation carrot1",
    "move-item chef cutStation plateStation carrot1",
    "prepare-meal chef plateStation soup",
    "deliver chef plateStation deliveryStation soup",
]

# Pasta by way of an in-place chop: the return to the gather station
# exists only to pick the tomato up.
BISTRO_NOODLES_RETURN = [
    "move-item chef gatherStation cookStation noodles1",
    "start-cook chef cookStation noodles1",
    *waits("cookStation", "cutStation", 4),
    "end-cook chef cookStation noodles1",
    "move-item chef cookStation plateStation noodles1",
    "move-chef chef plateStation gatherStation",
    "move-item chef gatherStation cutStation tomato1",
    "cut chef cutStation cutStation tomato1",
    "move-item chef cutStation plateStation tomato1",
    "prepare-meal chef plateStation pasta",
]


def test_tomato_chop_renders_action_only():
    config, problem, plan = build("italian_bistro", BISTRO_THREE_PLATINGS)
    rendering = render(plan.steps[0], "action_only", config.lexicon)
    assert rendering.text == "Chop the tomato."


def test_tomato_chop_subgoal_names_the_next_plating():
    config, problem, plan = build("italian_bistro", BISTRO_THREE_PLATINGS)
    attribution = attribute_subgoals(plan, problem)[0]
    assert (attribution.meal_id, attribution.rule) == ("salad", "direct")
    rendering = render(plan.steps[0], "subgoal", config.lexicon, attribution=attribution)
    assert rendering.text == "Chop the tomato for the salad meal."
    assert rendering.payload == {"meal": "salad", "rule": "direct"}


def test_tomato_chop_clc_lists_all_three_meals():
    # The pinned rendering keeps only the plating links; live plans also
    # extract the mechanical item-location links, rendered after the
    # plating clauses.
    config, problem, plan = build("italian_bistro", BISTRO_THREE_PLATINGS)
    platings = [i for i, a in enumerate(plan.steps) if a.name == "prepare-meal"]
    links = [CausalLink(0, j, fluent("chopped", "tomato1")) for j in platings]
    assert set(links) <= set(extract_causal_links(plan, 0))
    rendering = render(plan.steps[0], "clc", config.lexicon, links=links, plan=plan)
    assert rendering.text == (
        "Chop the tomato for the salad meal or pasta meal or veggie burger meal."
    )


def test_salmon_move_renderings():
    lines = [
        "move-item chef gatherStation cookStation salmon1",
        "start-cook chef cookStation salmon1",
    ]
    config, problem, plan = build("dinner_rush", lines)
    action = plan.steps[0]
    assert render(action, "action_only", config.lexicon).text == (
        "Move the salmon to the cooking station."
    )
    links = extract_causal_links(plan, 0)
    assert {l.consumer for l in links} == {1}
    clc = render(action, "clc", config.lexicon, links=links, plan=plan)
    assert clc.text == "Move the salmon to the cooking station to cook the salmon."
    attribution = attribute_subgoals(plan, problem)[0]
    assert (attribution.meal_id, attribution.rule) == ("teriyakiSalmon", "direct")
    sb = render(action, "subgoal", config.lexicon, attribution=attribution)
    assert sb.text == (
        "Move the salmon to the cooking station for preparing the teriyaki salmon meal."
    )


def test_broth_end_cook_renderings():
    config, problem, plan = build("asian_fusion", FUSION_BROTH_SOUP)
    idx = next(i for i, a in enumerate(plan.steps) if a.name == "end-cook")
    action = plan.steps[idx]
    assert render(action, "action_only", config.lexicon).text == "Finish cooking the broth."
    links = extract_causal_links(plan, idx)
    assert [plan.steps[l.consumer].name for l in links] == ["prepare-meal"]
    clc = render(action, "clc", config.lexicon, links=links, plan=plan)
    assert clc.text == "Finish cooking the broth for preparing the soup."
    attribution = attribute_subgoals(plan, problem)[idx]
    assert (attribution.meal_id, attribution.rule) == ("soup", "direct")
    sb = render(action, "subgoal", config.lexicon, attribution=attribution)
    assert sb.text == "Finish cooking the broth for preparing the soup."


def test_gather_return_renderings():
    config, problem, plan = build("italian_bistro", BISTRO_NOODLES_RETURN)
    idx = next(
        i for i, a in enumerate(plan.steps) if a.line() == "move-chef chef plateStation gatherStation"
    )
    action = plan.steps[idx]
    assert render(action, "action_only", config.lexicon).text == "Move to the gather station."
    links = extract_causal_links(plan, idx)
    assert [l.consumer for l in links] == [idx + 1]
    clc = render(action, "clc", config.lexicon, links=links, plan=plan)
    assert clc.text == "Move to the gather station to move the tomato."
    attribution = attribute_subgoals(plan, problem)[idx]
    assert (attribution.meal_id, attribution.rule) == ("pasta", "movement-lookahead")
    sb = render(action, "subgoal", config.lexicon, attribution=attribution)
    assert sb.text == "Move to the gather station for preparing the pasta meal."


def test_attribution_falls_back_to_earliest_pending_deadline():
    config, problem, plan = build(
        "italian_bistro", ["cut chef gatherStation cutStation tomato1"]
    )
    attribution = attribute_subgoals(plan, problem)[0]
    assert (attribution.meal_id, attribution.rule) == ("pasta", "deadline-fallback")


def test_trailing_movement_attaches_to_last_pending_meal():
    config, problem, plan = build(
        "italian_bistro", ["move-chef chef gatherStation cutStation"]
    )
    attribution = attribute_subgoals(plan, problem)[0]
    assert attribution.rule == "movement-lookahead"
    assert attribution.meal_id == "veggieBurger"


def test_causal_links_stop_at_the_first_deleter():
    # The chef's location is consumed and deleted by the tomato move, so
    # the later lettuce cut gets no link from the first move.
    lines = [
        "move-chef chef gatherStation cutStation",
        "move-chef chef cutStation gatherStation",
        "cut chef gatherStation cutStation lettuce1",
    ]
    config, problem, plan = build("italian_bistro", lines)
    links = extract_causal_links(plan, 0)
    assert [(l.consumer, str(l.fluent)) for l in links] == [(1, "at chef cutStation")]


def test_causal_link_requires_forward_direction():
    with pytest.raises(ValueError):
        CausalLink(producer=3, consumer=3, fluent=fluent("chopped", "tomato1"))


def test_render_rejects_bad_modes_and_missing_context():
    config, problem, plan = build(
        "italian_bistro", ["cut chef gatherStation cutStation tomato1"]
    )
    action = plan.steps[0]
    with pytest.raises(ValueError):
        render(action, "none", config.lexicon)
    with pytest.raises(ValueError):
        render(action, "subgoal", config.lexicon)
    with pytest.raises(ValueError):
        render(action, "clc", config.lexicon, links=[])


def test_clc_with_no_links_renders_like_action_only():
    config, problem, plan = build(
        "italian_bistro", ["move-chef chef gatherStation cutStation"]
    )
    rendering = render(plan.steps[0], "clc", config.lexicon, links=[], plan=plan)
    assert rendering.text == "Move to the cutting station."
    assert rendering.payload == {"links": []}


def test_lexicon_coverage_and_errors():
    config, _ = bundled_problem("italian_bistro")
    lexicon = config.lexicon
    assert lexicon.station("gatherStation") == "gather station"
    assert lexicon.verb("cut") == "Chop"
    with pytest.raises(LexiconError):
        lexicon.ingredient("salmon1")
    with pytest.raises(LexiconError):
        lexicon.meal("soup")


def test_base_clause_rejects_unknown_action_shape():
    config, problem = bundled_problem("italian_bistro")
    action = problem.domain.action("cut chef gatherStation cutStation tomato1")
    weird = Lexicon(
        stations={}, ingredients={}, meals={}, verbs={}
    )
    with pytest.raises(LexiconError):
        base_clause(action, weird)

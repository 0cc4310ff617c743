"""Command line entry points.

Thin wrappers over the library: solve a game, explain a plan, get a
single recommendation for a saved state, run scripted-player games and
experiment grids, recompute metrics from logs, and serve the study API.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace
from pathlib import Path

from .advisor import Advisor, AdvisorConfig, CONDITIONS, corrupt, NoFutureMealError
from .explain import MODES, attribute_subgoals, extract_causal_links, render
from .kitchen import (
    IllegalActionError,
    bundled_game_ids,
    compile_game,
    load_bundled,
    parse_snapshot,
    resolve_config,
    step,
    write_plan_file,
    write_snapshot,
)
from .logs import SessionLog
from .metrics import PolicySpec, play_game, report, run_experiment, write_summary
from .planner import PlannerBudget, PlanningError, solve


def _budget(args: argparse.Namespace) -> PlannerBudget:
    return PlannerBudget(
        max_expansions=args.max_expansions, max_wall_time=args.max_seconds
    )


def _add_budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-expansions", type=int, default=2_000_000)
    parser.add_argument("--max-seconds", type=float, default=30.0)


def _load_state(args: argparse.Namespace, problem):
    if getattr(args, "snapshot", None):
        return parse_snapshot(Path(args.snapshot).read_text())
    return problem.init


def cmd_games(args: argparse.Namespace) -> int:
    for game_id in bundled_game_ids():
        config = load_bundled(game_id)
        meals = ", ".join(f"{m.display} (due {m.deadline})" for m in config.meals)
        print(f"{game_id}: {config.title} - {meals}")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    problem = compile_game(config)
    state = _load_state(args, problem)
    try:
        plan = solve(replace(problem, init=state), budget=_budget(args))
    except PlanningError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 1
    text = write_plan_file(plan, problem.goals, problem.time_limit)
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    problem = compile_game(config)
    try:
        plan = solve(problem, budget=_budget(args))
    except PlanningError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 1
    attrs = attribute_subgoals(plan, problem)
    for i, action in enumerate(plan.steps):
        if args.step is not None and i != args.step:
            continue
        if args.mode == "subgoal":
            rendering = render(action, "subgoal", config.lexicon, attribution=attrs[i])
        elif args.mode == "clc":
            links = extract_causal_links(plan, i)
            rendering = render(action, "clc", config.lexicon, links=links, plan=plan)
        else:
            rendering = render(action, args.mode, config.lexicon)
        print(f"{i:3d}  {rendering.text}")
    return 0


def cmd_recommend(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    problem = compile_game(config)
    state = _load_state(args, problem)
    advisor = Advisor(
        problem,
        config.lexicon,
        AdvisorConfig(mode=args.mode, corruption_prob=args.corruption_prob, seed=args.seed),
        budget=_budget(args),
    )
    rec = advisor.next_recommendation(state)
    if rec is None:
        print("no recommendation (nothing left to do or no plan found)", file=sys.stderr)
        return 1
    if args.json:
        print(
            json.dumps(
                {
                    "action": rec.action.line(),
                    "mode": rec.mode,
                    "text": rec.text,
                    "provenance": rec.provenance,
                    "payload": dict(rec.payload),
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(rec.action.line())
        if rec.text:
            print(rec.text)
    return 0


def cmd_corrupt(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    problem = compile_game(config)
    try:
        plan = solve(problem, budget=_budget(args))
    except PlanningError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 1
    rng = random.Random(args.seed)
    try:
        corrupted = corrupt(
            plan, problem, rng, position=args.position, budget=_budget(args)
        )
    except NoFutureMealError as exc:
        print(f"cannot corrupt: {exc}", file=sys.stderr)
        return 1
    print(write_plan_file(corrupted, problem.goals, problem.time_limit), end="")
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    problem = compile_game(config)
    state = problem.init
    for line in args.apply or []:
        try:
            state, _ = step(state, problem.domain.action(line), problem)
        except KeyError:
            print(f"unknown action: {line}", file=sys.stderr)
            return 1
        except IllegalActionError as exc:
            print(f"cannot apply {line!r}: {exc}", file=sys.stderr)
            return 1
    print(write_snapshot(state), end="")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args.game)
    policy = PolicySpec(kind=args.policy, q=args.q)
    log = play_game(
        config,
        condition=args.condition,
        policy=policy,
        seed=args.seed,
        budget=_budget(args),
    )
    if args.out:
        log.write(args.out)
    r = report(log, compile_game(config), seed=args.seed)
    print(json.dumps(r.as_row(), indent=2, sort_keys=True))
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    games = [resolve_config(g) for g in args.games.split(",")]
    conditions = args.conditions.split(",")
    for c in conditions:
        if c not in CONDITIONS:
            print(f"unknown condition {c!r}", file=sys.stderr)
            return 2
    policies = []
    for p in args.policies.split(","):
        if p.startswith("detector-q"):
            policies.append(PolicySpec(kind="detector", q=float(p[len("detector-q"):])))
        else:
            policies.append(PolicySpec(kind=p))
    seeds = [int(s) for s in args.seeds.split(",")]
    reports = run_experiment(
        args.out_dir,
        games,
        conditions,
        policies,
        seeds,
        replications=args.replications,
        budget=_budget(args),
    )
    print(f"wrote {len(reports)} game logs and summary.csv under {args.out_dir}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    reports = []
    for path in args.logs:
        log = SessionLog.read(path)
        game_id = log.meta.get("game_id")
        if game_id is None:
            print(f"{path}: log has no game_id; skipping", file=sys.stderr)
            continue
        problem = compile_game(resolve_config(game_id))
        reports.append(report(log, problem))
    for r in reports:
        print(json.dumps(r.as_row(), sort_keys=True))
    if args.csv:
        write_summary(args.csv, reports)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.storage, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="souschef",
        description="Kitchen planning games with explained action recommendations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("games", help="list bundled games")
    p.set_defaults(func=cmd_games)

    p = sub.add_parser("plan", help="solve a game and print or save the plan")
    p.add_argument("game", help="bundled game id or path to a config YAML")
    p.add_argument("--snapshot", help="start from a saved state instead of the initial one")
    p.add_argument("--output", help="write the plan file here instead of stdout")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("explain", help="print an explained optimal plan")
    p.add_argument("game")
    p.add_argument("--mode", choices=[m for m in MODES if m != "none"], default="subgoal")
    p.add_argument("--step", type=int, help="only this step index")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("recommend", help="one recommendation for a state")
    p.add_argument("game")
    p.add_argument("--snapshot")
    p.add_argument("--mode", choices=[m for m in MODES if m != "none"], default="subgoal")
    p.add_argument("--corruption-prob", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="full JSON, including provenance")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("corrupt", help="print a corrupted variant of the optimal plan")
    p.add_argument("game")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--position", type=int, help="corrupt at this step index")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("snapshot", help="print a state snapshot, optionally after actions")
    p.add_argument("game")
    p.add_argument("--apply", action="append", metavar="ACTION", help="may repeat")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("simulate", help="play one game with a scripted player")
    p.add_argument("game")
    p.add_argument("--condition", choices=sorted(CONDITIONS), default="optimal-subgoal")
    p.add_argument(
        "--policy", choices=["conformant", "detector", "solo", "random"], default="conformant"
    )
    p.add_argument("--q", type=float, default=0.5, help="detector skill")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the session log here")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a grid of simulated games")
    p.add_argument("out_dir")
    p.add_argument("--games", required=True, help="comma-separated ids or paths")
    p.add_argument("--conditions", required=True, help="comma-separated condition names")
    p.add_argument(
        "--policies",
        required=True,
        help="comma-separated: conformant, solo, random, detector-q0.5, ...",
    )
    p.add_argument("--seeds", required=True, help="comma-separated integers")
    p.add_argument("--replications", type=int, default=1)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("metrics", help="recompute metrics from session logs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--csv", help="also write a summary CSV here")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--storage", default="./souschef-sessions")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="directory of static web client files to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

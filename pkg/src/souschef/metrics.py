"""Outcome metrics and the simulated-player harness.

Metrics are computed from session logs alone:

- user plan cost: summed lateness across meals, each clamped at zero,
  with undelivered meals counted as arriving at the time limit (the raw
  unclamped sum is reported alongside);
- optimal-advice conformance: of the recommendations that came from the
  optimal plan, the share the player followed;
- suboptimal-advice avoidance: of the corrupted recommendations, the
  share the player did not follow;
- preference tally: vote shares per explanation mode.

The harness plays whole games with scripted players (always conform,
plan alone, detect-and-avoid with a given skill, or act at random) so
experiment grids over conditions and seeds are reproducible.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .advisor import Advisor, CORRUPTED, OPTIMAL, Recommendation, condition_config
from .kitchen import GameConfig, compile_game, legal_actions, step
from .logs import EventRecord, LogEntry, RecommendationRecord, SessionLog
from .model import GroundAction, Plan, PlanningProblem, State, apply, overtime_cost
from .planner import BudgetExhaustedError, PlannerBudget, replan


def deliveries_from_log(log: SessionLog) -> dict[str, int]:
    out: dict[str, int] = {}
    for entry in log.entries:
        for event in entry.events:
            if event.kind == "meal_delivered":
                out[event.data["meal"]] = event.at_cost
    return out


def upc(log: SessionLog, problem: PlanningProblem) -> int:
    return overtime_cost(deliveries_from_log(log), problem.goals, problem.time_limit)


def upc_raw(log: SessionLog, problem: PlanningProblem) -> int:
    return overtime_cost(
        deliveries_from_log(log), problem.goals, problem.time_limit, clamped=False
    )


def _conformance(log: SessionLog, provenance: str) -> tuple[int, int]:
    shown = followed = 0
    for entry in log.entries:
        rec = entry.recommendation
        if rec is None or rec.provenance != provenance:
            continue
        shown += 1
        if entry.user_action == rec.action:
            followed += 1
    return shown, followed


def oac(log: SessionLog) -> tuple[int, int, float | None]:
    """(shown, followed, percent followed) over optimal recommendations."""
    shown, followed = _conformance(log, OPTIMAL)
    pct = None if shown == 0 else 100.0 * followed / shown
    return shown, followed, pct


def saa(log: SessionLog) -> tuple[int, int, float | None]:
    """(shown, avoided, percent avoided) over corrupted recommendations."""
    shown, followed = _conformance(log, CORRUPTED)
    avoided = shown - followed
    pct = None if shown == 0 else 100.0 * avoided / shown
    return shown, avoided, pct


def pref_tally(logs: Sequence[SessionLog]) -> dict[str, float] | None:
    counts: dict[str, int] = {}
    for log in logs:
        for vote in log.votes:
            counts[vote.mode] = counts.get(vote.mode, 0) + 1
    total = sum(counts.values())
    if total == 0:
        return None
    return {mode: 100.0 * n / total for mode, n in sorted(counts.items())}


@dataclass(frozen=True)
class MetricsReport:
    game_id: str
    condition: str
    policy: str
    seed: int
    replication: int
    order_index: int
    upc: int
    upc_raw: int
    optimal_shown: int
    optimal_followed: int
    oac_pct: float | None
    corrupted_shown: int
    corrupted_avoided: int
    saa_pct: float | None
    delivered: dict[str, int]
    undelivered: tuple[str, ...]

    def as_row(self) -> dict:
        row = {
            "condition": self.condition,
            "game_id": self.game_id,
            "policy": self.policy,
            "seed": self.seed,
            "replication": self.replication,
            "order_index": self.order_index,
            "upc": self.upc,
            "upc_raw": self.upc_raw,
            "optimal_shown": self.optimal_shown,
            "optimal_followed": self.optimal_followed,
            "oac_pct": "" if self.oac_pct is None else f"{self.oac_pct:.1f}",
            "corrupted_shown": self.corrupted_shown,
            "corrupted_avoided": self.corrupted_avoided,
            "saa_pct": "" if self.saa_pct is None else f"{self.saa_pct:.1f}",
            "undelivered": " ".join(self.undelivered),
        }
        return row


def report(
    log: SessionLog,
    problem: PlanningProblem,
    *,
    game_id: str | None = None,
    condition: str = "",
    policy: str = "",
    seed: int = 0,
    replication: int = 0,
    order_index: int = 0,
) -> MetricsReport:
    delivered = deliveries_from_log(log)
    undelivered = tuple(
        g.meal_id for g in problem.goals if g.meal_id not in delivered
    )
    optimal_shown, optimal_followed, oac_pct = oac(log)
    corrupted_shown, corrupted_avoided, saa_pct = saa(log)
    return MetricsReport(
        game_id=game_id or log.meta.get("game_id", ""),
        condition=condition or log.meta.get("condition", ""),
        policy=policy or log.meta.get("policy", ""),
        seed=seed,
        replication=replication,
        order_index=order_index,
        upc=upc(log, problem),
        upc_raw=upc_raw(log, problem),
        optimal_shown=optimal_shown,
        optimal_followed=optimal_followed,
        oac_pct=oac_pct,
        corrupted_shown=corrupted_shown,
        corrupted_avoided=corrupted_avoided,
        saa_pct=saa_pct,
        delivered=delivered,
        undelivered=undelivered,
    )


@dataclass(frozen=True)
class PolicySpec:
    """A scripted player. Kinds:

    - "conformant": always take the recommendation; plan alone without one.
    - "detector": take optimal recommendations; spot corrupted ones with
      probability ``q`` and plan around them, otherwise get misled.
    - "solo": ignore recommendations entirely and follow own replanning.
    - "random": take a uniformly random legal action.
    """

    kind: str
    q: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("conformant", "detector", "solo", "random"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")

    @property
    def slug(self) -> str:
        if self.kind == "detector":
            return f"detector-q{self.q:g}"
        return self.kind


class _Player:
    def __init__(
        self,
        spec: PolicySpec,
        problem: PlanningProblem,
        seed: int,
        budget: PlannerBudget | None,
    ) -> None:
        self.spec = spec
        self.problem = problem
        self.rng = random.Random(seed)
        self.budget = budget
        self.plan: Plan | None = None
        self.cursor = 0
        self.expected: State | None = None

    def _own_action(self, state: State) -> GroundAction:
        if self.plan is None or self.expected != state or self.cursor >= len(self.plan.steps):
            try:
                self.plan = replan(self.problem, state, budget=self.budget)
            except BudgetExhaustedError as exc:
                if exc.incumbent is None:
                    raise
                self.plan = exc.incumbent
            self.cursor = 0
        action = self.plan.steps[self.cursor]
        self.cursor += 1
        self.expected = apply(state, action)
        return action

    def _take(self, state: State, action: GroundAction) -> GroundAction:
        self.plan = None
        self.expected = apply(state, action)
        return action

    def choose(
        self,
        state: State,
        legal: Sequence[GroundAction],
        rec: Recommendation | None,
    ) -> GroundAction:
        if self.spec.kind == "random":
            return legal[self.rng.randrange(len(legal))]
        if self.spec.kind == "solo" or rec is None:
            return self._own_action(state)
        if self.spec.kind == "conformant":
            return self._take(state, rec.action)
        # Detector: conform on optimal advice; on corrupted advice, plan
        # around it with probability q, otherwise get misled.
        if rec.provenance == CORRUPTED and self.rng.random() < self.spec.q:
            return self._own_action(state)
        return self._take(state, rec.action)


def play_game(
    config: GameConfig,
    *,
    condition: str,
    policy: PolicySpec,
    seed: int,
    advisor_seed: int | None = None,
    budget: PlannerBudget | None = None,
    meta: dict | None = None,
) -> SessionLog:
    """Play one full game with a scripted player and return its log."""
    advisor_config = condition_config(condition, advisor_seed if advisor_seed is not None else seed)
    problem = compile_game(config)
    advisor = (
        None
        if advisor_config.mode == "none"
        else Advisor(problem, config.lexicon, advisor_config, budget=budget)
    )
    player = _Player(policy, problem, seed, budget)
    log = SessionLog(
        meta={
            "game_id": config.game_id,
            "condition": condition,
            "mode": advisor_config.mode,
            "corruption_prob": advisor_config.corruption_prob,
            "policy": policy.slug,
            "seed": seed,
            "advisor_seed": advisor_config.seed,
            **(meta or {}),
        }
    )
    state = problem.init
    last_action: str | None = None
    # Each action costs at least one unit of clock, so the game ends
    # within time_limit steps; the cap only guards against bugs.
    for _ in range(4 * problem.time_limit + 8):
        rec = advisor.next_recommendation(state, last_action) if advisor else None
        legal = legal_actions(state, problem)
        action = player.choose(state, legal, rec)
        state, events = step(state, action, problem)
        last_action = action.line()
        log.append_entry(
            LogEntry(
                seq=log.next_seq,
                user_action=last_action,
                at_cost=state.elapsed_cost,
                recommendation=None if rec is None else RecommendationRecord.of(rec),
                events=tuple(EventRecord.of(e) for e in events),
            )
        )
        if any(e.kind in ("game_complete", "timeout") for e in events):
            break
    else:
        raise RuntimeError("game did not terminate within the step cap")
    return log


def run_experiment(
    out_dir: str | Path,
    games: Sequence[GameConfig],
    conditions: Sequence[str],
    policies: Sequence[PolicySpec],
    seeds: Sequence[int],
    *,
    replications: int = 1,
    counterbalance: bool = True,
    budget: PlannerBudget | None = None,
) -> list[MetricsReport]:
    """Play the full grid, write logs and summary.csv, return reports.

    With counterbalancing on, odd replications play the games in
    reverse order so order effects wash out across the grid.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports: list[MetricsReport] = []
    for condition in conditions:
        for policy in policies:
            for seed in seeds:
                for rep in range(replications):
                    ordered = list(games)
                    if counterbalance and rep % 2 == 1:
                        ordered.reverse()
                    for order_index, config in enumerate(ordered):
                        log = play_game(
                            config,
                            condition=condition,
                            policy=policy,
                            seed=seed * 1009 + rep,
                            budget=budget,
                            meta={"replication": rep, "order_index": order_index},
                        )
                        name = (
                            f"{condition}__{config.game_id}__{policy.slug}"
                            f"__s{seed}__r{rep}.jsonl"
                        )
                        log.write(out / name)
                        reports.append(
                            report(
                                log,
                                compile_game(config),
                                game_id=config.game_id,
                                condition=condition,
                                policy=policy.slug,
                                seed=seed,
                                replication=rep,
                                order_index=order_index,
                            )
                        )
    write_summary(out / "summary.csv", reports)
    return reports


def write_summary(path: str | Path, reports: Sequence[MetricsReport]) -> None:
    rows = [r.as_row() for r in reports]
    fields = list(rows[0].keys()) if rows else [
        "condition", "game_id", "policy", "seed", "replication", "order_index",
        "upc", "upc_raw", "optimal_shown", "optimal_followed", "oac_pct",
        "corrupted_shown", "corrupted_avoided", "saa_pct", "undelivered",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)

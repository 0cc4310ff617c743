"""HTTP study service.

Hosts game sessions (a five-stage flow: two familiarization games, two
counterbalanced advised games, one unadvised assessment game) and
preference sessions (a fixed deck of plan clips, each voted on across
the three explanation styles). State lives in append-only JSONL files,
one per session stage, and the in-memory objects are rebuilt from those
files on startup, so a crash loses nothing.

Client-facing session views never include recommendation provenance or
the session's study condition; those stay in the server-side logs and
are exposed only by the post-completion log export.

Endpoints:

- ``POST /sessions`` create a session (game or preference)
- ``GET /sessions/{id}`` current view
- ``POST /sessions/{id}/actions`` submit ``{"seq": n, "action": line}``
- ``POST /sessions/{id}/votes`` submit ``{"seq": n, "clip_id", "mode"}``
- ``GET /sessions/{id}/events`` server-sent events, one view per update
- ``GET /sessions/{id}/log`` JSONL export once the session is complete
- ``GET /games``, ``GET /conditions`` static catalogs
"""

from __future__ import annotations

import json
import logging
import queue
import random
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .advisor import (
    Advisor,
    AdvisorConfig,
    CONDITIONS,
    Recommendation,
    condition_config,
)
from .explain import attribute_subgoals, extract_causal_links, render
from .kitchen import (
    GameConfig,
    GameOverError,
    IllegalActionError,
    bundled_game_ids,
    compile_game,
    legal_actions,
    load_bundled,
    step,
)
from .logs import (
    EventRecord,
    LogEntry,
    LogFormatError,
    RecommendationRecord,
    SessionLog,
    VoteRecord,
    append_record,
    canonical_json,
)
from .model import PlanningProblem, State
from .planner import solve

logger = logging.getLogger(__name__)

FAMILIARIZATION_GAMES = ("burrito_tutorial", "practice_duo")
ADVISED_GAMES = ("italian_bistro", "asian_fusion")
ASSESSMENT_GAME = "dinner_rush"

STAGE_FAMILIARIZATION = "familiarization"
STAGE_ADVISED = "advised"
STAGE_ASSESSMENT = "assessment"

PREFERENCE_CLIP_COUNT = 25
PREFERENCE_MODES = ("action_only", "clc", "subgoal")


def game_order_for(session_index: int) -> tuple[str, ...]:
    """The five-game order for the nth game session. The two advised
    games swap order on alternating sessions so position effects cancel
    across participants."""
    advised = ADVISED_GAMES if session_index % 2 == 0 else tuple(reversed(ADVISED_GAMES))
    return (*FAMILIARIZATION_GAMES, *advised, ASSESSMENT_GAME)


def stage_kind(stage_index: int) -> str:
    if stage_index < len(FAMILIARIZATION_GAMES):
        return STAGE_FAMILIARIZATION
    if stage_index < len(FAMILIARIZATION_GAMES) + len(ADVISED_GAMES):
        return STAGE_ADVISED
    return STAGE_ASSESSMENT


def stage_advisor_config(condition: str, stage_index: int, seed: int) -> AdvisorConfig:
    """Assessment always runs unadvised; every earlier stage uses the
    session's condition as-is."""
    if stage_kind(stage_index) == STAGE_ASSESSMENT:
        return AdvisorConfig(mode="none", corruption_prob=0.0, seed=seed)
    return condition_config(condition, seed)


def _stage_seed(base_seed: int, stage_index: int) -> int:
    return base_seed * 31 + stage_index


@lru_cache(maxsize=None)
def _bundled(game_id: str) -> GameConfig:
    return load_bundled(game_id)


@lru_cache(maxsize=None)
def _optimal_plan(game_id: str):
    problem = compile_game(_bundled(game_id))
    return problem, solve(problem)


def _ingredient_view(ing) -> dict:
    return {
        "name": ing.name,
        "display": ing.display,
        "needs_chop": ing.needs_chop,
        "cook_duration": ing.cook_duration,
    }


def build_preference_clips(seed: int) -> list[dict]:
    """A deterministic deck of plan moments, each offered in all three
    explanation styles. The option order is shuffled per clip so style
    position does not correlate with style identity."""
    clips: list[dict] = []
    rng = random.Random(seed)
    games = [g for g in bundled_game_ids() if g != "burrito_tutorial"]
    per_game = -(-PREFERENCE_CLIP_COUNT // len(games))
    for game_id in sorted(games):
        config = _bundled(game_id)
        problem, plan = _optimal_plan(game_id)
        attrs = attribute_subgoals(plan, problem)
        n = len(plan.steps)
        positions = sorted({round(k * (n - 1) / max(per_game - 1, 1)) for k in range(per_game)})
        for pos in positions:
            if len(clips) >= PREFERENCE_CLIP_COUNT:
                break
            action = plan.steps[pos]
            options = []
            for mode in PREFERENCE_MODES:
                if mode == "subgoal":
                    rendering = render(action, mode, config.lexicon, attribution=attrs[pos])
                elif mode == "clc":
                    links = extract_causal_links(plan, pos)
                    rendering = render(action, mode, config.lexicon, links=links, plan=plan)
                else:
                    rendering = render(action, mode, config.lexicon)
                options.append({"mode": mode, "text": rendering.text})
            rng.shuffle(options)
            clips.append(
                {
                    "clip_id": f"clip-{len(clips):02d}",
                    "game_id": game_id,
                    "game_title": config.title,
                    "step_index": pos,
                    "action": action.line(),
                    "options": options,
                }
            )
    if len(clips) < PREFERENCE_CLIP_COUNT:
        raise RuntimeError("bundled games are too short to fill the preference deck")
    return clips


@dataclass
class _Stage:
    index: int
    game_id: str
    config: GameConfig
    problem: PlanningProblem
    state: State
    advisor: Advisor | None
    log: SessionLog
    path: Path
    recommendation: Recommendation | None = None
    finished: bool = False


@dataclass
class _Session:
    session_id: str
    kind: str
    condition: str
    seed: int
    session_index: int
    game_order: tuple[str, ...] = ()
    stage_index: int = 0
    stage: _Stage | None = None
    stage_status: list[str] = field(default_factory=list)
    clips: list[dict] = field(default_factory=list)
    votes_log: SessionLog | None = None
    votes_path: Path | None = None
    status: str = "active"
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list[queue.Queue] = field(default_factory=list)
    # (seq, payload, view) of the last accepted submission, so an exact
    # retry (same seq, same payload) gets the same view back instead of
    # a conflict, even across a stage boundary.
    last_accepted: tuple[int, tuple, dict] | None = None


class StudyService:
    """Owns session state and storage; the FastAPI app is a thin shell."""

    def __init__(self, storage_dir: str | Path):
        self.storage = Path(storage_dir)
        self.storage.mkdir(parents=True, exist_ok=True)
        self.registry_path = self.storage / "sessions.jsonl"
        self.sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        self._recover()

    # -- storage ------------------------------------------------------

    def _registry_rows(self) -> list[dict]:
        if not self.registry_path.exists():
            return []
        rows = []
        for line in self.registry_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                rows.append(json.loads(line))
        return rows

    def _session_dir(self, session_id: str) -> Path:
        return self.storage / session_id

    def _stage_path(self, session: _Session, stage_index: int) -> Path:
        game_id = session.game_order[stage_index]
        return self._session_dir(session.session_id) / f"stage-{stage_index:02d}-{game_id}.jsonl"

    def _recover(self) -> None:
        for row in self._registry_rows():
            try:
                self._recover_session(row)
            except (LogFormatError, OSError) as exc:
                logger.error("could not recover session %s: %s", row.get("session_id"), exc)
                raise

    def _recover_session(self, row: dict) -> None:
        session = _Session(
            session_id=row["session_id"],
            kind=row["session_kind"],
            condition=row.get("condition", "none"),
            seed=row["seed"],
            session_index=row["session_index"],
            game_order=tuple(row.get("game_order", ())),
        )
        if session.kind == "preference":
            session.clips = build_preference_clips(session.seed)
            session.votes_path = self._session_dir(session.session_id) / "votes.jsonl"
            if session.votes_path.exists():
                session.votes_log = SessionLog.read(session.votes_path)
            else:
                session.votes_log = self._open_votes_log(session)
            if len(session.votes_log.votes) >= len(session.clips):
                session.status = "complete"
        else:
            for stage_index in range(len(session.game_order)):
                path = self._stage_path(session, stage_index)
                if not path.exists():
                    self._open_stage(session, stage_index)
                    break
                stage = self._replay_stage(session, stage_index, path)
                session.stage_status.append("complete" if stage.finished else "active")
                if not stage.finished:
                    session.stage_index = stage_index
                    session.stage = stage
                    break
                if stage_index == len(session.game_order) - 1:
                    session.status = "complete"
                    session.stage_index = stage_index + 1
                    session.stage = None
                else:
                    next_path = self._stage_path(session, stage_index + 1)
                    if not next_path.exists():
                        self._open_stage(session, stage_index + 1)
                        break
        self.sessions[session.session_id] = session

    def _replay_stage(self, session: _Session, stage_index: int, path: Path) -> _Stage:
        log = SessionLog.read(path)
        stage = self._build_stage(session, stage_index, log=log)
        for entry in log.entries:
            action = stage.problem.domain.action(entry.user_action)
            if stage.advisor is not None:
                recorded = entry.recommendation
                computed = (
                    None if stage.recommendation is None
                    else RecommendationRecord.of(stage.recommendation)
                )
                if computed != recorded:
                    raise LogFormatError(
                        f"{path.name} seq {entry.seq}: logged recommendation does not replay"
                    )
            try:
                stage.state, events = step(stage.state, action, stage.problem)
            except (IllegalActionError, GameOverError) as exc:
                raise LogFormatError(f"{path.name} seq {entry.seq}: {exc}") from exc
            if any(e.kind in ("game_complete", "timeout") for e in events):
                stage.finished = True
                stage.recommendation = None
            elif stage.advisor is not None:
                stage.recommendation = stage.advisor.next_recommendation(
                    stage.state, entry.user_action
                )
        return stage

    # -- session lifecycle --------------------------------------------

    def create_session(self, kind: str, condition: str | None, seed: int | None) -> dict:
        if kind not in ("game", "preference"):
            raise HTTPException(status_code=400, detail=f"unknown session kind {kind!r}")
        with self._registry_lock:
            rows = self._registry_rows()
            session_index = sum(1 for r in rows if r["session_kind"] == kind)
            session_id = f"{kind}-{len(rows):04d}"
            if kind == "game":
                if condition is None or condition not in CONDITIONS:
                    raise HTTPException(
                        status_code=400,
                        detail=f"condition must be one of {sorted(CONDITIONS)}",
                    )
                game_order = game_order_for(session_index)
            else:
                condition = condition or "none"
                game_order = ()
            base_seed = seed if seed is not None else session_index
            row = {
                "kind": "session",
                "session_id": session_id,
                "session_kind": kind,
                "condition": condition,
                "seed": base_seed,
                "session_index": session_index,
                "game_order": list(game_order),
            }
            self._session_dir(session_id).mkdir(parents=True, exist_ok=True)
            append_record(self.registry_path, row)
        session = _Session(
            session_id=session_id,
            kind=kind,
            condition=condition,
            seed=base_seed,
            session_index=session_index,
            game_order=game_order,
        )
        if kind == "preference":
            session.clips = build_preference_clips(base_seed)
            session.votes_path = self._session_dir(session_id) / "votes.jsonl"
            session.votes_log = self._open_votes_log(session)
        else:
            self._open_stage(session, 0)
        self.sessions[session_id] = session
        return self.view(session)

    def _open_votes_log(self, session: _Session) -> SessionLog:
        log = SessionLog(
            meta={
                "session_kind": "preference",
                "session_id": session.session_id,
                "seed": session.seed,
                "clip_count": len(session.clips),
            }
        )
        assert session.votes_path is not None
        if not session.votes_path.exists():
            session.votes_path.parent.mkdir(parents=True, exist_ok=True)
            session.votes_path.write_text(log.dumps(), encoding="utf-8")
        return log

    def _build_stage(
        self, session: _Session, stage_index: int, log: SessionLog | None = None
    ) -> _Stage:
        game_id = session.game_order[stage_index]
        config = _bundled(game_id)
        problem = compile_game(config)
        advisor_config = stage_advisor_config(
            session.condition, stage_index, _stage_seed(session.seed, stage_index)
        )
        advisor = (
            None
            if advisor_config.mode == "none"
            else Advisor(problem, config.lexicon, advisor_config)
        )
        if log is None:
            log = SessionLog(
                meta={
                    "session_id": session.session_id,
                    "game_id": game_id,
                    "stage": stage_kind(stage_index),
                    "stage_index": stage_index,
                    "condition": session.condition,
                    "mode": advisor_config.mode,
                    "corruption_prob": advisor_config.corruption_prob,
                    "advisor_seed": advisor_config.seed,
                    "game_order": list(session.game_order),
                    "session_index": session.session_index,
                }
            )
        stage = _Stage(
            index=stage_index,
            game_id=game_id,
            config=config,
            problem=problem,
            state=problem.init,
            advisor=advisor,
            log=log,
            path=self._stage_path(session, stage_index),
        )
        if advisor is not None:
            stage.recommendation = advisor.next_recommendation(stage.state, None)
        return stage

    def _open_stage(self, session: _Session, stage_index: int) -> None:
        stage = self._build_stage(session, stage_index)
        if not stage.path.exists():
            stage.path.parent.mkdir(parents=True, exist_ok=True)
            stage.path.write_text(stage.log.dumps(), encoding="utf-8")
        session.stage = stage
        session.stage_index = stage_index
        while len(session.stage_status) <= stage_index:
            session.stage_status.append("pending")
        session.stage_status[stage_index] = "active"

    # -- request handling ---------------------------------------------

    def _get(self, session_id: str) -> _Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return session

    def submit_action(self, session_id: str, seq: int, action_line: str) -> dict:
        session = self._get(session_id)
        if session.kind != "game":
            raise HTTPException(status_code=409, detail="not a game session")
        with session.lock:
            stage = session.stage
            expected = None if stage is None else stage.log.next_seq
            if seq != expected:
                # Not the next fresh submission: either an exact retry of
                # the last accepted one (same seq and payload, answered
                # with the same view) or a conflict.
                retry = session.last_accepted
                if retry is not None and seq == retry[0] and retry[1] == ("action", action_line):
                    return retry[2]
                if session.status != "active" or stage is None:
                    raise HTTPException(status_code=409, detail="session is complete")
                raise HTTPException(
                    status_code=409, detail=f"expected seq {expected}, got {seq}"
                )
            try:
                action = stage.problem.domain.action(action_line)
            except KeyError:
                raise HTTPException(
                    status_code=400, detail=f"unknown action {action_line!r}"
                ) from None
            try:
                after, events = step(stage.state, action, stage.problem)
            except (IllegalActionError, GameOverError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            shown = stage.recommendation
            entry = LogEntry(
                seq=expected,
                user_action=action_line,
                at_cost=after.elapsed_cost,
                recommendation=None if shown is None else RecommendationRecord.of(shown),
                events=tuple(EventRecord.of(e) for e in events),
            )
            stage.log.append_entry(entry)
            append_record(stage.path, entry.to_json())
            stage.state = after
            terminal = any(e.kind in ("game_complete", "timeout") for e in events)
            if terminal:
                stage.finished = True
                stage.recommendation = None
                session.stage_status[stage.index] = "complete"
                if stage.index + 1 < len(session.game_order):
                    self._open_stage(session, stage.index + 1)
                else:
                    session.status = "complete"
                    session.stage = None
                    session.stage_index = stage.index + 1
            elif stage.advisor is not None:
                stage.recommendation = stage.advisor.next_recommendation(
                    stage.state, action_line
                )
            view = self.view(session, last_events=[EventRecord.of(e) for e in events])
            session.last_accepted = (seq, ("action", action_line), view)
            self._broadcast(session, view)
            return view

    def submit_vote(self, session_id: str, seq: int, clip_id: str, mode: str) -> dict:
        session = self._get(session_id)
        if session.kind != "preference":
            raise HTTPException(status_code=409, detail="not a preference session")
        with session.lock:
            log = session.votes_log
            assert log is not None and session.votes_path is not None
            expected = None if session.status != "active" else log.next_seq
            if seq != expected:
                retry = session.last_accepted
                if (
                    retry is not None
                    and seq == retry[0]
                    and retry[1] == ("vote", clip_id, mode)
                ):
                    return retry[2]
                if session.status != "active":
                    raise HTTPException(status_code=409, detail="session is complete")
                raise HTTPException(
                    status_code=409, detail=f"expected seq {expected}, got {seq}"
                )
            cursor = len(log.votes)
            clip = session.clips[cursor]
            if clip_id != clip["clip_id"]:
                raise HTTPException(
                    status_code=400,
                    detail=f"expected a vote for {clip['clip_id']!r}, got {clip_id!r}",
                )
            if mode not in {o["mode"] for o in clip["options"]}:
                raise HTTPException(status_code=400, detail=f"unknown mode {mode!r}")
            vote = VoteRecord(seq=expected, clip_id=clip_id, mode=mode)
            log.append_vote(vote)
            append_record(session.votes_path, vote.to_json())
            if len(log.votes) >= len(session.clips):
                session.status = "complete"
            view = self.view(session)
            session.last_accepted = (seq, ("vote", clip_id, mode), view)
            self._broadcast(session, view)
            return view

    # -- views ---------------------------------------------------------

    def view(self, session: _Session, last_events: list[EventRecord] | None = None) -> dict:
        """The client-facing snapshot. Never includes provenance, the
        study condition, or anything else that would reveal whether a
        recommendation can be trusted."""
        base = {
            "session_id": session.session_id,
            "kind": session.kind,
            "status": session.status,
        }
        if session.kind == "preference":
            log = session.votes_log
            votes = len(log.votes) if log else 0
            tally: dict[str, int] | None = None
            if session.status == "complete" and log is not None:
                tally = {mode: 0 for mode in PREFERENCE_MODES}
                for vote in log.votes:
                    tally[vote.mode] += 1
            base["preference"] = {
                "cursor": votes,
                "total": len(session.clips),
                "seq": votes,
                "clip": None if session.status == "complete" else session.clips[votes],
                "tally": tally,
            }
            return base
        base["stage_index"] = session.stage_index
        base["stages"] = [
            {
                "stage": stage_kind(i),
                "game_id": game_id,
                "title": _bundled(game_id).title,
                "status": session.stage_status[i] if i < len(session.stage_status) else "pending",
            }
            for i, game_id in enumerate(session.game_order)
        ]
        stage = session.stage
        if stage is None:
            base["game"] = None
            return base
        rec = stage.recommendation
        delivered: dict[str, int] = {}
        for entry in stage.log.entries:
            for event in entry.events:
                if event.kind == "meal_delivered":
                    delivered[event.data["meal"]] = event.at_cost
        base["game"] = {
            "game_id": stage.game_id,
            "title": stage.config.title,
            "stage": stage_kind(stage.index),
            "mode": "none" if stage.advisor is None else stage.advisor.config.mode,
            "seq": stage.log.next_seq,
            "clock": stage.state.elapsed_cost,
            "time_limit": stage.problem.time_limit,
            "stations": list(stage.config.stations),
            "fluents": sorted(str(f) for f in stage.state.fluents),
            "cooking": dict(stage.state.cook_start_map),
            "ingredients": [_ingredient_view(ing) for ing in stage.config.ingredients],
            "meals": [
                {
                    "name": m.name,
                    "display": m.display,
                    "deadline": m.deadline,
                    "ingredients": list(m.ingredients),
                    "delivered": m.name in delivered,
                    "delivered_at": delivered.get(m.name),
                }
                for m in stage.config.meals
            ],
            "legal_actions": [a.line() for a in legal_actions(stage.state, stage.problem)],
            "recommendation": None
            if rec is None
            else {
                "action": rec.action.line(),
                "mode": rec.mode,
                "text": rec.text,
                "payload": dict(rec.payload),
            },
            "last_events": [e.to_json() for e in (last_events or [])],
        }
        return base

    def export_log(self, session_id: str) -> str:
        session = self._get(session_id)
        if session.status != "complete":
            raise HTTPException(status_code=409, detail="session is still in progress")
        if session.kind == "preference":
            assert session.votes_path is not None
            return session.votes_path.read_text(encoding="utf-8")
        parts = []
        for stage_index in range(len(session.game_order)):
            parts.append(self._stage_path(session, stage_index).read_text(encoding="utf-8"))
        return "".join(parts)

    # -- push -----------------------------------------------------------

    def subscribe(self, session_id: str) -> queue.Queue:
        session = self._get(session_id)
        q: queue.Queue = queue.Queue()
        with session.lock:
            session.subscribers.append(q)
            q.put(self.view(session))
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        session = self.sessions.get(session_id)
        if session is None:
            return
        with session.lock:
            if q in session.subscribers:
                session.subscribers.remove(q)

    def _broadcast(self, session: _Session, view: dict) -> None:
        for q in list(session.subscribers):
            q.put(view)


def create_app(storage_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """The study API, optionally also serving a static web client.

    When ``ui_dir`` is given its files are mounted at the root path, so
    one process serves both the API and the pages that call it; API
    routes are registered first and take precedence.
    """
    service = StudyService(storage_dir)
    app = FastAPI(title="souschef study service")
    app.state.service = service

    @app.get("/games")
    def games() -> list[dict]:
        out = []
        for game_id in bundled_game_ids():
            config = _bundled(game_id)
            out.append(
                {
                    "game_id": game_id,
                    "title": config.title,
                    "stations": list(config.stations),
                    "time_limit": config.time_limit,
                    "ingredients": [_ingredient_view(i) for i in config.ingredients],
                    "meals": [
                        {
                            "name": m.name,
                            "display": m.display,
                            "deadline": m.deadline,
                            "ingredients": list(m.ingredients),
                        }
                        for m in config.meals
                    ],
                }
            )
        return out

    @app.get("/conditions")
    def conditions() -> list[str]:
        return sorted(CONDITIONS)

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)) -> dict:
        return service.create_session(
            kind=body.get("kind", "game"),
            condition=body.get("condition"),
            seed=body.get("seed"),
        )

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return service.view(service._get(session_id))

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: dict = Body(...)) -> dict:
        if "seq" not in body or "action" not in body:
            raise HTTPException(status_code=400, detail="body needs seq and action")
        return service.submit_action(session_id, int(body["seq"]), str(body["action"]))

    @app.post("/sessions/{session_id}/votes")
    def post_vote(session_id: str, body: dict = Body(...)) -> dict:
        for key in ("seq", "clip_id", "mode"):
            if key not in body:
                raise HTTPException(status_code=400, detail=f"body needs {key}")
        return service.submit_vote(
            session_id, int(body["seq"]), str(body["clip_id"]), str(body["mode"])
        )

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str) -> PlainTextResponse:
        return PlainTextResponse(
            service.export_log(session_id), media_type="application/x-ndjson"
        )

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str) -> StreamingResponse:
        q = service.subscribe(session_id)

        def stream() -> Iterator[str]:
            try:
                while True:
                    try:
                        view = q.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"data: {canonical_json(view)}\n\n"
                    if view.get("status") == "complete":
                        return
            finally:
                service.unsubscribe(session_id, q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app

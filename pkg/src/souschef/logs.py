"""Append-only session logs.

A session log is a JSONL file: one header line describing the session,
then one line per submitted action (with the recommendation that was on
screen, if any, and the events the step produced), interleaved with one
line per preference vote. Lines are canonical JSON (sorted keys, no
whitespace) and carry no timestamps, so re-serializing a parsed log is
byte-identical and replaying one is deterministic.

The log is the single source of truth for a session: both crash
recovery and the metrics harness rebuild everything from it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .advisor import Recommendation
from .kitchen import GameConfig, KitchenEvent, compile_game, step
from .model import PlanningProblem, State

FORMAT_VERSION = 1


class LogFormatError(ValueError):
    """Raised when a log line does not parse or fails validation."""


def canonical_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class RecommendationRecord:
    action: str
    mode: str
    text: str | None
    provenance: str
    plan_snapshot: str

    @classmethod
    def of(cls, rec: Recommendation) -> "RecommendationRecord":
        return cls(
            action=rec.action.line(),
            mode=rec.mode,
            text=rec.text,
            provenance=rec.provenance,
            plan_snapshot=rec.plan_snapshot,
        )

    def to_json(self) -> dict:
        return {
            "action": self.action,
            "mode": self.mode,
            "text": self.text,
            "provenance": self.provenance,
            "plan_snapshot": self.plan_snapshot,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RecommendationRecord":
        return cls(
            action=data["action"],
            mode=data["mode"],
            text=data["text"],
            provenance=data["provenance"],
            plan_snapshot=data["plan_snapshot"],
        )


@dataclass(frozen=True)
class EventRecord:
    kind: str
    at_cost: int
    data: dict

    @classmethod
    def of(cls, event: KitchenEvent) -> "EventRecord":
        return cls(kind=event.kind, at_cost=event.at_cost, data=dict(event.data))

    def to_json(self) -> dict:
        return {"kind": self.kind, "at_cost": self.at_cost, "data": self.data}

    @classmethod
    def from_json(cls, data: dict) -> "EventRecord":
        return cls(kind=data["kind"], at_cost=data["at_cost"], data=dict(data["data"]))


@dataclass(frozen=True)
class LogEntry:
    """One submitted action: what was suggested, what was done, what happened."""

    seq: int
    user_action: str
    at_cost: int
    recommendation: RecommendationRecord | None
    events: tuple[EventRecord, ...]

    def to_json(self) -> dict:
        return {
            "kind": "entry",
            "seq": self.seq,
            "user_action": self.user_action,
            "at_cost": self.at_cost,
            "recommendation": None
            if self.recommendation is None
            else self.recommendation.to_json(),
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LogEntry":
        rec = data["recommendation"]
        return cls(
            seq=data["seq"],
            user_action=data["user_action"],
            at_cost=data["at_cost"],
            recommendation=None if rec is None else RecommendationRecord.from_json(rec),
            events=tuple(EventRecord.from_json(e) for e in data["events"]),
        )


@dataclass(frozen=True)
class VoteRecord:
    """One preference vote: which explanation the viewer liked for a clip."""

    seq: int
    clip_id: str
    mode: str

    def to_json(self) -> dict:
        return {"kind": "vote", "seq": self.seq, "clip_id": self.clip_id, "mode": self.mode}

    @classmethod
    def from_json(cls, data: dict) -> "VoteRecord":
        return cls(seq=data["seq"], clip_id=data["clip_id"], mode=data["mode"])


@dataclass
class SessionLog:
    meta: dict
    entries: list[LogEntry] = field(default_factory=list)
    votes: list[VoteRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        if "game_id" not in self.meta and "session_kind" not in self.meta:
            raise LogFormatError("log meta must identify its session")
        if "kind" in self.meta or "format" in self.meta:
            raise LogFormatError("meta keys 'kind' and 'format' are reserved")

    @property
    def next_seq(self) -> int:
        return len(self.entries) + len(self.votes)

    def append_entry(self, entry: LogEntry) -> None:
        if entry.seq != self.next_seq:
            raise LogFormatError(f"expected seq {self.next_seq}, got {entry.seq}")
        self.entries.append(entry)

    def append_vote(self, vote: VoteRecord) -> None:
        if vote.seq != self.next_seq:
            raise LogFormatError(f"expected seq {self.next_seq}, got {vote.seq}")
        self.votes.append(vote)

    def records(self) -> Iterator[dict]:
        yield {"kind": "meta", "format": FORMAT_VERSION, **self.meta}
        merged = sorted(
            [*self.entries, *self.votes], key=lambda r: r.seq
        )
        for record in merged:
            yield record.to_json()

    def to_lines(self) -> list[str]:
        return [canonical_json(r) for r in self.records()]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.to_lines())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "SessionLog":
        meta: dict | None = None
        entries: list[LogEntry] = []
        votes: list[VoteRecord] = []
        for lineno, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            kind = data.get("kind")
            if kind == "meta":
                if meta is not None:
                    raise LogFormatError(f"line {lineno}: duplicate meta line")
                if data.get("format") != FORMAT_VERSION:
                    raise LogFormatError(f"line {lineno}: unsupported format {data.get('format')!r}")
                meta = {k: v for k, v in data.items() if k not in ("kind", "format")}
            elif kind == "entry":
                try:
                    entries.append(LogEntry.from_json(data))
                except (KeyError, TypeError) as exc:
                    raise LogFormatError(f"line {lineno}: malformed entry: {exc}") from exc
            elif kind == "vote":
                try:
                    votes.append(VoteRecord.from_json(data))
                except (KeyError, TypeError) as exc:
                    raise LogFormatError(f"line {lineno}: malformed vote: {exc}") from exc
            else:
                raise LogFormatError(f"line {lineno}: unknown record kind {kind!r}")
        if meta is None:
            raise LogFormatError("log has no meta line")
        log = cls(meta=meta)
        for record in sorted([*entries, *votes], key=lambda r: r.seq):
            if isinstance(record, LogEntry):
                log.append_entry(record)
            else:
                log.append_vote(record)
        return log

    @classmethod
    def read(cls, path: str | Path) -> "SessionLog":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def append_record(path: str | Path, record: dict) -> None:
    """Append one canonical JSON line, creating the file as needed."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(canonical_json(record) + "\n")


def replay(
    log: SessionLog, config: GameConfig
) -> tuple[PlanningProblem, State]:
    """Re-execute a log against its game and return the final state.

    Every logged action must be legal where it is taken and every
    logged at_cost must match the clock after the step; any mismatch
    raises :class:`LogFormatError` because the log is the source of
    truth and disagreement means corruption.
    """
    if log.meta.get("game_id") not in (None, config.game_id):
        raise LogFormatError(
            f"log is for game {log.meta.get('game_id')!r}, not {config.game_id!r}"
        )
    problem = compile_game(config)
    state = problem.init
    for entry in log.entries:
        action = problem.domain.action(entry.user_action)
        state, _ = step(state, action, problem)
        if state.elapsed_cost != entry.at_cost:
            raise LogFormatError(
                f"seq {entry.seq}: clock {state.elapsed_cost} != logged {entry.at_cost}"
            )
    return problem, state

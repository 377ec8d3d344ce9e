"""HTTP/WebSocket session service wrapping the rules engine.

One process, many sessions.  Each session serializes its actions behind an
asyncio lock (linearizable per session, concurrent across sessions), runs
engine transitions in a worker thread, persists after every mutation, and
pushes ``{view, dialogue}`` frames to any listening WebSocket.  Sessions not
in memory are recovered from their save files on first touch.
"""

from __future__ import annotations

import asyncio
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Optional

import anyio
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .dialogue import (
    DialogueResponse,
    ProviderTextSource,
    generate_feedback,
    get_provider,
)
from .domain import (
    CAUSE_ORDER,
    Case,
    ChooseCause,
    GameState,
    Level,
    PlayCard,
    PlayPair,
    default_deck,
)
from .engine import Outcome, RulesEngine
from .errors import DomainError, SaveError, StateError
from .persistence import decode_action, default_save_path, load_state, save_state
from .storypack import StoryPack, load_reference_pack, parse_pack

# Engine guard codes -> wire reason codes.
REASON_CODES = {
    "LEVEL": "WRONG_LEVEL",
    "SOLVED": "ALREADY_SOLVED",
    "CARD": "CARD_NOT_OWNED",
    "PAIR": "IDENTICAL_CARDS",
    "HAND": "NOT_IN_HANDBOOK",
    "CASE": "UNKNOWN_CASE",
    "OWNED": "ALREADY_OWNED",
    "LISTING": "NOT_IN_SHOP",
    "POINTS": "INSUFFICIENT_POINTS",
    "MILESTONE": "MILESTONE_NOT_REACHED",
    "DUPLICATE": "DUPLICATE_LETTER",
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class SessionRecord:
    state: GameState
    created_at: str
    last_action_at: str
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)


class CreateSessionBody(BaseModel):
    pack_id: str = "reference"
    seed: int = 0


# -- view projection -----------------------------------------------------------

def case_view(case: Case, solved: bool) -> dict:
    """Serialize a case for the client, hiding whatever it must still guess:
    the quiz answer on L0 and the cause pair on unsolved L2 cases."""
    out: dict[str, Any] = {
        "case_id": case.case_id,
        "level": case.level.value,
        "npc": {"npc_id": case.npc.npc_id, "name": case.npc.name,
                "basic_info": case.npc.basic_info,
                "persona_notes": case.npc.persona_notes},
        "narrative": case.narrative,
    }
    if case.level is Level.L0:
        out["misconception_label"] = case.misconception_label.value
        out["punishment"] = case.punishment
        out["options"] = [{"cause": c.value, "title": c.chapter_title}
                          for c in CAUSE_ORDER]
        if solved:
            out["major_cause"] = case.major_cause.value
    elif case.level is Level.L1:
        out["major_cause"] = case.major_cause.value
        out["chapter_title"] = case.major_cause.chapter_title
    else:
        if solved:
            out["cause_pair"] = sorted(c.value for c in case.cause_pair)
    return out


def build_view(engine: RulesEngine, state: GameState) -> dict:
    current = engine.current_case(state)
    if state.current_level is Level.L1:
        hand = sorted(state.owned_cards)
    elif state.current_level is Level.L2:
        hand = sorted(engine.level2_hand(state))
    else:
        hand = []
    return {
        "session_id": state.session_id,
        "pack_id": state.pack_id,
        "level": state.current_level.value,
        "points": {"earned": state.points_earned, "spent": state.points_spent,
                   "unspent": state.points_unspent},
        "owned_cards": sorted(state.owned_cards),
        "hand": hand,
        "current_case": None if current is None else case_view(current, solved=False),
        "pending_count": len(engine.pending_cases(state)),
        "handbook": {
            cause.value: {
                "title": cause.chapter_title,
                "entries": [{"case_id": e.case_id, "card_id": e.card_id}
                            for e in state.handbook.chapters.get(cause, ())],
                "complete": state.handbook.chapter_complete(cause),
            } for cause in CAUSE_ORDER},
        "letters": [{"milestone": l.milestone, "card_ids": list(l.card_ids),
                     "text": l.text} for l in state.letters_received],
        "merged_cards": [{"case_id": m.case_id, "source_ids": list(m.source_ids),
                          "title": m.generated_title, "text": m.generated_text}
                         for m in state.merged_cards],
        "shop": [{"card_id": l.card_id, "cost_points": l.cost_points}
                 for l in engine.shop_available(state)],
        "solved": {"l0": sorted(state.solved_l0), "l1": sorted(state.solved_l1),
                   "l2": sorted(state.solved_l2)},
        "completed": state.current_level is Level.COMPLETED,
        "action_count": len(state.action_log),
    }


def outcome_payload(outcome: Outcome) -> dict:
    delta = outcome.state_delta
    return {
        "result": outcome.result.value,
        "tone": outcome.feedback_tone.value,
        "delta": {
            "solved_case_id": delta.solved_case_id,
            "handbook_entry": None if delta.handbook_entry is None else
                {"case_id": delta.handbook_entry.case_id,
                 "card_id": delta.handbook_entry.card_id},
            "points_awarded": delta.points_awarded,
            "letter_milestone": None if delta.letter_milestone is None
                else delta.letter_milestone.value,
            "cards_granted": list(delta.cards_granted),
            "merged_case_id": delta.merged_case_id,
            "purchased_card": delta.purchased_card,
            "level_advance": None if delta.level_advance is None
                else delta.level_advance.value,
        },
    }


def dialogue_payload(response: Optional[DialogueResponse]) -> Optional[dict]:
    if response is None:
        return None
    return {"text": response.text, "tone": response.tone.value,
            "provider_id": response.provider_id,
            "latency_ms": response.latency_ms, "degraded": response.degraded}


# -- the app --------------------------------------------------------------------

class SessionStore:
    def __init__(self, packs: Mapping[str, StoryPack], save_dir: Path,
                 provider_name: str = "stub"):
        self.save_dir = save_dir
        self.provider = get_provider(provider_name)
        self.deck = default_deck()
        texts = ProviderTextSource(self.provider, self.deck)
        self.engines = {pack_id: RulesEngine(pack, self.deck, texts)
                        for pack_id, pack in packs.items()}
        self.sessions: dict[str, SessionRecord] = {}

    def engine_for(self, pack_id: str) -> RulesEngine:
        engine = self.engines.get(pack_id)
        if engine is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown pack {pack_id!r}")
        return engine

    def save_path(self, session_id: str) -> Path:
        return default_save_path(session_id, self.save_dir)

    def create(self, pack_id: str, seed: int) -> SessionRecord:
        engine = self.engine_for(pack_id)
        session_id = uuid.uuid4().hex[:12]
        state = engine.initial_state(session_id, seed)
        now = _now()
        record = SessionRecord(state=state, created_at=now, last_action_at=now)
        self.sessions[session_id] = record
        save_state(state, self.save_path(session_id))
        return record

    def get(self, session_id: str) -> SessionRecord:
        record = self.sessions.get(session_id)
        if record is not None:
            return record
        # Crash recovery: fall back to the save file.
        path = self.save_path(session_id)
        if path.is_file():
            try:
                state = load_state(path)
            except SaveError as exc:
                raise HTTPException(status_code=500,
                                    detail=f"session save unreadable: {exc}") from exc
            self.engine_for(state.pack_id)
            record = SessionRecord(state=state, created_at=_now(),
                                   last_action_at=_now())
            self.sessions[session_id] = record
            return record
        raise HTTPException(status_code=404,
                            detail=f"unknown session {session_id!r}")


def load_packs(packs_dir: Path | str | None = None) -> dict[str, StoryPack]:
    """The bundled reference pack plus every pack file in ``packs_dir``."""
    packs: dict[str, StoryPack] = {}
    reference = load_reference_pack()
    packs[reference.pack_id] = reference
    if packs_dir is not None:
        for candidate in sorted(Path(packs_dir).glob("*.json")):
            pack = parse_pack(candidate.read_bytes())
            packs[pack.pack_id] = pack
    return packs


def create_app(packs: Mapping[str, StoryPack] | None = None,
               save_dir: Path | str | None = None,
               provider_name: str = "stub",
               static_dir: Path | str | None = None) -> FastAPI:
    if packs is None:
        packs = load_packs()
    save_dir = Path(save_dir) if save_dir is not None else None
    store = SessionStore(packs, save_dir=save_dir or default_save_path("x").parent,
                         provider_name=provider_name)
    app = FastAPI(title="procrastimate session service")
    app.state.store = store

    @app.get("/api/packs")
    async def list_packs() -> list[dict]:
        return [{
            "pack_id": pack.pack_id,
            "title": pack.title,
            "cases": {"l0": len(pack.l0_cases),
                      "l1": sum(len(v) for v in pack.l1_cases.values()),
                      "l2": len(pack.l2_cases)},
        } for pack in (e.pack for e in store.engines.values())]

    @app.get("/api/deck")
    async def get_deck() -> dict:
        return {"cards": [{"id": c.id, "title": c.title,
                           "explanation": c.explanation, "utility": c.utility,
                           "cause": c.cause.value}
                          for c in store.deck]}

    @app.post("/api/sessions", status_code=201)
    async def create_session(body: CreateSessionBody) -> dict:
        record = store.create(body.pack_id, body.seed)
        engine = store.engine_for(record.state.pack_id)
        return {"session_id": record.state.session_id,
                "view": build_view(engine, record.state)}

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str) -> dict:
        record = store.get(session_id)
        engine = store.engine_for(record.state.pack_id)
        return {"view": build_view(engine, record.state)}

    @app.post("/api/sessions/{session_id}/actions")
    async def submit_action(session_id: str, body: dict) -> dict:
        record = store.get(session_id)
        engine = store.engine_for(record.state.pack_id)
        try:
            action = decode_action(body)
        except (DomainError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=422,
                                detail={"code": "BAD_ACTION", "message": str(exc)})

        async with record.lock:
            try:
                next_state, outcome = await asyncio.to_thread(
                    engine.apply, record.state, action)
            except StateError as exc:
                raise HTTPException(status_code=409, detail={
                    "code": REASON_CODES.get(exc.code, exc.code),
                    "message": str(exc)})
            except DomainError as exc:
                raise HTTPException(status_code=422, detail={
                    "code": "DOMAIN", "message": str(exc)})

            response: Optional[DialogueResponse] = None
            if outcome is not None:
                case = engine.case(action.case_id)
                if isinstance(action, PlayCard):
                    played = [store.deck[action.card_id]]
                    choice = None
                elif isinstance(action, PlayPair):
                    played = [store.deck[action.card_a], store.deck[action.card_b]]
                    choice = None
                else:
                    assert isinstance(action, ChooseCause)
                    played = []
                    choice = action.choice
                response = await asyncio.to_thread(
                    generate_feedback, store.provider, next_state, case,
                    played, outcome, None, choice)

            record.state = next_state
            record.last_action_at = _now()
            await asyncio.to_thread(save_state, next_state,
                                    store.save_path(session_id))

        frame = {"view": build_view(engine, record.state),
                 "dialogue": dialogue_payload(response)}
        for queue in list(record.subscribers):
            queue.put_nowait(frame)
        return {
            "view": frame["view"],
            "outcome": None if outcome is None else outcome_payload(outcome),
            "dialogue": frame["dialogue"],
        }

    @app.websocket("/api/sessions/{session_id}/events")
    async def session_events(websocket: WebSocket, session_id: str) -> None:
        try:
            record = store.get(session_id)
        except HTTPException:
            await websocket.close(code=1008)
            return
        engine = store.engine_for(record.state.pack_id)
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        record.subscribers.append(queue)
        try:
            async with anyio.create_task_group() as group:

                async def watch_hangup() -> None:
                    # Wakes on hangup even while the queue is idle; without
                    # this a dead socket parks on queue.get() forever and
                    # blocks server shutdown.
                    while True:
                        message = await websocket.receive()
                        if message["type"] == "websocket.disconnect":
                            group.cancel_scope.cancel()
                            return

                group.start_soon(watch_hangup)
                try:
                    await websocket.send_json(
                        {"view": build_view(engine, record.state), "dialogue": None})
                    while True:
                        frame = await queue.get()
                        await websocket.send_json(frame)
                except WebSocketDisconnect:
                    group.cancel_scope.cancel()
        finally:
            record.subscribers.remove(queue)

    if static_dir is not None:
        # Browser client, same origin as the API. Mounted last so the
        # /api routes above keep precedence.
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="web")

    return app

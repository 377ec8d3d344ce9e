"""Versioned save/load of game state with integrity checks.

The on-disk format is a JSON envelope: ``format_version``, ``saved_at``, a
sha256 ``checksum`` over the canonical state payload, and the ``state``
itself.  Saves are atomic (temp file in the target directory, then rename)
and keep the previous file as a single rolling ``.bak``.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from .domain import (
    CAUSE_ORDER,
    Action,
    ActionRecord,
    AdvanceCase,
    BuyCard,
    Cause,
    ChooseCause,
    GameState,
    Handbook,
    HandbookEntry,
    LetterRecord,
    Level,
    MergedCard,
    PlayCard,
    PlayPair,
)
from .errors import CorruptionError, DomainError, SaveError, TamperError, VersionError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SaveFile:
    """Metadata describing one completed save."""

    format_version: int
    saved_at: str
    checksum: str
    path: Path


# -- codec --------------------------------------------------------------------

def encode_action(action: Action) -> dict:
    if isinstance(action, ChooseCause):
        return {"kind": action.kind, "case_id": action.case_id,
                "choice": action.choice.value}
    if isinstance(action, PlayCard):
        return {"kind": action.kind, "case_id": action.case_id,
                "card_id": action.card_id}
    if isinstance(action, PlayPair):
        return {"kind": action.kind, "case_id": action.case_id,
                "card_a": action.card_a, "card_b": action.card_b}
    if isinstance(action, BuyCard):
        return {"kind": action.kind, "card_id": action.card_id}
    if isinstance(action, AdvanceCase):
        return {"kind": action.kind}
    raise DomainError(f"cannot encode action type {type(action).__name__}")


def decode_action(obj: Mapping[str, Any]) -> Action:
    kind = obj.get("kind")
    try:
        if kind == "l0_choice":
            return ChooseCause(case_id=obj["case_id"],
                               choice=Cause.from_name(obj["choice"]))
        if kind == "play_card":
            return PlayCard(case_id=obj["case_id"], card_id=obj["card_id"])
        if kind == "play_pair":
            return PlayPair(case_id=obj["case_id"], card_a=obj["card_a"],
                            card_b=obj["card_b"])
        if kind == "buy_card":
            return BuyCard(card_id=obj["card_id"])
    except KeyError as exc:
        raise DomainError(f"action {kind!r} is missing field {exc}") from exc
    if kind == "advance_case":
        return AdvanceCase()
    raise DomainError(f"unknown action kind {kind!r}")


def state_to_payload(state: GameState) -> dict:
    return {
        "session_id": state.session_id,
        "pack_id": state.pack_id,
        "rng_seed": state.rng_seed,
        "current_level": state.current_level.value,
        "solved_l0": sorted(state.solved_l0),
        "solved_l1": sorted(state.solved_l1),
        "solved_l2": sorted(state.solved_l2),
        "owned_cards": sorted(state.owned_cards),
        "points_earned": state.points_earned,
        "points_spent": state.points_spent,
        "handbook": {
            cause.value: [{"case_id": e.case_id, "card_id": e.card_id}
                          for e in state.handbook.chapters.get(cause, ())]
            for cause in CAUSE_ORDER},
        "merged_cards": [
            {"source_ids": list(m.source_ids), "generated_title": m.generated_title,
             "generated_text": m.generated_text, "case_id": m.case_id}
            for m in state.merged_cards],
        "letters_received": [
            {"milestone": l.milestone, "card_ids": list(l.card_ids), "text": l.text}
            for l in state.letters_received],
        "case_cursor": state.case_cursor,
        "action_log": [
            {"seq": r.seq, "at": r.at, "action": encode_action(r.action)}
            for r in state.action_log],
    }


def state_from_payload(payload: Mapping[str, Any]) -> GameState:
    try:
        handbook = Handbook({
            cause: tuple(HandbookEntry(case_id=e["case_id"], card_id=e["card_id"])
                         for e in payload["handbook"].get(cause.value, ()))
            for cause in CAUSE_ORDER})
        merged = tuple(
            MergedCard(source_ids=tuple(m["source_ids"]),
                       generated_title=m["generated_title"],
                       generated_text=m["generated_text"], case_id=m["case_id"])
            for m in payload["merged_cards"])
        letters = tuple(
            LetterRecord(milestone=l["milestone"], card_ids=tuple(l["card_ids"]),
                         text=l["text"])
            for l in payload["letters_received"])
        log = tuple(
            ActionRecord(seq=r["seq"], at=r["at"], action=decode_action(r["action"]))
            for r in payload["action_log"])
        return GameState(
            session_id=payload["session_id"],
            pack_id=payload["pack_id"],
            rng_seed=payload["rng_seed"],
            current_level=Level(payload["current_level"]),
            solved_l0=frozenset(payload["solved_l0"]),
            solved_l1=frozenset(payload["solved_l1"]),
            solved_l2=frozenset(payload["solved_l2"]),
            owned_cards=frozenset(payload["owned_cards"]),
            points_earned=payload["points_earned"],
            points_spent=payload["points_spent"],
            handbook=handbook,
            merged_cards=merged,
            letters_received=letters,
            case_cursor=payload["case_cursor"],
            action_log=log,
        )
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise TamperError(f"state payload does not decode: {exc}") from exc


def _checksum(payload: Mapping[str, Any]) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"),
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# -- file operations ----------------------------------------------------------

def backup_path(destination: Path) -> Path:
    return destination.with_name(destination.name + ".bak")


def save_state(state: GameState, destination: Path | str) -> SaveFile:
    """Write atomically; the previous save survives as ``<name>.bak``.

    Any failure leaves the existing file untouched (the temp file is written
    and fsynced before the rename, and cleaned up on error).
    """
    destination = Path(destination)
    payload = state_to_payload(state)
    envelope = {
        "format_version": FORMAT_VERSION,
        "saved_at": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
        "checksum": _checksum(payload),
        "state": payload,
    }
    tmp_path: str | None = None
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=destination.parent,
                                        prefix=destination.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(envelope, fh, indent=2, ensure_ascii=False)
            fh.flush()
            os.fsync(fh.fileno())
        if destination.exists():
            shutil.copy2(destination, backup_path(destination))
        os.replace(tmp_path, destination)
        tmp_path = None
    except OSError as exc:
        raise SaveError(f"cannot save to {destination}: {exc}") from exc
    finally:
        if tmp_path is not None:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
    return SaveFile(format_version=FORMAT_VERSION, saved_at=envelope["saved_at"],
                    checksum=envelope["checksum"], path=destination)


def load_state(source: Path | str) -> GameState:
    """Load and re-validate a save; integrity failures raise typed errors."""
    source = Path(source)
    try:
        raw = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise SaveError(f"cannot read {source}: {exc}") from exc
    try:
        envelope = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptionError(f"{source} is not valid JSON: {exc}") from exc
    if not isinstance(envelope, dict):
        raise CorruptionError(f"{source} does not hold a save envelope")

    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"{source} has format version {version!r}; "
                           f"this build reads {FORMAT_VERSION}")
    payload = envelope.get("state")
    if not isinstance(payload, dict):
        raise CorruptionError(f"{source} is missing its state payload")
    if _checksum(payload) != envelope.get("checksum"):
        raise CorruptionError(f"{source} failed its checksum")

    state = state_from_payload(payload)
    try:
        state.validate()
    except DomainError as exc:
        raise TamperError(f"{source} violates a game-state invariant: {exc}") from exc
    return state


def user_data_dir() -> Path:
    """Platform user-data directory for this package's saves."""
    if os.name == "nt":
        base = Path(os.environ.get("APPDATA", Path.home() / "AppData" / "Roaming"))
    elif os.uname().sysname == "Darwin":  # pragma: no cover - platform branch
        base = Path.home() / "Library" / "Application Support"
    else:
        base = Path(os.environ.get("XDG_DATA_HOME", Path.home() / ".local" / "share"))
    return base / "procrastimate"


def default_save_path(session_id: str, save_dir: Path | str | None = None) -> Path:
    base = Path(save_dir) if save_dir is not None else user_data_dir()
    return base / f"{session_id}.save.json"

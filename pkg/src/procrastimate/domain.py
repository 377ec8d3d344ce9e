"""Shared game types: causes, the 40-card deck, cases, handbook, and session state.

Everything here is an immutable value object. State changes happen only in the
rules engine, which builds new ``GameState`` instances; nothing in this module
mutates in place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping, Sequence, Union

from .errors import DeckError, DomainError

DECK_SIZE = 40
CARDS_PER_CAUSE = 10
CHAPTER_CAPACITY = 6


class Cause(Enum):
    """The four drivers of procrastination the game teaches."""

    SELF_EFFICACY = "SelfEfficacy"
    TASK_VALUE = "TaskValue"
    IMPULSIVENESS = "Impulsiveness"
    DISTANT_DELAY = "DistantDelay"

    @property
    def chapter_title(self) -> str:
        return _CHAPTER_TITLES[self]

    @classmethod
    def from_name(cls, name: str) -> "Cause":
        for cause in cls:
            if cause.value == name:
                return cause
        raise DomainError(f"unknown cause {name!r}; expected one of "
                          f"{[c.value for c in cls]}")


_CHAPTER_TITLES = {
    Cause.SELF_EFFICACY: "Improve Self-efficacy",
    Cause.TASK_VALUE: "Embrace Task Value",
    Cause.IMPULSIVENESS: "Control Impulsiveness",
    Cause.DISTANT_DELAY: "Adjust Distant Delay",
}

# Deck order fixed by card-id ranges: 1-10, 11-20, 21-30, 31-40.
CAUSE_ORDER = (Cause.SELF_EFFICACY, Cause.TASK_VALUE,
               Cause.IMPULSIVENESS, Cause.DISTANT_DELAY)


class MisconceptionLabel(Enum):
    """Punitive labels the old handbook pinned on procrastinators."""

    INCOMPETENCE = "Incompetence"
    IRRESPONSIBILITY = "Irresponsibility"
    WEAK_WILLPOWER = "WeakWillpower"
    LAZINESS = "Laziness"

    @classmethod
    def from_name(cls, name: str) -> "MisconceptionLabel":
        for label in cls:
            if label.value == name:
                return label
        raise DomainError(f"unknown misconception label {name!r}")


class Level(Enum):
    L0 = "L0"
    L1 = "L1"
    L2 = "L2"
    COMPLETED = "Completed"


def cause_of_card(card_id: int) -> Cause:
    """Map a card id to its cause bucket (1-10, 11-20, 21-30, 31-40)."""
    if not isinstance(card_id, int) or isinstance(card_id, bool):
        raise DomainError(f"card id must be an integer, got {card_id!r}")
    if not 1 <= card_id <= DECK_SIZE:
        raise DomainError(f"card id {card_id} outside [1, {DECK_SIZE}]")
    return CAUSE_ORDER[(card_id - 1) // CARDS_PER_CAUSE]


@dataclass(frozen=True)
class StrategyCard:
    """One of the 40 numbered coping strategies."""

    id: int
    title: str
    explanation: str
    utility: str

    def __post_init__(self) -> None:
        cause_of_card(self.id)  # range check

    @property
    def cause(self) -> Cause:
        return cause_of_card(self.id)


class Deck:
    """The validated deck of exactly 40 cards, indexable by id."""

    def __init__(self, cards: Sequence[StrategyCard]):
        by_id = {card.id: card for card in cards}
        self._cards = tuple(by_id[i] for i in sorted(by_id))
        self._by_id = by_id

    def __iter__(self):
        return iter(self._cards)

    def __len__(self) -> int:
        return len(self._cards)

    def __getitem__(self, card_id: int) -> StrategyCard:
        card = self._by_id.get(card_id)
        if card is None:
            raise DomainError(f"card id {card_id} not in deck")
        return card

    def cards_for(self, cause: Cause) -> tuple[StrategyCard, ...]:
        return tuple(c for c in self._cards if c.cause is cause)


def load_deck(source: Union[str, bytes, Iterable[Mapping]]) -> Deck:
    """Parse and validate a card-definition document into a :class:`Deck`.

    ``source`` may be a JSON string/bytes (a top-level array of card objects)
    or an already-decoded sequence of mappings. The deck must contain exactly
    the ids 1..40, each once.
    """
    if isinstance(source, (str, bytes)):
        try:
            entries = json.loads(source)
        except json.JSONDecodeError as exc:
            raise DeckError(f"deck document is not valid JSON: {exc}") from exc
    else:
        entries = list(source)
    if not isinstance(entries, list):
        raise DeckError("deck document must be a JSON array of card objects")

    cards: list[StrategyCard] = []
    seen: set[int] = set()
    duplicates: set[int] = set()
    out_of_range: list[int] = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping):
            raise DeckError(f"deck entry #{i} is not an object")
        try:
            card_id = entry["id"]
            card = StrategyCard(
                id=card_id,
                title=str(entry["title"]),
                explanation=str(entry["explanation"]),
                utility=str(entry["utility"]),
            )
        except KeyError as exc:
            raise DeckError(f"deck entry #{i} is missing field {exc}") from exc
        except DomainError:
            out_of_range.append(card_id)
            continue
        if card.id in seen:
            duplicates.add(card.id)
        seen.add(card.id)
        cards.append(card)

    if out_of_range:
        raise DeckError(f"card ids out of range [1, {DECK_SIZE}]: {sorted(out_of_range)}",
                        offending_ids=sorted(out_of_range))
    if duplicates:
        raise DeckError(f"duplicate card ids: {sorted(duplicates)}",
                        offending_ids=sorted(duplicates))
    missing = sorted(set(range(1, DECK_SIZE + 1)) - seen)
    if missing:
        raise DeckError(f"deck is missing card ids: {missing}", offending_ids=missing)
    return Deck(cards)


def default_deck() -> Deck:
    """The bundled English deck."""
    text = resources.files("procrastimate.data").joinpath("cards.json").read_text("utf-8")
    return load_deck(text)


@dataclass(frozen=True)
class NpcProfile:
    npc_id: str
    name: str
    basic_info: str
    persona_notes: str = ""


@dataclass(frozen=True)
class Case:
    """A procrastination scenario attached to an NPC.

    Level shapes the optional fields: L0 cases carry ``misconception_label``,
    ``punishment`` and ``major_cause``; L1 cases carry ``major_cause`` only;
    L2 cases carry ``cause_pair`` (exactly two distinct causes) and none of
    the L0 extras.
    """

    case_id: str
    level: Level
    npc: NpcProfile
    narrative: str
    misconception_label: MisconceptionLabel | None = None
    punishment: str | None = None
    major_cause: Cause | None = None
    cause_pair: frozenset[Cause] | None = None

    def __post_init__(self) -> None:
        if self.level in (Level.L0, Level.L1):
            if self.major_cause is None:
                raise DomainError(f"case {self.case_id}: {self.level.value} requires major_cause")
            if self.cause_pair is not None:
                raise DomainError(f"case {self.case_id}: cause_pair is only valid on L2 cases")
        if self.level is Level.L0:
            if self.misconception_label is None or self.punishment is None:
                raise DomainError(
                    f"case {self.case_id}: L0 requires misconception_label and punishment")
        else:
            if self.misconception_label is not None or self.punishment is not None:
                raise DomainError(
                    f"case {self.case_id}: misconception_label/punishment are L0-only")
        if self.level is Level.L2:
            if self.major_cause is not None:
                raise DomainError(f"case {self.case_id}: L2 cases use cause_pair, not major_cause")
            if self.cause_pair is None or len(self.cause_pair) != 2:
                raise DomainError(f"case {self.case_id}: L2 requires exactly two distinct causes")
        if self.level is Level.COMPLETED:
            raise DomainError("Completed is not a case level")


@dataclass(frozen=True)
class HandbookEntry:
    """A solved case slotted into a chapter together with the card that won it."""

    case_id: str
    card_id: int


@dataclass(frozen=True)
class Handbook:
    """Four cause-keyed chapters, each holding up to six solved-case entries."""

    chapters: Mapping[Cause, tuple[HandbookEntry, ...]] = field(
        default_factory=lambda: {cause: () for cause in CAUSE_ORDER})

    def __post_init__(self) -> None:
        for cause in CAUSE_ORDER:
            entries = self.chapters.get(cause, ())
            if len(entries) > CHAPTER_CAPACITY:
                raise DomainError(f"chapter {cause.value} exceeds {CHAPTER_CAPACITY} entries")
            for entry in entries:
                if cause_of_card(entry.card_id) is not cause:
                    raise DomainError(
                        f"card {entry.card_id} does not belong in chapter {cause.value}")
        ids = [e.case_id for es in self.chapters.values() for e in es]
        if len(ids) != len(set(ids)):
            raise DomainError("a case appears more than once in the handbook")

    def with_entry(self, cause: Cause, entry: HandbookEntry) -> "Handbook":
        chapters = {c: self.chapters.get(c, ()) for c in CAUSE_ORDER}
        chapters[cause] = chapters[cause] + (entry,)
        return Handbook(chapters)

    def chapter_complete(self, cause: Cause) -> bool:
        return len(self.chapters.get(cause, ())) == CHAPTER_CAPACITY

    def all_complete(self) -> bool:
        return all(self.chapter_complete(cause) for cause in CAUSE_ORDER)

    def total_entries(self) -> int:
        return sum(len(es) for es in self.chapters.values())

    def card_ids(self) -> frozenset[int]:
        """Distinct card ids collected in the handbook (the Level-2 hand)."""
        return frozenset(e.card_id for es in self.chapters.values() for e in es)


@dataclass(frozen=True)
class MergedCard:
    """A Level-2 artifact combining two handbook strategies for one case."""

    source_ids: tuple[int, int]
    generated_title: str
    generated_text: str
    case_id: str

    def __post_init__(self) -> None:
        a, b = self.source_ids
        if a == b:
            raise DomainError("merged card requires two distinct source cards")
        if a > b:  # canonical unordered pair
            object.__setattr__(self, "source_ids", (b, a))
        for card_id in self.source_ids:
            cause_of_card(card_id)


@dataclass(frozen=True)
class LetterRecord:
    """A thank-you letter granted at a milestone, with the cards it carried."""

    milestone: str
    card_ids: tuple[int, ...]
    text: str


# --- Player actions, recorded in the append-only log ------------------------

@dataclass(frozen=True)
class ChooseCause:
    case_id: str
    choice: Cause
    kind: str = field(default="l0_choice", init=False)


@dataclass(frozen=True)
class PlayCard:
    case_id: str
    card_id: int
    kind: str = field(default="play_card", init=False)


@dataclass(frozen=True)
class PlayPair:
    case_id: str
    card_a: int
    card_b: int
    kind: str = field(default="play_pair", init=False)


@dataclass(frozen=True)
class BuyCard:
    card_id: int
    kind: str = field(default="buy_card", init=False)


@dataclass(frozen=True)
class AdvanceCase:
    kind: str = field(default="advance_case", init=False)


Action = Union[ChooseCause, PlayCard, PlayPair, BuyCard, AdvanceCase]


@dataclass(frozen=True)
class ActionRecord:
    """One log entry: sequence number, ISO-8601 timestamp, and the action."""

    seq: int
    at: str
    action: Action


@dataclass(frozen=True)
class GameState:
    """A full player session. Instances are immutable; the engine derives
    successors with :func:`dataclasses.replace`."""

    session_id: str
    pack_id: str
    rng_seed: int
    current_level: Level = Level.L0
    solved_l0: frozenset[str] = frozenset()
    solved_l1: frozenset[str] = frozenset()
    solved_l2: frozenset[str] = frozenset()
    owned_cards: frozenset[int] = frozenset()
    points_earned: int = 0
    points_spent: int = 0
    handbook: Handbook = field(default_factory=Handbook)
    merged_cards: tuple[MergedCard, ...] = ()
    letters_received: tuple[LetterRecord, ...] = ()
    case_cursor: int = 0
    action_log: tuple[ActionRecord, ...] = ()

    @property
    def points_unspent(self) -> int:
        return self.points_earned - self.points_spent

    def validate(self) -> None:
        """Re-check every cross-field invariant; raises DomainError on violation."""
        if self.points_spent > self.points_earned:
            raise DomainError("points_spent exceeds points_earned")
        if self.points_earned != len(self.solved_l1):
            raise DomainError("points_earned must equal number of solved L1 cases")
        if len(self.owned_cards) > DECK_SIZE:
            raise DomainError("owned_cards exceeds deck size")
        for card_id in self.owned_cards:
            cause_of_card(card_id)
        if self.handbook.total_entries() != len(self.solved_l1):
            raise DomainError("handbook entries must match solved L1 cases")
        for record in self.action_log:
            if not isinstance(record, ActionRecord):
                raise DomainError("action_log holds a non-ActionRecord entry")

    def with_action(self, action: Action, at: str) -> "GameState":
        record = ActionRecord(seq=len(self.action_log), at=at, action=action)
        return replace(self, action_log=self.action_log + (record,))

"""Deterministic adjudication and state transitions for all three levels.

Every operation takes an immutable :class:`GameState` and returns a new one;
the only side channel is the :class:`TextSource`, which supplies letter and
merged-card prose at the moment those records are created.  Text never feeds
back into rule decisions, so two engines with different text sources walk
identical rule trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Optional, Protocol

from .domain import (
    CAUSE_ORDER,
    Action,
    ActionRecord,
    AdvanceCase,
    BuyCard,
    Case,
    Cause,
    ChooseCause,
    Deck,
    GameState,
    Handbook,
    HandbookEntry,
    LetterRecord,
    Level,
    MergedCard,
    PlayCard,
    PlayPair,
    cause_of_card,
    default_deck,
)
from .errors import EconomyError, StateError
from .storypack import ShopListing, StoryPack


class Result(Enum):
    WIN = "Win"
    LOSE = "Lose"


class Tone(Enum):
    CRITICAL = "Critical"
    POSITIVE = "Positive"


@dataclass(frozen=True)
class StateDelta:
    """What an adjudication changed, for feedback rendering and UI updates."""

    solved_case_id: Optional[str] = None
    handbook_entry: Optional[HandbookEntry] = None
    points_awarded: int = 0
    letter_milestone: Optional[Cause] = None
    cards_granted: tuple[int, ...] = ()
    merged_case_id: Optional[str] = None
    purchased_card: Optional[int] = None
    level_advance: Optional[Level] = None


@dataclass(frozen=True)
class Outcome:
    result: Result
    feedback_tone: Tone
    state_delta: StateDelta

    def __post_init__(self) -> None:
        expected = Tone.POSITIVE if self.result is Result.WIN else Tone.CRITICAL
        if self.feedback_tone is not expected:
            raise StateError(
                f"{self.result.value} cannot carry {self.feedback_tone.value} tone",
                code="TONE")


def _outcome(win: bool, delta: StateDelta) -> Outcome:
    return Outcome(result=Result.WIN if win else Result.LOSE,
                   feedback_tone=Tone.POSITIVE if win else Tone.CRITICAL,
                   state_delta=delta)


class TextSource(Protocol):
    """Prose supplier for records embedded in game state.

    Implementations must be deterministic in (arguments, seed) or replay
    cannot reproduce a session bit-for-bit.
    """

    def letter_text(self, milestone: Cause, card_ids: tuple[int, ...],
                    template_id: str, seed: int) -> str: ...

    def merged_text(self, case: Case, card_a: int, card_b: int,
                    seed: int) -> tuple[str, str]: ...


class PlainTextSource:
    """Minimal built-in prose: card titles joined into fixed sentences.

    Keeps the engine importable without the dialogue module; swapped out for
    the real generator by callers that want narrative text.
    """

    def __init__(self, deck: Deck):
        self._deck = deck

    def letter_text(self, milestone: Cause, card_ids: tuple[int, ...],
                    template_id: str, seed: int) -> str:
        titles = ", ".join(self._deck[c].title for c in card_ids)
        return (f"Thank you for seeing me through {milestone.chapter_title}. "
                f"Please take these cards: {titles}.")

    def merged_text(self, case: Case, card_a: int, card_b: int,
                    seed: int) -> tuple[str, str]:
        first, second = self._deck[card_a], self._deck[card_b]
        title = f"{first.title} + {second.title}"
        text = (f"Run both moves as one routine: {first.explanation} "
                f"Then: {second.explanation}")
        return title, text


def level1_wins(card_id: int, major_cause: Cause) -> bool:
    """The whole Level-1 rule: the card's cause bucket must match the label."""
    return cause_of_card(card_id) is major_cause


def level2_wins(card_a: int, card_b: int, cause_pair: frozenset[Cause]) -> bool:
    """The whole Level-2 rule: the pair's cause set must equal the case's,
    order-insensitive."""
    return {cause_of_card(card_a), cause_of_card(card_b)} == set(cause_pair)


def progression(state: GameState) -> Level:
    """The level a state has earned, independent of its stored field."""
    if len(state.solved_l2) >= 8:
        return Level.COMPLETED
    if state.handbook.all_complete():
        return Level.L2
    if len(state.solved_l0) >= 8:
        return Level.L1
    return Level.L0


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def rule_projection(state: GameState) -> tuple:
    """Everything rule-relevant in a state, with presentation text stripped.

    Generated letter and merged-card prose varies by text source; the rules
    trajectory must not.  Two states with equal projections made the same
    game-mechanical moves.
    """
    return (
        state.session_id, state.pack_id, state.rng_seed, state.current_level,
        tuple(sorted(state.solved_l0)), tuple(sorted(state.solved_l1)),
        tuple(sorted(state.solved_l2)), tuple(sorted(state.owned_cards)),
        state.points_earned, state.points_spent,
        tuple((cause.value, state.handbook.chapters.get(cause, ()))
              for cause in CAUSE_ORDER),
        tuple((m.source_ids, m.case_id) for m in state.merged_cards),
        tuple((l.milestone, l.card_ids) for l in state.letters_received),
        state.case_cursor,
        tuple(r.action for r in state.action_log),
    )


class RulesEngine:
    """Adjudicates one story pack against one deck.

    Stateless apart from its configuration; every method maps a state to a
    successor, so instances are safe to share across sessions and threads.
    """

    def __init__(self, pack: StoryPack, deck: Deck | None = None,
                 texts: TextSource | None = None):
        self.pack = pack
        self.deck = deck if deck is not None else default_deck()
        self.texts = texts if texts is not None else PlainTextSource(self.deck)
        self._cases = {case.case_id: case for case in pack.all_cases()}

    # -- session setup -------------------------------------------------------

    def initial_state(self, session_id: str, rng_seed: int = 0) -> GameState:
        return GameState(session_id=session_id, pack_id=self.pack.pack_id,
                         rng_seed=rng_seed, current_level=Level.L0,
                         owned_cards=self.pack.starting_hand)

    # -- lookups -------------------------------------------------------------

    def case(self, case_id: str) -> Case:
        try:
            return self._cases[case_id]
        except KeyError:
            raise StateError(f"no case {case_id!r} in pack {self.pack.pack_id!r}",
                             code="CASE") from None

    def _solved_ids(self, state: GameState, level: Level) -> frozenset[str]:
        return {Level.L0: state.solved_l0, Level.L1: state.solved_l1,
                Level.L2: state.solved_l2}[level]

    def pending_cases(self, state: GameState) -> tuple[Case, ...]:
        """Unsolved cases at the state's current level, in pack order."""
        level = state.current_level
        if level is Level.COMPLETED:
            return ()
        if level is Level.L0:
            pool: Iterable[Case] = self.pack.l0_cases
        elif level is Level.L1:
            pool = (c for cause in CAUSE_ORDER
                    for c in self.pack.l1_cases.get(cause, ()))
        else:
            pool = self.pack.l2_cases
        solved = self._solved_ids(state, level)
        return tuple(c for c in pool if c.case_id not in solved)

    def current_case(self, state: GameState) -> Case | None:
        pending = self.pending_cases(state)
        if not pending:
            return None
        return pending[state.case_cursor % len(pending)]

    def shop_available(self, state: GameState) -> tuple[ShopListing, ...]:
        return tuple(l for l in self.pack.shop if l.card_id not in state.owned_cards)

    def level2_hand(self, state: GameState) -> frozenset[int]:
        return state.handbook.card_ids()

    # -- guards --------------------------------------------------------------

    def _require_level(self, state: GameState, level: Level) -> None:
        if state.current_level is not level:
            raise StateError(
                f"action belongs to {level.value}, session is at "
                f"{state.current_level.value}", code="LEVEL")

    def _require_unsolved(self, state: GameState, case: Case) -> None:
        if case.case_id in self._solved_ids(state, case.level):
            raise StateError(f"case {case.case_id!r} is already solved", code="SOLVED")

    def _require_in_pack(self, case: Case) -> None:
        if self._cases.get(case.case_id) != case:
            raise StateError(f"case {case.case_id!r} is not part of pack "
                             f"{self.pack.pack_id!r}", code="CASE")

    # -- level 0 ---------------------------------------------------------------

    def adjudicate_level0(self, state: GameState, case: Case, choice: Cause,
                          at: str | None = None) -> tuple[GameState, Outcome]:
        """Grade a four-way cause quiz answer. Wins award nothing but progress."""
        self._require_in_pack(case)
        if case.level is not Level.L0:
            raise StateError(f"case {case.case_id!r} is not a Level-0 case", code="LEVEL")
        self._require_level(state, Level.L0)
        self._require_unsolved(state, case)

        state = state.with_action(ChooseCause(case_id=case.case_id, choice=choice),
                                  at if at is not None else _now())
        win = choice is case.major_cause
        if not win:
            return state, _outcome(False, StateDelta())

        state = replace(state, solved_l0=state.solved_l0 | {case.case_id})
        advance = None
        if progression(state) is Level.L1:
            advance = Level.L1
            state = replace(state, current_level=Level.L1, case_cursor=0)
        return state, _outcome(True, StateDelta(solved_case_id=case.case_id,
                                                level_advance=advance))

    # -- level 1 ---------------------------------------------------------------

    def adjudicate_level1(self, state: GameState, case: Case, card_id: int,
                          at: str | None = None) -> tuple[GameState, Outcome]:
        """Play one owned card against an L1 case.

        A win slots the card into the case's chapter, pays one Privilege
        Point, and, when the chapter reaches six entries, triggers the
        scripted thank-you letter.  A loss changes nothing but the log.
        """
        self._require_in_pack(case)
        if case.level is not Level.L1:
            raise StateError(f"case {case.case_id!r} is not a Level-1 case", code="LEVEL")
        self._require_level(state, Level.L1)
        self._require_unsolved(state, case)
        cause_of_card(card_id)
        if card_id not in state.owned_cards:
            raise StateError(f"card {card_id} is not in the player's hand", code="CARD")

        state = state.with_action(PlayCard(case_id=case.case_id, card_id=card_id),
                                  at if at is not None else _now())
        win = level1_wins(card_id, case.major_cause)
        if not win:
            return state, _outcome(False, StateDelta())

        chapter = case.major_cause
        entry = HandbookEntry(case_id=case.case_id, card_id=card_id)
        state = replace(
            state,
            solved_l1=state.solved_l1 | {case.case_id},
            handbook=state.handbook.with_entry(chapter, entry),
            points_earned=state.points_earned + 1,
        )

        milestone = None
        granted: tuple[int, ...] = ()
        if state.handbook.chapter_complete(chapter) and self._letter_pending(state, chapter):
            state = self._apply_letter(state, chapter)
            milestone = chapter
            granted = state.letters_received[-1].card_ids

        advance = None
        if progression(state) is Level.L2:
            advance = Level.L2
            state = replace(state, current_level=Level.L2, case_cursor=0)
        return state, _outcome(True, StateDelta(
            solved_case_id=case.case_id, handbook_entry=entry, points_awarded=1,
            letter_milestone=milestone, cards_granted=granted, level_advance=advance))

    # -- level 2 ---------------------------------------------------------------

    def adjudicate_level2(self, state: GameState, case: Case, card_a: int,
                          card_b: int, at: str | None = None,
                          ) -> tuple[GameState, Outcome, MergedCard | None]:
        """Play two handbook cards against a dual-cause case.

        The pair wins exactly when its cause set equals the case's cause
        pair; order never matters.  Wins mint a merged card.
        """
        self._require_in_pack(case)
        if case.level is not Level.L2:
            raise StateError(f"case {case.case_id!r} is not a Level-2 case", code="LEVEL")
        self._require_level(state, Level.L2)
        self._require_unsolved(state, case)
        if card_a == card_b:
            raise StateError("the two played cards must differ", code="PAIR")
        hand = self.level2_hand(state)
        for card_id in (card_a, card_b):
            cause_of_card(card_id)
            if card_id not in hand:
                raise StateError(f"card {card_id} is not in the handbook", code="HAND")

        state = state.with_action(
            PlayPair(case_id=case.case_id, card_a=card_a, card_b=card_b),
            at if at is not None else _now())
        win = level2_wins(card_a, card_b, case.cause_pair)
        if not win:
            return state, _outcome(False, StateDelta()), None

        title, text = self.texts.merged_text(case, card_a, card_b, state.rng_seed)
        merged = MergedCard(source_ids=(card_a, card_b), generated_title=title,
                            generated_text=text, case_id=case.case_id)
        state = replace(
            state,
            solved_l2=state.solved_l2 | {case.case_id},
            merged_cards=state.merged_cards + (merged,),
        )
        advance = None
        if progression(state) is Level.COMPLETED:
            advance = Level.COMPLETED
            state = replace(state, current_level=Level.COMPLETED, case_cursor=0)
        return state, _outcome(True, StateDelta(
            solved_case_id=case.case_id, merged_case_id=case.case_id,
            level_advance=advance)), merged

    # -- economy ---------------------------------------------------------------

    def buy_card(self, state: GameState, card_id: int,
                 at: str | None = None) -> GameState:
        cause_of_card(card_id)
        if card_id in state.owned_cards:
            raise EconomyError(f"card {card_id} is already owned", code="OWNED")
        listing = next((l for l in self.pack.shop if l.card_id == card_id), None)
        if listing is None:
            raise EconomyError(f"card {card_id} is not sold in this pack", code="LISTING")
        if state.points_unspent < listing.cost_points:
            raise EconomyError(
                f"card {card_id} costs {listing.cost_points}, "
                f"only {state.points_unspent} unspent", code="POINTS")
        state = state.with_action(BuyCard(card_id=card_id),
                                  at if at is not None else _now())
        return replace(state,
                       owned_cards=state.owned_cards | {card_id},
                       points_spent=state.points_spent + listing.cost_points)

    def _letter_pending(self, state: GameState, milestone: Cause) -> bool:
        if milestone not in self.pack.letter_schedule:
            return False
        return all(l.milestone != milestone.value for l in state.letters_received)

    def _apply_letter(self, state: GameState, milestone: Cause) -> GameState:
        grant = self.pack.letter_schedule[milestone]
        text = self.texts.letter_text(milestone, grant.cards, grant.template_id,
                                      state.rng_seed)
        record = LetterRecord(milestone=milestone.value, card_ids=grant.cards, text=text)
        return replace(state,
                       owned_cards=state.owned_cards | set(grant.cards),
                       letters_received=state.letters_received + (record,))

    def grant_letter(self, state: GameState, milestone: Cause) -> GameState:
        """Manually deliver a chapter's letter; normally done by adjudication."""
        if not state.handbook.chapter_complete(milestone):
            raise StateError(f"chapter {milestone.chapter_title!r} is not complete",
                             code="MILESTONE")
        if milestone not in self.pack.letter_schedule:
            raise StateError(f"pack schedules no letter for {milestone.value}",
                             code="MILESTONE")
        if not self._letter_pending(state, milestone):
            raise StateError(f"letter for {milestone.value} was already delivered",
                             code="DUPLICATE")
        return self._apply_letter(state, milestone)

    # -- generic dispatch and replay --------------------------------------------

    def apply(self, state: GameState, action: Action, at: str | None = None,
              ) -> tuple[GameState, Outcome | None]:
        """Run one logged action; the uniform entry point for service and replay."""
        if isinstance(action, ChooseCause):
            next_state, outcome = self.adjudicate_level0(
                state, self.case(action.case_id), action.choice, at=at)
            return next_state, outcome
        if isinstance(action, PlayCard):
            next_state, outcome = self.adjudicate_level1(
                state, self.case(action.case_id), action.card_id, at=at)
            return next_state, outcome
        if isinstance(action, PlayPair):
            next_state, outcome, _ = self.adjudicate_level2(
                state, self.case(action.case_id), action.card_a, action.card_b, at=at)
            return next_state, outcome
        if isinstance(action, BuyCard):
            return self.buy_card(state, action.card_id, at=at), None
        if isinstance(action, AdvanceCase):
            state = state.with_action(action, at if at is not None else _now())
            return replace(state, case_cursor=state.case_cursor + 1), None
        raise StateError(f"unknown action type {type(action).__name__}", code="ACTION")

    def replay(self, session_id: str, rng_seed: int,
               log: tuple[ActionRecord, ...]) -> GameState:
        """Rebuild a state by re-running its log; timestamps are reused, so the
        result is bit-for-bit equal to the state that produced the log."""
        state = self.initial_state(session_id, rng_seed)
        for record in log:
            state, _ = self.apply(state, record.action, at=record.at)
        return state

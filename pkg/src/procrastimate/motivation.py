"""Motivation-stat gameplay loop: a standalone simulator for rule experiments.

One session holds a scenario with a hidden true cause and a motivation
percentage starting at 20.  Each turn the player declares a cause (+5 when
right) and plays a card (+10 when its cause is right); the session is won
once motivation strictly exceeds 80.  A both-wrong turn scores 0 by default;
``floor_rule=True`` turns that into a +5 floor for variant experiments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .domain import CAUSE_ORDER, CARDS_PER_CAUSE, Cause, cause_of_card
from .errors import DomainError, StateError

START_MOTIVATION = 20
WIN_THRESHOLD = 80  # strict: 80 itself is not a win
CAUSE_BONUS = 5
CARD_BONUS = 10
_TURN_CAP = 100_000


@dataclass(frozen=True)
class MotivationStory:
    """A scenario whose true cause stays hidden from the player."""

    narrative: str
    true_cause: Cause


@dataclass(frozen=True)
class TurnRecord:
    declared_cause: Cause
    card_id: int
    delta: int


@dataclass(frozen=True)
class MotivationSession:
    story: MotivationStory
    motivation: int = START_MOTIVATION
    turn_log: tuple[TurnRecord, ...] = ()
    floor_rule: bool = False

    @property
    def turns_played(self) -> int:
        return len(self.turn_log)


DEFAULT_STORIES = (
    MotivationStory(
        "The lab report sits half open; every sentence you draft reads wrong "
        "and you close the file again.", Cause.SELF_EFFICACY),
    MotivationStory(
        "The compliance training is due and you cannot point at one thing it "
        "will ever change.", Cause.TASK_VALUE),
    MotivationStory(
        "You sat down to outline the essay and the phone has been in your "
        "hand for forty minutes.", Cause.IMPULSIVENESS),
    MotivationStory(
        "The registration portal closes in three months, which is why you "
        "have not opened it.", Cause.DISTANT_DELAY),
)


def is_won(session: MotivationSession) -> bool:
    return session.motivation > WIN_THRESHOLD


def play_turn(session: MotivationSession, declared_cause: Cause,
              card_id: int) -> MotivationSession:
    """Score one turn and append it to the log; motivation clamps at 100."""
    if is_won(session):
        raise StateError("session is already won", code="WON")
    card_cause = cause_of_card(card_id)
    delta = (CAUSE_BONUS * (declared_cause is session.story.true_cause)
             + CARD_BONUS * (card_cause is session.story.true_cause))
    if delta == 0 and session.floor_rule:
        delta = CAUSE_BONUS
    return replace(
        session,
        motivation=min(100, session.motivation + delta),
        turn_log=session.turn_log + (TurnRecord(declared_cause, card_id, delta),),
    )


# -- policies -----------------------------------------------------------------

Policy = Callable[[MotivationSession, random.Random], tuple[Cause, int]]


def _first_card_of(cause: Cause) -> int:
    return CAUSE_ORDER.index(cause) * CARDS_PER_CAUSE + 1


def _wrong_cause(cause: Cause) -> Cause:
    return CAUSE_ORDER[(CAUSE_ORDER.index(cause) + 1) % len(CAUSE_ORDER)]


def policy_perfect(session: MotivationSession, rng: random.Random) -> tuple[Cause, int]:
    true = session.story.true_cause
    return true, _first_card_of(true)


def policy_cause_only(session: MotivationSession, rng: random.Random) -> tuple[Cause, int]:
    true = session.story.true_cause
    return true, _first_card_of(_wrong_cause(true))


def policy_card_only(session: MotivationSession, rng: random.Random) -> tuple[Cause, int]:
    true = session.story.true_cause
    return _wrong_cause(true), _first_card_of(true)


def policy_random(session: MotivationSession, rng: random.Random) -> tuple[Cause, int]:
    return rng.choice(CAUSE_ORDER), rng.randint(1, 40)


POLICIES: dict[str, Policy] = {
    "perfect": policy_perfect,
    "cause-only": policy_cause_only,
    "card-only": policy_card_only,
    "random": policy_random,
}


def run_session(story: MotivationStory, policy: Policy, rng: random.Random,
                floor_rule: bool = False) -> MotivationSession:
    """Play one session to the win under a policy; returns the final session."""
    session = MotivationSession(story=story, floor_rule=floor_rule)
    while not is_won(session):
        if session.turns_played >= _TURN_CAP:
            raise StateError(f"no win after {_TURN_CAP} turns", code="STALLED")
        declared, card_id = policy(session, rng)
        session = play_turn(session, declared, card_id)
    return session


def simulate(n: int, policy_name: str, seed: int = 0,
             floor_rule: bool = False,
             stories: Sequence[MotivationStory] = DEFAULT_STORIES) -> list[int]:
    """Run ``n`` sessions and return each session's turns-to-win."""
    if n <= 0:
        raise DomainError("session count must be positive")
    try:
        policy = POLICIES[policy_name]
    except KeyError:
        known = ", ".join(sorted(POLICIES))
        raise DomainError(f"unknown policy {policy_name!r}; choose from {known}") from None
    rng = random.Random(seed)
    turns: list[int] = []
    for i in range(n):
        story = stories[i % len(stories)]
        turns.append(run_session(story, policy, rng, floor_rule).turns_played)
    return turns


def distribution(turns: Sequence[int]) -> list[tuple[int, int]]:
    """(turns, count) rows sorted by turns, for the summary table."""
    counts: dict[int, int] = {}
    for t in turns:
        counts[t] = counts.get(t, 0) + 1
    return sorted(counts.items())

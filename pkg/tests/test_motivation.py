from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procrastimate.domain import CAUSE_ORDER, Cause, cause_of_card
from procrastimate.errors import DomainError, StateError
from procrastimate.motivation import (
    CARD_BONUS,
    CAUSE_BONUS,
    DEFAULT_STORIES,
    POLICIES,
    START_MOTIVATION,
    WIN_THRESHOLD,
    MotivationSession,
    MotivationStory,
    distribution,
    is_won,
    play_turn,
    run_session,
    simulate,
)

STORY = MotivationStory(narrative="Puts off the term paper.",
                        true_cause=Cause.SELF_EFFICACY)


def test_session_starts_at_twenty():
    session = MotivationSession(story=STORY)
    assert session.motivation == START_MOTIVATION == 20
    assert session.turns_played == 0
    assert not is_won(session)


def test_turn_deltas_all_four_quadrants():
    session = MotivationSession(story=STORY)
    # right cause, right card: 5 + 10
    after = play_turn(session, Cause.SELF_EFFICACY, 1)
    assert after.motivation == 35
    assert after.turn_log[-1].delta == CAUSE_BONUS + CARD_BONUS
    # right cause, wrong card: 5
    after = play_turn(session, Cause.SELF_EFFICACY, 11)
    assert after.motivation == 25
    # wrong cause, right card: 10
    after = play_turn(session, Cause.TASK_VALUE, 1)
    assert after.motivation == 30
    # wrong on both: 0
    after = play_turn(session, Cause.TASK_VALUE, 11)
    assert after.motivation == 20
    assert after.turn_log[-1].delta == 0


def test_floor_rule_lifts_zero_to_five():
    session = MotivationSession(story=STORY, floor_rule=True)
    after = play_turn(session, Cause.TASK_VALUE, 11)
    assert after.motivation == 25
    assert after.turn_log[-1].delta == CAUSE_BONUS
    # other quadrants unchanged
    assert play_turn(session, Cause.SELF_EFFICACY, 1).motivation == 35


def test_win_threshold_is_strict():
    at_threshold = MotivationSession(story=STORY, motivation=WIN_THRESHOLD)
    assert not is_won(at_threshold)
    assert is_won(MotivationSession(story=STORY, motivation=81))


def test_highest_legal_turn_stays_under_hundred():
    # 80 is still in play; the biggest step lands on 95, inside the 100 cap
    session = MotivationSession(story=STORY, motivation=WIN_THRESHOLD)
    after = play_turn(session, Cause.SELF_EFFICACY, 1)
    assert after.motivation == 95
    assert is_won(after)


def test_won_session_refuses_more_turns():
    session = MotivationSession(story=STORY, motivation=90)
    with pytest.raises(StateError) as err:
        play_turn(session, Cause.SELF_EFFICACY, 1)
    assert err.value.code == "WON"


def test_bad_card_rejected():
    session = MotivationSession(story=STORY)
    with pytest.raises(DomainError):
        play_turn(session, Cause.SELF_EFFICACY, 41)


def test_perfect_policy_wins_in_exactly_five_turns():
    for story in DEFAULT_STORIES:
        session = run_session(story, POLICIES["perfect"], random.Random(0))
        assert is_won(session)
        assert session.turns_played == 5
        # turn four ends exactly at the threshold, not past it
        assert session.turn_log[3].delta == 15
        assert 20 + 4 * 15 == WIN_THRESHOLD


def test_cause_only_policy_takes_thirteen():
    session = run_session(STORY, POLICIES["cause-only"], random.Random(0))
    assert session.turns_played == 13
    assert all(t.delta == CAUSE_BONUS for t in session.turn_log)
    assert all(t.declared_cause is STORY.true_cause for t in session.turn_log)
    assert all(cause_of_card(t.card_id) is not STORY.true_cause
               for t in session.turn_log)


def test_card_only_policy_takes_seven():
    session = run_session(STORY, POLICIES["card-only"], random.Random(0))
    assert session.turns_played == 7
    assert all(t.delta == CARD_BONUS for t in session.turn_log)


def test_simulate_aggregates(capsys):
    results = simulate(50, "perfect", seed=3)
    assert len(results) == 50
    assert all(turns == 5 for turns in results)
    dist = distribution(results)
    assert dist == [(5, 50)]


def test_simulate_random_policy_varies():
    results = simulate(200, "random", seed=9)
    assert len(set(results)) > 1
    assert all(turns >= 5 for turns in results)  # cannot beat the optimum


def test_simulate_random_deterministic_per_seed():
    assert simulate(100, "random", seed=4) == simulate(100, "random", seed=4)
    assert simulate(100, "random", seed=4) != simulate(100, "random", seed=5)


def test_simulate_rejects_bad_arguments():
    with pytest.raises(DomainError):
        simulate(0, "perfect", seed=1)
    with pytest.raises(DomainError):
        simulate(10, "osmosis", seed=1)


def test_floor_rule_shortens_random_sessions():
    base = simulate(300, "random", seed=11, floor_rule=False)
    floored = simulate(300, "random", seed=11, floor_rule=True)
    assert sum(floored) / len(floored) <= sum(base) / len(base)


@settings(max_examples=80)
@given(cause=st.sampled_from(list(CAUSE_ORDER)),
       card=st.integers(min_value=1, max_value=40),
       motivation=st.integers(min_value=0, max_value=80),
       floor=st.booleans())
def test_delta_always_in_step_set(cause, card, motivation, floor):
    session = MotivationSession(story=STORY, motivation=motivation,
                                floor_rule=floor)
    after = play_turn(session, cause, card)
    delta = after.turn_log[-1].delta
    assert delta in {0, 5, 10, 15}
    if floor:
        assert delta >= 5
    assert after.motivation == min(100, motivation + delta)
    assert after.motivation >= session.motivation  # never punitive

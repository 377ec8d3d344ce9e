from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procrastimate.bots import perfect_play, random_play
from procrastimate.domain import (
    CAUSE_ORDER,
    AdvanceCase,
    Cause,
    Level,
    PlayPair,
)
from procrastimate.engine import (
    Result,
    RulesEngine,
    Tone,
    level1_wins,
    level2_wins,
    progression,
    rule_projection,
)
from procrastimate.errors import EconomyError, StateError

# Independent restatement of the card layout: ten consecutive ids per cause,
# in deck order.  Kept separate from cause_of_card on purpose.


def oracle_cause(card_id: int) -> Cause:
    if 1 <= card_id <= 10:
        return Cause.SELF_EFFICACY
    if 11 <= card_id <= 20:
        return Cause.TASK_VALUE
    if 21 <= card_id <= 30:
        return Cause.IMPULSIVENESS
    if 31 <= card_id <= 40:
        return Cause.DISTANT_DELAY
    raise AssertionError(card_id)


ALL_PAIRS = [frozenset(p) for p in itertools.combinations(CAUSE_ORDER, 2)]


def test_level1_predicate_full_matrix():
    for card_id in range(1, 41):
        for cause in CAUSE_ORDER:
            expected = oracle_cause(card_id) is cause
            assert level1_wins(card_id, cause) == expected, (card_id, cause)


def test_level2_predicate_full_matrix():
    for card_a, card_b in itertools.combinations(range(1, 41), 2):
        played = {oracle_cause(card_a), oracle_cause(card_b)}
        for pair in ALL_PAIRS:
            expected = played == set(pair)
            assert level2_wins(card_a, card_b, pair) == expected


def test_level2_predicate_symmetric():
    pair = frozenset({Cause.SELF_EFFICACY, Cause.TASK_VALUE})
    assert level2_wins(3, 15, pair) == level2_wins(15, 3, pair) is True


# -- helpers to reach deeper levels ------------------------------------------------

FIRST_CARD = {cause: CAUSE_ORDER.index(cause) * 10 + 1 for cause in CAUSE_ORDER}


def solve_l0(engine, state):
    for case in engine.pack.l0_cases:
        state, outcome = engine.adjudicate_level0(
            state, case, case.major_cause, at="t")
        assert outcome.result is Result.WIN
    return state


def solve_l1(engine, state):
    for cause in CAUSE_ORDER:
        for case in engine.pack.l1_cases[cause]:
            state, outcome = engine.adjudicate_level1(
                state, case, FIRST_CARD[cause], at="t")
            assert outcome.result is Result.WIN
    return state


def test_initial_state(engine, reference_pack):
    state = engine.initial_state("s1", rng_seed=3)
    assert state.current_level is Level.L0
    assert state.owned_cards == frozenset(reference_pack.starting_hand)
    assert state.points_earned == 0 and state.points_spent == 0
    assert state.action_log == ()
    state.validate()


def test_level0_win_marks_solved_without_reward(engine):
    state = engine.initial_state("s", 0)
    case = engine.pack.l0_cases[0]
    state, outcome = engine.adjudicate_level0(state, case, case.major_cause, at="t")
    assert outcome.result is Result.WIN and outcome.feedback_tone is Tone.POSITIVE
    assert case.case_id in state.solved_l0
    assert state.points_earned == 0
    assert state.owned_cards == engine.initial_state("x", 0).owned_cards
    assert [r.action.kind for r in state.action_log] == ["l0_choice"]


def test_level0_lose_allows_retry(engine):
    state = engine.initial_state("s", 0)
    case = engine.pack.l0_cases[0]
    wrong = next(c for c in CAUSE_ORDER if c is not case.major_cause)
    state, outcome = engine.adjudicate_level0(state, case, wrong, at="t")
    assert outcome.result is Result.LOSE and outcome.feedback_tone is Tone.CRITICAL
    assert case.case_id not in state.solved_l0
    state, outcome = engine.adjudicate_level0(state, case, case.major_cause, at="t")
    assert outcome.result is Result.WIN
    assert len(state.action_log) == 2


def test_level0_completion_advances_and_resets_cursor(engine):
    state = engine.initial_state("s", 0)
    state, _ = engine.apply(state, AdvanceCase(), at="t")
    assert state.case_cursor == 1
    state = solve_l0(engine, state)
    assert state.current_level is Level.L1
    assert state.case_cursor == 0


def test_solved_case_rejected(engine):
    state = engine.initial_state("s", 0)
    case = engine.pack.l0_cases[0]
    state, _ = engine.adjudicate_level0(state, case, case.major_cause, at="t")
    with pytest.raises(StateError) as err:
        engine.adjudicate_level0(state, case, case.major_cause, at="t")
    assert err.value.code == "SOLVED"


def test_wrong_level_rejected(engine):
    state = engine.initial_state("s", 0)
    l1_case = engine.pack.l1_cases[Cause.SELF_EFFICACY][0]
    with pytest.raises(StateError) as err:
        engine.adjudicate_level1(state, l1_case, 1, at="t")
    assert err.value.code == "LEVEL"
    with pytest.raises(StateError) as err:
        engine.adjudicate_level0(state, l1_case, Cause.SELF_EFFICACY, at="t")
    assert err.value.code == "LEVEL"


def test_foreign_case_rejected(engine, reference_pack):
    import dataclasses

    state = engine.initial_state("s", 0)
    alien = dataclasses.replace(reference_pack.l0_cases[0], case_id="not-here")
    with pytest.raises(StateError) as err:
        engine.adjudicate_level0(state, alien, alien.major_cause, at="t")
    assert err.value.code == "CASE"


def test_level1_win_pays_one_point_and_files_entry(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    case = engine.pack.l1_cases[Cause.TASK_VALUE][0]
    state, outcome = engine.adjudicate_level1(state, case, 12, at="t")
    assert outcome.result is Result.WIN
    assert state.points_earned == 1
    entries = state.handbook.chapters[Cause.TASK_VALUE]
    assert len(entries) == 1
    assert entries[0].card_id == 12 and entries[0].case_id == case.case_id


def test_level1_lose_leaves_state_untouched_but_logged(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    case = engine.pack.l1_cases[Cause.TASK_VALUE][0]
    state2, outcome = engine.adjudicate_level1(state, case, 1, at="t")
    assert outcome.result is Result.LOSE
    assert state2.points_earned == 0
    assert state2.handbook.total_entries() == 0
    assert len(state2.action_log) == len(state.action_log) + 1
    # retries stay open
    state3, outcome = engine.adjudicate_level1(state2, case, 12, at="t")
    assert outcome.result is Result.WIN


def test_level1_requires_owned_card(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    case = engine.pack.l1_cases[Cause.SELF_EFFICACY][0]
    with pytest.raises(StateError) as err:
        engine.adjudicate_level1(state, case, 7, at="t")  # shop card, not owned
    assert err.value.code == "CARD"


def test_chapter_completion_delivers_letter(engine, reference_pack):
    state = solve_l0(engine, engine.initial_state("s", 0))
    for case in engine.pack.l1_cases[Cause.SELF_EFFICACY]:
        state, outcome = engine.adjudicate_level1(state, case, 1, at="t")
        assert outcome.result is Result.WIN
    assert len(state.letters_received) == 1
    letter = state.letters_received[0]
    grant = reference_pack.letter_schedule[Cause.SELF_EFFICACY]
    assert letter.card_ids == grant.cards
    assert set(grant.cards) <= state.owned_cards
    assert letter.text  # presentation text rides along
    assert outcome.state_delta.letter_milestone is Cause.SELF_EFFICACY
    assert outcome.state_delta.cards_granted == grant.cards


def test_grant_letter_guards(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    with pytest.raises(StateError) as err:
        engine.grant_letter(state, Cause.SELF_EFFICACY)
    assert err.value.code == "MILESTONE"
    for case in engine.pack.l1_cases[Cause.SELF_EFFICACY]:
        state, _ = engine.adjudicate_level1(state, case, 1, at="t")
    with pytest.raises(StateError) as err:
        engine.grant_letter(state, Cause.SELF_EFFICACY)
    assert err.value.code == "DUPLICATE"


def test_buy_card_flow_and_guards(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    with pytest.raises(EconomyError) as err:
        engine.buy_card(state, 7, at="t")
    assert err.value.code == "POINTS"
    case = engine.pack.l1_cases[Cause.SELF_EFFICACY][0]
    state, _ = engine.adjudicate_level1(state, case, 1, at="t")
    assert state.points_unspent == 1
    state = engine.buy_card(state, 7, at="t")
    assert 7 in state.owned_cards
    assert state.points_spent == 1 and state.points_unspent == 0
    with pytest.raises(EconomyError) as err:
        engine.buy_card(state, 7, at="t")
    assert err.value.code == "OWNED"
    with pytest.raises(EconomyError) as err:
        engine.buy_card(state, 5, at="t")  # letter card, never listed
    assert err.value.code == "LISTING"


def test_shop_available_shrinks_after_purchase(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    before = {listing.card_id for listing in engine.shop_available(state)}
    assert len(before) == 16
    case = engine.pack.l1_cases[Cause.SELF_EFFICACY][0]
    state, _ = engine.adjudicate_level1(state, case, 1, at="t")
    state = engine.buy_card(state, 7, at="t")
    after = {listing.card_id for listing in engine.shop_available(state)}
    assert after == before - {7}


def test_level2_hand_is_handbook_not_owned(engine):
    state = solve_l1(engine, solve_l0(engine, engine.initial_state("s", 0)))
    assert state.current_level is Level.L2
    hand = engine.level2_hand(state)
    assert hand == frozenset(FIRST_CARD.values())
    assert 2 in state.owned_cards and 2 not in hand


def test_level2_win_mints_merged_card(engine):
    state = solve_l1(engine, solve_l0(engine, engine.initial_state("s", 0)))
    case = engine.pack.l2_cases[0]
    a, b = (FIRST_CARD[c] for c in sorted(case.cause_pair,
                                          key=CAUSE_ORDER.index))
    state, outcome, merged = engine.adjudicate_level2(state, case, b, a, at="t")
    assert outcome.result is Result.WIN
    assert merged is not None
    assert merged.source_ids == (min(a, b), max(a, b))
    assert case.case_id in state.solved_l2
    assert state.merged_cards[-1] == merged


def test_level2_lose_and_guards(engine):
    state = solve_l1(engine, solve_l0(engine, engine.initial_state("s", 0)))
    case = next(c for c in engine.pack.l2_cases
                if c.cause_pair == frozenset({Cause.SELF_EFFICACY,
                                              Cause.TASK_VALUE}))
    wrong_pair = (FIRST_CARD[Cause.SELF_EFFICACY],
                  FIRST_CARD[Cause.IMPULSIVENESS])
    state2, outcome, merged = engine.adjudicate_level2(
        state, case, *wrong_pair, at="t")
    assert outcome.result is Result.LOSE and merged is None
    assert state2.merged_cards == ()
    with pytest.raises(StateError) as err:
        engine.adjudicate_level2(state, case, 1, 1, at="t")
    assert err.value.code == "PAIR"
    with pytest.raises(StateError) as err:
        engine.adjudicate_level2(state, case, 1, 2, at="t")  # 2 owned, not in handbook
    assert err.value.code == "HAND"


def test_distinct_cards_same_cause_lose(engine):
    state = solve_l0(engine, engine.initial_state("s", 0))
    for cause in CAUSE_ORDER:
        cases = engine.pack.l1_cases[cause]
        # two different cards into the same chapter
        for case in cases[:3]:
            state, _ = engine.adjudicate_level1(state, case, FIRST_CARD[cause], at="t")
        for case in cases[3:]:
            state, _ = engine.adjudicate_level1(state, case, FIRST_CARD[cause] + 1,
                                                at="t")
    assert state.current_level is Level.L2
    l2 = engine.pack.l2_cases[0]
    _, outcome, merged = engine.adjudicate_level2(state, l2, 1, 2, at="t")
    assert outcome.result is Result.LOSE and merged is None


def test_full_level2_run_completes(engine):
    state = solve_l1(engine, solve_l0(engine, engine.initial_state("s", 0)))
    for case in engine.pack.l2_cases:
        a, b = (FIRST_CARD[c] for c in case.cause_pair)
        state, outcome, _ = engine.adjudicate_level2(state, case, a, b, at="t")
        assert outcome.result is Result.WIN
    assert state.current_level is Level.COMPLETED
    assert len(state.merged_cards) == 8
    with pytest.raises(StateError) as err:
        engine.adjudicate_level2(state, engine.pack.l2_cases[0], 1, 11, at="t")
    assert err.value.code in {"LEVEL", "SOLVED"}


def test_pending_cases_follow_pack_order(engine):
    state = engine.initial_state("s", 0)
    pending = engine.pending_cases(state)
    assert [c.case_id for c in pending] == [c.case_id for c in engine.pack.l0_cases]
    assert engine.current_case(state) == pending[0]
    case = engine.pack.l0_cases[0]
    state, _ = engine.adjudicate_level0(state, case, case.major_cause, at="t")
    assert engine.current_case(state).case_id == engine.pack.l0_cases[1].case_id


def test_advance_case_wraps_around(engine):
    state = engine.initial_state("s", 0)
    for _ in range(len(engine.pack.l0_cases)):
        state, _ = engine.apply(state, AdvanceCase(), at="t")
    assert engine.current_case(state).case_id == engine.pack.l0_cases[0].case_id


def test_progression_thresholds(engine):
    state = engine.initial_state("s", 0)
    assert progression(state) is Level.L0
    state = solve_l0(engine, state)
    assert progression(state) is Level.L1
    state = solve_l1(engine, state)
    assert progression(state) is Level.L2
    for case in engine.pack.l2_cases:
        a, b = (FIRST_CARD[c] for c in case.cause_pair)
        state, _, _ = engine.adjudicate_level2(state, case, a, b, at="t")
    assert progression(state) is Level.COMPLETED


def test_unknown_action_type_rejected(engine):
    state = engine.initial_state("s", 0)
    with pytest.raises(StateError) as err:
        engine.apply(state, object(), at="t")  # type: ignore[arg-type]
    assert err.value.code == "ACTION"


# -- determinism and replay --------------------------------------------------------

def test_perfect_bot_reaches_completion(engine):
    run = perfect_play(engine, session_id="bot", seed=0)
    state = run.state
    assert run.completed and not run.deadlocked
    assert state.current_level is Level.COMPLETED
    assert len(state.solved_l0) == 8
    assert len(state.solved_l1) == 24
    assert len(state.solved_l2) == 8
    assert state.points_earned == 24 and state.points_spent == 16
    assert state.owned_cards == frozenset(range(1, 41))
    assert state.handbook.all_complete()


def test_perfect_bot_transcript_deterministic(engine):
    first = perfect_play(engine, session_id="bot", seed=0)
    second = perfect_play(engine, session_id="bot", seed=0)
    assert first.transcript == second.transcript
    assert first.state == second.state


def test_replay_is_bit_for_bit(engine):
    run = perfect_play(engine, session_id="bot", seed=0)
    rebuilt = engine.replay("bot", 0, run.state.action_log)
    assert rebuilt == run.state


def test_replay_random_run(engine):
    run = random_play(engine, session_id="r", seed=1)
    rebuilt = engine.replay("r", run.state.rng_seed, run.state.action_log)
    assert rebuilt == run.state


def test_rule_projection_ignores_presentation_text(engine, reference_pack, deck):
    from procrastimate.engine import PlainTextSource

    class ShoutingTexts(PlainTextSource):
        def letter_text(self, milestone, card_ids, template_id, seed):
            return super().letter_text(milestone, card_ids, template_id, seed).upper()

        def merged_text(self, case, card_a, card_b, seed):
            title, text = super().merged_text(case, card_a, card_b, seed)
            return title.upper(), text.upper()

    loud = RulesEngine(reference_pack, deck, texts=ShoutingTexts(deck))
    a = perfect_play(engine, session_id="bot", seed=0)
    b = perfect_play(loud, session_id="bot", seed=0)
    assert a.state != b.state  # text really differs
    assert rule_projection(a.state) == rule_projection(b.state)


# -- property-based invariants ------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_random_walk_invariants(seed):
    from procrastimate.storypack import load_reference_pack

    engine = RulesEngine(load_reference_pack())
    run = random_play(engine, session_id="w", seed=seed, max_actions=300)
    state = run.state
    state.validate()
    assert frozenset(engine.pack.starting_hand) <= state.owned_cards
    assert 0 <= state.points_spent <= state.points_earned <= 24
    assert state.points_earned == len(state.solved_l1)
    for cause, entries in state.handbook.chapters.items():
        for entry in entries:
            assert oracle_cause(entry.card_id) is cause
    # monotonic growth along the log
    probe = engine.initial_state("w", seed)
    last_points, last_owned = probe.points_earned, len(probe.owned_cards)
    for record in state.action_log:
        probe, _ = engine.apply(probe, record.action, at=record.at)
        assert probe.points_earned >= last_points
        assert len(probe.owned_cards) >= last_owned
        last_points, last_owned = probe.points_earned, len(probe.owned_cards)
    assert probe == state


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1),
       data=st.data())
def test_adjudication_never_corrupts_state(seed, data):
    from procrastimate.storypack import load_reference_pack

    engine = RulesEngine(load_reference_pack())
    run = random_play(engine, session_id="w", seed=seed, max_actions=120)
    state = run.state
    if state.current_level is Level.COMPLETED:
        return
    pending = engine.pending_cases(state)
    if not pending:
        return
    case = data.draw(st.sampled_from(list(pending)))
    try:
        if case.level is Level.L0:
            choice = data.draw(st.sampled_from(list(CAUSE_ORDER)))
            next_state, _ = engine.adjudicate_level0(state, case, choice, at="t")
        elif case.level is Level.L1:
            card = data.draw(st.sampled_from(sorted(state.owned_cards)))
            next_state, _ = engine.adjudicate_level1(state, case, card, at="t")
        else:
            hand = sorted(engine.level2_hand(state))
            if len(hand) < 2:
                return
            a = data.draw(st.sampled_from(hand))
            b = data.draw(st.sampled_from(hand))
            next_state, _, _ = engine.adjudicate_level2(state, case, a, b, at="t")
    except StateError:
        return
    next_state.validate()
    assert len(next_state.action_log) == len(state.action_log) + 1

"""Headless players: a perfect-play bot and a random bot.

Both drive the engine exactly the way a human client would (no private
shortcuts into state) and emit timestamp-free transcripts, so a rerun under
the same seed produces byte-identical output.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .domain import CAUSE_ORDER, GameState, Level, cause_of_card
from .engine import Result, RulesEngine


@dataclass(frozen=True)
class BotRun:
    state: GameState
    transcript: tuple[str, ...]
    completed: bool
    deadlocked: bool


class _Clock:
    """Deterministic stand-in timestamps for logged actions."""

    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"t{self.n:05d}"


def perfect_play(engine: RulesEngine, session_id: str = "bot",
                 seed: int = 0) -> BotRun:
    """Win every case first try and buy out the shop.

    Reads the hidden answers from the pack, as an oracle player would.
    Returns early with ``deadlocked=True`` if no winning move exists, which
    on a valid pack means the pack's economy is broken.
    """
    at = _Clock()
    state = engine.initial_state(session_id, seed)
    lines = [f"pack {engine.pack.pack_id} seed {seed}"]

    for case in engine.pack.l0_cases:
        state, outcome = engine.adjudicate_level0(state, case, case.major_cause, at=at())
        lines.append(f"L0 {case.case_id}: choose {case.major_cause.value} "
                     f"-> {outcome.result.value}")

    while state.current_level is Level.L1:
        case = engine.pending_cases(state)[0]
        matching = sorted(c for c in state.owned_cards
                          if cause_of_card(c) is case.major_cause)
        if not matching:
            lines.append(f"deadlock: no owned card for {case.major_cause.value}")
            return BotRun(state, tuple(lines), completed=False, deadlocked=True)
        card = matching[0]
        state, outcome = engine.adjudicate_level1(state, case, card, at=at())
        chapter = state.handbook.chapters[case.major_cause]
        lines.append(f"L1 {case.case_id}: play {card} -> {outcome.result.value} "
                     f"(chapter {case.major_cause.value} {len(chapter)}/6)")
        delta = outcome.state_delta
        if delta.letter_milestone is not None:
            lines.append(f"letter {delta.letter_milestone.value}: "
                         f"cards {sorted(delta.cards_granted)}")

    for listing in sorted(engine.shop_available(state), key=lambda l: l.card_id):
        if state.points_unspent < listing.cost_points:
            continue
        state = engine.buy_card(state, listing.card_id, at=at())
        lines.append(f"shop: buy {listing.card_id} (cost {listing.cost_points}) "
                     f"-> {state.points_unspent} unspent")

    while state.current_level is Level.L2:
        case = engine.pending_cases(state)[0]
        hand = engine.level2_hand(state)
        pair = []
        for cause in sorted(case.cause_pair, key=CAUSE_ORDER.index):
            candidates = sorted(c for c in hand if cause_of_card(c) is cause)
            if not candidates:
                lines.append(f"deadlock: handbook holds no {cause.value} card")
                return BotRun(state, tuple(lines), completed=False, deadlocked=True)
            pair.append(candidates[0])
        state, outcome, merged = engine.adjudicate_level2(
            state, case, pair[0], pair[1], at=at())
        lines.append(f"L2 {case.case_id}: merge {pair[0]}+{pair[1]} "
                     f"-> {outcome.result.value} ({merged.generated_title})")

    completed = state.current_level is Level.COMPLETED
    lines.append(f"final: level={state.current_level.value} "
                 f"owned={len(state.owned_cards)} "
                 f"points={state.points_earned} earned/{state.points_spent} spent "
                 f"solved={len(state.solved_l0)}/{len(state.solved_l1)}"
                 f"/{len(state.solved_l2)}")
    return BotRun(state, tuple(lines), completed=completed, deadlocked=False)


def random_play(engine: RulesEngine, session_id: str = "bot-random",
                seed: int = 0, max_actions: int = 20_000) -> BotRun:
    """Flail legally until completion or the action cap.

    Every submitted action is legal for the current state, so the run
    exercises the retry rules hard; with unlimited retries it completes with
    probability approaching one well inside the default cap.
    """
    at = _Clock()
    rng = random.Random(seed)
    state = engine.initial_state(session_id, seed)
    lines = [f"pack {engine.pack.pack_id} seed {seed} (random)"]
    actions = 0

    while state.current_level is not Level.COMPLETED and actions < max_actions:
        actions += 1
        level = state.current_level
        if level is Level.L0:
            case = rng.choice(engine.pending_cases(state))
            state, _ = engine.adjudicate_level0(state, case, rng.choice(CAUSE_ORDER),
                                                at=at())
        elif level is Level.L1:
            if rng.random() < 0.1:
                affordable = [l for l in engine.shop_available(state)
                              if l.cost_points <= state.points_unspent]
                if affordable:
                    state = engine.buy_card(state, rng.choice(affordable).card_id,
                                            at=at())
                    continue
            case = rng.choice(engine.pending_cases(state))
            card = rng.choice(sorted(state.owned_cards))
            state, _ = engine.adjudicate_level1(state, case, card, at=at())
        else:
            case = rng.choice(engine.pending_cases(state))
            hand = sorted(engine.level2_hand(state))
            if len(hand) < 2:
                lines.append("deadlock: fewer than two handbook cards")
                return BotRun(state, tuple(lines), completed=False, deadlocked=True)
            card_a, card_b = rng.sample(hand, 2)
            state, _, _ = engine.adjudicate_level2(state, case, card_a, card_b,
                                                   at=at())

    completed = state.current_level is Level.COMPLETED
    lines.append(f"final: level={state.current_level.value} actions={actions} "
                 f"owned={len(state.owned_cards)} "
                 f"points={state.points_earned} earned/{state.points_spent} spent")
    return BotRun(state, tuple(lines), completed=completed, deadlocked=False)

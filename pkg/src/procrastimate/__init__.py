"""ProcrastiMate: a serious game about diagnosing and beating procrastination.

The package splits into a content layer (:mod:`~procrastimate.storypack`,
:mod:`~procrastimate.domain`), a pure rules core (:mod:`~procrastimate.engine`,
:mod:`~procrastimate.motivation`), pluggable dialogue generation
(:mod:`~procrastimate.dialogue`), persistence, and two front doors: the
``procrastimate`` CLI and the HTTP/WebSocket service in
:mod:`~procrastimate.service`.
"""

from .domain import (
    CAUSE_ORDER,
    Case,
    Cause,
    Deck,
    GameState,
    Handbook,
    Level,
    MergedCard,
    StrategyCard,
    cause_of_card,
    default_deck,
)
from .engine import Outcome, Result, RulesEngine, Tone, progression
from .errors import ProcrastimateError
from .storypack import StoryPack, load_reference_pack, parse_pack, validate_pack

__version__ = "0.1.0"

__all__ = [
    "CAUSE_ORDER",
    "Case",
    "Cause",
    "Deck",
    "GameState",
    "Handbook",
    "Level",
    "MergedCard",
    "Outcome",
    "ProcrastimateError",
    "Result",
    "RulesEngine",
    "StoryPack",
    "StrategyCard",
    "Tone",
    "cause_of_card",
    "default_deck",
    "load_reference_pack",
    "parse_pack",
    "progression",
    "validate_pack",
    "__version__",
]

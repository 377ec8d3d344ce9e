"""Story packs: the content layer of cases, NPCs, letters and economy config.

A pack file is UTF-8 JSON.  ``parse_pack`` turns a document into a fully
validated :class:`StoryPack` or raises :class:`PackError` carrying every
diagnostic found, in document order.  ``validate_pack`` re-checks an
already-constructed pack (useful after programmatic edits) and returns the
diagnostics instead of raising.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .domain import (
    CAUSE_ORDER,
    DECK_SIZE,
    Case,
    Cause,
    Level,
    MisconceptionLabel,
    NpcProfile,
    cause_of_card,
)
from .errors import DomainError, PackError

SCHEMA_VERSION = 1

CONTEXT_CLUSTERS = (
    "daily routines",
    "study tasks",
    "health and fitness",
    "self-improvement",
)

_TOP_LEVEL_FIELDS = {
    "schema_version", "pack_id", "title", "deck_ref",
    "l0", "l1", "l2", "letters", "starting_hand", "shop",
}


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: a machine code, a document path, a message."""

    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}:{self.path}:{self.message}"


@dataclass(frozen=True)
class ShopListing:
    card_id: int
    cost_points: int


@dataclass(frozen=True)
class LetterGrant:
    """Cards mailed to the player when a chapter completes."""

    cards: tuple[int, ...]
    template_id: str


@dataclass(frozen=True)
class PersonalStory:
    """A player-authored scenario, already reduced to causes by a facilitator."""

    scenario_text: str
    inferred_causes: frozenset[Cause]
    context_cluster: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "inferred_causes", frozenset(self.inferred_causes))
        if not 1 <= len(self.inferred_causes) <= 2:
            raise DomainError("a personal story names one or two causes")
        if self.context_cluster not in CONTEXT_CLUSTERS:
            raise DomainError(
                f"unknown context cluster {self.context_cluster!r}; "
                f"expected one of {', '.join(CONTEXT_CLUSTERS)}")


@dataclass(frozen=True)
class StoryPack:
    """All content one playthrough needs.  Counts and the card partition are
    checked by ``validate_pack``, not here, so packs can be built incrementally."""

    pack_id: str
    title: str
    deck_ref: str
    l0_cases: tuple[Case, ...]
    l1_cases: Mapping[Cause, tuple[Case, ...]]
    l2_cases: tuple[Case, ...]
    letter_schedule: Mapping[Cause, LetterGrant]
    starting_hand: frozenset[int]
    shop: tuple[ShopListing, ...]
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "l0_cases", tuple(self.l0_cases))
        object.__setattr__(self, "l1_cases", dict(self.l1_cases))
        object.__setattr__(self, "l2_cases", tuple(self.l2_cases))
        object.__setattr__(self, "letter_schedule", dict(self.letter_schedule))
        object.__setattr__(self, "starting_hand", frozenset(self.starting_hand))
        object.__setattr__(self, "shop", tuple(self.shop))

    def all_cases(self) -> tuple[Case, ...]:
        chained = list(self.l0_cases)
        for cause in CAUSE_ORDER:
            chained.extend(self.l1_cases.get(cause, ()))
        chained.extend(self.l2_cases)
        return tuple(chained)

    def case_by_id(self, case_id: str) -> Case:
        for case in self.all_cases():
            if case.case_id == case_id:
                return case
        raise DomainError(f"no case {case_id!r} in pack {self.pack_id!r}")

    def letter_card_ids(self) -> frozenset[int]:
        return frozenset(c for grant in self.letter_schedule.values() for c in grant.cards)

    def shop_card_ids(self) -> frozenset[int]:
        return frozenset(listing.card_id for listing in self.shop)


class _Collector:
    """Accumulates diagnostics during the parse walk."""

    def __init__(self) -> None:
        self.items: list[Diagnostic] = []

    def add(self, code: str, path: str, message: str) -> None:
        self.items.append(Diagnostic(code, path, message))

    def expect(self, obj: Mapping, key: str, kind: type | tuple, path: str) -> Any:
        if not isinstance(obj, Mapping) or key not in obj:
            self.add("SCHEMA", f"{path}.{key}", "missing required field")
            return None
        value = obj[key]
        if not isinstance(value, kind) or isinstance(value, bool):
            names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            self.add("SCHEMA", f"{path}.{key}", f"expected {names}, got {type(value).__name__}")
            return None
        return value


def _parse_npc(raw: Any, path: str, diags: _Collector) -> NpcProfile | None:
    if not isinstance(raw, Mapping):
        diags.add("SCHEMA", path, "npc must be an object")
        return None
    npc_id = diags.expect(raw, "npc_id", str, path)
    name = diags.expect(raw, "name", str, path)
    basic = diags.expect(raw, "basic_info", str, path)
    notes = raw.get("persona_notes", "")
    if npc_id is None or name is None or basic is None or not isinstance(notes, str):
        return None
    return NpcProfile(npc_id=npc_id, name=name, basic_info=basic, persona_notes=notes)


def _parse_cause(raw: Any, path: str, diags: _Collector) -> Cause | None:
    if not isinstance(raw, str):
        diags.add("SCHEMA", path, "cause must be a string")
        return None
    try:
        return Cause.from_name(raw)
    except DomainError:
        diags.add("SCHEMA", path, f"unknown cause {raw!r}")
        return None


def _parse_case(raw: Any, level: Level, path: str, diags: _Collector,
                chapter: Cause | None = None) -> Case | None:
    if not isinstance(raw, Mapping):
        diags.add("SCHEMA", path, "case must be an object")
        return None
    case_id = diags.expect(raw, "case_id", str, path)
    narrative = diags.expect(raw, "narrative", str, path)
    npc = _parse_npc(raw.get("npc"), f"{path}.npc", diags)
    if case_id is None or narrative is None or npc is None:
        return None

    major: Cause | None = None
    pair: frozenset[Cause] | None = None
    label: MisconceptionLabel | None = None
    punishment: str | None = None

    if level is Level.L0:
        raw_label = diags.expect(raw, "misconception_label", str, path)
        punishment = diags.expect(raw, "punishment", str, path)
        major = _parse_cause(raw.get("major_cause"), f"{path}.major_cause", diags)
        if raw_label is not None:
            try:
                label = MisconceptionLabel.from_name(raw_label)
            except DomainError:
                diags.add("SCHEMA", f"{path}.misconception_label",
                          f"unknown misconception label {raw_label!r}")
        if label is None or punishment is None or major is None:
            return None
    elif level is Level.L1:
        # The chapter key already names the cause; an explicit field must agree.
        if "major_cause" in raw:
            major = _parse_cause(raw["major_cause"], f"{path}.major_cause", diags)
            if major is not None and chapter is not None and major is not chapter:
                diags.add("CAUSE_MISMATCH", f"{path}.major_cause",
                          f"case {case_id!r} declares {major.value} but is filed "
                          f"under {chapter.value}")
                return None
        else:
            major = chapter
        if major is None:
            return None
    else:
        raw_pair = diags.expect(raw, "cause_pair", list, path)
        if raw_pair is None:
            return None
        causes = [_parse_cause(c, f"{path}.cause_pair[{i}]", diags)
                  for i, c in enumerate(raw_pair)]
        if any(c is None for c in causes):
            return None
        if len(causes) != 2 or causes[0] is causes[1]:
            diags.add("DUPLICATE_CAUSE", f"{path}.cause_pair",
                      f"case {case_id!r} needs exactly two distinct causes, "
                      f"got {[c.value for c in causes if c]}")
            return None
        pair = frozenset(causes)

    try:
        return Case(case_id=case_id, level=level, npc=npc, narrative=narrative,
                    misconception_label=label, punishment=punishment,
                    major_cause=major, cause_pair=pair)
    except DomainError as exc:
        diags.add("SCHEMA", path, str(exc))
        return None


def _parse_card_ids(raw: Any, path: str, diags: _Collector) -> tuple[int, ...]:
    if not isinstance(raw, list):
        diags.add("SCHEMA", path, "expected a list of card ids")
        return ()
    out: list[int] = []
    for i, value in enumerate(raw):
        if not isinstance(value, int) or isinstance(value, bool):
            diags.add("SCHEMA", f"{path}[{i}]", "card id must be an integer")
        elif not 1 <= value <= DECK_SIZE:
            diags.add("CARD_RANGE", f"{path}[{i}]",
                      f"card id {value} outside 1..{DECK_SIZE}")
        else:
            out.append(value)
    return tuple(out)


def parse_pack(document: bytes | str) -> StoryPack:
    """Parse and fully validate a pack document.

    Raises :class:`PackError` whose ``diagnostics`` list every finding; a
    malformed JSON document yields a single SYNTAX diagnostic with line and
    column.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise PackError([Diagnostic("SYNTAX", "<document>", str(exc))]) from exc
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PackError([Diagnostic(
            "SYNTAX", f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from exc

    diags = _Collector()
    if not isinstance(obj, Mapping):
        raise PackError([Diagnostic("SCHEMA", "$", "top level must be an object")])
    for key in obj:
        if key not in _TOP_LEVEL_FIELDS:
            diags.add("SCHEMA", key, "unknown top-level field")

    version = diags.expect(obj, "schema_version", int, "$")
    if version is not None and version != SCHEMA_VERSION:
        diags.add("SCHEMA", "schema_version",
                  f"unsupported schema version {version}; this build reads {SCHEMA_VERSION}")
    pack_id = diags.expect(obj, "pack_id", str, "$")
    title = diags.expect(obj, "title", str, "$")
    deck_ref = obj.get("deck_ref", "builtin:cards")
    if not isinstance(deck_ref, str):
        diags.add("SCHEMA", "deck_ref", "deck_ref must be a string")
        deck_ref = "builtin:cards"

    l0: list[Case] = []
    raw_l0 = diags.expect(obj, "l0", list, "$")
    if raw_l0 is not None:
        for i, raw_case in enumerate(raw_l0):
            case = _parse_case(raw_case, Level.L0, f"l0[{i}]", diags)
            if case is not None:
                l0.append(case)

    l1: dict[Cause, tuple[Case, ...]] = {}
    raw_l1 = diags.expect(obj, "l1", Mapping, "$")
    if raw_l1 is not None:
        for key in raw_l1:
            if _parse_cause(key, f"l1.{key}", diags) is None:
                continue
        for cause in CAUSE_ORDER:
            raw_chapter = raw_l1.get(cause.value)
            if raw_chapter is None:
                diags.add("CHAPTER_COUNT", f"l1.{cause.value}",
                          f"no cases under {cause.value}")
                continue
            if not isinstance(raw_chapter, list):
                diags.add("SCHEMA", f"l1.{cause.value}", "expected a list of cases")
                continue
            chapter_cases = []
            for i, raw_case in enumerate(raw_chapter):
                case = _parse_case(raw_case, Level.L1, f"l1.{cause.value}[{i}]",
                                   diags, chapter=cause)
                if case is not None:
                    chapter_cases.append(case)
            l1[cause] = tuple(chapter_cases)

    l2: list[Case] = []
    raw_l2 = diags.expect(obj, "l2", list, "$")
    if raw_l2 is not None:
        for i, raw_case in enumerate(raw_l2):
            case = _parse_case(raw_case, Level.L2, f"l2[{i}]", diags)
            if case is not None:
                l2.append(case)

    letters: dict[Cause, LetterGrant] = {}
    raw_letters = diags.expect(obj, "letters", Mapping, "$")
    if raw_letters is not None:
        for key, raw_grant in raw_letters.items():
            cause = _parse_cause(key, f"letters.{key}", diags)
            if cause is None:
                continue
            if not isinstance(raw_grant, Mapping):
                diags.add("SCHEMA", f"letters.{key}", "grant must be an object")
                continue
            cards = _parse_card_ids(raw_grant.get("cards"), f"letters.{key}.cards", diags)
            template_id = diags.expect(raw_grant, "template_id", str, f"letters.{key}")
            if template_id is not None:
                letters[cause] = LetterGrant(cards=cards, template_id=template_id)

    hand = frozenset(_parse_card_ids(obj.get("starting_hand"), "starting_hand", diags))

    shop: list[ShopListing] = []
    raw_shop = diags.expect(obj, "shop", list, "$")
    if raw_shop is not None:
        for i, raw_listing in enumerate(raw_shop):
            if not isinstance(raw_listing, Mapping):
                diags.add("SCHEMA", f"shop[{i}]", "listing must be an object")
                continue
            card_id = diags.expect(raw_listing, "card_id", int, f"shop[{i}]")
            cost = diags.expect(raw_listing, "cost_points", int, f"shop[{i}]")
            if card_id is None or cost is None:
                continue
            if not 1 <= card_id <= DECK_SIZE:
                diags.add("CARD_RANGE", f"shop[{i}].card_id",
                          f"card id {card_id} outside 1..{DECK_SIZE}")
                continue
            if cost < 0:
                diags.add("SCHEMA", f"shop[{i}].cost_points", "cost must be >= 0")
                continue
            shop.append(ShopListing(card_id=card_id, cost_points=cost))

    if diags.items:
        raise PackError(diags.items)

    pack = StoryPack(
        pack_id=pack_id, title=title, deck_ref=deck_ref,
        l0_cases=tuple(l0), l1_cases=l1, l2_cases=tuple(l2),
        letter_schedule=letters, starting_hand=hand, shop=tuple(shop),
        schema_version=version,
    )
    problems = validate_pack(pack)
    if problems:
        raise PackError(problems)
    return pack


def validate_pack(pack: StoryPack) -> list[Diagnostic]:
    """Check every pack invariant; return ordered diagnostics, empty if valid."""
    diags = _Collector()

    if len(pack.l0_cases) != 8:
        diags.add("L0_COUNT", "l0", f"expected 8 cases, found {len(pack.l0_cases)}")
    for cause in CAUSE_ORDER:
        count = len(pack.l1_cases.get(cause, ()))
        if count != 6:
            diags.add("CHAPTER_COUNT", f"l1.{cause.value}",
                      f"expected 6 cases under {cause.value}, found {count}")
    if len(pack.l2_cases) != 8:
        diags.add("L2_COUNT", "l2", f"expected 8 cases, found {len(pack.l2_cases)}")

    seen: dict[str, str] = {}
    for case, where in _walk_cases(pack):
        if case.case_id in seen:
            diags.add("DUPLICATE_CASE", where,
                      f"case id {case.case_id!r} already used at {seen[case.case_id]}")
        else:
            seen[case.case_id] = where
        if case.level is Level.L2 and (case.cause_pair is None or len(case.cause_pair) != 2):
            diags.add("DUPLICATE_CAUSE", where, "cause_pair must hold two distinct causes")

    for cause, cases in pack.l1_cases.items():
        for i, case in enumerate(cases):
            if case.major_cause is not cause:
                diags.add("CAUSE_MISMATCH", f"l1.{cause.value}[{i}]",
                          f"case {case.case_id!r} declares "
                          f"{case.major_cause.value if case.major_cause else None} "
                          f"but is filed under {cause.value}")

    _check_partition(pack, diags)

    hand_causes = {cause_of_card(c) for c in pack.starting_hand}
    for cause in CAUSE_ORDER:
        if cause not in hand_causes:
            diags.add("SOLVABILITY", "starting_hand",
                      f"no starting card for {cause.value}; its chapter could "
                      f"never be filled before acquisitions")

    profiles: dict[str, tuple[NpcProfile, str]] = {}
    for case, where in _walk_cases(pack):
        prior = profiles.get(case.npc.npc_id)
        if prior is None:
            profiles[case.npc.npc_id] = (case.npc, where)
        elif prior[0] != case.npc:
            diags.add("NPC_CONFLICT", where,
                      f"npc {case.npc.npc_id!r} differs from its profile at {prior[1]}")

    return diags.items


def _walk_cases(pack: StoryPack) -> Iterable[tuple[Case, str]]:
    for i, case in enumerate(pack.l0_cases):
        yield case, f"l0[{i}]"
    for cause in CAUSE_ORDER:
        for i, case in enumerate(pack.l1_cases.get(cause, ())):
            yield case, f"l1.{cause.value}[{i}]"
    for i, case in enumerate(pack.l2_cases):
        yield case, f"l2[{i}]"


def _check_partition(pack: StoryPack, diags: _Collector) -> None:
    if len(pack.starting_hand) != 16:
        diags.add("HAND_SIZE", "starting_hand",
                  f"expected 16 cards, found {len(pack.starting_hand)}")
    letter_ids: list[int] = []
    for grant in pack.letter_schedule.values():
        letter_ids.extend(grant.cards)
    shop_ids = [listing.card_id for listing in pack.shop]

    groups = {"starting_hand": sorted(pack.starting_hand),
              "letters": letter_ids, "shop": shop_ids}
    owner: dict[int, str] = {}
    for name, ids in groups.items():
        for card_id in ids:
            if card_id in owner and owner[card_id] != name:
                diags.add("CARD_PARTITION", name,
                          f"card {card_id} appears in both {owner[card_id]} and {name}")
            elif card_id in owner:
                diags.add("CARD_PARTITION", name, f"card {card_id} listed twice in {name}")
            else:
                owner[card_id] = name
    missing = sorted(set(range(1, DECK_SIZE + 1)) - set(owner))
    if missing:
        diags.add("CARD_PARTITION", "$",
                  f"cards {missing} are reachable through no channel")


def serialize_pack(pack: StoryPack) -> str:
    """Render a pack back to its document form (inverse of ``parse_pack``)."""
    def case_obj(case: Case) -> dict:
        out: dict[str, Any] = {
            "case_id": case.case_id,
            "npc": {"npc_id": case.npc.npc_id, "name": case.npc.name,
                    "basic_info": case.npc.basic_info,
                    "persona_notes": case.npc.persona_notes},
            "narrative": case.narrative,
        }
        if case.level is Level.L0:
            out["misconception_label"] = case.misconception_label.value
            out["punishment"] = case.punishment
            out["major_cause"] = case.major_cause.value
        elif case.level is Level.L2:
            out["cause_pair"] = sorted(c.value for c in case.cause_pair)
        return out

    doc = {
        "schema_version": pack.schema_version,
        "pack_id": pack.pack_id,
        "title": pack.title,
        "deck_ref": pack.deck_ref,
        "l0": [case_obj(c) for c in pack.l0_cases],
        "l1": {cause.value: [case_obj(c) for c in pack.l1_cases.get(cause, ())]
               for cause in CAUSE_ORDER},
        "l2": [case_obj(c) for c in pack.l2_cases],
        "letters": {cause.value: {"cards": list(grant.cards),
                                  "template_id": grant.template_id}
                    for cause, grant in pack.letter_schedule.items()},
        "starting_hand": sorted(pack.starting_hand),
        "shop": [{"card_id": v.card_id, "cost_points": v.cost_points} for v in pack.shop],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False)


def load_reference_pack() -> StoryPack:
    """Load the pack bundled with the package."""
    from importlib import resources

    data = resources.files("procrastimate.data").joinpath("packs/reference.json")
    return parse_pack(data.read_bytes())


def story_to_case(story: PersonalStory, index: int, rng: random.Random) -> Case:
    """Convert a personal story into an L2 case.

    One-cause stories get a second cause drawn from ``rng`` so the case meets
    the two-distinct-causes rule; the draw order is documented in
    ``customize_level2``.
    """
    causes = set(story.inferred_causes)
    if len(causes) == 1:
        others = [c for c in CAUSE_ORDER if c not in causes]
        causes.add(others[rng.randrange(len(others))])
    npc = NpcProfile(
        npc_id=f"personal-{index + 1}",
        name="You",
        basic_info=f"Player-authored story ({story.context_cluster}).",
    )
    return Case(case_id=f"personal-{index + 1}", level=Level.L2, npc=npc,
                narrative=story.scenario_text, cause_pair=frozenset(causes))


def customize_level2(personal: Sequence[PersonalStory], shared_pool: Sequence[Case],
                     seed: int) -> list[Case]:
    """Build the 8 Level-2 cases for one player.

    Personal stories come first, then the gap is filled from ``shared_pool``
    sampled without replacement.  All randomness flows from one
    ``random.Random(seed)`` stream consumed in a fixed order: first a padding
    draw for each one-cause personal story (in list order), then a partial
    Fisher-Yates shuffle of the pool indices (``randrange(i, n)`` per slot).
    Identical inputs and seed always return identical cases.
    """
    if len(personal) > 8:
        raise DomainError(f"at most 8 personal stories, got {len(personal)}")
    need = 8 - len(personal)
    if len(shared_pool) < need:
        raise PackError([Diagnostic(
            "POOL_SHORTFALL", "shared_pool",
            f"need {need} pool cases to reach 8, have {len(shared_pool)}")])

    rng = random.Random(seed)
    cases = [story_to_case(story, i, rng) for i, story in enumerate(personal)]

    indices = list(range(len(shared_pool)))
    for i in range(need):
        j = rng.randrange(i, len(indices))
        indices[i], indices[j] = indices[j], indices[i]
    cases.extend(shared_pool[indices[i]] for i in range(need))

    ids = [c.case_id for c in cases]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise PackError([Diagnostic(
            "DUPLICATE_CASE", "l2", f"customization produced duplicate ids {dupes}")])
    return cases


def personalized(pack: StoryPack, l2_cases: Sequence[Case]) -> StoryPack:
    """A copy of ``pack`` with its Level-2 cases replaced."""
    return dataclasses.replace(pack, l2_cases=tuple(l2_cases))

"""NPC dialogue: prompt templates, providers, and the engine text adapter.

Two providers ship.  :class:`StubProvider` is the default: fully offline,
and a pure function of (template, context, seed), so tests and replays are
hermetic.  :class:`RemoteProvider` posts rendered prompts to a
chat-completion endpoint configured through environment variables; any
failure there falls back to the stub and marks the response degraded.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import string
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import httpx

from .domain import Case, Cause, Deck, StrategyCard
from .engine import Outcome, Result, Tone
from .errors import DomainError, ProviderError, RenderError

log = logging.getLogger(__name__)

ENV_URL = "PROCRASTIMATE_LLM_URL"
ENV_KEY = "PROCRASTIMATE_LLM_KEY"
ENV_MODEL = "PROCRASTIMATE_LLM_MODEL"

MAX_RESPONSE_CHARS = 600

# Lowercase phrases used wherever dialogue names a cause.
CAUSE_PHRASES = {
    Cause.SELF_EFFICACY: "self-efficacy",
    Cause.TASK_VALUE: "task value",
    Cause.IMPULSIVENESS: "impulsiveness",
    Cause.DISTANT_DELAY: "distant delay",
}


class Purpose(Enum):
    FEEDBACK = "Feedback"
    LETTER = "Letter"
    MERGED_CARD = "MergedCard"
    DUAL_VOICE = "DualVoice"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    purpose: Purpose
    body: str


@dataclass(frozen=True)
class DialogueResponse:
    text: str
    tone: Tone
    provider_id: str
    latency_ms: float
    degraded: bool = False


_BUILTIN_PURPOSES = {
    "feedback_win": Purpose.FEEDBACK,
    "feedback_lose": Purpose.FEEDBACK,
    "letter_default": Purpose.LETTER,
    "merged_card": Purpose.MERGED_CARD,
    "voice_motivational": Purpose.DUAL_VOICE,
    "voice_procrastinating": Purpose.DUAL_VOICE,
}


def _infer_purpose(template_id: str) -> Purpose:
    if template_id in _BUILTIN_PURPOSES:
        return _BUILTIN_PURPOSES[template_id]
    if template_id.startswith("letter"):
        return Purpose.LETTER
    if template_id.startswith("merged"):
        return Purpose.MERGED_CARD
    if template_id.startswith("voice"):
        return Purpose.DUAL_VOICE
    return Purpose.FEEDBACK


def load_template(template_id: str, search_dir: Path | None = None) -> PromptTemplate:
    """Load a template by id, preferring ``search_dir`` over the bundled set."""
    if search_dir is not None:
        candidate = Path(search_dir) / f"{template_id}.txt"
        if candidate.is_file():
            return PromptTemplate(template_id, _infer_purpose(template_id),
                                  candidate.read_text(encoding="utf-8"))
    from importlib import resources

    resource = resources.files("procrastimate.data").joinpath(
        f"templates/{template_id}.txt")
    try:
        body = resource.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DomainError(f"no prompt template named {template_id!r}") from None
    return PromptTemplate(template_id, _infer_purpose(template_id), body)


def render_prompt(template: PromptTemplate, context: Mapping[str, object]) -> str:
    """Substitute every placeholder; unbound names are an error, extras are fine."""
    out: list[str] = []
    for literal, field_name, spec, conversion in string.Formatter().parse(template.body):
        out.append(literal)
        if field_name is None:
            continue
        if field_name not in context:
            raise RenderError(f"placeholder {{{field_name}}} is not bound",
                              placeholder=field_name)
        out.append(format(context[field_name], spec or ""))
    return "".join(out)


class DialogueProvider(Protocol):
    provider_id: str

    def generate(self, template: PromptTemplate, context: Mapping[str, str],
                 seed: int) -> str: ...


def _pick(variants: Sequence[str], template_id: str,
          context: Mapping[str, str], seed: int) -> str:
    """Deterministic variant choice: a hash over the full call signature."""
    canonical = "|".join(f"{k}={context[k]}" for k in sorted(context))
    digest = hashlib.sha256(f"{template_id}|{seed}|{canonical}".encode()).digest()
    return variants[int.from_bytes(digest[:4], "big") % len(variants)]


class StubProvider:
    """Offline provider: composes in-character lines from the bound context.

    Output depends only on (template, context, seed); no clock, no RNG state,
    no network.
    """

    provider_id = "stub"

    def generate(self, template: PromptTemplate, context: Mapping[str, str],
                 seed: int) -> str:
        context = {k: str(v) for k, v in context.items()}
        if template.purpose is Purpose.FEEDBACK:
            return self._feedback(template, context, seed)
        if template.purpose is Purpose.LETTER:
            return self._letter(template, context, seed)
        if template.purpose is Purpose.MERGED_CARD:
            return self._merged(template, context, seed)
        return self._voice(template, context, seed)

    def _feedback(self, template: PromptTemplate, ctx: Mapping[str, str],
                  seed: int) -> str:
        name = ctx.get("npc_name", "The visitor")
        card = ctx.get("card_title", "that strategy")
        causes = ctx.get("cause_names", "the real cause")
        if template.template_id.endswith("lose"):
            openers = (
                f'{name} hesitates. "I tried picturing it, but',
                f'{name} shakes their head. "I see the idea, but',
                f'{name} sighs. "Honestly,',
            )
            return (f'{_pick(openers, template.template_id, ctx, seed)} '
                    f'"{card}" does not touch what keeps me stuck. '
                    f'My problem is {causes}, and this aims somewhere else."')
        openers = (
            f'{name} brightens. "Yes,',
            f'{name} sits up. "That lands.',
            f'{name} smiles. "Finally,',
        )
        return (f'{_pick(openers, template.template_id, ctx, seed)} '
                f'"{card}" speaks straight to the {causes} that has me stuck. '
                f'I can try that today."')

    def _letter(self, template: PromptTemplate, ctx: Mapping[str, str],
                seed: int) -> str:
        chapter = ctx.get("chapter_title", "this chapter")
        titles = ctx.get("card_titles", "")
        signer = ctx.get("npc_name", "Your grateful visitors")
        openers = (
            "Dear helper, things are moving again.",
            "Dear helper, I wanted you to hear it from me first.",
            "Dear helper, small update from a less stuck life.",
        )
        return (f"{_pick(openers, template.template_id, ctx, seed)} "
                f"Finishing {chapter} changed how my week looks. "
                f"Please accept these cards as thanks: {titles}. "
                f"Warmly, {signer}.")

    def _merged(self, template: PromptTemplate, ctx: Mapping[str, str],
                seed: int) -> str:
        a = ctx.get("title_a", "First move")
        b = ctx.get("title_b", "Second move")
        joiners = ("meets", "with", "into")
        title = f"{a} {_pick(joiners, template.template_id, ctx, seed)} {b}"
        return (f"{title}\n"
                f"Chain both moves in one sitting: open with {a.lower()}, "
                f"then lock it in with {b.lower()}, so both pressures lift at once.")

    def _voice(self, template: PromptTemplate, ctx: Mapping[str, str],
               seed: int) -> str:
        card = ctx.get("card_title", "the plan")
        if template.template_id.endswith("procrastinating"):
            variants = (
                f"Or we wait. \"{card}\" will still be there tomorrow, "
                f"and tonight is so comfortable.",
                f"One more episode first. \"{card}\" works better on rested minds, "
                f"surely.",
                f"No rush. Future us loves \"{card}\"; present us loves the couch.",
            )
        else:
            variants = (
                f"We start now. One small piece of \"{card}\" and the rest follows.",
                f"Come on, ten minutes of \"{card}\" and we own this evening.",
                f"This is the moment. \"{card}\", first step, go.",
            )
        return _pick(variants, template.template_id, ctx, seed)


_TAG_RE = re.compile(r"<[^>]+>")
_MARKUP_RE = re.compile(r"[*_`#>|]")


def sanitize(text: str, limit: int = MAX_RESPONSE_CHARS) -> str:
    """Strip markup and collapse whitespace, then cap the length."""
    text = _TAG_RE.sub("", text)
    text = _MARKUP_RE.sub("", text)
    text = re.sub(r"\s+", " ", text).strip()
    if len(text) > limit:
        # ellipsis counts against the cap
        text = text[:limit - 3].rsplit(" ", 1)[0].rstrip() + "..."
    return text


class RemoteProvider:
    """Chat-completion HTTP adapter.

    Configuration comes from arguments or the PROCRASTIMATE_LLM_URL,
    PROCRASTIMATE_LLM_KEY and PROCRASTIMATE_LLM_MODEL environment variables.
    Responses are sanitized before display; any transport or payload problem
    raises :class:`ProviderError` so callers can fall back to the stub.
    """

    provider_id = "remote"

    def __init__(self, url: str | None = None, api_key: str | None = None,
                 model: str | None = None, timeout: float = 10.0,
                 client: Optional[httpx.Client] = None):
        self.url = url or os.environ.get(ENV_URL, "")
        self.api_key = api_key or os.environ.get(ENV_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.timeout = timeout
        self._client = client

    def generate(self, template: PromptTemplate, context: Mapping[str, str],
                 seed: int) -> str:
        if not self.url:
            raise ProviderError(f"no endpoint configured; set {ENV_URL}")
        prompt = render_prompt(template, context)
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "seed": seed,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        log.info("remote dialogue request template=%s model=%s url=%s key=<redacted>",
                 template.template_id, self.model, self.url)
        try:
            if self._client is not None:
                response = self._client.post(self.url, json=payload, headers=headers,
                                             timeout=self.timeout)
            else:
                response = httpx.post(self.url, json=payload, headers=headers,
                                      timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"remote dialogue failed: {exc}") from exc
        if not isinstance(text, str) or not text.strip():
            raise ProviderError("remote dialogue returned an empty message")
        log.info("remote dialogue response template=%s chars=%d",
                 template.template_id, len(text))
        return sanitize(text)


def get_provider(name: str) -> DialogueProvider:
    if name == "stub":
        return StubProvider()
    if name == "remote":
        return RemoteProvider()
    raise DomainError(f"unknown dialogue provider {name!r}; use stub or remote")


def _cause_names(case: Case) -> str:
    if case.cause_pair is not None:
        return " and ".join(sorted(CAUSE_PHRASES[c] for c in case.cause_pair))
    return CAUSE_PHRASES[case.major_cause]


def _call(provider: DialogueProvider, template: PromptTemplate,
          context: Mapping[str, str], seed: int,
          tone: Tone) -> DialogueResponse:
    """Invoke a provider; on failure, answer from the stub flagged degraded."""
    start = time.perf_counter()
    try:
        text = provider.generate(template, context, seed)
        degraded = False
        provider_id = provider.provider_id
    except ProviderError as exc:
        log.warning("falling back to stub: %s", exc)
        text = StubProvider().generate(template, context, seed)
        degraded = True
        provider_id = "stub"
    latency = (time.perf_counter() - start) * 1000.0
    return DialogueResponse(text=text, tone=tone, provider_id=provider_id,
                            latency_ms=latency, degraded=degraded)


def generate_feedback(provider: DialogueProvider, state, case: Case,
                      played_cards: Sequence[StrategyCard], outcome: Outcome,
                      template_dir: Path | None = None,
                      choice: Cause | None = None) -> DialogueResponse:
    """NPC reaction to an adjudication; tone always mirrors the result.

    Level-0 quizzes play no card; pass the chosen ``choice`` instead and the
    suggestion type stands in for the card title.
    """
    won = outcome.result is Result.WIN
    template = load_template("feedback_win" if won else "feedback_lose", template_dir)
    if played_cards:
        card_title = " and ".join(f"{c.title}" for c in played_cards)
        card_text = " ".join(c.explanation for c in played_cards)
    elif choice is not None:
        card_title = choice.chapter_title
        card_text = f"Suggestions of the {choice.chapter_title} type."
    else:
        card_title = "that idea"
        card_text = ""
    context = {
        "npc_name": case.npc.name,
        "npc_basic_info": case.npc.basic_info,
        "npc_persona": case.npc.persona_notes,
        "case_narrative": case.narrative,
        "card_title": card_title,
        "card_text": card_text,
        "cause_names": _cause_names(case),
    }
    seed = getattr(state, "rng_seed", 0)
    return _call(provider, template, context, seed, outcome.feedback_tone)


def generate_letter(provider: DialogueProvider, milestone: Cause,
                    granted_cards: Sequence[StrategyCard], seed: int = 0,
                    template_id: str = "letter_default",
                    template_dir: Path | None = None,
                    npc_name: str = "Your grateful visitors") -> DialogueResponse:
    """Thank-you letter for a completed chapter, naming every granted card."""
    if not granted_cards:
        raise DomainError("a letter must grant at least one card")
    template = load_template(template_id, template_dir)
    context = {
        "npc_name": npc_name,
        "npc_basic_info": "",
        "chapter_title": milestone.chapter_title,
        "card_titles": ", ".join(c.title for c in granted_cards),
    }
    return _call(provider, template, context, seed, Tone.POSITIVE)


def generate_merged_text(provider: DialogueProvider, card_a: StrategyCard,
                         card_b: StrategyCard, case: Case, seed: int = 0,
                         template_dir: Path | None = None) -> tuple[str, str]:
    """Title and body for a merged card; symmetric in the two sources."""
    if card_a.id == card_b.id:
        raise DomainError("merged text requires two distinct cards")
    if card_b.id < card_a.id:  # canonical order makes (a, b) == (b, a)
        card_a, card_b = card_b, card_a
    template = load_template("merged_card", template_dir)
    context = {
        "title_a": card_a.title,
        "text_a": card_a.explanation,
        "title_b": card_b.title,
        "text_b": card_b.explanation,
        "cause_names": _cause_names(case),
        "case_narrative": case.narrative,
    }
    response = _call(provider, template, context, seed, Tone.POSITIVE)
    first, _, rest = response.text.partition("\n")
    title = first.strip() or f"{card_a.title} with {card_b.title}"
    text = rest.strip() or response.text
    return title, text


def generate_inner_voice(provider: DialogueProvider, voice: str, narrative: str,
                         motivation: int, declared_cause: Cause, card_title: str,
                         seed: int = 0,
                         template_dir: Path | None = None) -> DialogueResponse:
    """One line from the motivational or the procrastinating mind."""
    if voice not in ("motivational", "procrastinating"):
        raise DomainError(f"unknown inner voice {voice!r}")
    template = load_template(f"voice_{voice}", template_dir)
    context = {
        "case_narrative": narrative,
        "motivation": str(motivation),
        "declared_cause": CAUSE_PHRASES[declared_cause],
        "card_title": card_title,
    }
    tone = Tone.POSITIVE if voice == "motivational" else Tone.CRITICAL
    return _call(provider, template, context, seed, tone)


class ProviderTextSource:
    """Adapter giving the rules engine narrative text from a dialogue provider."""

    def __init__(self, provider: DialogueProvider, deck: Deck,
                 template_dir: Path | None = None):
        self.provider = provider
        self.deck = deck
        self.template_dir = template_dir

    def letter_text(self, milestone: Cause, card_ids: tuple[int, ...],
                    template_id: str, seed: int) -> str:
        cards = [self.deck[c] for c in card_ids]
        return generate_letter(self.provider, milestone, cards, seed,
                               template_id=template_id,
                               template_dir=self.template_dir).text

    def merged_text(self, case: Case, card_a: int, card_b: int,
                    seed: int) -> tuple[str, str]:
        return generate_merged_text(self.provider, self.deck[card_a],
                                    self.deck[card_b], case, seed,
                                    template_dir=self.template_dir)

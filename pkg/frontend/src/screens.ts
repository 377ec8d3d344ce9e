import { toneClass } from "./tone";
import type {
  CaseView,
  CauseName,
  DeckCard,
  DialoguePayload,
  OutcomePayload,
  SessionView,
} from "./types";

export interface Handlers {
  chooseCause(caseId: string, cause: CauseName): void;
  playCard(caseId: string, cardId: number): void;
  playPair(caseId: string, cardA: number, cardB: number): void;
  buyCard(cardId: number): void;
  advanceCase(): void;
}

export type DeckIndex = Map<number, DeckCard>;

const CAUSE_KEYS: CauseName[] = ["SelfEfficacy", "TaskValue", "Impulsiveness", "DistantDelay"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function cardTitle(deck: DeckIndex, id: number): string {
  const card = deck.get(id);
  return card ? `${id}. ${card.title}` : `card ${id}`;
}

// Two-slot Level-2 selection. Kept outside the render tree so a re-render
// after an error does not forget the player's picks.
export class PairSelection {
  private picks: number[] = [];

  get current(): number[] {
    return [...this.picks];
  }

  /** Returns an error string when the pick is blocked locally. */
  toggle(cardId: number): string | null {
    const at = this.picks.indexOf(cardId);
    if (at >= 0) {
      this.picks.splice(at, 1);
      return null;
    }
    if (this.picks.length >= 2) return "pair is full; deselect one first";
    this.picks.push(cardId);
    return null;
  }

  /** The submit guard: same card twice can never leave the client. */
  ready(): boolean {
    return this.picks.length === 2 && this.picks[0] !== this.picks[1];
  }

  clear(): void {
    this.picks = [];
  }
}

function npcHeader(caseView: CaseView): HTMLElement {
  const head = el("div", "npc");
  head.appendChild(el("span", "npc-name", caseView.npc.name));
  head.appendChild(el("span", "npc-info", caseView.npc.basic_info));
  return head;
}

function renderQuiz(caseView: CaseView, handlers: Handlers): HTMLElement {
  const screen = el("section", "screen screen-l0");
  screen.appendChild(npcHeader(caseView));
  screen.appendChild(el("p", "narrative", caseView.narrative));
  if (caseView.misconception_label) {
    screen.appendChild(el("p", "label",
      `Filed under: ${caseView.misconception_label}`));
  }
  if (caseView.punishment) {
    screen.appendChild(el("p", "punishment", caseView.punishment));
  }
  const options = el("div", "options");
  for (const option of caseView.options ?? []) {
    const button = el("button", "option", option.title);
    button.dataset.cause = option.cause;
    button.onclick = () => handlers.chooseCause(caseView.case_id, option.cause);
    options.appendChild(button);
  }
  screen.appendChild(options);
  return screen;
}

function renderLevel1(view: SessionView, caseView: CaseView, deck: DeckIndex,
                      handlers: Handlers): HTMLElement {
  const screen = el("section", "screen screen-l1");
  screen.appendChild(npcHeader(caseView));
  screen.appendChild(el("p", "narrative", caseView.narrative));
  screen.appendChild(el("p", "label", `Major cause: ${caseView.chapter_title}`));
  const hand = el("div", "hand");
  for (const cardId of view.hand) {
    const button = el("button", "card", cardTitle(deck, cardId));
    button.dataset.cardId = String(cardId);
    button.onclick = () => handlers.playCard(caseView.case_id, cardId);
    hand.appendChild(button);
  }
  screen.appendChild(hand);
  return screen;
}

function renderLevel2(view: SessionView, caseView: CaseView, deck: DeckIndex,
                      handlers: Handlers, selection: PairSelection): HTMLElement {
  const screen = el("section", "screen screen-l2");
  screen.appendChild(npcHeader(caseView));
  screen.appendChild(el("p", "narrative", caseView.narrative));
  const note = el("p", "pair-note", "");
  const slots = el("div", "pair-slots");
  const redraw = () => {
    slots.textContent = "";
    const picks = selection.current;
    for (const n of [0, 1]) {
      const slot = el("span", "pair-slot",
        picks[n] === undefined ? "empty" : cardTitle(deck, picks[n]));
      slots.appendChild(slot);
    }
    submit.disabled = !selection.ready();
    for (const button of Array.from(hand.children) as HTMLButtonElement[]) {
      button.classList.toggle("selected",
        picks.includes(Number(button.dataset.cardId)));
    }
  };
  const hand = el("div", "hand hand-handbook");
  for (const cardId of view.hand) {
    const button = el("button", "card", cardTitle(deck, cardId));
    button.dataset.cardId = String(cardId);
    button.onclick = () => {
      const blocked = selection.toggle(cardId);
      note.textContent = blocked ?? "";
      redraw();
    };
    hand.appendChild(button);
  }
  const submit = el("button", "merge-submit", "Merge and play");
  submit.onclick = () => {
    if (!selection.ready()) return; // local block, nothing leaves the client
    const [a, b] = selection.current;
    handlers.playPair(caseView.case_id, a, b);
  };
  screen.appendChild(slots);
  screen.appendChild(note);
  screen.appendChild(hand);
  screen.appendChild(submit);
  redraw();
  return screen;
}

function renderHandbook(view: SessionView, deck: DeckIndex): HTMLElement {
  const book = el("aside", "handbook");
  book.appendChild(el("h2", "handbook-title", "Management Handbook"));
  for (const cause of CAUSE_KEYS) {
    const chapter = view.handbook[cause];
    const box = el("div", `chapter${chapter.complete ? " chapter-complete" : ""}`);
    box.dataset.cause = cause;
    box.appendChild(el("h3", "chapter-title",
      `${chapter.title} (${chapter.entries.length}/6)`));
    const slots = el("ol", "chapter-slots");
    for (let i = 0; i < 6; i++) {
      const entry = chapter.entries[i];
      slots.appendChild(el("li", entry ? "slot slot-filled" : "slot slot-empty",
        entry ? cardTitle(deck, entry.card_id) : "—"));
    }
    box.appendChild(slots);
    book.appendChild(box);
  }
  return book;
}

function renderShop(view: SessionView, deck: DeckIndex, handlers: Handlers): HTMLElement {
  const shop = el("div", "shop");
  shop.appendChild(el("h3", "shop-title",
    `Shop (${view.points.unspent} points to spend)`));
  for (const listing of view.shop) {
    const row = el("button", "shop-item",
      `${cardTitle(deck, listing.card_id)} — ${listing.cost_points}p`);
    row.disabled = view.points.unspent < listing.cost_points;
    row.onclick = () => handlers.buyCard(listing.card_id);
    shop.appendChild(row);
  }
  return shop;
}

function renderExtras(view: SessionView): HTMLElement {
  const extras = el("div", "extras");
  if (view.letters.length > 0) {
    const letters = el("div", "letters");
    letters.appendChild(el("h3", "", "Letters"));
    for (const letter of view.letters) {
      letters.appendChild(el("p", "letter", letter.text));
    }
    extras.appendChild(letters);
  }
  if (view.merged_cards.length > 0) {
    const merged = el("div", "merged");
    merged.appendChild(el("h3", "", "Merged cards"));
    for (const card of view.merged_cards) {
      const box = el("div", "merged-card");
      box.appendChild(el("strong", "merged-title", card.title));
      box.appendChild(el("p", "merged-text", card.text));
      merged.appendChild(box);
    }
    extras.appendChild(merged);
  }
  return extras;
}

export function renderApp(root: HTMLElement, view: SessionView, deck: DeckIndex,
                          handlers: Handlers, selection: PairSelection): void {
  root.textContent = "";
  const header = el("header", "status");
  header.appendChild(el("span", "status-level", `Level: ${view.level}`));
  header.appendChild(el("span", "status-points",
    `Points: ${view.points.unspent} (earned ${view.points.earned})`));
  header.appendChild(el("span", "status-cards",
    `Cards: ${view.owned_cards.length}/40`));
  root.appendChild(header);

  const main = el("main", "main");
  const caseView = view.current_case;
  if (view.completed) {
    const done = el("section", "screen screen-done");
    done.appendChild(el("h2", "", "All cases solved"));
    done.appendChild(el("p", "",
      `${view.solved.l0.length} diagnoses, ${view.solved.l1.length} treatments, ` +
      `${view.solved.l2.length} merges.`));
    main.appendChild(done);
  } else if (caseView === null) {
    main.appendChild(el("p", "empty", "No pending case."));
  } else if (caseView.level === "L0") {
    main.appendChild(renderQuiz(caseView, handlers));
  } else if (caseView.level === "L1") {
    main.appendChild(renderLevel1(view, caseView, deck, handlers));
  } else {
    main.appendChild(renderLevel2(view, caseView, deck, handlers, selection));
  }

  const skip = el("button", "advance", "Next case");
  skip.disabled = view.completed || caseView === null;
  skip.onclick = () => handlers.advanceCase();
  main.appendChild(skip);

  if (view.level === "L1") main.appendChild(renderShop(view, deck, handlers));
  main.appendChild(renderExtras(view));
  root.appendChild(main);
  root.appendChild(renderHandbook(view, deck));
}

/** Feedback bubble plus outcome badge; text and verdict come from the server. */
export function renderFeedback(container: HTMLElement,
                               dialogue: DialoguePayload | null,
                               outcome: OutcomePayload | null): void {
  if (dialogue === null) return;
  const bubble = el("div", toneClass(dialogue.tone));
  bubble.appendChild(el("p", "feedback-text", dialogue.text));
  if (outcome !== null) {
    bubble.appendChild(el("span", "outcome-badge", outcome.result));
  }
  if (dialogue.degraded) {
    bubble.appendChild(el("span", "degraded", "offline reply"));
  }
  container.appendChild(bubble);
  while (container.children.length > 8) {
    container.removeChild(container.firstChild as Node);
  }
}

export function showToast(container: HTMLElement, code: string, message: string): void {
  const toast = el("div", "toast", `${code}: ${message}`);
  container.appendChild(toast);
  setTimeout(() => toast.remove(), 4000);
}

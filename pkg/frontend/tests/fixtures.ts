import type {
  CaseView,
  CauseName,
  DeckCard,
  HandbookChapterView,
  SessionView,
} from "../src/types";
import type { DeckIndex } from "../src/screens";

export function makeDeck(): DeckIndex {
  const causes: CauseName[] = ["SelfEfficacy", "TaskValue", "Impulsiveness", "DistantDelay"];
  const cards: DeckCard[] = [];
  for (let id = 1; id <= 40; id++) {
    cards.push({
      id,
      title: `Strategy ${id}`,
      explanation: `What strategy ${id} does.`,
      utility: `When ${id} helps.`,
      cause: causes[Math.floor((id - 1) / 10)],
    });
  }
  return new Map(cards.map((c) => [c.id, c]));
}

function emptyChapter(title: string): HandbookChapterView {
  return { title, entries: [], complete: false };
}

export function baseView(overrides: Partial<SessionView> = {}): SessionView {
  return {
    session_id: "test-session",
    pack_id: "reference",
    level: "L0",
    points: { earned: 0, spent: 0, unspent: 0 },
    owned_cards: [1, 2, 3, 4, 11, 12, 13, 14, 21, 22, 23, 24, 31, 32, 33, 34],
    hand: [],
    current_case: null,
    pending_count: 8,
    handbook: {
      SelfEfficacy: emptyChapter("Improve Self-efficacy"),
      TaskValue: emptyChapter("Embrace Task Value"),
      Impulsiveness: emptyChapter("Control Impulsiveness"),
      DistantDelay: emptyChapter("Adjust Distant Delay"),
    },
    letters: [],
    merged_cards: [],
    shop: [{ card_id: 7, cost_points: 1 }],
    solved: { l0: [], l1: [], l2: [] },
    completed: false,
    action_count: 0,
    ...overrides,
  };
}

export function quizCase(): CaseView {
  return {
    case_id: "l0-demo",
    level: "L0",
    npc: { npc_id: "demo", name: "Demo", basic_info: "A first case.", persona_notes: "" },
    narrative: "Keeps shelving the assignment.",
    misconception_label: "Laziness",
    punishment: "Public warning posted.",
    options: [
      { cause: "SelfEfficacy", title: "Improve Self-efficacy" },
      { cause: "TaskValue", title: "Embrace Task Value" },
      { cause: "Impulsiveness", title: "Control Impulsiveness" },
      { cause: "DistantDelay", title: "Adjust Distant Delay" },
    ],
  };
}

export function level1Case(): CaseView {
  return {
    case_id: "l1-demo",
    level: "L1",
    npc: { npc_id: "lin", name: "Lin", basic_info: "Design student.", persona_notes: "" },
    narrative: "Stalls on the bridge model.",
    major_cause: "SelfEfficacy",
    chapter_title: "Improve Self-efficacy",
  };
}

export function level2Case(): CaseView {
  return {
    case_id: "l2-demo",
    level: "L2",
    npc: { npc_id: "lin", name: "Lin", basic_info: "Design student.", persona_notes: "" },
    narrative: "Two causes at once now.",
  };
}

// Mirrors of the session-service JSON payloads. The client renders only
// what these carry; hidden fields (quiz answers, unsolved pair causes)
// simply never arrive.

export type CauseName = "SelfEfficacy" | "TaskValue" | "Impulsiveness" | "DistantDelay";
export type LevelName = "L0" | "L1" | "L2" | "Completed";
export type ToneName = "Positive" | "Critical";
export type ResultName = "Win" | "Lose";

export interface NpcView {
  npc_id: string;
  name: string;
  basic_info: string;
  persona_notes: string;
}

export interface CaseView {
  case_id: string;
  level: LevelName;
  npc: NpcView;
  narrative: string;
  // L0 only
  misconception_label?: string;
  punishment?: string;
  options?: { cause: CauseName; title: string }[];
  // L1 only (L0 gets major_cause after solving, which we never render)
  major_cause?: CauseName;
  chapter_title?: string;
  // solved L2 only
  cause_pair?: CauseName[];
}

export interface HandbookChapterView {
  title: string;
  entries: { case_id: string; card_id: number }[];
  complete: boolean;
}

export interface LetterView {
  milestone: string;
  card_ids: number[];
  text: string;
}

export interface MergedCardView {
  case_id: string;
  source_ids: number[];
  title: string;
  text: string;
}

export interface ShopListingView {
  card_id: number;
  cost_points: number;
}

export interface SessionView {
  session_id: string;
  pack_id: string;
  level: LevelName;
  points: { earned: number; spent: number; unspent: number };
  owned_cards: number[];
  hand: number[];
  current_case: CaseView | null;
  pending_count: number;
  handbook: Record<CauseName, HandbookChapterView>;
  letters: LetterView[];
  merged_cards: MergedCardView[];
  shop: ShopListingView[];
  solved: { l0: string[]; l1: string[]; l2: string[] };
  completed: boolean;
  action_count: number;
}

export interface OutcomePayload {
  result: ResultName;
  tone: ToneName;
  delta: {
    solved_case_id: string | null;
    handbook_entry: { case_id: string; card_id: number } | null;
    points_awarded: number;
    letter_milestone: string | null;
    cards_granted: number[];
    merged_case_id: string | null;
    purchased_card: number | null;
    level_advance: string | null;
  };
}

export interface DialoguePayload {
  text: string;
  tone: ToneName;
  provider_id: string;
  latency_ms: number;
  degraded: boolean;
}

export interface ActionResponse {
  view: SessionView;
  outcome: OutcomePayload | null;
  dialogue: DialoguePayload | null;
}

export interface EventFrame {
  view: SessionView;
  dialogue: DialoguePayload | null;
}

export interface DeckCard {
  id: number;
  title: string;
  explanation: string;
  utility: string;
  cause: CauseName;
}

export interface PackSummary {
  pack_id: string;
  title: string;
  cases: { l0: number; l1: number; l2: number };
}

export type Action =
  | { kind: "l0_choice"; case_id: string; choice: CauseName }
  | { kind: "play_card"; case_id: string; card_id: number }
  | { kind: "play_pair"; case_id: string; card_a: number; card_b: number }
  | { kind: "buy_card"; card_id: number }
  | { kind: "advance_case" };

export interface ApiError {
  status: number;
  code: string;
  message: string;
}

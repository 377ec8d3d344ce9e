import { ApiClient, RejectedActionError } from "./api";
import { PairSelection, renderApp, renderFeedback, showToast } from "./screens";
import type { DeckIndex, Handlers } from "./screens";
import type { Action, SessionView } from "./types";
import { EventFeed, eventsUrl } from "./ws";

const SESSION_KEY = "procrastimate.session";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const feedbackLog = document.getElementById("feedback-log");
  const toasts = document.getElementById("toasts");
  if (!root || !feedbackLog || !toasts) throw new Error("index.html shell missing");

  const api = new ApiClient(window.location.origin);
  const deck: DeckIndex = new Map((await api.getDeck()).map((c) => [c.id, c]));
  const selection = new PairSelection();

  let view: SessionView;
  const remembered = window.localStorage.getItem(SESSION_KEY);
  if (remembered) {
    try {
      view = await api.getSession(remembered);
    } catch {
      view = await freshSession(api);
    }
  } else {
    view = await freshSession(api);
  }

  const redraw = () => renderApp(root, view, deck, handlers, selection);

  const submit = async (action: Action) => {
    try {
      const response = await api.submitAction(view.session_id, action);
      view = response.view;
      if (action.kind === "play_pair" && response.outcome?.result === "Win") {
        selection.clear();
      }
      renderFeedback(feedbackLog, response.dialogue, response.outcome);
      redraw();
    } catch (err) {
      if (err instanceof RejectedActionError) {
        showToast(toasts, err.code, err.message);
      } else {
        showToast(toasts, "NETWORK", String(err));
      }
    }
  };

  const handlers: Handlers = {
    chooseCause: (caseId, cause) => void submit({ kind: "l0_choice", case_id: caseId, choice: cause }),
    playCard: (caseId, cardId) => void submit({ kind: "play_card", case_id: caseId, card_id: cardId }),
    playPair: (caseId, a, b) => void submit({ kind: "play_pair", case_id: caseId, card_a: a, card_b: b }),
    buyCard: (cardId) => void submit({ kind: "buy_card", card_id: cardId }),
    advanceCase: () => void submit({ kind: "advance_case" }),
  };

  const feed = new EventFeed(eventsUrl(api.baseUrl, view.session_id), {
    onFrame: (frame) => {
      // frames from other tabs keep this one honest
      if (frame.view.action_count > view.action_count) {
        view = frame.view;
        redraw();
      }
    },
    onReconnect: () => {
      void api.getSession(view.session_id).then((fresh) => {
        view = fresh;
        redraw();
      });
    },
  });
  feed.start();
  redraw();
}

async function freshSession(api: ApiClient): Promise<SessionView> {
  const created = await api.createSession();
  window.localStorage.setItem(SESSION_KEY, created.session_id);
  return created.view;
}

void boot();

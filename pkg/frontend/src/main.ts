// Wires the websocket stream, the state fold, and the DOM together.

import { decode, messages } from "./protocol.js";
import {
  applyServerEvent,
  canSubmit,
  initialView,
  markShared,
  markSubmitted,
  toggleWord,
  type ClientSessionView,
} from "./state.js";
import { render, type UICallbacks } from "./ui.js";

const LEADERBOARD_REFRESH_MS = 10_000;

function serverBase(): { ws: string; http: string } {
  const host = location.hostname || "127.0.0.1";
  const port = new URLSearchParams(location.search).get("port") ?? "8765";
  return { ws: `ws://${host}:${port}`, http: `http://${host}:${port}` };
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const base = serverBase();
  let view: ClientSessionView = initialView();
  let socket: WebSocket | null = null;
  let sentHello = false;

  const update = (next: ClientSessionView) => {
    view = next;
    render(root, view, callbacks);
  };

  const send = (frame: string) => {
    if (socket && socket.readyState === WebSocket.OPEN) socket.send(frame);
  };

  const ensureConnection = (alias: string, after: () => void) => {
    if (socket && socket.readyState === WebSocket.OPEN) {
      after();
      return;
    }
    socket = new WebSocket(base.ws);
    socket.addEventListener("open", () => {
      send(messages.hello(alias));
      sentHello = true;
      after();
    });
    socket.addEventListener("message", (event) => {
      update(applyServerEvent(view, decode(String(event.data))));
    });
    socket.addEventListener("close", () => {
      socket = null;
      sentHello = false;
      update({ ...initialView(), alias: view.alias, abandonedReason: "disconnected" });
    });
  };

  const callbacks: UICallbacks = {
    onToggleWord: (word) => update(toggleWord(view, word)),
    onSubmitSelection: () => {
      if (!canSubmit(view) || !view.sessionId) return;
      send(messages.submitSelection(view.sessionId, view.roundNo, view.selection));
      update(markSubmitted(view));
    },
    onShare: (word) => {
      if (!view.sessionId) return;
      send(messages.shareWord(view.sessionId, view.roundNo, word));
      update(markShared(view));
    },
    onJoinQueue: (alias) => {
      ensureConnection(alias, () => {
        send(messages.joinQueue());
        update({ ...view, alias, phase: "waiting" });
      });
    },
    onJoinTag: (alias, tag) => {
      if (!tag) return;
      ensureConnection(alias, () => {
        send(messages.joinTag(tag));
        update({ ...view, alias, phase: "waiting" });
      });
    },
    onQuestionnaire: (kind, items) => {
      if (view.sessionId) send(messages.questionnaire(kind, view.sessionId, items));
    },
    onFeedback: (ratings, comment) => send(messages.feedback(ratings, comment)),
    onBackToLobby: () => update({ ...view, phase: "lobby", sessionId: null }),
    fetchDefinition: async (word) => {
      try {
        const resp = await fetch(`${base.http}/define?word=${encodeURIComponent(word)}`);
        return resp.ok ? await resp.text() : null;
      } catch {
        return null;
      }
    },
  };

  setInterval(() => {
    if (sentHello && view.phase === "lobby") send(messages.getLeaderboard());
  }, LEADERBOARD_REFRESH_MS);

  update(view);
}

start();

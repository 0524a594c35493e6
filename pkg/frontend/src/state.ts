// Client session state: a pure fold over received server events plus local
// selection input. All scoring is server-authoritative; this module never
// computes points and never reorders the server-provided matrix.

import type { LeaderboardEntry, RoundResultMsg, ServerMessage } from "./protocol.js";

export type Phase =
  | "lobby"       // identified, not in a session
  | "waiting"     // queued or parked under a tag
  | "selecting"   // round in progress, picking words
  | "submitted"   // own selection sent, partner pending
  | "result"      // round result shown, share step open
  | "shared"      // own share sent, partner pending
  | "done";       // session completed, questionnaire screen

export interface ClientSessionView {
  phase: Phase;
  playerId: string | null;
  alias: string;
  sessionId: string | null;
  partnerAlias: string | null;
  roundNo: number;
  theme: string | null;
  keyword: string | null;
  matrix: string[];
  quota: number;
  selection: string[];
  lastResult: RoundResultMsg | null;
  partnerShared: string | null;
  total: number;
  streak: number;
  finalTotal: number | null;
  leaderboardRank: number | null;
  abandonedReason: string | null;
  leaderboard: LeaderboardEntry[];
  lastError: { code: string; message: string } | null;
}

export function initialView(): ClientSessionView {
  return {
    phase: "lobby",
    playerId: null,
    alias: "",
    sessionId: null,
    partnerAlias: null,
    roundNo: 0,
    theme: null,
    keyword: null,
    matrix: [],
    quota: 0,
    selection: [],
    lastResult: null,
    partnerShared: null,
    total: 0,
    streak: 0,
    finalTotal: null,
    leaderboardRank: null,
    abandonedReason: null,
    leaderboard: [],
    lastError: null,
  };
}

export function applyServerEvent(view: ClientSessionView, msg: ServerMessage): ClientSessionView {
  switch (msg.type) {
    case "welcome":
      return { ...view, phase: "lobby", playerId: msg.player_id, alias: msg.alias };
    case "paired":
      return {
        ...view,
        phase: "waiting",
        sessionId: msg.session_id,
        partnerAlias: msg.partner_alias,
        total: 0,
        streak: 0,
        finalTotal: null,
        leaderboardRank: null,
        abandonedReason: null,
      };
    case "round_started":
      return {
        ...view,
        phase: "selecting",
        roundNo: msg.round_no,
        theme: msg.theme,
        keyword: msg.keyword,
        matrix: [...msg.matrix], // displayed exactly in server order
        quota: msg.quota,
        selection: [],
        lastResult: null,
        partnerShared: null,
      };
    case "round_result": {
      const { type: _type, v: _v, ...result } = msg;
      return {
        ...view,
        phase: "result",
        lastResult: result,
        total: msg.total,
        streak: msg.streak,
      };
    }
    case "word_shared":
      return { ...view, partnerShared: msg.word };
    case "session_completed":
      return {
        ...view,
        phase: "done",
        finalTotal: msg.total,
        total: msg.total,
        leaderboardRank: msg.leaderboard_rank,
      };
    case "session_abandoned":
      return {
        ...view,
        phase: "lobby",
        sessionId: null,
        partnerAlias: null,
        abandonedReason: msg.reason,
        selection: [],
        lastResult: null,
      };
    case "leaderboard":
      return { ...view, leaderboard: msg.entries };
    case "error":
      return { ...view, lastError: { code: msg.code, message: msg.message } };
    default:
      return view;
  }
}

// -- local input ----------------------------------------------------------

// Toggling a selected word removes it; a new word is accepted only below
// the quota (extra clicks are rejected, not swapped).
export function toggleWord(view: ClientSessionView, word: string): ClientSessionView {
  if (view.phase !== "selecting" || !view.matrix.includes(word)) return view;
  if (view.selection.includes(word)) {
    return { ...view, selection: view.selection.filter((w) => w !== word) };
  }
  if (view.selection.length >= view.quota) return view;
  return { ...view, selection: [...view.selection, word] };
}

export function canSubmit(view: ClientSessionView): boolean {
  return view.phase === "selecting" && view.selection.length === view.quota;
}

export function markSubmitted(view: ClientSessionView): ClientSessionView {
  return canSubmit(view) ? { ...view, phase: "submitted" } : view;
}

// Only unmatched words from the player's own selection can be shared.
export function shareCandidates(view: ClientSessionView): string[] {
  if (view.lastResult === null) return [];
  const matched = new Set(view.lastResult.matched);
  return view.selection.filter((w) => !matched.has(w));
}

export function markShared(view: ClientSessionView): ClientSessionView {
  return view.phase === "result" ? { ...view, phase: "shared" } : view;
}

export function foldTranscript(frames: ServerMessage[],
                               view: ClientSessionView = initialView()): ClientSessionView {
  return frames.reduce(applyServerEvent, view);
}

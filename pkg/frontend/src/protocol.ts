// Wire protocol v1: newline-free JSON text frames with a `type` field.

export const PROTOCOL_VERSION = 1;

export interface LeaderboardEntry {
  alias: string;
  best_session_total: number;
  session_id: string;
  completed_at: number;
}

export interface RoundResultMsg {
  round_no: number;
  matched: string[];
  wcmr: number;
  points: number;
  streak: number;
  bonus: number;
  total: number;
}

export type ServerMessage =
  | { v: 1; type: "welcome"; player_id: string; alias: string }
  | { v: 1; type: "paired"; session_id: string; partner_alias: string }
  | { v: 1; type: "round_started"; round_no: number; theme: string; keyword: string;
      matrix: string[]; quota: number }
  | ({ v: 1; type: "round_result" } & RoundResultMsg)
  | { v: 1; type: "word_shared"; word: string }
  | { v: 1; type: "session_completed"; total: number; leaderboard_rank: number | null }
  | { v: 1; type: "session_abandoned"; reason: string }
  | { v: 1; type: "leaderboard"; entries: LeaderboardEntry[] }
  | { v: 1; type: "error"; code: string; message: string };

export function encode(type: string, fields: Record<string, unknown> = {}): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type, ...fields });
}

export function decode(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (msg.v !== PROTOCOL_VERSION || typeof msg.type !== "string") {
    throw new Error(`bad frame: ${raw}`);
  }
  return msg as ServerMessage;
}

export const messages = {
  hello: (alias: string) => encode("hello", { alias }),
  joinQueue: () => encode("join_queue"),
  joinTag: (tag: string) => encode("join_tag", { tag }),
  submitSelection: (sessionId: string, roundNo: number, words: string[]) =>
    encode("submit_selection", { session_id: sessionId, round_no: roundNo, words }),
  shareWord: (sessionId: string, roundNo: number, word?: string) =>
    word === undefined
      ? encode("share_word", { session_id: sessionId, round_no: roundNo })
      : encode("share_word", { session_id: sessionId, round_no: roundNo, word }),
  questionnaire: (kind: "urcs" | "bfi", sessionId: string, items: number[]) =>
    encode("questionnaire", { kind, session_id: sessionId, items }),
  feedback: (ratings: { ui_clarity: number; fairness: number; flow: number },
             comment?: string) =>
    comment === undefined
      ? encode("feedback", { ratings })
      : encode("feedback", { ratings, comment }),
  getLeaderboard: (n = 10) => encode("get_leaderboard", { n }),
};

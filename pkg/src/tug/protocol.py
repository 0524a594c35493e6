"""Wire protocol: newline-free UTF-8 text frames, one JSON object per frame,
every schema versioned with a top-level ``v: 1``.

Client -> server: hello, join_queue, join_tag, submit_selection, share_word,
feedback, questionnaire, get_leaderboard.
Server -> client: welcome, paired, round_started, round_result, word_shared,
session_completed, session_abandoned, leaderboard, error.
"""

from __future__ import annotations

import json

from .errors import ProtocolError

PROTOCOL_VERSION = 1

CLIENT_TYPES = {
    "hello", "join_queue", "join_tag", "submit_selection", "share_word",
    "feedback", "questionnaire", "get_leaderboard",
}


def encode(msg_type: str, **fields) -> str:
    frame = {"v": PROTOCOL_VERSION, "type": msg_type, **fields}
    text = json.dumps(frame, ensure_ascii=False, separators=(",", ":"))
    # JSON string escapes keep the frame newline-free by construction
    assert "\n" not in text
    return text


def decode(raw) -> dict:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("frame must be a JSON object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {msg.get('v')!r}")
    msg_type = msg.get("type")
    if not isinstance(msg_type, str):
        raise ProtocolError("frame is missing its type")
    return msg


def expect_client_message(raw) -> dict:
    msg = decode(raw)
    if msg["type"] not in CLIENT_TYPES:
        raise ProtocolError(f"unknown message type {msg['type']!r}")
    return msg


def require(msg: dict, field: str, kind=None):
    if field not in msg:
        raise ProtocolError(f"{msg['type']}: missing field {field!r}")
    value = msg[field]
    if kind is not None and not isinstance(value, kind):
        raise ProtocolError(f"{msg['type']}: field {field!r} has the wrong type")
    return value


# -- server -> client builders -------------------------------------------

def welcome(player_id: str, alias: str) -> str:
    return encode("welcome", player_id=player_id, alias=alias)


def paired(session_id: str, partner_alias: str) -> str:
    return encode("paired", session_id=session_id, partner_alias=partner_alias)


def round_started(round_no: int, theme: str, keyword: str, matrix, quota: int) -> str:
    return encode("round_started", round_no=round_no, theme=theme,
                  keyword=keyword, matrix=list(matrix), quota=quota)


def round_result(round_no: int, matched, wcmr: float, points: int,
                 streak: int, bonus: int, total: int) -> str:
    return encode("round_result", round_no=round_no, matched=sorted(matched),
                  wcmr=wcmr, points=points, streak=streak, bonus=bonus, total=total)


def word_shared(word: str) -> str:
    return encode("word_shared", word=word)


def session_completed(total: int, leaderboard_rank: int | None) -> str:
    return encode("session_completed", total=total, leaderboard_rank=leaderboard_rank)


def session_abandoned(reason: str) -> str:
    return encode("session_abandoned", reason=reason)


def leaderboard(entries) -> str:
    return encode("leaderboard", entries=[
        {"alias": e.alias, "best_session_total": e.best_session_total,
         "session_id": e.session_id, "completed_at": e.completed_at}
        for e in entries
    ])


def error(code: str, message: str) -> str:
    return encode("error", code=code, message=message)

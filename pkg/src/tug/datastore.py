"""Append-only JSON-lines persistence and training-set export.

One UTF-8 text file per record type, one object per line, records immutable
once written. Gameplay records store anonymized player tokens only — no
aliases, no contact fields; the schema whitelists are enforced on append.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from . import assessments, scoring
from .embeddings import EmbeddingTable
from .errors import SchemaViolationError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ROUNDS_PER_PAIR = 10

FILES = {
    "session": "sessions.jsonl",
    "synthetic_session": "synthetic_sessions.jsonl",
    "questionnaire": "questionnaires.jsonl",
    "feedback": "feedback.jsonl",
}

SESSION_FIELDS = {
    "v", "type", "session_id", "players", "completed", "abandon_reason",
    "total", "started_at", "ended_at", "rounds",
}
SESSION_ROUND_FIELDS = {
    "round_no", "theme", "keyword", "quota", "matrix", "selections",
    "matched", "wcmr", "points", "bonus", "streak", "shared",
}
SYNTHETIC_FIELDS = {"v", "type", "pair_id", "scorer", "session_score", "rounds"}
SYNTHETIC_ROUND_FIELDS = {"theme", "keyword", "quota", "sel_a", "sel_b", "score"}
QUESTIONNAIRE_FIELDS = {"v", "type", "kind", "session_id", "player", "items"}
FEEDBACK_FIELDS = {"v", "type", "player", "ratings", "comment"}
FEEDBACK_RATING_KEYS = {"ui_clarity", "fairness", "flow"}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaViolationError(message)


def _check_fields(record: dict, allowed: set, label: str) -> None:
    extra = set(record) - allowed
    _require(not extra, f"{label}: unexpected fields {sorted(extra)}")
    missing = allowed - set(record)
    _require(not missing, f"{label}: missing fields {sorted(missing)}")


def validate_session_record(record: dict) -> None:
    _check_fields(record, SESSION_FIELDS, "session record")
    _require(record["v"] == SCHEMA_VERSION, "unsupported schema version")
    players = record["players"]
    _require(isinstance(players, list) and len(players) == 2 and players[0] != players[1],
             "players must be two distinct ids")
    rounds = record["rounds"]
    _require(isinstance(rounds, list) and len(rounds) <= ROUNDS_PER_PAIR,
             f"a session holds at most {ROUNDS_PER_PAIR} rounds")
    if record["completed"]:
        _require(len(rounds) == ROUNDS_PER_PAIR,
                 f"a completed session holds exactly {ROUNDS_PER_PAIR} rounds")
        _require(record["abandon_reason"] is None, "completed sessions carry no abandon reason")
    triples = []
    for r in rounds:
        _check_fields(r, SESSION_ROUND_FIELDS, "session round")
        _require(set(r["selections"]) == set(players), "selections must cover both players")
        for pid in players:
            _require(len(r["selections"][pid]) == r["quota"],
                     "selection size must equal the round quota")
            _require(set(r["selections"][pid]) <= set(r["matrix"]),
                     "selections must come from the matrix")
        _require(set(r["matched"]) == set(r["selections"][players[0]]) &
                 set(r["selections"][players[1]]), "matched set mismatch")
        triples.append((r["selections"][players[0]], r["selections"][players[1]], r["quota"]))
    # replaying the log through the scoring path must reproduce the record
    replayed = scoring.replay_scores(triples)
    for r, score in zip(rounds, replayed):
        _require(r["points"] == score.points, "stored points disagree with replay")
        _require(r["bonus"] == score.bonus_awarded, "stored bonus disagrees with replay")
        _require(r["streak"] == score.streak_len_after, "stored streak disagrees with replay")
        _require(r["wcmr"] == float(score.wcmr), "stored wcmr disagrees with replay")
    _require(record["total"] == scoring.session_total(replayed),
             "stored total disagrees with replay")


def validate_synthetic_record(record: dict) -> None:
    _check_fields(record, SYNTHETIC_FIELDS, "synthetic session record")
    _require(record["v"] == SCHEMA_VERSION, "unsupported schema version")
    rounds = record["rounds"]
    _require(isinstance(rounds, list) and len(rounds) == ROUNDS_PER_PAIR,
             f"a synthetic session holds exactly {ROUNDS_PER_PAIR} rounds")
    for r in rounds:
        _check_fields(r, SYNTHETIC_ROUND_FIELDS, "synthetic round")
        _require(0.0 <= r["score"] <= 1.0, "round score outside [0,1]")
    mean = sum(r["score"] for r in rounds) / len(rounds)
    _require(abs(record["session_score"] - mean) < 1e-9,
             "session_score must be the mean of round scores")


def validate_questionnaire_record(record: dict) -> None:
    _check_fields(record, QUESTIONNAIRE_FIELDS, "questionnaire record")
    _require(record["v"] == SCHEMA_VERSION, "unsupported schema version")
    kind = record["kind"]
    _require(kind in ("urcs", "bfi"), f"unknown questionnaire kind {kind!r}")
    if kind == "urcs":
        assessments.URCSResponse(tuple(record["items"]))
    else:
        assessments.BFIResponse(tuple(record["items"]))


def validate_feedback_record(record: dict) -> None:
    _check_fields(record, FEEDBACK_FIELDS, "feedback record")
    _require(record["v"] == SCHEMA_VERSION, "unsupported schema version")
    ratings = record["ratings"]
    _require(set(ratings) == FEEDBACK_RATING_KEYS,
             f"ratings must cover {sorted(FEEDBACK_RATING_KEYS)}")
    for key, value in ratings.items():
        _require(isinstance(value, int) and 1 <= value <= 5,
                 f"rating {key!r} must be an integer in 1..5")


VALIDATORS = {
    "session": validate_session_record,
    "synthetic_session": validate_synthetic_record,
    "questionnaire": validate_questionnaire_record,
    "feedback": validate_feedback_record,
}


def validate_record(record) -> str:
    _require(isinstance(record, dict), "record must be an object")
    kind = record.get("type")
    _require(kind in VALIDATORS, f"unknown record type {kind!r}")
    VALIDATORS[kind](record)
    return kind


class Datastore:
    """Single-writer append-only store over one directory of log files."""

    def __init__(self, log_dir):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._offsets = {}
        for kind, name in FILES.items():
            path = self.log_dir / name
            count = 0
            if path.exists():
                with path.open(encoding="utf-8") as fh:
                    count = sum(1 for line in fh if line.strip())
            self._offsets[kind] = count

    def append(self, record: dict) -> int:
        kind = validate_record(record)
        line = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock:
            path = self.log_dir / FILES[kind]
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            offset = self._offsets[kind]
            self._offsets[kind] = offset + 1
        return offset

    def read_all(self, kind: str) -> list[dict]:
        path = self.log_dir / FILES[kind]
        if not path.exists():
            return []
        out = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        return out


# -- record builders ----------------------------------------------------

def session_record(session, started_at: float, ended_at: float) -> dict:
    """Flatten a finished (completed or abandoned) engine session."""
    rounds = []
    for rec in session.rounds:
        rounds.append({
            "round_no": rec.round_no,
            "theme": rec.spec.theme,
            "keyword": rec.spec.keyword,
            "quota": rec.spec.quota,
            "matrix": list(rec.spec.matrix),
            "selections": {pid: sorted(sel) for pid, sel in rec.selections.items()},
            "matched": sorted(rec.score.matched_words),
            "wcmr": float(rec.score.wcmr),
            "points": rec.score.points,
            "bonus": rec.score.bonus_awarded,
            "streak": rec.score.streak_len_after,
            "shared": {pid: rec.shared.get(pid) for pid in session.players},
        })
    return {
        "v": SCHEMA_VERSION,
        "type": "session",
        "session_id": session.session_id,
        "players": list(session.players),
        "completed": session.state.value == "completed",
        "abandon_reason": session.abandon_reason.value if session.abandon_reason else None,
        "total": session.total,
        "started_at": started_at,
        "ended_at": ended_at,
        "rounds": rounds,
    }


def questionnaire_record(kind: str, session_id: str, player: str, items) -> dict:
    return {"v": SCHEMA_VERSION, "type": "questionnaire", "kind": kind,
            "session_id": session_id, "player": player, "items": list(items)}


def feedback_record(player: str, ratings: dict, comment: str | None) -> dict:
    return {"v": SCHEMA_VERSION, "type": "feedback", "player": player,
            "ratings": dict(ratings), "comment": comment}


# -- labeled pairs and the dataset file format --------------------------

@dataclass(frozen=True)
class PairRound:
    theme: str
    keyword: str
    quota: int
    sel_a: tuple[str, ...]
    sel_b: tuple[str, ...]


@dataclass(frozen=True)
class LabeledPair:
    pair_id: str
    label: float
    label_source: str                  # urcs | llm | oracle
    rounds: tuple[PairRound, ...]

    def __post_init__(self):
        if not 0.0 <= self.label <= 1.0:
            raise SchemaViolationError(f"label {self.label} outside [0,1]")
        if len(self.rounds) != ROUNDS_PER_PAIR:
            raise SchemaViolationError(
                f"a pair holds exactly {ROUNDS_PER_PAIR} rounds, got {len(self.rounds)}"
            )


def write_dataset(pairs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "v": SCHEMA_VERSION,
                "pair_id": pair.pair_id,
                "label": pair.label,
                "label_source": pair.label_source,
                "rounds": [{
                    "theme": r.theme, "keyword": r.keyword, "quota": r.quota,
                    "sel_a": list(r.sel_a), "sel_b": list(r.sel_b),
                } for r in pair.rounds],
            }, ensure_ascii=False, sort_keys=True) + "\n")


def read_dataset(path) -> list[LabeledPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append(LabeledPair(
                pair_id=obj["pair_id"],
                label=obj["label"],
                label_source=obj["label_source"],
                rounds=tuple(PairRound(
                    theme=r["theme"], keyword=r["keyword"], quota=r["quota"],
                    sel_a=tuple(r["sel_a"]), sel_b=tuple(r["sel_b"]),
                ) for r in obj["rounds"]),
            ))
    return pairs


def _pair_from_session(record: dict, label: float, source: str) -> LabeledPair:
    p_a, p_b = record["players"]
    rounds = tuple(PairRound(
        theme=r["theme"], keyword=r["keyword"], quota=r["quota"],
        sel_a=tuple(r["selections"][p_a]), sel_b=tuple(r["selections"][p_b]),
    ) for r in record["rounds"])
    return LabeledPair(pair_id=record["session_id"], label=label,
                       label_source=source, rounds=rounds)


def export_training_set(log_dir, label_policy: str,
                        embeddings: EmbeddingTable | None = None) -> list[LabeledPair]:
    """Turn stored logs into labeled pairs.

    urcs: completed real sessions labeled by both partners' pair
    questionnaires (sessions without both responses are skipped with a
    warning). oracle: synthetic sessions scored by the embedding oracle;
    when a table is given, completed real sessions are re-scored with it
    too. llm: synthetic sessions carrying judge-assigned scores.
    """
    if label_policy not in ("urcs", "llm", "oracle"):
        raise ValueError(f"unknown label policy {label_policy!r}")
    store = Datastore(log_dir)
    pairs: list[LabeledPair] = []

    if label_policy == "urcs":
        responses: dict[tuple[str, str], assessments.URCSResponse] = {}
        for q in store.read_all("questionnaire"):
            if q["kind"] == "urcs":
                responses[(q["session_id"], q["player"])] = \
                    assessments.URCSResponse(tuple(q["items"]))
        for record in store.read_all("session"):
            if not record["completed"]:
                continue
            keys = [(record["session_id"], pid) for pid in record["players"]]
            if not all(k in responses for k in keys):
                log.warning("session %s has no complete pair questionnaire; skipped",
                            record["session_id"])
                continue
            label = assessments.pair_closeness(responses[keys[0]], responses[keys[1]])
            pairs.append(_pair_from_session(record, label, "urcs"))
        return pairs

    # synthetic sessions carry their own per-round scores
    for record in store.read_all("synthetic_session"):
        if record["scorer"] != label_policy:
            continue
        rounds = tuple(PairRound(
            theme=r["theme"], keyword=r["keyword"], quota=r["quota"],
            sel_a=tuple(r["sel_a"]), sel_b=tuple(r["sel_b"]),
        ) for r in record["rounds"])
        pairs.append(LabeledPair(pair_id=record["pair_id"], label=record["session_score"],
                                 label_source=label_policy, rounds=rounds))

    if label_policy == "oracle" and embeddings is not None:
        from .simgen import score_round_oracle
        for record in store.read_all("session"):
            if not record["completed"]:
                continue
            p_a, p_b = record["players"]
            scores = [score_round_oracle(r["selections"][p_a], r["selections"][p_b], embeddings)
                      for r in record["rounds"]]
            pairs.append(_pair_from_session(record, sum(scores) / len(scores), "oracle"))
    return pairs

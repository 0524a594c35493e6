"""Matchmaking (queue and tag table), leaderboard, feedback validation.

enqueue/join_tag are atomic test-and-pair operations guarded by one lock, so
a player can never end up queued twice, parked twice, or paired while
already playing.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .errors import (
    AlreadyInSessionError,
    AlreadyQueuedError,
    OutOfRangeError,
    TagOccupiedBySelfError,
)

MAX_TAG_LENGTH = 64
FEEDBACK_KEYS = ("ui_clarity", "fairness", "flow")


@dataclass
class PlayerConnection:
    player_id: str         # anonymized random token, no PII
    display_alias: str
    handle: object = None  # transport-owned, opaque here


class Lobby:
    def __init__(self, clock=time.monotonic):
        self._clock = clock
        self._lock = threading.Lock()
        self._queue: list[tuple[PlayerConnection, float]] = []
        self._tags: dict[str, tuple[PlayerConnection, float]] = {}
        self._in_session: set[str] = set()

    def _check_joinable(self, conn: PlayerConnection) -> None:
        if conn.player_id in self._in_session:
            raise AlreadyInSessionError("already playing a session")
        if any(w.player_id == conn.player_id for w, _ in self._queue):
            raise AlreadyQueuedError("already waiting in the queue")

    def enqueue(self, conn: PlayerConnection) -> PlayerConnection | None:
        """FIFO pairing: returns the waiting partner, or None to wait."""
        with self._lock:
            self._check_joinable(conn)
            if self._queue:
                partner, _ = self._queue.pop(0)
                self._in_session.update((partner.player_id, conn.player_id))
                return partner
            self._queue.append((conn, self._clock()))
            return None

    def join_tag(self, conn: PlayerConnection, tag: str) -> PlayerConnection | None:
        """First arrival parks under the tag, the second pairs; tags are
        single-use, so a third joiner parks the name afresh."""
        if not tag or len(tag) > MAX_TAG_LENGTH:
            raise OutOfRangeError(f"tag must be 1..{MAX_TAG_LENGTH} characters")
        with self._lock:
            self._check_joinable(conn)
            parked = self._tags.get(tag)
            if parked is not None:
                partner, _ = parked
                if partner.player_id == conn.player_id:
                    raise TagOccupiedBySelfError(f"you already parked tag {tag!r}")
                del self._tags[tag]
                self._in_session.update((partner.player_id, conn.player_id))
                return partner
            if any(w.player_id == conn.player_id for w, _ in self._tags.values()):
                raise AlreadyQueuedError("already parked under a tag")
            self._tags[tag] = (conn, self._clock())
            return None

    def leave(self, player_id: str) -> None:
        """Drop a player from the queue and tag table (disconnects)."""
        with self._lock:
            self._queue = [(w, t) for w, t in self._queue if w.player_id != player_id]
            self._tags = {tag: (w, t) for tag, (w, t) in self._tags.items()
                          if w.player_id != player_id}

    def release(self, *player_ids: str) -> None:
        """Mark players as no longer in a session."""
        with self._lock:
            self._in_session.difference_update(player_ids)

    def evict_stale(self, max_age: float) -> list[PlayerConnection]:
        """Remove queue/tag waiters older than max_age seconds."""
        now = self._clock()
        with self._lock:
            evicted = [w for w, t in self._queue if now - t > max_age]
            self._queue = [(w, t) for w, t in self._queue if now - t <= max_age]
            stale_tags = [tag for tag, (w, t) in self._tags.items() if now - t > max_age]
            evicted.extend(self._tags.pop(tag)[0] for tag in stale_tags)
            return evicted

    def stats(self) -> dict:
        with self._lock:
            return {"queued": len(self._queue), "tags": len(self._tags),
                    "in_session": len(self._in_session)}


@dataclass(frozen=True)
class LeaderboardEntry:
    alias: str
    best_session_total: int
    session_id: str
    completed_at: float


@dataclass
class _Best:
    total: int
    session_id: str
    completed_at: float
    alias: str


class Leaderboard:
    """One entry per player: their best completed 10-round session."""

    def __init__(self):
        self._lock = threading.Lock()
        self._best: dict[str, _Best] = {}

    def record_completion(self, player_id: str, alias: str, session_id: str,
                          total: int, completed_at: float) -> None:
        with self._lock:
            best = self._best.get(player_id)
            if best is None or total > best.total:
                self._best[player_id] = _Best(total, session_id, completed_at, alias)

    def _sorted(self) -> list[tuple[str, _Best]]:
        return sorted(self._best.items(),
                      key=lambda kv: (-kv[1].total, kv[1].completed_at, kv[0]))

    def top(self, n: int) -> list[LeaderboardEntry]:
        if n < 1:
            raise OutOfRangeError("n must be at least 1")
        with self._lock:
            return [LeaderboardEntry(b.alias, b.total, b.session_id, b.completed_at)
                    for _, b in self._sorted()[:n]]

    def rank_of(self, player_id: str) -> int | None:
        with self._lock:
            for rank, (pid, _) in enumerate(self._sorted(), start=1):
                if pid == player_id:
                    return rank
            return None


def validate_feedback(ratings: dict, comment: str | None = None) -> dict:
    """Check the three 5-point scales; returns a normalized ratings dict."""
    missing = set(FEEDBACK_KEYS) - set(ratings)
    if missing:
        raise OutOfRangeError(f"missing ratings: {sorted(missing)}")
    extra = set(ratings) - set(FEEDBACK_KEYS)
    if extra:
        raise OutOfRangeError(f"unknown ratings: {sorted(extra)}")
    out = {}
    for key in FEEDBACK_KEYS:
        value = ratings[key]
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
            raise OutOfRangeError(f"rating {key!r} must be an integer in 1..5")
        out[key] = value
    if comment is not None and not isinstance(comment, str):
        raise OutOfRangeError("comment must be a string")
    return out

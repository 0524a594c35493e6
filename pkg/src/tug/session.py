"""The authoritative two-player session state machine.

One method call per player event; each call validates against the current
state, mutates the session, and returns the domain events it produced. All
randomness flows from the constructor seed, so a session replays identically
from (seed, ordered event list).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from . import scoring
from .embeddings import EmbeddingTable
from .errors import (
    DuplicateSubmissionError,
    InsufficientWordsError,
    WordNotInMatrixError,
    WordNotSelectedError,
    WordWasMatchedError,
    WrongQuotaError,
    WrongStateError,
)
from .lexicon import SAMPLE_SIZE, RoundSpec, Theme, build_round_spec, normalize_word, shuffle_for_player
from .util import derive_seed

ROUNDS_PER_SESSION = 10


class SessionState(Enum):
    AWAITING_SELECTIONS = "awaiting_selections"
    REVEAL_RESULT = "reveal_result"
    SHARE_WORD = "share_word"
    COMPLETED = "completed"
    ABANDONED = "abandoned"


class AbandonReason(Enum):
    DISCONNECT = "disconnect"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RoundStarted:
    round_no: int
    spec: RoundSpec
    orders: dict  # player id -> that player's shuffled matrix view


@dataclass(frozen=True)
class RoundResult:
    round_no: int
    matched: frozenset[str]
    wcmr: Fraction
    points: int
    streak: int
    bonus: int
    total: int


@dataclass(frozen=True)
class WordShared:
    round_no: int
    player: str
    word: str


@dataclass(frozen=True)
class SessionCompleted:
    total: int


@dataclass(frozen=True)
class SessionAbandoned:
    reason: AbandonReason


@dataclass
class RoundRecord:
    round_no: int
    spec: RoundSpec
    orders: dict
    selections: dict = field(default_factory=dict)   # player id -> frozenset
    score: scoring.RoundScore | None = None
    shared: dict = field(default_factory=dict)       # player id -> word | None


class Session:
    def __init__(self, session_id: str, players, themes, embeddings: EmbeddingTable,
                 seed: int, num_rounds: int = ROUNDS_PER_SESSION):
        players = tuple(players)
        if len(players) != 2 or players[0] == players[1]:
            raise ValueError("a session needs exactly two distinct players")
        eligible = [t for t in themes if len(t.words) >= SAMPLE_SIZE]
        if len(eligible) < num_rounds:
            raise InsufficientWordsError(
                f"need {num_rounds} themes with {SAMPLE_SIZE}+ words, have {len(eligible)}"
            )
        self.session_id = session_id
        self.players = players
        self.num_rounds = num_rounds
        self.state = SessionState.AWAITING_SELECTIONS
        self.rounds: list[RoundRecord] = []        # finished rounds only
        self.streak = 0
        self.total = 0
        self.abandon_reason: AbandonReason | None = None
        self._table = embeddings
        self._seed = seed
        self._rng = random.Random(seed)
        # one distinct theme per round, sampled without replacement
        self._themes = self._rng.sample(eligible, num_rounds)
        self._active: RoundRecord | None = None
        self._started = False

    # -- helpers -------------------------------------------------------

    @property
    def current_round(self) -> int:
        return len(self.rounds) + (1 if self.state not in
                                   (SessionState.COMPLETED, SessionState.ABANDONED) else 0)

    def _require_player(self, player: str) -> None:
        if player not in self.players:
            raise ValueError(f"unknown player {player!r}")

    def partner_of(self, player: str) -> str:
        self._require_player(player)
        return self.players[1] if player == self.players[0] else self.players[0]

    def _begin_round(self) -> RoundStarted:
        round_no = len(self.rounds) + 1
        theme = self._themes[round_no - 1]
        spec = build_round_spec(theme, self._table, self._rng)
        orders = {
            pid: shuffle_for_player(spec, derive_seed(self._seed, round_no, pid))
            for pid in self.players
        }
        self._active = RoundRecord(round_no=round_no, spec=spec, orders=orders)
        self.state = SessionState.AWAITING_SELECTIONS
        return RoundStarted(round_no=round_no, spec=spec, orders=orders)

    # -- events --------------------------------------------------------

    def start(self) -> list:
        if self._started:
            raise WrongStateError("session already started")
        self._started = True
        return [self._begin_round()]

    def submit_selection(self, player: str, words) -> list:
        self._require_player(player)
        if self.state is not SessionState.AWAITING_SELECTIONS or self._active is None:
            raise WrongStateError(f"cannot submit a selection while {self.state.value}")
        rec = self._active
        if player in rec.selections:
            raise DuplicateSubmissionError("selection already submitted this round")
        selection = frozenset(normalize_word(w) for w in words)
        if len(selection) != rec.spec.quota:
            raise WrongQuotaError(
                f"selected {len(selection)} distinct words, quota is {rec.spec.quota}"
            )
        # player views are permutations of the canonical matrix, so the
        # canonical set is the validation authority
        outside = selection - set(rec.spec.matrix)
        if outside:
            raise WordNotInMatrixError(
                "not in this round's matrix: " + ", ".join(sorted(outside))
            )
        rec.selections[player] = selection
        if len(rec.selections) < 2:
            return []
        sel_a, sel_b = (rec.selections[p] for p in self.players)
        rec.score = scoring.score_round(sel_a, sel_b, rec.spec.quota, self.streak)
        self.streak = rec.score.streak_len_after
        self.total += rec.score.points + rec.score.bonus_awarded
        self.state = SessionState.REVEAL_RESULT
        return [RoundResult(
            round_no=rec.round_no,
            matched=rec.score.matched_words,
            wcmr=rec.score.wcmr,
            points=rec.score.points,
            streak=rec.score.streak_len_after,
            bonus=rec.score.bonus_awarded,
            total=self.total,
        )]

    def share_word(self, player: str, word: str | None = None) -> list:
        """Record one player's share (or skip); both responses advance the
        round. Sharing is optional."""
        self._require_player(player)
        if self.state not in (SessionState.REVEAL_RESULT, SessionState.SHARE_WORD) \
                or self._active is None or self._active.score is None:
            raise WrongStateError(f"cannot share a word while {self.state.value}")
        rec = self._active
        if player in rec.shared:
            raise DuplicateSubmissionError("share already submitted this round")
        events: list = []
        if word is not None:
            word = normalize_word(word)
            if word not in rec.selections[player]:
                raise WordNotSelectedError(f"{word!r} was not part of your selection")
            if word in rec.score.matched_words:
                raise WordWasMatchedError(f"{word!r} was matched, share an unmatched word")
            events.append(WordShared(round_no=rec.round_no, player=player, word=word))
        rec.shared[player] = word
        if len(rec.shared) < 2:
            self.state = SessionState.SHARE_WORD
            return events
        self.rounds.append(rec)
        self._active = None
        if len(self.rounds) < self.num_rounds:
            events.append(self._begin_round())
        else:
            self.state = SessionState.COMPLETED
            events.append(SessionCompleted(total=self.total))
        return events

    def abandon(self, reason: AbandonReason) -> list:
        if self.state in (SessionState.COMPLETED, SessionState.ABANDONED):
            raise WrongStateError(f"cannot abandon a {self.state.value} session")
        # a round that was already scored counts toward the frozen total, so
        # it belongs in the record history (replay must reproduce the total)
        if self._active is not None and self._active.score is not None:
            self.rounds.append(self._active)
            self._active = None
        self.state = SessionState.ABANDONED
        self.abandon_reason = reason
        return [SessionAbandoned(reason=reason)]

    # -- integrity -----------------------------------------------------

    def replay_total(self) -> int:
        """Recompute the total from raw selections via the scoring module."""
        triples = [
            (r.selections[self.players[0]], r.selections[self.players[1]], r.spec.quota)
            for r in self.rounds
        ]
        return scoring.session_total(scoring.replay_scores(triples))

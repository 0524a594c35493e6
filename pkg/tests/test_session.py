"""Session state machine: lifecycle, validation, fuzzing, replay."""

import random

import pytest

from tug.errors import (
    DuplicateSubmissionError,
    GameRuleError,
    InsufficientWordsError,
    WordNotInMatrixError,
    WordNotSelectedError,
    WordWasMatchedError,
    WrongQuotaError,
    WrongStateError,
)
from tug.session import (
    AbandonReason,
    RoundResult,
    RoundStarted,
    Session,
    SessionAbandoned,
    SessionCompleted,
    SessionState,
    WordShared,
)

P1, P2 = "player-a", "player-b"


def make_session(full_themes, full_table, seed=0, num_rounds=10):
    return Session(f"sess-{seed}", (P1, P2), full_themes, full_table, seed,
                   num_rounds=num_rounds)


def started(full_themes, full_table, seed=0, num_rounds=10):
    session = make_session(full_themes, full_table, seed, num_rounds)
    events = session.start()
    assert len(events) == 1 and isinstance(events[0], RoundStarted)
    return session, events[0]


def any_selection(spec, offset=0):
    return set(list(spec.matrix)[offset:offset + spec.quota])


class TestLifecycle:
    def test_first_submission_keeps_waiting(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        events = session.submit_selection(P1, any_selection(first.spec))
        assert events == []
        assert session.state is SessionState.AWAITING_SELECTIONS

    def test_second_submission_reveals_result(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        events = session.submit_selection(P2, any_selection(first.spec, offset=1))
        assert len(events) == 1
        result = events[0]
        assert isinstance(result, RoundResult)
        assert session.state is SessionState.REVEAL_RESULT
        overlap = any_selection(first.spec) & any_selection(first.spec, offset=1)
        assert result.matched == overlap
        assert result.points == 10 * len(overlap)

    def test_players_see_same_spec_but_shuffled_orders(self, full_themes, full_table):
        _, first = started(full_themes, full_table)
        assert sorted(first.orders[P1]) == sorted(first.orders[P2]) == sorted(first.spec.matrix)
        assert first.orders[P1] != first.orders[P2]  # overwhelmingly likely

    def test_both_skips_advance_round(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        session.submit_selection(P2, any_selection(first.spec))
        assert session.share_word(P1, None) == []
        assert session.state is SessionState.SHARE_WORD
        events = session.share_word(P2, None)
        assert len(events) == 1 and isinstance(events[0], RoundStarted)
        assert events[0].round_no == 2
        assert session.rounds[0].shared == {P1: None, P2: None}

    def test_share_unmatched_word_reaches_partner(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        sel1 = any_selection(first.spec)
        sel2 = any_selection(first.spec, offset=first.spec.quota)  # disjoint
        session.submit_selection(P1, sel1)
        result = session.submit_selection(P2, sel2)[0]
        assert result.matched == frozenset()
        word = sorted(sel1)[0]
        events = session.share_word(P1, word)
        assert events == [WordShared(round_no=1, player=P1, word=word)]

    def test_ten_rounds_complete_session(self, full_themes, full_table):
        session, event = started(full_themes, full_table, seed=5)
        spec = event.spec
        for round_no in range(1, 11):
            session.submit_selection(P1, any_selection(spec))
            session.submit_selection(P2, any_selection(spec))
            session.share_word(P1, None)
            events = session.share_word(P2, None)
            if round_no < 10:
                assert isinstance(events[-1], RoundStarted)
                spec = events[-1].spec
            else:
                assert events == [SessionCompleted(total=session.total)]
        assert session.state is SessionState.COMPLETED
        assert len(session.rounds) == 10
        # matching selections every round: full points plus both milestones
        assert session.total == session.replay_total()

    def test_distinct_themes_across_rounds(self, full_themes, full_table):
        session, event = started(full_themes, full_table, seed=9)
        themes = []
        spec = event.spec
        for round_no in range(1, 11):
            themes.append(spec.theme)
            session.submit_selection(P1, any_selection(spec))
            session.submit_selection(P2, any_selection(spec))
            session.share_word(P1, None)
            events = session.share_word(P2, None)
            if round_no < 10:
                spec = events[-1].spec
        assert len(set(themes)) == 10


class TestValidation:
    def test_wrong_quota_rejected_and_state_unchanged(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        with pytest.raises(WrongQuotaError):
            session.submit_selection(P1, set(list(first.spec.matrix)[:first.spec.quota - 1]))
        assert session.state is SessionState.AWAITING_SELECTIONS
        assert session.current_round == 1

    def test_word_outside_matrix_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        words = set(list(first.spec.matrix)[:first.spec.quota - 1]) | {"definitely-not-a-word"}
        with pytest.raises(WordNotInMatrixError):
            session.submit_selection(P1, words)

    def test_duplicate_submission_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        with pytest.raises(DuplicateSubmissionError):
            session.submit_selection(P1, any_selection(first.spec, offset=2))

    def test_share_before_result_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        with pytest.raises(WrongStateError):
            session.share_word(P1, None)

    def test_share_matched_word_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        sel = any_selection(first.spec)
        session.submit_selection(P1, sel)
        session.submit_selection(P2, sel)  # everything matches
        with pytest.raises(WordWasMatchedError):
            session.share_word(P1, sorted(sel)[0])

    def test_share_unselected_word_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        sel = any_selection(first.spec)
        other = list(set(first.spec.matrix) - sel)[0]
        session.submit_selection(P1, sel)
        session.submit_selection(P2, sel)
        with pytest.raises(WordNotSelectedError):
            session.share_word(P1, other)

    def test_submission_during_reveal_rejected(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        session.submit_selection(P2, any_selection(first.spec))
        with pytest.raises(WrongStateError):
            session.submit_selection(P1, any_selection(first.spec))

    def test_needs_ten_eligible_themes(self, full_themes, full_table):
        with pytest.raises(InsufficientWordsError):
            Session("s", (P1, P2), full_themes[:9], full_table, 0)

    def test_two_distinct_players_required(self, full_themes, full_table):
        with pytest.raises(ValueError):
            Session("s", (P1, P1), full_themes, full_table, 0)


class TestAbandon:
    def test_abandon_mid_session(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        events = session.abandon(AbandonReason.DISCONNECT)
        assert events == [SessionAbandoned(reason=AbandonReason.DISCONNECT)]
        assert session.state is SessionState.ABANDONED
        total_before = session.total
        with pytest.raises(WrongStateError):
            session.submit_selection(P2, any_selection(first.spec))
        assert session.total == total_before  # frozen

    def test_abandon_completed_session_rejected(self, full_themes, full_table):
        session, event = started(full_themes, full_table, seed=5)
        spec = event.spec
        for round_no in range(1, 11):
            session.submit_selection(P1, any_selection(spec))
            session.submit_selection(P2, any_selection(spec))
            session.share_word(P1, None)
            events = session.share_word(P2, None)
            if round_no < 10:
                spec = events[-1].spec
        with pytest.raises(WrongStateError):
            session.abandon(AbandonReason.TIMEOUT)

    def test_timeout_during_share_phase(self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        session.submit_selection(P2, any_selection(first.spec, offset=1))
        session.share_word(P1, None)
        events = session.abandon(AbandonReason.TIMEOUT)
        assert session.state is SessionState.ABANDONED
        assert events[0].reason is AbandonReason.TIMEOUT

    def test_abandon_after_reveal_keeps_the_scored_round_replayable(
            self, full_themes, full_table):
        # the revealed round's points are frozen into the total, so the
        # round must appear in the record history for replay to agree
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        session.submit_selection(P2, any_selection(first.spec))  # full match
        assert session.total > 0
        session.abandon(AbandonReason.DISCONNECT)
        assert len(session.rounds) == 1
        assert session.total == session.replay_total()

    def test_abandon_before_reveal_excludes_the_unscored_round(
            self, full_themes, full_table):
        session, first = started(full_themes, full_table)
        session.submit_selection(P1, any_selection(first.spec))
        session.abandon(AbandonReason.DISCONNECT)
        assert session.rounds == []
        assert session.total == 0 == session.replay_total()


class FuzzDriver:
    """Random legal and illegal events against a session; checks that
    illegal events raise and never mutate, and that legal events follow the
    allowed transition graph."""

    LEGAL_NEXT = {
        SessionState.AWAITING_SELECTIONS: {SessionState.AWAITING_SELECTIONS,
                                           SessionState.REVEAL_RESULT,
                                           SessionState.ABANDONED},
        SessionState.REVEAL_RESULT: {SessionState.REVEAL_RESULT,
                                     SessionState.SHARE_WORD,
                                     SessionState.AWAITING_SELECTIONS,
                                     SessionState.COMPLETED,
                                     SessionState.ABANDONED},
        SessionState.SHARE_WORD: {SessionState.SHARE_WORD,
                                  SessionState.AWAITING_SELECTIONS,
                                  SessionState.COMPLETED,
                                  SessionState.ABANDONED},
        SessionState.COMPLETED: set(),
        SessionState.ABANDONED: set(),
    }

    def __init__(self, themes, table, seed):
        self.rng = random.Random(seed)
        self.session = Session(f"fuzz-{seed}", (P1, P2), themes, table, seed)
        self.spec = self.session.start()[0].spec

    def snapshot(self):
        s = self.session
        return (s.state, s.current_round, s.total, s.streak, len(s.rounds))

    def step(self):
        s = self.session
        rng = self.rng
        player = rng.choice((P1, P2))
        action = rng.random()
        before = self.snapshot()
        state_before = s.state
        try:
            if action < 0.5:
                words = self._selection_words(rng)
                events = s.submit_selection(player, words)
            elif action < 0.985:
                events = s.share_word(player, self._share_word(rng, player))
            else:
                events = s.abandon(rng.choice((AbandonReason.DISCONNECT,
                                               AbandonReason.TIMEOUT)))
            for ev in events:
                if isinstance(ev, RoundStarted):
                    self.spec = ev.spec
            assert s.state in self.LEGAL_NEXT[state_before], \
                f"illegal transition {state_before} -> {s.state}"
        except GameRuleError:
            assert self.snapshot() == before, "a rejected event mutated the session"
        return s.state in (SessionState.COMPLETED, SessionState.ABANDONED)

    def _selection_words(self, rng):
        quota = self.spec.quota
        kind = rng.random()
        if kind < 0.7:   # legal-looking selection
            return set(rng.sample(self.spec.matrix, quota))
        if kind < 0.8:   # wrong size
            return set(rng.sample(self.spec.matrix, max(1, quota - 1)))
        if kind < 0.9:   # outside the matrix
            return set(rng.sample(self.spec.matrix, quota - 1)) | {"bogus-word"}
        return set()

    def _share_word(self, rng, player):
        kind = rng.random()
        if kind < 0.4:
            return None
        rec = self.session._active
        if kind < 0.8 and rec is not None and player in rec.selections:
            return rng.choice(sorted(rec.selections[player]))
        return rng.choice(self.spec.matrix)

    def run(self, max_steps=600):
        for _ in range(max_steps):
            if self.step():
                break
        s = self.session
        if s.state is SessionState.COMPLETED:
            assert len(s.rounds) == 10
            assert s.total == s.replay_total()
        return s


class TestFuzz:
    def test_random_event_sequences(self, full_themes, full_table):
        completed = abandoned = 0
        for seed in range(120):
            session = FuzzDriver(full_themes, full_table, seed).run()
            if session.state is SessionState.COMPLETED:
                completed += 1
            elif session.state is SessionState.ABANDONED:
                abandoned += 1
        assert completed > 0 and abandoned > 0

    def test_replay_consistency_over_completed_sessions(self, full_themes, full_table):
        checked = 0
        for seed in range(200, 260):
            driver = FuzzDriver(full_themes, full_table, seed)
            # force completion: drive legally to the end
            session = driver.session
            spec = driver.spec
            rng = random.Random(seed)
            while session.state is not SessionState.COMPLETED:
                session.submit_selection(P1, set(rng.sample(spec.matrix, spec.quota)))
                session.submit_selection(P2, set(rng.sample(spec.matrix, spec.quota)))
                session.share_word(P1, None)
                events = session.share_word(P2, None)
                for ev in events:
                    if isinstance(ev, RoundStarted):
                        spec = ev.spec
            assert session.total == session.replay_total()
            checked += 1
        assert checked == 60


class TestDeterminism:
    def test_same_seed_same_event_order_same_session(self, full_themes, full_table):
        def drive(seed):
            session, event = started(full_themes, full_table, seed=seed)
            spec = event.spec
            transcript = []
            for round_no in range(1, 11):
                transcript.append((spec.theme, spec.keyword, spec.matrix, spec.quota))
                session.submit_selection(P1, any_selection(spec))
                session.submit_selection(P2, any_selection(spec, offset=1))
                session.share_word(P1, None)
                events = session.share_word(P2, None)
                if round_no < 10:
                    spec = events[-1].spec
            transcript.append(session.total)
            return transcript

        assert drive(31) == drive(31)
        assert drive(31) != drive(32)

"""Match-rate scoring: WCMR, round points, streak bonuses, session totals.

All pure functions. WCMR is kept as an exact fraction so the 60% streak
threshold never hits floating-point comparison (3/5 must count).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import WrongQuotaError

STREAK_THRESHOLD = Fraction(3, 5)
STREAK_BONUSES = {3: 50, 5: 150}
MAX_ROUNDS = 10


@dataclass(frozen=True)
class RoundScore:
    matched_words: frozenset[str]
    wcmr: Fraction
    points: int
    streak_len_after: int
    bonus_awarded: int


def compute_wcmr(sel_a, sel_b, quota: int) -> tuple[set[str], Fraction]:
    """Matched words and match rate |A∩B|/quota for two quota-sized picks."""
    sel_a, sel_b = set(sel_a), set(sel_b)
    for label, sel in (("first", sel_a), ("second", sel_b)):
        if len(sel) != quota:
            raise WrongQuotaError(
                f"{label} selection has {len(sel)} words, quota is {quota}"
            )
    matched = sel_a & sel_b
    return matched, Fraction(len(matched), quota)


def round_points(wcmr, quota: int) -> int:
    """WCMR scaled by the round factor (10 x quota), rounded to the nearest
    10 (half up). For k matches out of quota this is exactly 10k."""
    raw = Fraction(wcmr) * (10 * quota)
    return int((raw + 5) // 10) * 10


def update_streak(prev_streak: int, wcmr) -> tuple[int, int]:
    """Extend the streak when WCMR >= 60%, else reset; +50 the moment a
    streak reaches 3 and +150 at 5, nothing past that."""
    if Fraction(wcmr) >= STREAK_THRESHOLD:
        new_streak = prev_streak + 1
        return new_streak, STREAK_BONUSES.get(new_streak, 0)
    return 0, 0


def score_round(sel_a, sel_b, quota: int, prev_streak: int) -> RoundScore:
    matched, wcmr = compute_wcmr(sel_a, sel_b, quota)
    points = round_points(wcmr, quota)
    streak, bonus = update_streak(prev_streak, wcmr)
    return RoundScore(frozenset(matched), wcmr, points, streak, bonus)


def session_total(round_scores) -> int:
    scores = list(round_scores)
    if len(scores) > MAX_ROUNDS:
        raise ValueError(f"a session has at most {MAX_ROUNDS} rounds, got {len(scores)}")
    return sum(s.points + s.bonus_awarded for s in scores)


def replay_scores(rounds) -> list[RoundScore]:
    """Re-score (sel_a, sel_b, quota) triples from a cold streak; used to
    cross-check stored logs against the live scoring path."""
    streak = 0
    out = []
    for sel_a, sel_b, quota in rounds:
        score = score_round(sel_a, sel_b, quota, streak)
        streak = score.streak_len_after
        out.append(score)
    return out

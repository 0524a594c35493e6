"""Exception types shared across the package.

Game-rule violations carry a short ``code`` that travels on the wire as
``error{code, message}``; everything else is ordinary library errors.
"""

from __future__ import annotations


class TugError(Exception):
    code = "error"


class LexiconFormatError(TugError):
    """A lexicon file line failed to parse."""

    code = "lexicon_format"

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateWordError(LexiconFormatError):
    code = "duplicate_word"


class InsufficientWordsError(TugError):
    code = "insufficient_words"


class InsufficientRoundsError(TugError):
    code = "insufficient_rounds"


class MissingEmbeddingError(TugError):
    code = "missing_embedding"

    def __init__(self, words):
        self.words = sorted(set(words))
        super().__init__("no embedding for: " + ", ".join(self.words))


class ZeroVectorError(TugError):
    code = "zero_vector"


class GameRuleError(TugError):
    """Base for violations the server reports back to a client."""


class WrongStateError(GameRuleError):
    code = "wrong_state"


class WrongQuotaError(GameRuleError):
    code = "wrong_quota"


class WordNotInMatrixError(GameRuleError):
    code = "word_not_in_matrix"


class DuplicateSubmissionError(GameRuleError):
    code = "duplicate_submission"


class WordWasMatchedError(GameRuleError):
    code = "word_was_matched"


class WordNotSelectedError(GameRuleError):
    code = "word_not_selected"


class AlreadyQueuedError(GameRuleError):
    code = "already_queued"


class AlreadyInSessionError(GameRuleError):
    code = "already_in_session"


class TagOccupiedBySelfError(GameRuleError):
    code = "tag_occupied_by_self"


class OutOfRangeError(GameRuleError):
    code = "out_of_range"


class ProtocolError(GameRuleError):
    code = "bad_message"


class SchemaViolationError(TugError):
    code = "schema_violation"


class KeyingError(TugError):
    code = "malformed_keying"


class UnparseableReplyError(TugError):
    code = "unparseable_reply"


class TransportError(TugError):
    code = "transport"


class TrainingError(TugError):
    code = "training"

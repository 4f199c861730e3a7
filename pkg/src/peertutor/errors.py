"""Domain error hierarchy.

Every error carries a stable ``code`` used verbatim in protocol error
frames, so clients can switch on it without parsing messages.
"""


class DomainError(Exception):
    """Base class for all rejections the server reports to a client."""

    code = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


# content
class SchemaError(DomainError):
    code = "schema_error"


class MissingLanguage(DomainError):
    code = "missing_language"

    def __init__(self, lang: str, where: str = ""):
        super().__init__(f"missing language {lang!r} in {where or 'document'}",
                         lang=lang, where=where)
        self.lang = lang
        self.where = where


class EmptyDeck(DomainError):
    code = "empty_deck"


class OrdinalOutOfRange(DomainError):
    code = "ordinal_out_of_range"


# connector
class UnknownUser(DomainError):
    code = "unknown_user"


class UnknownDeck(DomainError):
    code = "unknown_deck"


class Busy(DomainError):
    code = "busy"


class InsufficientBalance(DomainError):
    code = "insufficient_balance"


class EmptyRecipientList(DomainError):
    code = "empty_recipient_list"


class LegNotRinging(DomainError):
    code = "leg_not_ringing"


class UnknownPending(DomainError):
    code = "unknown_pending"


class Expired(DomainError):
    code = "expired"


class NotParticipant(DomainError):
    code = "not_participant"


class UnknownTarget(DomainError):
    code = "unknown_target"


class StaleCall(DomainError):
    code = "stale_call"


# session
class NotTeacher(DomainError):
    code = "not_teacher"


class SessionEnded(DomainError):
    code = "session_ended"


class UnknownSession(DomainError):
    code = "unknown_session"


class NoCurrentSlide(DomainError):
    code = "no_current_slide"


class EmptyBody(DomainError):
    code = "empty_body"


class ControllerDisabled(DomainError):
    code = "controller_disabled"


class NotController(DomainError):
    code = "not_controller"


# timebank
class AlreadySettled(DomainError):
    code = "already_settled"


class DuplicateBonus(DomainError):
    code = "duplicate_bonus"


class DuplicateGrant(DomainError):
    code = "duplicate_grant"


# engage
class DuplicateRating(DomainError):
    code = "duplicate_rating"


class OutOfRange(DomainError):
    code = "out_of_range"


class UnknownToken(DomainError):
    code = "unknown_token"


class TokenAlreadyRedeemed(DomainError):
    code = "token_already_redeemed"


# gateway
class AuthFailed(DomainError):
    code = "auth_failed"


class ProtocolError(DomainError):
    code = "protocol_error"


class DuplicateUser(DomainError):
    code = "duplicate_user"

"""Live lesson sessions: slide cursor, hints, chat, and per-second ticks.

The teacher drives the slides; either participant can surface the hint or
end the lesson. A tick is one simulated/real second; when the student's
banked time runs out the session ends itself.
"""

from dataclasses import dataclass, field, asdict

from . import content
from .errors import (EmptyBody, NoCurrentSlide, NotParticipant, NotTeacher,
                     SessionEnded, UnknownSession)

MAX_CHAT_LEN = 2000


@dataclass
class ChatMessage:
    sender_id: str
    body: str
    at: int  # tick index


@dataclass
class LessonSession:
    session_id: str
    pending_id: str
    teacher_id: str
    student_id: str
    deck_id: str
    started_at: float
    controller_id: str | None = None
    cursor: int = 0
    hint_active: bool = False
    chat: list = field(default_factory=list)
    tick_count: int = 0
    state: str = "running"
    ended_by: str | None = None
    end_reason: str | None = None
    ended_at: float | None = None

    def participants(self):
        ids = [self.teacher_id, self.student_id]
        if self.controller_id:
            ids.append(self.controller_id)
        return ids


@dataclass(frozen=True)
class SessionSummary:
    session_id: str
    teacher_id: str
    student_id: str
    deck_id: str
    duration_s: int
    slides_completed: int
    deck_completed: bool
    words_learned: int
    ended_by: str
    ended_at: float


class Sessions:
    def __init__(self, decks: dict, profiles: dict):
        self.decks = decks
        self.profiles = profiles
        self.sessions: dict[str, LessonSession] = {}
        self._next_session = 1

    def _get(self, session_id: str) -> LessonSession:
        s = self.sessions.get(session_id)
        if s is None:
            raise UnknownSession(f"no such session {session_id!r}")
        return s

    def require_running(self, session_id: str) -> LessonSession:
        s = self._get(session_id)
        if s.state != "running":
            raise SessionEnded(f"session {session_id} already ended")
        return s

    def running(self):
        return [s for s in self.sessions.values() if s.state == "running"]

    # -- lifecycle --------------------------------------------------------------

    def start_lesson(self, pending_id: str, teacher_id: str, student_id: str,
                     deck_id: str, at: float,
                     controller_id: str | None = None) -> LessonSession:
        session = LessonSession(
            session_id=f"session-{self._next_session}",
            pending_id=pending_id,
            teacher_id=teacher_id,
            student_id=student_id,
            deck_id=deck_id,
            controller_id=controller_id,
            started_at=at,
        )
        self._next_session += 1
        self.sessions[session.session_id] = session
        return session

    def end_lesson(self, actor: str, session_id: str, at: float,
                   reason: str = "ended") -> SessionSummary:
        session = self.require_running(session_id)
        if actor != "system" and actor not in session.participants():
            raise NotParticipant(f"{actor} is not in session {session_id}")
        session.state = "ended"
        session.ended_by = actor
        session.end_reason = reason
        session.ended_at = at
        return self.summary(session)

    def summary(self, session: LessonSession) -> SessionSummary:
        deck = self.decks[session.deck_id]
        return SessionSummary(
            session_id=session.session_id,
            teacher_id=session.teacher_id,
            student_id=session.student_id,
            deck_id=session.deck_id,
            duration_s=session.tick_count,
            slides_completed=session.cursor,
            deck_completed=session.cursor == len(deck),
            words_learned=content.words_learned(deck, session.cursor),
            ended_by=session.ended_by or "",
            ended_at=session.ended_at or session.started_at,
        )

    # -- in-lesson operations --------------------------------------------------------

    def advance_slide(self, actor: str, session_id: str, direction: str) -> dict:
        session = self.require_running(session_id)
        if actor not in (session.teacher_id, session.controller_id):
            raise NotTeacher(f"only the teacher controls the slides, not {actor}")
        if direction not in ("next", "back"):
            raise NotTeacher(f"unknown direction {direction!r}")
        deck = self.decks[session.deck_id]
        n = len(deck)
        old = session.cursor
        if direction == "next":
            new = min(old + 1, n)
        else:
            new = max(old - 1, 1) if old > 0 else 0
        at_boundary = new == old
        if not at_boundary:
            session.cursor = new
            session.hint_active = False  # a hint belongs to one slide only
        return {"cursor": session.cursor, "at_boundary": at_boundary}

    def activate_hint(self, actor: str, session_id: str) -> LessonSession:
        session = self.require_running(session_id)
        if actor not in (session.teacher_id, session.student_id):
            raise NotParticipant(f"{actor} cannot activate hints here")
        if session.cursor < 1:
            raise NoCurrentSlide("the lesson has not reached a slide yet")
        session.hint_active = True
        return session

    def send_chat(self, actor: str, session_id: str, body: str) -> ChatMessage:
        session = self.require_running(session_id)
        if actor not in session.participants():
            raise NotParticipant(f"{actor} is not in session {session_id}")
        if not isinstance(body, str) or not body:
            raise EmptyBody("chat body must be non-empty")
        if len(body) > MAX_CHAT_LEN:
            raise EmptyBody(f"chat body over {MAX_CHAT_LEN} characters")
        msg = ChatMessage(actor, body, session.tick_count)
        session.chat.append(msg)
        return msg

    def clock_tick(self, session_id: str, student_balance: int, at: float):
        """Advance one second; returns ("ended", summary) on auto-end."""
        session = self.sessions.get(session_id)
        if session is None or session.state != "running":
            return ("ignored", None)
        if student_balance - session.tick_count <= 0:
            # never run a tick the student cannot pay for
            summary = self.end_lesson("system", session_id, at,
                                      reason="balance_exhausted")
            return ("ended", summary)
        session.tick_count += 1
        if student_balance - session.tick_count <= 0:
            summary = self.end_lesson("system", session_id, at,
                                      reason="balance_exhausted")
            return ("ended", summary)
        return ("running", session)

    # -- views ---------------------------------------------------------------------

    def role_of(self, session: LessonSession, user_id: str) -> str:
        if user_id == session.teacher_id:
            return "teacher"
        if user_id == session.student_id:
            return "student"
        if user_id == session.controller_id:
            return "controller"
        raise NotParticipant(f"{user_id} is not in session {session.session_id}")

    def view_for(self, session: LessonSession, user_id: str) -> dict | None:
        """The participant's current RoleView, or None before slide 1."""
        if session.cursor < 1:
            return None
        deck = self.decks[session.deck_id]
        role = self.role_of(session, user_id)
        native = self.profiles[user_id].native
        view = content.render_slide_view(deck, session.cursor, role, native,
                                         session.hint_active)
        return {
            "role": view.role,
            "ordinal": view.ordinal,
            "visible_fields": dict(view.visible_fields),
            "media": dict(view.media),
            "hint_available": view.hint_available,
            "hint_body": dict(view.hint_body) if view.hint_body else None,
            "progress": content.deck_progress(session.cursor, deck),
        }

    # -- persistence -------------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "sessions": {k: asdict(v) for k, v in sorted(self.sessions.items())},
            "next_session": self._next_session,
        }

    def load_state_dict(self, state: dict):
        self.sessions = {}
        for k, v in state["sessions"].items():
            v = dict(v)
            v["chat"] = [ChatMessage(**m) for m in v["chat"]]
            self.sessions[k] = LessonSession(**v)
        self._next_session = state["next_session"]

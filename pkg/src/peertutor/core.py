"""The application state machine.

Everything that mutates state flows through ``App.apply`` as an event
``(kind, payload, at)``; applying the same event sequence always produces
the same state, replies, and pushes, which is what makes the append-only
log a faithful source of truth. Queries go through ``App.read`` and touch
nothing.
"""

from dataclasses import dataclass, asdict

from .config import Config
from .connector import Connector, SearchFilter
from .engage import DeckCatalog, Engage, SessionRecord
from .errors import (ControllerDisabled, DomainError, DuplicateUser,
                     NotController, NotParticipant, ProtocolError,
                     UnknownSession, UnknownUser)
from .session import Sessions
from .timebank import TimeBank


@dataclass
class UserProfile:
    user_id: str
    native: str
    name: str = ""
    country: str | None = None
    gender: str | None = None
    age: int | None = None
    level: int | None = None


# message kinds that mutate state and therefore must be logged
EVENT_KINDS = frozenset({
    "register", "set_presence", "multicall", "accept", "confirm_ready",
    "cancel", "advance_slide", "hint", "chat", "end_lesson", "rate",
    "share", "invite_redeem", "signal", "tick", "attach_controller",
    "controller_decide",
})

# read-only message kinds, answered from current state, never logged
READ_KINDS = frozenset({
    "search", "missed_list", "balance", "leaderboard", "decks",
    "session_view", "presence",
})


@dataclass
class Outcome:
    result: dict
    pushes: list  # (user_id, kind, payload)


class App:
    def __init__(self, config: Config, decks: dict, start_time: float = 0.0):
        self.config = config
        self.decks = decks
        self.catalog = DeckCatalog(decks)
        self.users: dict[str, UserProfile] = {}
        self.credentials: dict[str, str] = {}
        self.controllers: dict[str, str] = {}  # student -> controller
        self.timebank = TimeBank(config.signup_grant_s, config.invite_bonus_s)
        self.engage = Engage(self.catalog, config.expert_threshold)
        self.connector = Connector(
            self.users, decks,
            handshake_timeout_s=config.handshake_timeout_s,
            missed_ttl_s=config.missed_ttl_s,
            can_start_learning=self.timebank.can_start_learning,
            rating_of=self.engage.avg_rating,
        )
        self.sessions = Sessions(decks, self.users)
        self.pending_to_session: dict[str, str] = {}
        self.now = start_time

    # -- dispatch -----------------------------------------------------------

    def apply(self, kind: str, payload: dict, at: float) -> Outcome:
        if kind not in EVENT_KINDS:
            raise ProtocolError(f"unknown event kind {kind!r}")
        self.now = max(self.now, at)
        handler = getattr(self, f"_apply_{kind}")
        try:
            result = handler(payload, at)
        except DomainError as exc:
            # rejections are still deterministic outcomes of the event
            exc.pushes = self._collect_pushes()
            raise
        return Outcome(result, self._collect_pushes())

    def read(self, kind: str, payload: dict) -> dict:
        if kind not in READ_KINDS:
            raise ProtocolError(f"unknown query kind {kind!r}")
        return getattr(self, f"_read_{kind}")(payload)

    def _collect_pushes(self) -> list:
        pushes = self.connector.drain_pushes()
        extra = getattr(self, "_pushes", None)
        if extra:
            pushes.extend(extra)
            self._pushes = []
        return pushes

    def _push(self, user_id: str, kind: str, payload: dict):
        if not hasattr(self, "_pushes"):
            self._pushes = []
        self._pushes.append((user_id, kind, payload))

    def _require_user(self, user_id) -> UserProfile:
        profile = self.users.get(user_id)
        if profile is None:
            raise UnknownUser(f"unknown user {user_id!r}")
        return profile

    # -- registration & presence ------------------------------------------------

    def _apply_register(self, payload: dict, at: float) -> dict:
        user_id = payload["user_id"]
        if user_id in self.users:
            raise DuplicateUser(f"user {user_id!r} already registered")
        profile = payload.get("profile", {})
        native = profile.get("native")
        if native not in self.config.languages:
            raise ProtocolError(f"native language {native!r} not configured")
        referral = payload.get("referral_token")
        inviter = None
        if referral is not None:
            # validate before creating anything; redeem after the grant
            if referral not in self.engage.tokens:
                from .errors import UnknownToken
                raise UnknownToken(f"no such referral token {referral!r}")
            if referral in self.engage.redeemed:
                from .errors import TokenAlreadyRedeemed
                raise TokenAlreadyRedeemed(f"token {referral!r} already used")
        self.users[user_id] = UserProfile(
            user_id=user_id,
            native=native,
            name=profile.get("name", ""),
            country=profile.get("country"),
            gender=profile.get("gender"),
            age=profile.get("age"),
            level=profile.get("level"),
        )
        self.credentials[user_id] = payload.get("token", "")
        self.connector.add_user(user_id, at)
        self.timebank.grant_signup(user_id, at)
        if referral is not None:
            inviter = self.engage.redeem_token(referral, user_id)
            self.timebank.grant_invite_bonus(inviter, user_id, at)
        return {"user_id": user_id, "balance": self.timebank.balance(user_id),
                "invited_by": inviter}

    def check_auth(self, user_id: str, token: str) -> bool:
        return (user_id in self.credentials
                and self.credentials[user_id] == token)

    def _apply_set_presence(self, payload: dict, at: float) -> dict:
        self._require_user(payload["user_id"])
        p = self.connector.set_presence(payload["user_id"], payload["status"], at)
        return {"user_id": p.user_id, "status": p.status, "since": p.since}

    # -- calling ------------------------------------------------------------------

    def _apply_multicall(self, payload: dict, at: float) -> dict:
        caller = payload["user_id"]
        self._require_user(caller)
        group = self.connector.initiate_multicall(
            caller, list(payload["recipients"]), payload["deck_id"], at)
        legs = [self.connector.leg_info(self.connector.legs[lid])
                for lid in group.leg_ids]
        return {"group_id": group.group_id, "state": group.state, "legs": legs}

    def _apply_accept(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        pending = self.connector.accept_call(user, payload["leg_id"], at)
        return {"pending_id": pending.pending_id, "caller_id": pending.caller_id,
                "recipient_id": pending.recipient_id, "deck_id": pending.deck_id,
                "deadline": pending.deadline}

    def _apply_confirm_ready(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        status, pending = self.connector.confirm_ready(
            user, payload["pending_id"], at)
        if status == "waiting":
            return {"status": "waiting", "pending_id": pending.pending_id}
        roles = self.connector.roles_for(pending)
        controller = None
        if self.config.controller_enabled:
            controller = self.controllers.get(roles["student_id"])
        session = self.sessions.start_lesson(
            pending.pending_id, roles["teacher_id"], roles["student_id"],
            pending.deck_id, at, controller_id=controller)
        self.pending_to_session[pending.pending_id] = session.session_id
        for participant in session.participants():
            self._push(participant, "session_started", {
                "session_id": session.session_id,
                "deck_id": session.deck_id,
                "teacher_id": session.teacher_id,
                "student_id": session.student_id,
                "your_role": self.sessions.role_of(session, participant),
            })
        return {"status": "session_started", "session_id": session.session_id}

    def _apply_cancel(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        return self.connector.cancel_call(user, payload["target_id"], at)

    # -- lesson --------------------------------------------------------------------

    def _broadcast_views(self, session, kind: str, extra: dict):
        for participant in session.participants():
            view = self.sessions.view_for(session, participant)
            self._push(participant, kind, {**extra, "view": view})

    def _apply_advance_slide(self, payload: dict, at: float) -> dict:
        session = self.sessions.require_running(payload["session_id"])
        result = self.sessions.advance_slide(
            payload["user_id"], payload["session_id"], payload["direction"])
        self._broadcast_views(session, "slide_update", {
            "session_id": session.session_id, **result})
        return result

    def _apply_hint(self, payload: dict, at: float) -> dict:
        session = self.sessions.activate_hint(
            payload["user_id"], payload["session_id"])
        self._broadcast_views(session, "hint_update", {
            "session_id": session.session_id, "hint_active": True})
        return {"hint_active": True,
                "view": self.sessions.view_for(session, session.student_id)}

    def _apply_chat(self, payload: dict, at: float) -> dict:
        msg = self.sessions.send_chat(
            payload["user_id"], payload["session_id"], payload["body"])
        session = self.sessions.sessions[payload["session_id"]]
        for participant in session.participants():
            self._push(participant, "chat_msg", {
                "session_id": session.session_id,
                "sender_id": msg.sender_id, "body": msg.body, "at": msg.at})
        return {"at": msg.at}

    def _apply_end_lesson(self, payload: dict, at: float) -> dict:
        summary = self.sessions.end_lesson(
            payload["user_id"], payload["session_id"], at)
        self._finish_session(summary, at)
        return {"summary": asdict(summary)}

    def _finish_session(self, summary, at: float):
        """Settle, apply gamification, and free both parties. Runs once per
        session because end_lesson rejects a second end."""
        deck = self.decks[summary.deck_id]
        self.timebank.settle_session(
            summary.session_id, summary.teacher_id, summary.student_id,
            summary.duration_s, at)
        self.engage.on_session_end(SessionRecord(
            session_id=summary.session_id,
            teacher_id=summary.teacher_id,
            student_id=summary.student_id,
            deck_id=summary.deck_id,
            set_id=deck.set_id,
            duration_s=summary.duration_s,
            deck_completed=summary.deck_completed,
            words_learned=summary.words_learned,
            ended_at=summary.ended_at,
        ), at)
        session = self.sessions.sessions[summary.session_id]
        self.connector.release_after_session(session.pending_id, at)
        for participant in session.participants():
            self._push(participant, "session_ended",
                       {"summary": asdict(summary)})
        for participant in (summary.teacher_id, summary.student_id):
            self._push(participant, "rate_prompt",
                       {"session_id": summary.session_id})

    def _apply_tick(self, payload: dict, at: float) -> dict:
        self.connector.on_tick(at)
        ticked = 0
        for session in sorted(self.sessions.running(),
                              key=lambda s: s.session_id):
            balance = self.timebank.balance(session.student_id)
            status, obj = self.sessions.clock_tick(
                session.session_id, balance, at)
            if status == "running":
                ticked += 1
                for participant in session.participants():
                    self._push(participant, "tick", {
                        "session_id": session.session_id,
                        "tick_count": session.tick_count,
                        "student_remaining": balance - session.tick_count,
                    })
            elif status == "ended":
                self._finish_session(obj, at)
        return {"now": at, "sessions_ticked": ticked}

    # -- ratings, sharing, controller -----------------------------------------------

    def _apply_rate(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        rating = self.engage.record_rating(
            user, payload["session_id"], payload["stars"], at)
        mean, count = self.engage.avg_rating(rating.ratee_id)
        return {"ratee_id": rating.ratee_id, "mean": mean, "count": count}

    def _apply_share(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        return dict(self.engage.share_event(user, payload["kind"], at))

    def _apply_invite_redeem(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        inviter = self.engage.redeem_token(payload["token"], user)
        entry = self.timebank.grant_invite_bonus(inviter, user, at)
        return {"inviter": inviter, "bonus_seconds": entry.delta_seconds}

    def _apply_signal(self, payload: dict, at: float) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        to = payload["to"]
        self._require_user(to)
        ref = payload["ref"]
        participants = self._signal_participants(ref)
        if user not in participants or to not in participants:
            raise NotParticipant(f"signal outside of {ref}")
        # body is opaque: relayed byte-exact, never parsed
        self._push(to, "signal", {"ref": ref, "from_user": user,
                                  "body": payload["body"]})
        return {"relayed": True}

    def _signal_participants(self, ref: str):
        pending = self.connector.pendings.get(ref)
        if pending is not None and pending.state in ("active", "confirmed"):
            return pending.parties()
        session = self.sessions.sessions.get(ref)
        if session is not None:
            return session.participants()
        from .errors import UnknownTarget
        raise UnknownTarget(f"no pending or session {ref!r}")

    def _apply_attach_controller(self, payload: dict, at: float) -> dict:
        if not self.config.controller_enabled:
            raise ControllerDisabled("the controller role is disabled")
        self._require_user(payload["controller_id"])
        self._require_user(payload["student_id"])
        self.controllers[payload["student_id"]] = payload["controller_id"]
        return {"student_id": payload["student_id"],
                "controller_id": payload["controller_id"]}

    def _apply_controller_decide(self, payload: dict, at: float) -> dict:
        if not self.config.controller_enabled:
            raise ControllerDisabled("the controller role is disabled")
        user = payload["user_id"]
        student = payload["student_id"]
        if self.controllers.get(student) != user:
            raise NotController(f"{user} does not oversee {student}")
        unlocked = self.engage.controller_decide(
            student, payload["set_id"], payload["decision"])
        return {"student_id": student, "unlocked_sets": unlocked}

    # -- reads ---------------------------------------------------------------------

    def _read_search(self, payload: dict) -> dict:
        seeker = payload["user_id"]
        self._require_user(seeker)
        flt = SearchFilter(
            taught_language=payload["taught_language"],
            country=payload.get("country"),
            gender=payload.get("gender"),
            age_min=payload.get("age_min"),
            age_max=payload.get("age_max"),
            level=payload.get("level"),
        )
        results = self.connector.search_partners(seeker, flt, self.now)
        for row in results:
            profile = self.users[row["user_id"]]
            row.update(native=profile.native, country=profile.country,
                       gender=profile.gender, age=profile.age,
                       expert=self.engage.has_accolade(row["user_id"], "expert"))
        return {"results": results}

    def _read_missed_list(self, payload: dict) -> dict:
        self._require_user(payload["user_id"])
        return {"missed": self.connector.list_missed_calls(
            payload["user_id"], self.now)}

    def _read_balance(self, payload: dict) -> dict:
        user = payload["user_id"]
        self._require_user(user)
        seconds = self.timebank.balance(user)
        return {"user_id": user, "seconds": seconds,
                "can_start_learning": self.timebank.can_start_learning(user)}

    def _read_leaderboard(self, payload: dict) -> dict:
        return {"month": payload["month"],
                "rows": self.engage.leaderboard(payload["month"],
                                                payload.get("limit", 10))}

    def _read_decks(self, payload: dict) -> dict:
        user = payload.get("user_id")
        unlocked = (self.engage.unlocked_sets(user) if user in self.users
                    else {self.catalog.first_set()})
        completed = self.engage.completed.get(user, set())
        rows = []
        for set_id in self.catalog.set_ids:
            for deck_id in self.catalog.sets[set_id]:
                deck = self.decks[deck_id]
                rows.append({
                    "deck_id": deck_id,
                    "title": dict(deck.title),
                    "taught_language": deck.taught_language,
                    "level": deck.level,
                    "set_id": set_id,
                    "set_ordinal": deck.set_ordinal,
                    "slides": len(deck),
                    "unlocked": set_id in unlocked,
                    "completed": deck_id in completed,
                })
        return {"decks": rows}

    def _read_session_view(self, payload: dict) -> dict:
        session = self.sessions.sessions.get(payload["session_id"])
        if session is None:
            raise UnknownSession(f"no such session {payload['session_id']!r}")
        user = payload["user_id"]
        view = self.sessions.view_for(session, user)
        return {
            "session_id": session.session_id,
            "state": session.state,
            "cursor": session.cursor,
            "hint_active": session.hint_active,
            "tick_count": session.tick_count,
            "your_role": self.sessions.role_of(session, user),
            "view": view,
            "chat": [{"sender_id": m.sender_id, "body": m.body, "at": m.at}
                     for m in session.chat],
        }

    def _read_presence(self, payload: dict) -> dict:
        user = payload["user_id"]
        p = self.connector.presences.get(user)
        if p is None:
            raise UnknownUser(f"unknown user {user!r}")
        return {"user_id": user, "status": p.status, "since": p.since}

    # -- persistence -----------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "now": self.now,
            "users": {u: asdict(p) for u, p in sorted(self.users.items())},
            "credentials": dict(sorted(self.credentials.items())),
            "controllers": dict(sorted(self.controllers.items())),
            "connector": self.connector.state_dict(),
            "sessions": self.sessions.state_dict(),
            "timebank": self.timebank.state_dict(),
            "engage": self.engage.state_dict(),
            "pending_to_session": dict(sorted(self.pending_to_session.items())),
        }

    def load_state_dict(self, state: dict):
        self.now = state["now"]
        self.users.clear()
        self.users.update({u: UserProfile(**p) for u, p in state["users"].items()})
        self.credentials = dict(state["credentials"])
        self.controllers = dict(state["controllers"])
        self.connector.load_state_dict(state["connector"])
        self.sessions.load_state_dict(state["sessions"])
        self.timebank = TimeBank.from_state_dict(state["timebank"])
        self.connector.can_start_learning = self.timebank.can_start_learning
        self.engage = Engage.from_state_dict(state["engage"], self.catalog)
        self.connector.rating_of = self.engage.avg_rating
        self.pending_to_session = dict(state["pending_to_session"])

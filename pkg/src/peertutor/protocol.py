"""Wire protocol: line-delimited JSON envelopes and their dispatch.

An envelope is ``{"type": ..., "seq": n, "payload": {...}}``; replies echo
the request's seq as ``in_reply_to``. The dispatcher is transport-agnostic:
the TCP gateway and the in-process simulation harness both drive it, so
bots exercise exactly the messages real clients send.
"""

import json

from .core import App
from .errors import AuthFailed, DomainError, ProtocolError

# client request type -> logged event kind
EVENT_TYPES = {
    "set_presence": "set_presence",
    "multicall": "multicall",
    "accept": "accept",
    "confirm_ready": "confirm_ready",
    "cancel": "cancel",
    "advance_slide": "advance_slide",
    "hint": "hint",
    "chat": "chat",
    "end_lesson": "end_lesson",
    "rate": "rate",
    "share": "share",
    "invite_redeem": "invite_redeem",
    "signal": "signal",
}

# client request type -> read kind
READ_TYPES = {
    "search": "search",
    "missed_list": "missed_list",
    "balance": "balance",
    "leaderboard": "leaderboard",
    "decks": "decks",
    "session_view": "session_view",
    "presence": "presence",
}


def encode(envelope: dict) -> bytes:
    return (json.dumps(envelope, separators=(",", ":"),
                       ensure_ascii=False) + "\n").encode("utf-8")


def decode_line(line: bytes) -> dict:
    try:
        envelope = json.loads(line.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"envelope is not valid JSON: {exc}") from exc
    if not isinstance(envelope, dict):
        raise ProtocolError("envelope must be an object")
    if not isinstance(envelope.get("type"), str):
        raise ProtocolError("envelope missing string 'type'")
    if not isinstance(envelope.get("seq"), int):
        raise ProtocolError("envelope missing integer 'seq'")
    payload = envelope.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("'payload' must be an object")
    return envelope


class ConnState:
    """Per-connection protocol state."""

    def __init__(self):
        self.user_id = None
        self.last_seq = 0
        self.out_seq = 0

    def next_out_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq


class Dispatcher:
    """Applies envelopes to the App, logging mutating events first.

    handle() returns ``(reply_envelope, pushes)`` where pushes are
    ``(user_id, envelope)`` pairs the transport must fan out. It never
    raises for client mistakes; it raises ProtocolError only for
    envelope-level violations that should close the connection.
    """

    def __init__(self, app: App, store=None, clock=None):
        self.app = app
        self.store = store
        self.clock = clock or (lambda: self.app.now)

    def _log(self, kind: str, payload: dict, at: float):
        if self.store is not None:
            self.store.append(kind, payload, at)

    def _post_apply(self):
        if self.store is not None:
            self.store.maybe_snapshot(self.app)

    def tick(self, at: float):
        """Inject one clock second; returns pushes."""
        self._log("tick", {}, at)
        outcome = self.app.apply("tick", {}, at)
        self._post_apply()
        return outcome.pushes

    def apply_event(self, kind: str, payload: dict, at: float):
        """Log-then-apply one event outside any connection (admin use)."""
        self._log(kind, payload, at)
        try:
            outcome = self.app.apply(kind, payload, at)
        finally:
            self._post_apply()
        return outcome

    def handle(self, conn: ConnState, envelope: dict):
        seq = envelope["seq"]
        if seq <= conn.last_seq:
            raise ProtocolError(f"seq {seq} is not greater than {conn.last_seq}")
        conn.last_seq = seq
        mtype = envelope["type"]
        payload = envelope.get("payload", {})
        at = self.clock()

        if mtype == "auth":
            return self._handle_auth(conn, seq, payload, at), []
        if conn.user_id is None:
            return self._error(seq, AuthFailed("authenticate first")), []

        payload = {**payload, "user_id": conn.user_id}
        if mtype in READ_TYPES:
            try:
                result = self.app.read(READ_TYPES[mtype], payload)
            except DomainError as exc:
                return self._error(seq, exc), []
            except KeyError as exc:
                return self._error(seq, ProtocolError(f"missing field {exc}")), []
            return self._ok(mtype, seq, result), []
        if mtype in EVENT_TYPES:
            self._log(EVENT_TYPES[mtype], payload, at)
            try:
                outcome = self.app.apply(EVENT_TYPES[mtype], payload, at)
            except DomainError as exc:
                self._post_apply()
                pushes = self._wrap_pushes(getattr(exc, "pushes", []))
                return self._error(seq, exc), pushes
            except KeyError as exc:
                self._post_apply()
                return self._error(seq, ProtocolError(f"missing field {exc}")), []
            self._post_apply()
            return self._ok(mtype, seq, outcome.result), self._wrap_pushes(
                outcome.pushes)
        return self._error(seq, ProtocolError(f"unknown message type {mtype!r}")), []

    def _handle_auth(self, conn: ConnState, seq: int, payload: dict, at: float):
        user_id = payload.get("user_id")
        token = payload.get("token", "")
        if not isinstance(user_id, str) or not user_id:
            return self._error(seq, AuthFailed("user_id required"))
        if user_id not in self.app.users:
            register = payload.get("register")
            if not isinstance(register, dict):
                return self._error(seq, AuthFailed(
                    f"unknown user {user_id!r}; include a register block"))
            event = {"user_id": user_id, "token": token, "profile": register}
            if "referral_token" in payload:
                event["referral_token"] = payload["referral_token"]
            self._log("register", event, at)
            try:
                self.app.apply("register", event, at)
            except DomainError as exc:
                self._post_apply()
                return self._error(seq, exc)
            self._post_apply()
        elif not self.app.check_auth(user_id, token):
            return self._error(seq, AuthFailed("bad credentials"))
        conn.user_id = user_id
        return self._ok("auth", seq, {
            "user_id": user_id,
            "balance": self.app.timebank.balance(user_id),
        })

    def _ok(self, mtype: str, seq: int, result: dict) -> dict:
        return {"type": f"{mtype}_ok", "in_reply_to": seq, "payload": result}

    def _error(self, seq: int, exc: DomainError) -> dict:
        return {"type": "error", "in_reply_to": seq,
                "payload": {"code": exc.code, "message": str(exc)}}

    @staticmethod
    def _wrap_pushes(pushes):
        return [(user_id, {"type": kind, "payload": payload})
                for user_id, kind, payload in pushes]

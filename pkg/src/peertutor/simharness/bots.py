"""Scripted bot clients speaking the real envelope protocol in-process.

A bot is a small state projection over its replies and pushes (incoming
legs, current pending, current session), plus a vocabulary of actions a
scenario schedule can invoke by name. Everything is synchronous and
single-threaded so runs are reproducible.
"""

from ..protocol import ConnState, Dispatcher


class LocalNetwork:
    """In-process transport: routes dispatcher pushes to bot inboxes."""

    def __init__(self, dispatcher: Dispatcher):
        self.dispatcher = dispatcher
        self.bots: dict[str, "BotClient"] = {}

    def attach(self, bot: "BotClient"):
        self.bots[bot.user_id] = bot

    def send(self, bot: "BotClient", mtype: str, payload: dict) -> dict:
        envelope = {"type": mtype, "seq": bot.conn.last_seq + 1,
                    "payload": payload}
        reply, pushes = self.dispatcher.handle(bot.conn, envelope)
        self._route(pushes)
        return reply

    def tick(self, at: float):
        pushes = self.dispatcher.tick(at)
        self._route([(u, {"type": k, "payload": p}) for u, k, p in pushes])

    def _route(self, pushes):
        for user_id, envelope in pushes:
            bot = self.bots.get(user_id)
            if bot is not None and bot.connected:
                bot.on_push(envelope)


class BotClient:
    def __init__(self, network: LocalNetwork, user_id: str, profile: dict,
                 token: str = "tok"):
        self.network = network
        self.user_id = user_id
        self.profile = profile
        self.token = token
        self.conn = ConnState()
        self.connected = True
        # projected state
        self.incoming: list[dict] = []   # ringing legs, arrival order
        self.pending_id: str | None = None
        self.session_id: str | None = None
        self.group_id: str | None = None
        self.my_role: str | None = None
        self.tokens_minted: list[str] = []
        self.replies: list[dict] = []
        self.pushes: list[dict] = []
        network.attach(self)

    # -- protocol ---------------------------------------------------------------

    def send(self, mtype: str, payload: dict | None = None) -> dict:
        reply = self.network.send(self, mtype, payload or {})
        self.replies.append(reply)
        if reply["type"] != "error":
            self._on_reply(mtype, reply["payload"])
        return reply

    def ok(self, mtype: str, payload: dict | None = None) -> dict:
        reply = self.send(mtype, payload)
        if reply["type"] == "error":
            raise AssertionError(
                f"{self.user_id} {mtype} failed: {reply['payload']}")
        return reply["payload"]

    def _on_reply(self, mtype: str, payload: dict):
        if mtype == "multicall":
            self.group_id = payload["group_id"]
        elif mtype == "accept":
            self.pending_id = payload["pending_id"]
        elif mtype == "confirm_ready" and payload.get("status") == "session_started":
            self.session_id = payload["session_id"]
            self.pending_id = None
        elif mtype == "share" and "token" in payload:
            self.tokens_minted.append(payload["token"])

    def on_push(self, envelope: dict):
        self.pushes.append(envelope)
        kind = envelope["type"]
        payload = envelope["payload"]
        if kind == "call_incoming":
            self.incoming = [leg for leg in self.incoming
                             if leg["leg_id"] != payload["leg_id"]]
            self.incoming.append(payload)
        elif kind in ("call_held", "call_withdrawn"):
            if "leg_id" in payload:
                self.incoming = [leg for leg in self.incoming
                                 if leg["leg_id"] != payload["leg_id"]]
        elif kind == "pending_started":
            self.pending_id = payload["pending_id"]
        elif kind == "pending_cancelled":
            if self.pending_id == payload["pending_id"]:
                self.pending_id = None
        elif kind == "session_started":
            self.session_id = payload["session_id"]
            self.my_role = payload["your_role"]
            self.pending_id = None
        elif kind == "session_ended":
            if self.session_id == payload["summary"]["session_id"]:
                self.session_id = None

    # -- behavior vocabulary ----------------------------------------------------------

    def register(self, referral_token=None):
        payload = {"user_id": self.user_id, "token": self.token,
                   "register": self.profile}
        if referral_token:
            payload["referral_token"] = referral_token
        return self.send("auth", payload)

    def act(self, action: str, args: dict) -> dict:
        """Run one named behavior step; returns the reply envelope."""
        handler = getattr(self, f"do_{action}", None)
        if handler is None:
            raise ValueError(f"unknown bot action {action!r}")
        return handler(**args)

    def do_presence(self, status="available"):
        return self.send("set_presence", {"status": status})

    def do_search(self, taught_language, **filters):
        return self.send("search", {"taught_language": taught_language,
                                    **filters})

    def do_call(self, recipients, deck):
        return self.send("multicall", {"recipients": recipients,
                                       "deck_id": deck})

    def do_accept(self, leg_id=None):
        if leg_id is None and self.incoming:
            leg_id = self.incoming[-1]["leg_id"]
        return self.send("accept", {"leg_id": leg_id or "leg-none"})

    def do_confirm(self):
        return self.send("confirm_ready",
                         {"pending_id": self.pending_id or "pending-none"})

    def do_cancel(self, target=None):
        target = target or self.pending_id or self.group_id or "none"
        return self.send("cancel", {"target_id": target})

    def do_decline(self):
        leg_id = self.incoming[-1]["leg_id"] if self.incoming else "leg-none"
        return self.send("cancel", {"target_id": leg_id})

    def do_missed_connect(self):
        reply = self.send("missed_list", {})
        missed = reply["payload"]["missed"] if reply["type"] != "error" else []
        if not missed:
            return reply
        return self.send("accept", {"leg_id": missed[0]["leg_id"]})

    def do_advance(self, direction="next"):
        return self.send("advance_slide",
                         {"session_id": self.session_id or "session-none",
                          "direction": direction})

    def do_hint(self):
        return self.send("hint",
                         {"session_id": self.session_id or "session-none"})

    def do_chat(self, body="hello"):
        return self.send("chat",
                         {"session_id": self.session_id or "session-none",
                          "body": body})

    def do_end(self):
        return self.send("end_lesson",
                         {"session_id": self.session_id or "session-none"})

    def do_rate(self, stars=5, session_id=None):
        ended = session_id
        if ended is None:
            for push in reversed(self.pushes):
                if push["type"] == "rate_prompt":
                    ended = push["payload"]["session_id"]
                    break
        return self.send("rate", {"session_id": ended or "session-none",
                                  "stars": stars})

    def do_share(self, kind="invite"):
        return self.send("share", {"kind": kind})

    def do_redeem(self, token=None):
        if token is None:
            # harness shortcut: grab the newest token minted by someone else
            for other in self.network.bots.values():
                if other is not self and other.tokens_minted:
                    token = other.tokens_minted[-1]
                    break
        return self.send("invite_redeem", {"token": token or "inv-none"})

    def do_drop(self):
        # connection vanishes; presence follows on the server's terms
        self.connected = False
        return {"type": "dropped", "payload": {}}

    def do_reconnect(self):
        self.conn = ConnState()
        self.connected = True
        return self.send("auth", {"user_id": self.user_id, "token": self.token})

    def do_signal(self, to, body="blob"):
        ref = self.session_id or self.pending_id or "none"
        return self.send("signal", {"ref": ref, "to": to, "body": body})

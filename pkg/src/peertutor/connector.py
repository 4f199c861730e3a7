"""Presence, partner search, and the multi-call state machine.

One caller fans a request out to several recipients at once; accepting a
leg opens a two-sided confirmation handshake during which every other
call touching either party is put on hold (invisible to its recipient)
and resumed if the handshake falls through. Requests that reach a busy or
offline user queue up as missed calls, reconnectable while fresh.

All mutation happens on the single application event queue; this class is
not itself thread-safe and must only be driven from that queue.
"""

from dataclasses import dataclass, field, asdict

from .errors import (Busy, EmptyRecipientList, Expired, InsufficientBalance,
                     LegNotRinging, NotParticipant, OutOfRange, StaleCall,
                     UnknownDeck, UnknownPending, UnknownTarget, UnknownUser)

PRESENCE_STATES = ("offline", "available", "calling", "pending", "in_session")

# The only lawful leg transitions; every other state is terminal.
LEGAL_LEG_EDGES = {
    "ringing": {"held", "withdrawn", "missed", "expired", "accepted", "declined"},
    "held": {"ringing", "withdrawn", "expired"},
}

LIVE_LEG_STATES = ("ringing", "held")


@dataclass
class Presence:
    user_id: str
    status: str = "offline"
    since: float = 0.0


@dataclass
class Leg:
    leg_id: str
    group_id: str | None
    caller_id: str
    recipient_id: str
    deck_id: str
    state: str
    created_at: float


@dataclass
class CallGroup:
    group_id: str
    caller_id: str
    deck_id: str
    leg_ids: list
    state: str = "active"  # active | connected | cancelled | expired


@dataclass
class PendingSession:
    pending_id: str
    caller_id: str
    recipient_id: str
    deck_id: str
    leg_id: str
    via_missed: bool
    deadline: float
    confirmed: set = field(default_factory=set)
    held_leg_ids: list = field(default_factory=list)
    state: str = "active"  # active | confirmed | cancelled | expired

    def parties(self):
        return (self.caller_id, self.recipient_id)


@dataclass(frozen=True)
class SearchFilter:
    taught_language: str
    country: str | None = None
    gender: str | None = None
    age_min: int | None = None
    age_max: int | None = None
    level: int | None = None

    def __post_init__(self):
        if (self.age_min is not None and self.age_max is not None
                and self.age_min > self.age_max):
            raise OutOfRange("age_min must be <= age_max")


class Connector:
    def __init__(self, profiles: dict, decks: dict, *,
                 handshake_timeout_s: int = 60, missed_ttl_s: int = 600,
                 can_start_learning=None, rating_of=None):
        self.profiles = profiles            # user_id -> UserProfile (shared with App)
        self.decks = decks
        self.handshake_timeout_s = handshake_timeout_s
        self.missed_ttl_s = missed_ttl_s
        self.can_start_learning = can_start_learning or (lambda u: True)
        self.rating_of = rating_of or (lambda u: (0.0, 0))
        self.presences: dict[str, Presence] = {}
        self.legs: dict[str, Leg] = {}
        self.groups: dict[str, CallGroup] = {}
        self.pendings: dict[str, PendingSession] = {}
        self.missed_queue: dict[str, list] = {}  # recipient -> leg_ids, arrival order
        self.current_pending: dict[str, str] = {}  # user -> engagement's pending_id
        self.transitions: list = []              # (leg_id, old, new) audit journal
        self.pushes: list = []                   # (user_id, type, payload) buffer
        self._next_group = 1
        self._next_leg = 1
        self._next_pending = 1

    # -- plumbing -------------------------------------------------------------

    def add_user(self, user_id: str, at: float):
        self.presences[user_id] = Presence(user_id, "offline", at)

    def _presence(self, user_id: str) -> Presence:
        p = self.presences.get(user_id)
        if p is None:
            raise UnknownUser(f"unknown user {user_id!r}")
        return p

    def _push(self, user_id: str, kind: str, payload: dict):
        self.pushes.append((user_id, kind, payload))

    def drain_pushes(self):
        out, self.pushes = self.pushes, []
        return out

    def _set_status(self, user_id: str, status: str, at: float):
        p = self._presence(user_id)
        if p.status != status:
            p.status = status
            p.since = at

    def _set_leg_state(self, leg: Leg, new: str):
        if new not in LEGAL_LEG_EDGES.get(leg.state, ()):
            raise AssertionError(
                f"illegal leg transition {leg.state} -> {new} on {leg.leg_id}")
        self.transitions.append((leg.leg_id, leg.state, new))
        leg.state = new

    def leg_info(self, leg: Leg) -> dict:
        return asdict(leg)

    # -- presence --------------------------------------------------------------

    def set_presence(self, user_id: str, status: str, at: float) -> Presence:
        if status not in ("available", "offline"):
            raise OutOfRange(f"presence can only be set to available/offline, "
                             f"got {status!r}")
        p = self._presence(user_id)
        if p.status in ("pending", "in_session"):
            raise Busy(f"{user_id} is {p.status}; finish or cancel first")
        was_calling = p.status == "calling"
        if status == "offline":
            # inbound ringing legs will never be answered now: queue as missed
            for leg in list(self.legs.values()):
                if leg.recipient_id == user_id and leg.state == "ringing":
                    self._to_missed(leg)
        if was_calling:
            group = self._active_group_of(user_id)
            if group is not None:
                self._cancel_group(group, at)
        self._set_status(user_id, status, at)
        return p

    # -- search -----------------------------------------------------------------

    def search_partners(self, seeker: str, flt: SearchFilter, at: float) -> list:
        self._presence(seeker)
        rows = []
        for user_id, profile in self.profiles.items():
            if user_id == seeker:
                continue
            p = self.presences.get(user_id)
            if p is None or p.status != "available":
                continue
            if profile.native != flt.taught_language:
                continue
            if flt.country is not None and profile.country != flt.country:
                continue
            if flt.gender is not None and profile.gender != flt.gender:
                continue
            if flt.age_min is not None and (profile.age is None
                                            or profile.age < flt.age_min):
                continue
            if flt.age_max is not None and (profile.age is None
                                            or profile.age > flt.age_max):
                continue
            if flt.level is not None and profile.level != flt.level:
                continue
            mean, count = self.rating_of(user_id)
            rows.append((-mean, p.since, user_id, count))
        rows.sort()
        return [
            {"user_id": u, "rating": -neg_mean, "rating_count": c,
             "available_since": since}
            for neg_mean, since, u, c in rows
        ]

    # -- multi-call -------------------------------------------------------------

    def _student_of(self, caller_id: str, recipient_id: str, deck) -> str:
        # the native speaker of the taught language teaches; recipient wins ties
        if self.profiles[recipient_id].native == deck.taught_language:
            return caller_id
        if self.profiles[caller_id].native == deck.taught_language:
            return recipient_id
        return caller_id

    def initiate_multicall(self, caller: str, recipients: list, deck_id: str,
                           at: float) -> CallGroup:
        p = self._presence(caller)
        if p.status != "available":
            raise Busy(f"{caller} is {p.status}, cannot start a call")
        if not recipients:
            raise EmptyRecipientList("recipients must be a non-empty list")
        if len(set(recipients)) != len(recipients):
            raise OutOfRange("recipients must be distinct")
        if caller in recipients:
            raise OutOfRange("cannot call yourself")
        for r in recipients:
            self._presence(r)
        deck = self.decks.get(deck_id)
        if deck is None:
            raise UnknownDeck(f"unknown deck {deck_id!r}")
        # the party who will learn must have time in the bank
        if (self.profiles[caller].native != deck.taught_language
                and not self.can_start_learning(caller)):
            raise InsufficientBalance(f"{caller} has no learning time banked")

        group = CallGroup(f"group-{self._next_group}", caller, deck_id, [])
        self._next_group += 1
        self.groups[group.group_id] = group
        for r in recipients:
            leg = Leg(f"leg-{self._next_leg}", group.group_id, caller, r,
                      deck_id, "ringing", at)
            self._next_leg += 1
            self.legs[leg.leg_id] = leg
            group.leg_ids.append(leg.leg_id)
            if self.presences[r].status == "available":
                self._push(r, "call_incoming", self.leg_info(leg))
            else:
                # busy or offline line: straight to their missed queue
                self._to_missed(leg, check_liveness=False)
        self._set_status(caller, "calling", at)
        self._check_group_liveness(group, at)
        return group

    def _to_missed(self, leg: Leg, check_liveness: bool = True):
        self._set_leg_state(leg, "missed")
        self.missed_queue.setdefault(leg.recipient_id, []).append(leg.leg_id)
        self._push(leg.recipient_id, "call_missed", self.leg_info(leg))
        if check_liveness:
            group = self.groups.get(leg.group_id)
            if group is not None:
                self._check_group_liveness(group, leg.created_at)

    def _live_legs(self, group: CallGroup):
        return [self.legs[lid] for lid in group.leg_ids
                if self.legs[lid].state in LIVE_LEG_STATES]

    def _active_group_of(self, user_id: str) -> CallGroup | None:
        for group in self.groups.values():
            if group.caller_id == user_id and group.state == "active":
                return group
        return None

    def _check_group_liveness(self, group: CallGroup, at: float):
        """An active group with no live legs can never connect: expire it."""
        if group.state != "active" or self._live_legs(group):
            return
        group.state = "expired"
        self._push(group.caller_id, "group_expired", {"group_id": group.group_id})
        p = self.presences.get(group.caller_id)
        if p is not None and p.status == "calling":
            self._set_status(group.caller_id, "available", at)

    # -- accept / handshake --------------------------------------------------------

    def accept_call(self, recipient: str, leg_id: str, at: float) -> PendingSession:
        leg = self.legs.get(leg_id)
        if leg is None:
            raise LegNotRinging(f"no such leg {leg_id!r}")
        if leg.recipient_id != recipient:
            raise NotParticipant(f"{recipient} is not the recipient of {leg_id}")
        p = self._presence(recipient)
        if p.status not in ("available", "calling"):
            raise Busy(f"{recipient} is {p.status}")
        via_missed = False
        if leg.state == "ringing":
            pass
        elif leg.state == "missed":
            # reconnect of a missed call: original caller must be free again
            caller_p = self._presence(leg.caller_id)
            if caller_p.status != "available":
                raise StaleCall(f"caller {leg.caller_id} is {caller_p.status}")
            if at - leg.created_at > self.missed_ttl_s:
                raise StaleCall("missed call is too old to connect")
            via_missed = True
        else:
            raise LegNotRinging(f"leg {leg_id} is {leg.state}")

        pending = PendingSession(
            pending_id=f"pending-{self._next_pending}",
            caller_id=leg.caller_id,
            recipient_id=recipient,
            deck_id=leg.deck_id,
            leg_id=leg.leg_id,
            via_missed=via_missed,
            deadline=at + self.handshake_timeout_s,
        )
        self._next_pending += 1
        self.pendings[pending.pending_id] = pending
        if via_missed:
            queue = self.missed_queue.get(recipient, [])
            if leg.leg_id in queue:
                queue.remove(leg.leg_id)

        # every other live call touching either party goes on hold
        for other in self.legs.values():
            if other.leg_id == leg.leg_id or other.state != "ringing":
                continue
            if (other.recipient_id in pending.parties()
                    or other.caller_id in pending.parties()):
                self._set_leg_state(other, "held")
                pending.held_leg_ids.append(other.leg_id)
                self._push(other.recipient_id, "call_held", self.leg_info(other))

        for party in pending.parties():
            self._set_status(party, "pending", at)
            self.current_pending[party] = pending.pending_id
            self._push(party, "pending_started", {
                "pending_id": pending.pending_id,
                "caller_id": pending.caller_id,
                "recipient_id": pending.recipient_id,
                "deck_id": pending.deck_id,
                "deadline": pending.deadline,
            })
        return pending

    def confirm_ready(self, user_id: str, pending_id: str, at: float):
        pending = self.pendings.get(pending_id)
        if pending is None or pending.state != "active":
            raise UnknownPending(f"no active pending {pending_id!r}")
        if user_id not in pending.parties():
            raise NotParticipant(f"{user_id} is not part of {pending_id}")
        if at >= pending.deadline:
            self._resolve_pending(pending, "expired", at)
            raise Expired(f"pending {pending_id} timed out before confirmation")
        pending.confirmed.add(user_id)
        if pending.confirmed != set(pending.parties()):
            return ("waiting", pending)
        self._establish(pending, at)
        return ("session_started", pending)

    def _establish(self, pending: PendingSession, at: float):
        pending.state = "confirmed"
        leg = self.legs[pending.leg_id]
        if leg.state == "ringing":
            self._set_leg_state(leg, "accepted")
            group = self.groups.get(leg.group_id)
            if group is not None and group.state == "active":
                group.state = "connected"
                # the caller's need is met: every other leg gets a clear ending
                for lid in group.leg_ids:
                    other = self.legs[lid]
                    if other.state in LIVE_LEG_STATES:
                        self._set_leg_state(other, "withdrawn")
                        self._push(other.recipient_id, "call_withdrawn",
                                   self.leg_info(other))
        for party in pending.parties():
            self._set_status(party, "in_session", at)

    def roles_for(self, pending: PendingSession) -> dict:
        deck = self.decks[pending.deck_id]
        student = self._student_of(pending.caller_id, pending.recipient_id, deck)
        teacher = (pending.recipient_id if student == pending.caller_id
                   else pending.caller_id)
        return {"teacher_id": teacher, "student_id": student}

    # -- cancellation ------------------------------------------------------------

    def cancel_call(self, user_id: str, target_id: str, at: float) -> dict:
        pending = self.pendings.get(target_id)
        if pending is not None and pending.state == "active":
            if user_id not in pending.parties():
                raise NotParticipant(f"{user_id} is not part of {target_id}")
            self._resolve_pending(pending, "cancelled", at)
            return {"cancelled": "pending", "id": target_id}
        group = self.groups.get(target_id)
        if group is not None:
            if user_id != group.caller_id:
                raise NotParticipant(f"{user_id} is not the caller of {target_id}")
            self._cancel_group(group, at)
            p = self.presences[user_id]
            if p.status == "calling":
                self._set_status(user_id, "available", at)
            return {"cancelled": "group", "id": target_id}
        leg = self.legs.get(target_id)
        if leg is not None:
            if user_id != leg.recipient_id:
                raise NotParticipant(f"{user_id} is not the recipient of {target_id}")
            if leg.state != "ringing":
                raise LegNotRinging(f"leg {target_id} is {leg.state}")
            self._set_leg_state(leg, "declined")
            self._push(leg.caller_id, "call_declined", self.leg_info(leg))
            grp = self.groups.get(leg.group_id)
            if grp is not None:
                self._check_group_liveness(grp, at)
            return {"cancelled": "leg", "id": target_id}
        raise UnknownTarget(f"nothing cancellable with id {target_id!r}")

    def _cancel_group(self, group: CallGroup, at: float):
        if group.state != "active":
            return
        # a pending riding on one of this group's legs falls with it
        for pending in list(self.pendings.values()):
            if (pending.state == "active"
                    and self.legs[pending.leg_id].group_id == group.group_id):
                self._resolve_pending(pending, "cancelled", at)
        if group.state != "active":
            return
        group.state = "cancelled"
        for lid in group.leg_ids:
            leg = self.legs[lid]
            if leg.state in LIVE_LEG_STATES:
                self._set_leg_state(leg, "withdrawn")
                self._push(leg.recipient_id, "call_withdrawn", self.leg_info(leg))

    def _resume_leg(self, leg: Leg, at: float):
        if leg.state != "held":
            return
        caller_p = self.presences.get(leg.caller_id)
        if caller_p is not None and caller_p.status in ("pending", "in_session"):
            # the caller got engaged elsewhere meanwhile: stay held on
            # behalf of that engagement so it resumes when that one ends
            ref = self.current_pending.get(leg.caller_id)
            if ref is not None:
                self.pendings[ref].held_leg_ids.append(leg.leg_id)
                return
        self._set_leg_state(leg, "ringing")
        recipient_p = self.presences.get(leg.recipient_id)
        if recipient_p is not None and recipient_p.status in ("available", "calling"):
            self._push(leg.recipient_id, "call_incoming", self.leg_info(leg))
        else:
            # the line is (still) busy or gone: queue it instead
            self._to_missed(leg)

    def _revert_status(self, user_id: str, at: float):
        group = self._active_group_of(user_id)
        if group is not None and self._live_legs(group):
            self._set_status(user_id, "calling", at)
        else:
            self._set_status(user_id, "available", at)

    def _resolve_pending(self, pending: PendingSession, reason: str, at: float):
        """Tear down a failed handshake: resume holds, revert statuses."""
        pending.state = reason
        for party in pending.parties():
            self.current_pending.pop(party, None)
            self._push(party, "pending_cancelled",
                       {"pending_id": pending.pending_id, "reason": reason})
        leg = self.legs[pending.leg_id]
        if pending.via_missed and leg.state == "missed":
            queue = self.missed_queue.setdefault(leg.recipient_id, [])
            if leg.leg_id not in queue:
                queue.append(leg.leg_id)
                queue.sort(key=lambda lid: self.legs[lid].created_at)
        # statuses first, so resumed legs see where their endpoints stand
        for party in pending.parties():
            self._revert_status(party, at)
        for lid in pending.held_leg_ids:
            self._resume_leg(self.legs[lid], at)
        if leg.state == "ringing":
            # the handshake leg itself is visible again
            self._push(leg.recipient_id, "call_incoming", self.leg_info(leg))
        group = self.groups.get(leg.group_id)
        if group is not None:
            self._check_group_liveness(group, at)

    # -- missed calls ---------------------------------------------------------------

    def list_missed_calls(self, user_id: str, at: float) -> list:
        self._presence(user_id)
        fresh = []
        for lid in self.missed_queue.get(user_id, []):
            leg = self.legs[lid]
            if leg.state != "missed":
                continue
            if at - leg.created_at > self.missed_ttl_s:
                continue
            fresh.append(self.leg_info(leg))
        return fresh

    # -- session boundary ---------------------------------------------------------------

    def release_after_session(self, pending_id: str, at: float):
        """Both parties are free again: surface holds and missed queues."""
        pending = self.pendings[pending_id]
        for party in pending.parties():
            self.current_pending.pop(party, None)
            self._revert_status(party, at)
        for lid in pending.held_leg_ids:
            self._resume_leg(self.legs[lid], at)
        for party in pending.parties():
            missed = self.list_missed_calls(party, at)
            if missed:
                self._push(party, "call_missed", {"missed": missed})

    # -- clock ------------------------------------------------------------------------

    def on_tick(self, at: float):
        for pending in list(self.pendings.values()):
            if pending.state == "active" and at >= pending.deadline:
                self._resolve_pending(pending, "expired", at)

    # -- introspection -------------------------------------------------------------------

    def engagement_of(self, user_id: str):
        for pending in self.pendings.values():
            if pending.state == "active" and user_id in pending.parties():
                return ("pending", pending.pending_id)
        return None

    # -- persistence ------------------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "handshake_timeout_s": self.handshake_timeout_s,
            "missed_ttl_s": self.missed_ttl_s,
            "presences": {u: asdict(p) for u, p in sorted(self.presences.items())},
            "legs": {k: asdict(v) for k, v in sorted(self.legs.items())},
            "groups": {k: asdict(v) for k, v in sorted(self.groups.items())},
            "pendings": {
                k: {**asdict(v), "confirmed": sorted(v.confirmed)}
                for k, v in sorted(self.pendings.items())
            },
            "missed_queue": {u: list(q) for u, q in sorted(self.missed_queue.items())
                             if q},
            "current_pending": dict(sorted(self.current_pending.items())),
            "next_group": self._next_group,
            "next_leg": self._next_leg,
            "next_pending": self._next_pending,
        }

    def load_state_dict(self, state: dict):
        self.handshake_timeout_s = state["handshake_timeout_s"]
        self.missed_ttl_s = state["missed_ttl_s"]
        self.presences = {u: Presence(**p) for u, p in state["presences"].items()}
        self.legs = {k: Leg(**v) for k, v in state["legs"].items()}
        self.groups = {k: CallGroup(**v) for k, v in state["groups"].items()}
        self.pendings = {}
        for k, v in state["pendings"].items():
            v = dict(v)
            v["confirmed"] = set(v["confirmed"])
            self.pendings[k] = PendingSession(**v)
        self.missed_queue = {u: list(q) for u, q in state["missed_queue"].items()}
        self.current_pending = dict(state["current_pending"])
        self._next_group = state["next_group"]
        self._next_leg = state["next_leg"]
        self._next_pending = state["next_pending"]

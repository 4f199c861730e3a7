"""Ratings, monthly leaderboard, lesson-set unlocking, accolades, and the
share/invite virality hooks.

All state here is driven by ended-session records and explicit user
actions; nothing mutates the time bank directly except invite redemption,
which is wired through a callback so this module stays ledger-agnostic.
"""

from dataclasses import dataclass, asdict
from datetime import datetime, timezone

from .errors import (DuplicateRating, NotParticipant, OutOfRange,
                     TokenAlreadyRedeemed, UnknownSession, UnknownToken,
                     UnknownUser)


@dataclass(frozen=True)
class Rating:
    rater_id: str
    ratee_id: str
    session_ref: str
    stars: int
    created_at: float


@dataclass(frozen=True)
class SessionRecord:
    """What engage remembers about one ended session."""
    session_id: str
    teacher_id: str
    student_id: str
    deck_id: str
    set_id: str
    duration_s: int
    deck_completed: bool
    words_learned: int
    ended_at: float


@dataclass(frozen=True)
class Accolade:
    user_id: str
    kind: str  # "expert" or "badge:<name>"
    awarded_at: float
    criterion_snapshot: dict


def month_of(ts: float) -> str:
    """UTC calendar month bucket, e.g. 1714521600 -> '2024-05'."""
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


class DeckCatalog:
    """Set/deck ordering derived from the loaded decks.

    Sets are ordered by their id (natural for ids like set-1, set-2);
    decks within a set by set_ordinal.
    """

    def __init__(self, decks: dict):
        self.decks = decks
        by_set: dict[str, list] = {}
        for deck in decks.values():
            by_set.setdefault(deck.set_id, []).append(deck)
        self.set_ids = sorted(by_set, key=_natural_key)
        self.sets = {
            sid: [d.deck_id for d in sorted(by_set[sid], key=lambda d: d.set_ordinal)]
            for sid in self.set_ids
        }

    def first_set(self) -> str | None:
        return self.set_ids[0] if self.set_ids else None

    def next_set(self, set_id: str) -> str | None:
        try:
            i = self.set_ids.index(set_id)
        except ValueError:
            return None
        return self.set_ids[i + 1] if i + 1 < len(self.set_ids) else None


def _natural_key(s: str):
    import re
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", s)]


# Badges are data: name -> predicate over a user's counters.
DEFAULT_BADGES = {
    "first-lesson": lambda c: c.get("sessions_total", 0) >= 1,
    "ten-lessons": lambda c: c.get("sessions_total", 0) >= 10,
    "polyglot-helper": lambda c: c.get("teach_completed", 0) >= 1,
}


class Engage:
    def __init__(self, catalog: DeckCatalog, expert_threshold: int = 5,
                 badges: dict | None = None):
        self.catalog = catalog
        self.expert_threshold = expert_threshold
        self.badges = DEFAULT_BADGES if badges is None else badges
        self.ratings: list[Rating] = []
        self._rating_totals: dict[str, list] = {}  # ratee -> [sum, count]
        self._rated: set[tuple[str, str]] = set()  # (rater, session)
        self.records: dict[str, SessionRecord] = {}
        self.unlocked: dict[str, set] = {}        # user -> set ids
        self.completed: dict[str, set] = {}       # user -> deck ids
        self.repeat_holds: dict[str, set] = {}    # user -> set ids blocked
        self.counters: dict[str, dict] = {}       # user -> counter name -> int
        self.accolades: list[Accolade] = []
        self._accolade_kinds: dict[str, set] = {}
        self.share_events: list[dict] = []
        self.tokens: dict[str, str] = {}          # token -> inviter
        self.redeemed: dict[str, str] = {}        # token -> invitee
        self._next_token = 1

    # -- ratings -------------------------------------------------------------

    def record_rating(self, rater: str, session_ref: str, stars: int,
                      at: float) -> Rating:
        if not isinstance(stars, int) or not 1 <= stars <= 5:
            raise OutOfRange(f"stars must be 1..5, got {stars!r}")
        rec = self.records.get(session_ref)
        if rec is None:
            raise UnknownSession(f"no ended session {session_ref!r}")
        if rater not in (rec.teacher_id, rec.student_id):
            raise NotParticipant(f"{rater} did not take part in {session_ref}")
        if (rater, session_ref) in self._rated:
            raise DuplicateRating(f"{rater} already rated {session_ref}")
        ratee = rec.student_id if rater == rec.teacher_id else rec.teacher_id
        rating = Rating(rater, ratee, session_ref, stars, at)
        self._rated.add((rater, session_ref))
        self.ratings.append(rating)
        total = self._rating_totals.setdefault(ratee, [0, 0])
        total[0] += stars
        total[1] += 1
        return rating

    def avg_rating(self, user_id: str) -> tuple[float, int]:
        total = self._rating_totals.get(user_id)
        if not total:
            return (0.0, 0)
        return (total[0] / total[1], total[1])

    # -- leaderboard -----------------------------------------------------------

    def leaderboard(self, month: str, limit: int = 10) -> list[dict]:
        """Top users by teaching + learning seconds in one UTC month."""
        activity: dict[str, int] = {}
        for rec in self.records.values():
            if month_of(rec.ended_at) != month:
                continue
            for user in (rec.teacher_id, rec.student_id):
                activity[user] = activity.get(user, 0) + rec.duration_s
        rows = sorted(activity.items(), key=lambda kv: (-kv[1], kv[0]))
        return [{"user_id": u, "activity_seconds": s} for u, s in rows[:limit]]

    # -- unlocks & progress ------------------------------------------------------

    def unlocked_sets(self, user_id: str) -> set:
        sets = self.unlocked.setdefault(user_id, set())
        first = self.catalog.first_set()
        if first is not None:
            sets.add(first)
        return sets

    def _bump(self, user_id: str, counter: str, by: int = 1) -> int:
        c = self.counters.setdefault(user_id, {})
        c[counter] = c.get(counter, 0) + by
        return c[counter]

    def _award(self, user_id: str, kind: str, at: float, snapshot: dict):
        kinds = self._accolade_kinds.setdefault(user_id, set())
        if kind in kinds:
            return
        kinds.add(kind)
        self.accolades.append(Accolade(user_id, kind, at, dict(snapshot)))

    def has_accolade(self, user_id: str, kind: str) -> bool:
        return kind in self._accolade_kinds.get(user_id, set())

    def _maybe_unlock_next(self, user_id: str, set_id: str):
        nxt = self.catalog.next_set(set_id)
        if nxt is None:
            return
        if nxt in self.repeat_holds.get(user_id, set()):
            return
        deck_ids = self.catalog.sets.get(set_id, [])
        done = self.completed.get(user_id, set())
        if deck_ids and all(d in done for d in deck_ids):
            self.unlocked_sets(user_id).add(nxt)

    def on_session_end(self, record: SessionRecord, at: float) -> dict:
        """Apply gamification effects of one ended session (idempotent)."""
        if record.session_id in self.records:
            return {"duplicate": True}
        self.records[record.session_id] = record

        effects = {"duplicate": False, "unlocked": [], "accolades": []}
        self._bump(record.teacher_id, "sessions_total")
        self._bump(record.student_id, "sessions_total")
        self._bump(record.student_id, "words_learned", record.words_learned)
        self._bump(record.student_id, "seconds_learned", record.duration_s)
        self._bump(record.teacher_id, "seconds_taught", record.duration_s)

        if record.deck_completed:
            before = set(self.unlocked_sets(record.student_id))
            self.completed.setdefault(record.student_id, set()).add(record.deck_id)
            self._maybe_unlock_next(record.student_id, record.set_id)
            effects["unlocked"] = sorted(
                self.unlocked_sets(record.student_id) - before)

            taught = self._bump(record.teacher_id, "teach_completed")
            if taught == self.expert_threshold:
                self._award(record.teacher_id, "expert", at,
                            {"teach_completed": taught})
                effects["accolades"].append(("expert", record.teacher_id))

        for user in (record.teacher_id, record.student_id):
            counters = self.counters.get(user, {})
            for name, predicate in self.badges.items():
                kind = f"badge:{name}"
                if predicate(counters) and not self.has_accolade(user, kind):
                    self._award(user, kind, at, dict(counters))
                    effects["accolades"].append((kind, user))
        return effects

    def controller_decide(self, student_id: str, set_id: str, decision: str):
        """Controller override: force-advance past a set or hold it back."""
        nxt = self.catalog.next_set(set_id)
        if decision == "advance":
            if nxt is not None:
                self.repeat_holds.get(student_id, set()).discard(nxt)
                self.unlocked_sets(student_id).add(nxt)
        elif decision == "repeat":
            if nxt is not None and nxt not in self.unlocked_sets(student_id):
                self.repeat_holds.setdefault(student_id, set()).add(nxt)
        else:
            raise OutOfRange(f"decision must be advance or repeat, got {decision!r}")
        return sorted(self.unlocked_sets(student_id))

    # -- virality ------------------------------------------------------------------

    def share_event(self, user_id: str, kind: str, at: float) -> dict:
        if kind not in ("lesson_result", "invite"):
            raise OutOfRange(f"unknown share kind {kind!r}")
        event = {"user_id": user_id, "kind": kind, "at": at}
        if kind == "invite":
            token = f"inv-{self._next_token}"
            self._next_token += 1
            self.tokens[token] = user_id
            event["token"] = token
        self.share_events.append(event)
        return event

    def redeem_token(self, token: str, invitee: str) -> str:
        """Mark a referral token used; returns the inviter.

        Single-use on both sides: a token redeems once, and a user may
        redeem at most one referral in their lifetime, so redeemed tokens
        and bonus grants stay one-to-one.
        """
        if token not in self.tokens:
            raise UnknownToken(f"no such referral token {token!r}")
        if token in self.redeemed:
            raise TokenAlreadyRedeemed(f"token {token!r} already used")
        if invitee in self.redeemed.values():
            raise TokenAlreadyRedeemed(f"{invitee} already used a referral")
        inviter = self.tokens[token]
        if inviter == invitee:
            raise UnknownUser("cannot redeem your own referral token")
        self.redeemed[token] = invitee
        return inviter

    # -- persistence ------------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "expert_threshold": self.expert_threshold,
            "ratings": [asdict(r) for r in self.ratings],
            "records": {k: asdict(v) for k, v in sorted(self.records.items())},
            "unlocked": {u: sorted(s) for u, s in sorted(self.unlocked.items())},
            "completed": {u: sorted(s) for u, s in sorted(self.completed.items())},
            "repeat_holds": {u: sorted(s) for u, s in sorted(self.repeat_holds.items())},
            "counters": {u: dict(sorted(c.items()))
                         for u, c in sorted(self.counters.items())},
            "accolades": [asdict(a) for a in self.accolades],
            "share_events": list(self.share_events),
            "tokens": dict(sorted(self.tokens.items())),
            "redeemed": dict(sorted(self.redeemed.items())),
            "next_token": self._next_token,
        }

    @classmethod
    def from_state_dict(cls, state: dict, catalog: DeckCatalog) -> "Engage":
        eng = cls(catalog, state["expert_threshold"])
        eng.ratings = [Rating(**r) for r in state["ratings"]]
        for r in eng.ratings:
            eng._rated.add((r.rater_id, r.session_ref))
            total = eng._rating_totals.setdefault(r.ratee_id, [0, 0])
            total[0] += r.stars
            total[1] += 1
        eng.records = {k: SessionRecord(**v) for k, v in state["records"].items()}
        eng.unlocked = {u: set(s) for u, s in state["unlocked"].items()}
        eng.completed = {u: set(s) for u, s in state["completed"].items()}
        eng.repeat_holds = {u: set(s) for u, s in state["repeat_holds"].items()}
        eng.counters = {u: dict(c) for u, c in state["counters"].items()}
        eng.accolades = [Accolade(a["user_id"], a["kind"], a["awarded_at"],
                                  a["criterion_snapshot"])
                         for a in state["accolades"]]
        for a in eng.accolades:
            eng._accolade_kinds.setdefault(a.user_id, set()).add(a.kind)
        eng.share_events = list(state["share_events"])
        eng.tokens = dict(state["tokens"])
        eng.redeemed = dict(state["redeemed"])
        eng._next_token = state["next_token"]
        return eng

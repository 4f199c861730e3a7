"""Time-banking ledger: seconds taught are seconds earned.

The ledger is append-only; balances are a fold over entries and a cached
running sum is kept alongside. All deltas are integer seconds so teaching
credits and learning debits cancel exactly.
"""

from dataclasses import dataclass, asdict

from .errors import (AlreadySettled, DuplicateBonus, DuplicateGrant,
                     UnknownUser)

REASONS = ("teach_credit", "learn_debit", "invite_bonus", "signup_grant",
           "adjustment")


@dataclass(frozen=True)
class LedgerEntry:
    entry_id: str
    user_id: str
    delta_seconds: int
    reason: str
    session_ref: str | None
    created_at: float


class TimeBank:
    def __init__(self, signup_grant_s: int = 1800, invite_bonus_s: int = 1800):
        self.signup_grant_s = signup_grant_s
        self.invite_bonus_s = invite_bonus_s
        self.entries: list[LedgerEntry] = []
        self._balances: dict[str, int] = {}
        self._settled: set[str] = set()
        self._granted: set[str] = set()
        self._bonused: set[tuple[str, str]] = set()
        self._next_entry = 1

    # -- internals ---------------------------------------------------------

    def _append(self, user_id, delta, reason, session_ref, at) -> LedgerEntry:
        entry = LedgerEntry(
            entry_id=f"entry-{self._next_entry}",
            user_id=user_id,
            delta_seconds=int(delta),
            reason=reason,
            session_ref=session_ref,
            created_at=at,
        )
        self._next_entry += 1
        self.entries.append(entry)
        self._balances[user_id] = self._balances.get(user_id, 0) + entry.delta_seconds
        return entry

    def _require_user(self, user_id):
        if user_id not in self._balances:
            raise UnknownUser(f"no ledger account for {user_id!r}")

    # -- operations ---------------------------------------------------------

    def open_account(self, user_id):
        """Create a zero account so balance queries work pre-grant."""
        self._balances.setdefault(user_id, 0)

    def grant_signup(self, user_id: str, at: float) -> LedgerEntry | None:
        if user_id in self._granted:
            raise DuplicateGrant(f"{user_id} already received the signup grant")
        self._granted.add(user_id)
        self.open_account(user_id)
        if self.signup_grant_s == 0:
            return None
        return self._append(user_id, self.signup_grant_s, "signup_grant", None, at)

    def grant_invite_bonus(self, inviter: str, invitee: str, at: float) -> LedgerEntry:
        self._require_user(inviter)
        self._require_user(invitee)
        if (inviter, invitee) in self._bonused:
            raise DuplicateBonus(f"bonus already granted for {inviter}<-{invitee}")
        self._bonused.add((inviter, invitee))
        return self._append(inviter, self.invite_bonus_s, "invite_bonus", None, at)

    def settle_session(self, session_id: str, teacher_id: str, student_id: str,
                       duration_s: int, at: float) -> list[LedgerEntry]:
        """Credit the teacher and debit the student for one ended session."""
        if session_id in self._settled:
            raise AlreadySettled(f"session {session_id} already settled")
        if duration_s < 0:
            raise ValueError("duration_s must be >= 0")
        self._settled.add(session_id)
        if duration_s == 0:
            return []
        return [
            self._append(teacher_id, duration_s, "teach_credit", session_id, at),
            self._append(student_id, -duration_s, "learn_debit", session_id, at),
        ]

    def is_settled(self, session_id: str) -> bool:
        return session_id in self._settled

    def balance(self, user_id: str) -> int:
        self._require_user(user_id)
        return self._balances[user_id]

    def can_start_learning(self, user_id: str) -> bool:
        return self.balance(user_id) > 0

    # -- audit export -------------------------------------------------------

    def export_lines(self):
        """One JSON-serializable record per entry, in append order."""
        return [asdict(e) for e in self.entries]

    def write_export(self, path):
        """Write the audit export: one JSON record per line."""
        import json
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.export_lines():
                fh.write(json.dumps(rec, separators=(",", ":"),
                                    ensure_ascii=False) + "\n")

    # -- persistence --------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "signup_grant_s": self.signup_grant_s,
            "invite_bonus_s": self.invite_bonus_s,
            "entries": [asdict(e) for e in self.entries],
            "granted": sorted(self._granted),
            "bonused": sorted(list(p) for p in self._bonused),
            "settled": sorted(self._settled),
            "accounts": sorted(self._balances),
            "next_entry": self._next_entry,
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "TimeBank":
        bank = cls(state["signup_grant_s"], state["invite_bonus_s"])
        bank._granted = set(state["granted"])
        bank._bonused = {tuple(p) for p in state["bonused"]}
        bank._settled = set(state["settled"])
        bank._next_entry = state["next_entry"]
        for user in state["accounts"]:
            bank._balances[user] = 0
        for raw in state["entries"]:
            entry = LedgerEntry(**raw)
            bank.entries.append(entry)
            bank._balances[entry.user_id] = (
                bank._balances.get(entry.user_id, 0) + entry.delta_seconds)
        return bank

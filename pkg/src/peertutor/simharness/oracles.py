"""Invariant oracles evaluated over a finished event log.

The oracles replay the log into a fresh application, independently fold
the call-leg transition journal, and check the global safety properties
position by position. All per-position state is maintained incrementally
so a 10k-event log scans in well under a second. A failing check reports
the first event position at which it broke, which is also a minimal
reproducing prefix.
"""

from dataclasses import dataclass

from ..connector import LEGAL_LEG_EDGES
from ..core import App
from ..engage import month_of
from ..errors import DomainError

CHECK_NAMES = (
    "legal_leg_transitions",
    "at_most_one_engagement",
    "invisibility_while_engaged",
    "hold_resume_round_trip",
    "connected_groups_one_accepted_leg",
    "ledger_conservation",
    "student_balance_never_negative",
    "settlement_exactly_once",
    "leaderboard_conservation",
    "invite_bonus_exact",
)


@dataclass
class Check:
    name: str
    passed: bool
    position: int | None = None
    detail: str = ""


@dataclass
class OracleReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def lines(self):
        out = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            where = "" if c.position is None else f" @ event {c.position}"
            detail = f" ({c.detail})" if c.detail and not c.passed else ""
            out.append(f"{mark} {c.name}{where}{detail}")
        return out


class _Tracker:
    """Incremental shadow state folded independently of the app."""

    def __init__(self):
        self.leg_states: dict[str, str] = {}
        self.ringing_by_user: dict[str, set] = {}  # endpoint -> ringing legs
        self.trans_idx = 0
        self.next_leg = 1
        self.next_pending = 1
        self.next_session = 1
        self.entry_idx = 0
        self.balances: dict[str, int] = {}
        self.active_pendings: set = set()
        self.running_sessions: set = set()
        self.fail: dict[str, Check] = {}

    def flag(self, name: str, position: int, detail: str = ""):
        if name not in self.fail:
            self.fail[name] = Check(name, False, position, detail)

    def _ring(self, app: App, leg_id: str, on: bool):
        leg = app.connector.legs[leg_id]
        for user in (leg.caller_id, leg.recipient_id):
            bucket = self.ringing_by_user.setdefault(user, set())
            if on:
                bucket.add(leg_id)
            else:
                bucket.discard(leg_id)


def run_oracles(records: list, config, decks) -> OracleReport:
    """Replay ``records`` and evaluate every invariant over the run."""
    app = App(config, decks)
    t = _Tracker()
    position = 0
    for record in records:
        position = record["position"]
        try:
            app.apply(record["kind"], record["payload"], record["at"])
        except DomainError:
            pass
        _scan_legs(app, t, position)
        _scan_pendings_sessions(app, t, position)
        _scan_engagements(app, t, position)
        _scan_ledger(app, t, position)

    _final_checks(app, t, position)

    checks = [t.fail.get(name, Check(name, True)) for name in CHECK_NAMES]
    return OracleReport(checks)


def _scan_legs(app: App, t: _Tracker, position: int):
    # new legs always enter life ringing (journal records any instant change)
    while t.next_leg < app.connector._next_leg:
        leg_id = f"leg-{t.next_leg}"
        t.next_leg += 1
        t.leg_states[leg_id] = "ringing"
        t._ring(app, leg_id, True)
    journal = app.connector.transitions
    while t.trans_idx < len(journal):
        leg_id, old, new = journal[t.trans_idx]
        t.trans_idx += 1
        if t.leg_states.get(leg_id) != old:
            t.flag("legal_leg_transitions", position,
                   f"{leg_id} journal says {old}->{new} but fold has "
                   f"{t.leg_states.get(leg_id)}")
        if new not in LEGAL_LEG_EDGES.get(old, ()):
            t.flag("legal_leg_transitions", position,
                   f"illegal edge {old}->{new} on {leg_id}")
        t.leg_states[leg_id] = new
        t._ring(app, leg_id, new == "ringing")


def _scan_pendings_sessions(app: App, t: _Tracker, position: int):
    pendings = app.connector.pendings
    while t.next_pending < app.connector._next_pending:
        pid = f"pending-{t.next_pending}"
        t.next_pending += 1
        if pendings[pid].state == "active":
            t.active_pendings.add(pid)
    still_active = set()
    for pid in t.active_pendings:
        pending = pendings[pid]
        if pending.state == "active":
            still_active.add(pid)
        elif pending.state in ("cancelled", "expired"):
            _check_hold_resume(app, t, pending, position)
    t.active_pendings = still_active

    sessions = app.sessions.sessions
    while t.next_session < app.sessions._next_session:
        sid = f"session-{t.next_session}"
        t.next_session += 1
        if sessions[sid].state == "running":
            t.running_sessions.add(sid)
    t.running_sessions = {sid for sid in t.running_sessions
                          if sessions[sid].state == "running"}


def _scan_engagements(app: App, t: _Tracker, position: int):
    engaged: dict[str, list] = {}
    handshake = set()
    for pid in t.active_pendings:
        pending = app.connector.pendings[pid]
        handshake.add(pending.leg_id)
        for user in pending.parties():
            engaged.setdefault(user, []).append(("pending", pid))
    for sid in t.running_sessions:
        session = app.sessions.sessions[sid]
        for user in (session.teacher_id, session.student_id):
            engaged.setdefault(user, []).append(("session", sid))
    for user, refs in engaged.items():
        if len(refs) > 1:
            t.flag("at_most_one_engagement", position, f"{user} in {refs}")
        # no third party may see a ringing leg touching an engaged user
        for leg_id in t.ringing_by_user.get(user, ()):
            if leg_id not in handshake:
                t.flag("invisibility_while_engaged", position,
                       f"{leg_id} rings while {user} engaged")


def _check_hold_resume(app: App, t: _Tracker, pending, position: int):
    # a leg may legitimately stay held if it was re-attached to another
    # live engagement (an active handshake or one running as a session)
    in_session = {s.pending_id for s in app.sessions.sessions.values()
                  if s.state == "running"}
    reattached = {lid for p in app.connector.pendings.values()
                  if p.state == "active" or (p.state == "confirmed"
                                             and p.pending_id in in_session)
                  for lid in p.held_leg_ids}
    for lid in pending.held_leg_ids:
        state = app.connector.legs[lid].state
        if state == "held" and lid not in reattached:
            t.flag("hold_resume_round_trip", position,
                   f"{lid} stranded on hold after {pending.pending_id} "
                   f"{pending.state}")
    leg = app.connector.legs[pending.leg_id]
    if leg.state == "held":
        t.flag("hold_resume_round_trip", position,
               f"handshake leg {leg.leg_id} left held")


def _scan_ledger(app: App, t: _Tracker, position: int):
    entries = app.timebank.entries
    while t.entry_idx < len(entries):
        entry = entries[t.entry_idx]
        t.entry_idx += 1
        t.balances[entry.user_id] = (t.balances.get(entry.user_id, 0)
                                     + entry.delta_seconds)
        if t.balances[entry.user_id] < 0:
            t.flag("student_balance_never_negative", position,
                   f"{entry.user_id} at {t.balances[entry.user_id]}s")


def _final_checks(app: App, t: _Tracker, position: int):
    # conservation: teaching credits and learning debits cancel exactly
    total = sum(e.delta_seconds for e in app.timebank.entries
                if e.reason in ("teach_credit", "learn_debit"))
    if total != 0:
        t.flag("ledger_conservation", position, f"residual {total}s")

    seen = set()
    by_session: dict[str, int] = {}
    for e in app.timebank.entries:
        if e.reason in ("teach_credit", "learn_debit"):
            key = (e.reason, e.session_ref)
            if key in seen:
                t.flag("settlement_exactly_once", position, str(key))
            seen.add(key)
            by_session[e.session_ref] = by_session.get(e.session_ref, 0) + 1
    for session in app.sessions.sessions.values():
        if session.state != "ended":
            continue
        expected = 0 if session.tick_count == 0 else 2
        if by_session.get(session.session_id, 0) != expected:
            t.flag("settlement_exactly_once", position,
                   f"{session.session_id} has "
                   f"{by_session.get(session.session_id, 0)} entries")

    # every month's leaderboard must cover each session twice
    by_month: dict[str, int] = {}
    for rec in app.engage.records.values():
        m = month_of(rec.ended_at)
        by_month[m] = by_month.get(m, 0) + rec.duration_s
    for month, total_s in by_month.items():
        rows = app.engage.leaderboard(month, limit=10**9)
        if sum(r["activity_seconds"] for r in rows) != 2 * total_s:
            t.flag("leaderboard_conservation", position, month)

    # invite bonus: one fixed grant per distinct redeemed token
    bonus = sum(e.delta_seconds for e in app.timebank.entries
                if e.reason == "invite_bonus")
    expected = len(app.engage.redeemed) * app.timebank.invite_bonus_s
    if bonus != expected:
        t.flag("invite_bonus_exact", position,
               f"{bonus}s banked vs {expected}s for "
               f"{len(app.engage.redeemed)} redemptions")

    # whatever is still on hold must belong to a live engagement
    in_session = {s.pending_id for s in app.sessions.sessions.values()
                  if s.state == "running"}
    live_holds = {lid for p in app.connector.pendings.values()
                  if p.state == "active" or (p.state == "confirmed"
                                             and p.pending_id in in_session)
                  for lid in p.held_leg_ids}
    for leg_id, leg in app.connector.legs.items():
        if leg.state == "held" and leg_id not in live_holds:
            t.flag("hold_resume_round_trip", position,
                   f"{leg_id} held with no live engagement at end of run")

    # final leg states must equal the journal fold
    for leg_id, leg in app.connector.legs.items():
        if t.leg_states.get(leg_id) != leg.state:
            t.flag("legal_leg_transitions", position,
                   f"{leg_id} final {leg.state} != fold "
                   f"{t.leg_states.get(leg_id)}")

    for group in app.connector.groups.values():
        accepted = [lid for lid in group.leg_ids
                    if app.connector.legs[lid].state == "accepted"]
        if group.state == "connected" and len(accepted) != 1:
            t.flag("connected_groups_one_accepted_leg", position,
                   group.group_id)
        if group.state == "cancelled" and accepted:
            t.flag("connected_groups_one_accepted_leg", position,
                   f"{group.group_id} cancelled with accepted leg")

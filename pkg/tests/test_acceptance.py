"""Release gate: one test per acceptance criterion.

Each test prints exactly one PASS/FAIL line on the real terminal, so the
gate is readable even under pytest output capture. Tolerances are stated
inline; ledger checks are integer-exact by construction.
"""

import itertools
import json
import time
from contextlib import contextmanager

import pytest

from peertutor.config import Config
from peertutor.content import render_slide_view
from peertutor.core import App
from peertutor.errors import DomainError
from peertutor.eventlog import Store
from peertutor.simharness import (Scenario, fuzz, random_scenario,
                                  run_scenario)

from conftest import GOLDEN_DIR, Harness, ROOT, START

LANGS = ("en", "es", "ru", "de")


@pytest.fixture
def gate(capsys):
    @contextmanager
    def _gate(name):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"FAIL {name}")
            raise
        with capsys.disabled():
            print(f"PASS {name}")
    return _gate


# -- 1. connector safety under fuzz --------------------------------------------------


def test_connector_safety_fuzz(gate, config, decks):
    with gate("connector-safety: 20 fuzz seeds x 10k events, < 60 s"):
        t0 = time.monotonic()
        for seed in range(1, 21):
            _, report = fuzz(seed, 10_000, config=config, decks=decks)
            failures = {c.name: c for c in report.checks if not c.passed}
            assert not failures, f"seed {seed}: {failures}"
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0, f"fuzz suite took {elapsed:.1f}s"


# -- 2. ledger conservation ------------------------------------------------------------


def test_ledger_conservation_is_exact(gate, config):
    with gate("ledger-conservation: sums exact to zero, bonus 1800 s/token"):
        for seed in (101, 202, 303):
            result = run_scenario(random_scenario(seed, duration_s=200))
            entries = result.app.timebank.entries
            moved = sum(e.delta_seconds for e in entries
                        if e.reason in ("teach_credit", "learn_debit"))
            assert moved == 0
            bonus = sum(e.delta_seconds for e in entries
                        if e.reason == "invite_bonus")
            redeemed = len(result.app.engage.redeemed)
            assert bonus == redeemed * config.invite_bonus_s
            assert config.invite_bonus_s == 1800


# -- 3. minute-for-minute exchange --------------------------------------------------------


def test_minute_for_minute_exchange(gate, config, decks):
    with gate("minute-for-minute: 600 s lesson is +600/-600; "
              "3 s balance auto-ends at tick 3"):
        result = run_scenario(
            Scenario.load(ROOT / "scenarios/basic_lesson.json"))
        bank = result.app.timebank
        grant = config.signup_grant_s
        assert bank.balance("ana") == grant + 600    # taught 600 s
        assert bank.balance("boris") == grant - 600  # learned 600 s

        h = Harness(Config(signup_grant_s=3), decks)
        tina = h.bot("tina", native="en")
        sam = h.bot("sam", native="ru")
        sam.ok("multicall", {"recipients": ["tina"], "deck_id": "greetings-a1"})
        tina.do_accept()
        tina.do_confirm()
        sam.do_confirm()
        session = h.app.sessions.sessions["session-1"]
        h.tick(2)
        assert session.state == "running" and session.tick_count == 2
        h.tick(1)
        assert session.state == "ended"
        assert session.tick_count == 3
        assert session.end_reason == "balance_exhausted"
        h.tick(2)  # further clock does nothing
        assert session.tick_count == 3
        assert h.app.timebank.balance("sam") == 0
        assert h.app.timebank.balance("tina") == 6


# -- 4. role-view goldens -------------------------------------------------------------------


def test_role_views_match_goldens(gate, decks):
    with gate("role-views: 120 golden renderings equal, subset chain holds"):
        golden = json.loads((GOLDEN_DIR / "role_views.json").read_text())
        assert len(golden) == 120
        for key, expected in golden.items():
            deck_id, ordinal, role, lang, hint = key.split(":")
            view = render_slide_view(decks[deck_id], int(ordinal), role, lang,
                                     hint_active=hint == "hint")
            rendered = {
                "role": view.role,
                "ordinal": view.ordinal,
                "visible_fields": dict(view.visible_fields),
                "media": dict(view.media),
                "hint_available": view.hint_available,
                "hint_body": dict(view.hint_body) if view.hint_body else None,
            }
            assert rendered == expected, key
        for deck in decks.values():
            for ordinal in range(1, len(deck) + 1):
                for lang in LANGS:
                    plain = render_slide_view(deck, ordinal, "student", lang)
                    hinted = render_slide_view(deck, ordinal, "student", lang,
                                               hint_active=True)
                    ctrl = render_slide_view(deck, ordinal, "controller",
                                             lang, hint_active=True)
                    assert plain.field_names() < hinted.field_names()
                    assert hinted.field_names() < ctrl.field_names()


# -- 5. handshake totality --------------------------------------------------------------------


HANDSHAKE_OPS = ("accept", "confirm_caller", "confirm_recipient",
                 "cancel", "timeout")


def _run_handshake(config, decks, perm):
    h = Harness(config, decks)
    tina = h.bot("tina", native="en")
    cat = h.bot("cat", native="es")
    ben = h.bot("ben", native="ru")
    ben.ok("multicall", {"recipients": ["tina", "cat"],
                         "deck_id": "greetings-a1"})
    for op in perm:
        if op == "accept":
            tina.send("accept", {"leg_id": "leg-1"})
        elif op == "confirm_caller":
            ben.send("confirm_ready", {"pending_id": "pending-1"})
        elif op == "confirm_recipient":
            tina.send("confirm_ready", {"pending_id": "pending-1"})
        elif op == "cancel":
            ben.send("cancel", {"target_id": "pending-1"})
        elif op == "timeout":
            h.clock.now += config.handshake_timeout_s + 1
            h.network.tick(h.clock.now)
    # settle any handshake still open after the interleaving
    h.clock.now += config.handshake_timeout_s + 1
    h.network.tick(h.clock.now)
    return h


def _session_predicted(perm):
    pos = {op: perm.index(op) for op in HANDSHAKE_OPS}
    if not (pos["accept"] < pos["confirm_caller"]
            and pos["accept"] < pos["confirm_recipient"]):
        return False
    done = max(pos["confirm_caller"], pos["confirm_recipient"])
    for killer in ("cancel", "timeout"):
        if pos["accept"] < pos[killer] < done:
            return False
    return True


def test_handshake_totality(gate, config, decks):
    with gate("handshake-totality: all 120 interleavings of "
              "accept/confirm x2/cancel/timeout"):
        for perm in itertools.permutations(HANDSHAKE_OPS):
            h = _run_handshake(config, decks, perm)
            expected = _session_predicted(perm)
            started = len(h.app.sessions.sessions) == 1
            assert started == expected, perm
            statuses = {u: h.app.connector.presences[u].status
                        for u in ("ben", "tina")}
            if expected:
                assert statuses == {"ben": "in_session", "tina": "in_session"}
                assert h.app.connector.legs["leg-2"].state == "withdrawn"
            else:
                # both parties are back where they were before the handshake
                assert statuses == {"ben": "calling", "tina": "available"}, perm
                assert h.app.connector.legs["leg-2"].state in ("ringing",
                                                               "held")


# -- 6. replay determinism ---------------------------------------------------------------------


def test_replay_determinism(gate, config, decks, tmp_path):
    with gate("replay-determinism: recover(log) == live for 20 scenarios"):
        for seed in range(1, 21):
            scenario = random_scenario(seed, duration_s=120)
            data_dir = tmp_path / f"run-{seed}"
            result = run_scenario(scenario, data_dir=data_dir)
            live = result.app.state_dict()
            recovered_app = App(Config(**scenario.config) if scenario.config
                                else Config(), decks,
                                start_time=scenario.start_time)
            Store(data_dir).recover(recovered_app)
            recovered = recovered_app.state_dict()
            assert sorted(live) == sorted(recovered)
            for field in live:
                assert recovered[field] == live[field], (seed, field)


# -- 7. engagement suite ------------------------------------------------------------------------


def _run_full_lesson(h, teacher, student, deck_id, slides):
    student.ok("multicall", {"recipients": [teacher.user_id],
                             "deck_id": deck_id})
    teacher.do_accept()
    teacher.do_confirm()
    student.do_confirm()
    for _ in range(slides):
        teacher.ok("advance_slide", {"session_id": teacher.session_id,
                                     "direction": "next"})
    session_id = teacher.session_id
    teacher.ok("end_lesson", {"session_id": session_id})
    return session_id


def test_engagement_suite(gate, decks):
    with gate("engagement: leaderboard conservation, Expert at 5th, "
              "set unlock, controller repeat"):
        # leaderboard conservation over a random run
        result = run_scenario(random_scenario(77, duration_s=200))
        engage = result.app.engage
        by_month = {}
        for rec in engage.records.values():
            from peertutor.engage import month_of
            by_month.setdefault(month_of(rec.ended_at), 0)
            by_month[month_of(rec.ended_at)] += rec.duration_s
        for month, total in by_month.items():
            rows = engage.leaderboard(month, limit=10**6)
            assert sum(r["activity_seconds"] for r in rows) == 2 * total

        # Expert at exactly the fifth completed teaching session
        h = Harness(Config(), decks)
        tina = h.bot("tina", native="en")
        sam = h.bot("sam", native="ru")
        for i in range(1, 6):
            _run_full_lesson(h, tina, sam, "greetings-a1", 5)
            is_expert = h.app.engage.has_accolade("tina", "expert")
            assert is_expert == (i == 5), f"expert flag wrong after lesson {i}"
        rows = h.app.read("search", {"user_id": "sam",
                                     "taught_language": "en"})["results"]
        assert rows and rows[0]["expert"] is True

        # set-2 unlocks exactly when every set-1 deck is complete
        h2 = Harness(Config(), decks)
        teach = h2.bot("teach", native="en")
        learn = h2.bot("learn", native="ru")
        def unlocked(bot):
            rows = h2.app.read("decks", {"user_id": bot.user_id})["decks"]
            return {r["set_id"] for r in rows if r["unlocked"]}
        assert unlocked(learn) == {"set-1"}
        _run_full_lesson(h2, teach, learn, "greetings-a1", 5)
        assert unlocked(learn) == {"set-1"}
        _run_full_lesson(h2, teach, learn, "numbers-a1", 3)
        assert unlocked(learn) == {"set-1", "set-2"}

        # a controller's repeat decision blocks the unlock until advance
        h3 = Harness(Config(controller_enabled=True), decks)
        teach3 = h3.bot("teach", native="en")
        learn3 = h3.bot("learn", native="ru")
        boss = h3.bot("boss", native="en")
        h3.dispatcher.apply_event("attach_controller",
                                  {"controller_id": "boss",
                                   "student_id": "learn"}, START)
        h3.dispatcher.apply_event("controller_decide",
                                  {"user_id": "boss", "student_id": "learn",
                                   "set_id": "set-1", "decision": "repeat"},
                                  START)
        _run_full_lesson(h3, teach3, learn3, "greetings-a1", 5)
        _run_full_lesson(h3, teach3, learn3, "numbers-a1", 3)
        assert "set-2" not in h3.app.engage.unlocked_sets("learn")
        h3.dispatcher.apply_event("controller_decide",
                                  {"user_id": "boss", "student_id": "learn",
                                   "set_id": "set-1", "decision": "advance"},
                                  START)
        assert "set-2" in h3.app.engage.unlocked_sets("learn")

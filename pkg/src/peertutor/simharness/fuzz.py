"""Randomized protocol fuzzing.

Drives a seeded mix of valid and deliberately out-of-state actions through
the real envelope dispatcher, asserts every single envelope gets a reply
or an error reply, and then runs the full oracle suite over the event
log. (seed, n_events) -> log is a pure function.
"""

import random

from ..config import Config
from ..protocol import Dispatcher
from .bots import BotClient, LocalNetwork
from .oracles import OracleReport, run_oracles
from .runner import DEFAULT_START_TIME, MemoryStore, SimClock

LANGS = ("en", "es", "ru", "de")

# action -> weight; args are drawn per-call from each bot's projected state
ACTIONS = (
    ("call", 16),
    ("accept", 14),
    ("confirm", 14),
    ("cancel", 8),
    ("decline", 5),
    ("presence", 6),
    ("advance", 8),
    ("hint", 3),
    ("chat", 4),
    ("end", 6),
    ("rate", 4),
    ("missed_connect", 4),
    ("share", 2),
    ("redeem", 2),
    ("drop", 2),
    ("signal", 2),
    ("bogus", 4),  # deliberately invalid ids / out-of-state attempts
)


def fuzz(seed: int, n_events: int, config: Config | None = None,
         decks: dict | None = None, n_bots: int = 10,
         tick_every: int = 4) -> tuple:
    """Returns (records, report). Raises only on harness bugs."""
    if decks is None:
        from pathlib import Path
        from ..content import load_content_dir
        decks = load_content_dir(Path(__file__).resolve().parents[3] / "content")
    if config is None:
        config = Config()

    rng = random.Random(seed)
    from ..core import App
    app = App(config, decks, start_time=DEFAULT_START_TIME)
    store = MemoryStore()
    clock = SimClock(DEFAULT_START_TIME)
    dispatcher = Dispatcher(app, store, clock)
    network = LocalNetwork(dispatcher)

    bots = []
    for i in range(n_bots):
        profile = {
            "native": rng.choice(LANGS),
            "country": rng.choice(("lv", "us", "es", "de", "ru")),
            "gender": rng.choice(("f", "m")),
            "age": rng.randint(18, 60),
            "level": rng.randint(1, 3),
        }
        bot = BotClient(network, f"bot-{i + 1}", profile)
        reply = bot.register()
        assert reply["type"] == "auth_ok", reply
        bot.ok("set_presence", {"status": "available"})
        bots.append(bot)

    names = [a for a, _ in ACTIONS]
    weights = [w for _, w in ACTIONS]
    deck_ids = sorted(decks)

    for step in range(n_events):
        if step % tick_every == 0:
            clock.now += 1
            network.tick(clock.now)
        bot = rng.choice(bots)
        if not bot.connected:
            reply = bot.do_reconnect()
        else:
            action = rng.choices(names, weights=weights)[0]
            reply = _run_action(rng, bot, bots, deck_ids, action)
        if isinstance(reply, dict) and "type" in reply:
            assert reply["type"].endswith("_ok") or reply["type"] in (
                "error", "dropped"), f"no reply for {bot.user_id}: {reply}"

    records = store.records
    report = run_oracles(records, config, decks)
    return records, report


def _run_action(rng: random.Random, bot: BotClient, bots: list,
                deck_ids: list, action: str) -> dict:
    others = [b.user_id for b in bots if b.user_id != bot.user_id]
    if action == "call":
        k = rng.randint(1, min(3, len(others)))
        return bot.do_call(rng.sample(others, k), rng.choice(deck_ids))
    if action == "accept":
        if bot.incoming and rng.random() < 0.9:
            return bot.do_accept(rng.choice(bot.incoming)["leg_id"])
        return bot.do_accept(f"leg-{rng.randint(1, 50)}")
    if action == "confirm":
        return bot.do_confirm()
    if action == "cancel":
        target = rng.choice([bot.pending_id, bot.group_id,
                             f"group-{rng.randint(1, 30)}", None])
        return bot.do_cancel(target)
    if action == "decline":
        return bot.do_decline()
    if action == "presence":
        return bot.do_presence(rng.choice(("available", "offline")))
    if action == "advance":
        return bot.do_advance(rng.choice(("next", "next", "next", "back")))
    if action == "hint":
        return bot.do_hint()
    if action == "chat":
        return bot.do_chat(f"msg-{rng.randint(0, 999)}")
    if action == "end":
        return bot.do_end()
    if action == "rate":
        return bot.do_rate(rng.randint(1, 5))
    if action == "missed_connect":
        return bot.do_missed_connect()
    if action == "share":
        return bot.do_share(rng.choice(("invite", "lesson_result")))
    if action == "redeem":
        return bot.do_redeem()
    if action == "drop":
        return bot.do_drop()
    if action == "signal":
        return bot.do_signal(rng.choice(others), body=f"blob-{rng.random()}")
    if action == "bogus":
        kind = rng.choice(("accept", "confirm", "end", "advance", "rate"))
        if kind == "accept":
            return bot.send("accept", {"leg_id": "leg-999999"})
        if kind == "confirm":
            return bot.send("confirm_ready", {"pending_id": "pending-999999"})
        if kind == "end":
            return bot.send("end_lesson", {"session_id": "session-999999"})
        if kind == "advance":
            return bot.send("advance_slide", {"session_id": "session-999999",
                                              "direction": "next"})
        return bot.send("rate", {"session_id": "session-999999", "stars": 9})
    raise ValueError(f"unknown fuzz action {action!r}")


def assert_report_ok(report: OracleReport):
    if not report.ok:
        raise AssertionError("; ".join(
            f"{c.name} @ {c.position}: {c.detail}" for c in report.failures()))

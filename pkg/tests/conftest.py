import pytest

from pathlib import Path

from peertutor.config import Config
from peertutor.content import load_content_dir
from peertutor.core import App
from peertutor.protocol import Dispatcher
from peertutor.simharness import BotClient, LocalNetwork, MemoryStore, SimClock

ROOT = Path(__file__).resolve().parents[1]
CONTENT_DIR = ROOT / "content"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

START = 1746057600.0  # 2025-05-01T00:00:00Z


@pytest.fixture(scope="session")
def decks():
    return load_content_dir(CONTENT_DIR)


@pytest.fixture
def config():
    return Config()


class Harness:
    """An App wired to the real dispatcher with in-process bots."""

    def __init__(self, config, decks, start=START):
        self.app = App(config, decks, start_time=start)
        self.store = MemoryStore()
        self.clock = SimClock(start)
        self.dispatcher = Dispatcher(self.app, self.store, self.clock)
        self.network = LocalNetwork(self.dispatcher)
        self.start = start

    def bot(self, user_id, native="en", **profile) -> BotClient:
        bot = BotClient(self.network, user_id, {"native": native, **profile})
        reply = bot.register()
        assert reply["type"] == "auth_ok", reply
        bot.ok("set_presence", {"status": "available"})
        return bot

    def tick(self, seconds=1):
        for _ in range(seconds):
            self.clock.now += 1
            self.network.tick(self.clock.now)


@pytest.fixture
def harness(config, decks):
    return Harness(config, decks)


@pytest.fixture
def lesson(harness):
    """Two users already confirmed into a running lesson on greetings-a1."""
    teacher = harness.bot("tina", native="en")
    student = harness.bot("sam", native="ru")
    student.ok("multicall", {"recipients": ["tina"], "deck_id": "greetings-a1"})
    teacher.do_accept()
    teacher.do_confirm()
    reply = student.do_confirm()
    assert reply["payload"]["status"] == "session_started"
    return harness, teacher, student

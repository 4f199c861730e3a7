"""Deterministic scenario runner.

A scenario is data: a bot population, a timed action schedule, and a
duration in simulated seconds. Bots talk to the application through the
real envelope protocol; the simulated clock advances one tick event per
second, and determinism follows from the single application queue plus
clock-gated action release.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..config import Config
from ..core import App
from ..errors import DomainError
from ..eventlog import Store
from ..protocol import Dispatcher
from .bots import BotClient, LocalNetwork
from .oracles import OracleReport, run_oracles

# simulated epoch: 2025-05-01T00:00:00Z unless the scenario says otherwise
DEFAULT_START_TIME = 1746057600.0


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    seed: int
    population: list
    schedule: list
    duration_s: int
    start_time: float = DEFAULT_START_TIME
    config: dict = field(default_factory=dict)

    @staticmethod
    def load(source) -> "Scenario":
        if isinstance(source, (str, Path)):
            try:
                is_file = Path(str(source)).exists()
            except OSError:
                is_file = False
            if is_file:
                source = Path(source).read_text()
        if isinstance(source, (str, bytes)):
            source = json.loads(source)
        if not isinstance(source, dict):
            raise ScenarioError("scenario must be an object")
        for key in ("seed", "population", "duration_s"):
            if key not in source:
                raise ScenarioError(f"scenario missing {key!r}")
        return Scenario(
            seed=source["seed"],
            population=source["population"],
            schedule=source.get("schedule", []),
            duration_s=source["duration_s"],
            start_time=source.get("start_time", DEFAULT_START_TIME),
            config=source.get("config", {}),
        )


class MemoryStore:
    """Event recorder with the Store interface, for in-memory runs."""

    def __init__(self):
        self.records = []
        self.position = 0

    def append(self, kind, payload, at):
        self.position += 1
        record = {"position": self.position, "at": at,
                  "kind": kind, "payload": payload}
        self.records.append(record)
        return record

    def maybe_snapshot(self, app):
        pass


@dataclass
class RunResult:
    app: App
    records: list
    report: OracleReport
    bots: dict


def run_scenario(scenario: Scenario, config: Config | None = None,
                 decks: dict | None = None, data_dir=None) -> RunResult:
    """Execute the scenario and evaluate the oracle suite over its log."""
    if decks is None:
        from ..content import load_content_dir
        decks = load_content_dir(Path(__file__).resolve().parents[3] / "content")
    if config is None:
        config = Config(**scenario.config) if scenario.config else Config()

    app = App(config, decks, start_time=scenario.start_time)
    if data_dir is not None:
        store = Store(data_dir, snapshot_every=config.snapshot_every)
    else:
        store = MemoryStore()
    clock = SimClock(scenario.start_time)
    dispatcher = Dispatcher(app, store, clock)
    network = LocalNetwork(dispatcher)

    bots = {}
    for spec in scenario.population:
        user_id = spec["user_id"]
        profile = {k: spec[k] for k in
                   ("native", "name", "country", "gender", "age", "level")
                   if k in spec}
        bot = BotClient(network, user_id, profile)
        bots[user_id] = bot
        reply = bot.register(referral_token=spec.get("referral_token"))
        if reply["type"] == "error":
            raise ScenarioError(f"registration of {user_id} failed: "
                                f"{reply['payload']}")
        if spec.get("presence", "available") == "available":
            bot.ok("set_presence", {"status": "available"})

    by_second: dict[int, list] = {}
    for step in scenario.schedule:
        if "at" not in step or "user" not in step or "action" not in step:
            raise ScenarioError(f"bad schedule step {step!r}")
        by_second.setdefault(int(step["at"]), []).append(step)

    for t in range(scenario.duration_s):
        clock.now = scenario.start_time + t
        for step in by_second.get(t, ()):
            bot = bots.get(step["user"])
            if bot is None:
                raise ScenarioError(f"unknown bot {step['user']!r}")
            try:
                bot.act(step["action"], step.get("args", {}))
            except (ValueError, TypeError) as exc:
                raise ScenarioError(f"step {step!r}: {exc}") from exc
        network.tick(scenario.start_time + t + 1)
    clock.now = scenario.start_time + scenario.duration_s

    records = (store.records if isinstance(store, MemoryStore)
               else list(store.log.read_all()))
    report = run_oracles(records, config, decks)
    return RunResult(app=app, records=records, report=report, bots=bots)


_SCENARIO_ACTIONS = (
    ("call", 10), ("accept", 9), ("confirm", 9), ("cancel", 4),
    ("decline", 3), ("presence", 3), ("advance", 6), ("hint", 2),
    ("chat", 3), ("end", 4), ("rate", 3), ("missed_connect", 2),
    ("share", 2), ("redeem", 2),
)

_LANGS = ("en", "es", "ru", "de")


def random_scenario(seed: int, n_users: int = 8, duration_s: int = 240,
                    deck_ids=("greetings-a1", "numbers-a1", "family-a1"),
                    steps_per_second: int = 2) -> Scenario:
    """Generate a reproducible scenario: a pure function of ``seed``."""
    import random
    rng = random.Random(seed)
    population = []
    for i in range(n_users):
        population.append({
            "user_id": f"user-{i + 1}",
            "native": rng.choice(_LANGS),
            "country": rng.choice(("lv", "us", "es", "de")),
            "gender": rng.choice(("f", "m")),
            "age": rng.randint(18, 60),
            "level": rng.randint(1, 3),
        })
    names = [a for a, _ in _SCENARIO_ACTIONS]
    weights = [w for _, w in _SCENARIO_ACTIONS]
    schedule = []
    for t in range(duration_s):
        for _ in range(rng.randint(0, steps_per_second)):
            user = rng.choice(population)["user_id"]
            action = rng.choices(names, weights=weights)[0]
            args = {}
            if action == "call":
                others = [p["user_id"] for p in population
                          if p["user_id"] != user]
                k = rng.randint(1, min(3, len(others)))
                args = {"recipients": rng.sample(others, k),
                        "deck": rng.choice(deck_ids)}
            elif action == "presence":
                args = {"status": rng.choice(("available", "offline"))}
            elif action == "advance":
                args = {"direction": rng.choice(("next", "next", "back"))}
            elif action == "rate":
                args = {"stars": rng.randint(1, 5)}
            elif action == "chat":
                args = {"body": f"m{rng.randint(0, 99)}"}
            schedule.append({"at": t, "user": user,
                             "action": action, "args": args})
    return Scenario(seed=seed, population=population, schedule=schedule,
                    duration_s=duration_s)


class SimClock:
    def __init__(self, now: float):
        self.now = now

    def __call__(self) -> float:
        return self.now

"""Deterministic simulation harness: scripted bots, scenario runner,
protocol fuzzer, and the invariant oracle suite."""

from .bots import BotClient, LocalNetwork
from .fuzz import assert_report_ok, fuzz
from .oracles import CHECK_NAMES, OracleReport, run_oracles
from .runner import (DEFAULT_START_TIME, MemoryStore, RunResult, Scenario,
                     SimClock, random_scenario, run_scenario)

__all__ = [
    "BotClient", "LocalNetwork", "assert_report_ok", "fuzz",
    "CHECK_NAMES", "OracleReport", "run_oracles", "DEFAULT_START_TIME",
    "MemoryStore", "RunResult", "Scenario", "SimClock", "random_scenario",
    "run_scenario",
]

"""`simrun` command line: run a scenario file or a fuzz session and print
the oracle report. Exits nonzero on any failed check."""

import argparse
import sys
from pathlib import Path

from ..config import Config
from ..content import load_content_dir
from .fuzz import fuzz
from .runner import Scenario, run_scenario

DEFAULT_CONTENT = Path(__file__).resolve().parents[3] / "content"


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="simrun", description="Deterministic protocol simulation")
    parser.add_argument("--scenario", help="scenario JSON file")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--fuzz-events", type=int, default=0,
                        help="run a fuzz session of N events instead")
    parser.add_argument("--content-dir", default=str(DEFAULT_CONTENT))
    parser.add_argument("--data-dir", default=None,
                        help="persist the event log here")
    parser.add_argument("--config", default=None)
    parser.add_argument("--export-ledger", default=None, metavar="PATH",
                        help="write the run's time-bank audit export here")
    args = parser.parse_args(argv)

    config = Config.load(args.config)
    decks = load_content_dir(args.content_dir, config.languages)

    app = None
    if args.fuzz_events:
        records, report = fuzz(args.seed, args.fuzz_events,
                               config=config, decks=decks)
        print(f"fuzz seed={args.seed} events={len(records)}")
    elif args.scenario:
        scenario = Scenario.load(args.scenario)
        scenario.seed = args.seed if args.seed != 1 else scenario.seed
        result = run_scenario(scenario, config=config, decks=decks,
                              data_dir=args.data_dir)
        report = result.report
        app = result.app
        print(f"scenario events={len(result.records)}")
    else:
        parser.error("give --scenario FILE or --fuzz-events N")
        return 2

    if args.export_ledger and app is not None:
        app.timebank.write_export(args.export_ledger)
        print(f"ledger export written to {args.export_ledger}")

    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())

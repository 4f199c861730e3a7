"""Append-only event log with periodic snapshots.

One JSON object per line. The first line of the log and of each snapshot
is a version header so formats can evolve. A truncated final line (torn
write at crash) is ignored on recovery.
"""

import json
import os
from pathlib import Path

LOG_VERSION = 1
SNAPSHOT_VERSION = 1


class EventLog:
    """Durable, positioned record store. Positions are contiguous from 1."""

    def __init__(self, path, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self.position = 0
        exists = self.path.exists() and self.path.stat().st_size > 0
        self._fh = open(self.path, "a+", encoding="utf-8")
        if not exists:
            self._write_line({"kind": "header", "version": LOG_VERSION})
        else:
            for record in self.read_all():
                self.position = record["position"]

    def _write_line(self, obj: dict):
        self._fh.write(json.dumps(obj, separators=(",", ":"),
                                  ensure_ascii=False) + "\n")
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())

    def append(self, kind: str, payload: dict, at: float) -> dict:
        record = {"position": self.position + 1, "at": at,
                  "kind": kind, "payload": payload}
        self._write_line(record)
        self.position += 1
        return record

    def read_all(self, after: int = 0):
        """Yield records with position > after; tolerate a torn last line."""
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if not lines:
            return
        header = json.loads(lines[0])
        if header.get("kind") != "header":
            raise ValueError(f"{self.path} has no log header")
        if header.get("version") != LOG_VERSION:
            raise ValueError(f"unsupported log version {header.get('version')}")
        expect = None
        for line in lines[1:]:
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                break  # torn tail: everything before it is intact
            if expect is not None and record["position"] != expect:
                raise ValueError(f"gap in log positions at {record['position']}")
            expect = record["position"] + 1
            if record["position"] > after:
                yield record

    def close(self):
        self._fh.close()


def write_snapshot(path, position: int, state: dict):
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"kind": "snapshot_header",
                             "version": SNAPSHOT_VERSION,
                             "position": position}) + "\n")
        fh.write(json.dumps(state, separators=(",", ":"),
                            ensure_ascii=False) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_snapshot(path):
    """Returns (position, state) or None if absent/unreadable."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        if (header.get("kind") != "snapshot_header"
                or header.get("version") != SNAPSHOT_VERSION):
            return None
        return header["position"], json.loads(lines[1])
    except (json.JSONDecodeError, IndexError, KeyError):
        return None


class Store:
    """Log + snapshot pair living in one data directory."""

    LOG_NAME = "events.log"
    SNAPSHOT_NAME = "snapshot.json"

    def __init__(self, data_dir, snapshot_every: int = 10000,
                 fsync: bool = False):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.snapshot_every = snapshot_every
        self.log = EventLog(self.dir / self.LOG_NAME, fsync=fsync)

    def append(self, kind: str, payload: dict, at: float) -> dict:
        return self.log.append(kind, payload, at)

    def maybe_snapshot(self, app):
        if (self.snapshot_every > 0
                and self.log.position % self.snapshot_every == 0
                and self.log.position > 0):
            self.snapshot(app)

    def snapshot(self, app):
        write_snapshot(self.dir / self.SNAPSHOT_NAME, self.log.position,
                       app.state_dict())

    def recover(self, app) -> int:
        """Rebuild ``app`` from snapshot + log; returns the last position."""
        snap = read_snapshot(self.dir / self.SNAPSHOT_NAME)
        after = 0
        if snap is not None:
            after, state = snap
            app.load_state_dict(state)
        from .errors import DomainError
        last = after
        for record in self.log.read_all(after=after):
            try:
                app.apply(record["kind"], record["payload"], record["at"])
            except DomainError:
                pass  # the original dispatch rejected it too
            last = record["position"]
        return last

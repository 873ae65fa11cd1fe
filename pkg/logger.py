"""
Diagnostics and the run log.

Library modules log through ``logging.getLogger(__name__)``. The run log is a
JSON list in the output directory with one entry per scenario run; it is the
only weightlab file that carries a timestamp.
"""
import json
import logging
import os
import threading
from datetime import datetime, timezone

from constants import LOG_FILE_NAME, MAX_LOG_ENTRIES


def configure_logging(verbosity=0):
    """Route library diagnostics to stderr; -v for INFO, -vv for DEBUG."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    root = logging.getLogger()
    root.setLevel(level)
    if not any(getattr(h, "_weightlab", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._weightlab = True
        root.addHandler(handler)


class RunLogger:
    """Append-only history of scenario runs, shared by the threads of a suite."""

    def __init__(self, path=None):
        self.path = path or os.path.join(os.getcwd(), LOG_FILE_NAME)
        parent = os.path.dirname(self.path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self._lock = threading.Lock()

    def _load(self):
        try:
            with open(self.path) as f:
                entries = json.load(f)
        except FileNotFoundError:
            return []
        except ValueError:
            logging.getLogger(__name__).warning("run log %s is unreadable; starting a new one",
                                                self.path)
            return []
        return entries if isinstance(entries, list) else []

    def _store(self, entries):
        scratch = self.path + ".tmp"
        with open(scratch, "w") as f:
            json.dump(entries[-MAX_LOG_ENTRIES:], f, indent=4)
        os.replace(scratch, self.path)

    def record(self, scenario, exit_status, failed_checks, output_dir):
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "scenario": scenario,
            "exit_status": exit_status,
            "failed_checks": list(failed_checks),
            "output_dir": output_dir,
        }
        with self._lock:
            entries = self._load()
            entries.append(entry)
            self._store(entries)
        return entry

    def entries(self, scenario=None):
        """Logged runs, oldest first, optionally for one scenario."""
        with self._lock:
            entries = self._load()
        if scenario is None:
            return entries
        return [e for e in entries if e.get("scenario") == scenario]

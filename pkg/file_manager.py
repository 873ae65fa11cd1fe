"""
Output directories, report files and the manifest of what a run wrote.
"""
import csv
import json
import logging
import os
import threading

from constants import MANIFEST_FILE
from grid import write_csv
from hardy import write_circle_csv
from plots import save_svg

LOGGER = logging.getLogger(__name__)


class OutputManager:
    """Owns every write under the output root; one subdirectory per scenario or verb."""

    def __init__(self, root):
        self.root = root
        self._written = {}
        self._lock = threading.Lock()

    def directory(self, name):
        return os.path.join(self.root, name)

    def prepare(self, name):
        """
        Creates the output directory and removes the files listed in the
        manifest of a previous run, so stale tables and plots never survive.
        """
        target = self.directory(name)
        try:
            os.makedirs(target, exist_ok=True)
        except PermissionError:
            raise PermissionError(
                f"Cannot create output folder {target}.\n"
                "Choose another location with --out."
            )
        if not os.access(target, os.W_OK):
            raise PermissionError(f"Cannot write to output folder {target}.\nChoose another location with --out.")

        removed = []
        for item in self._read_manifest(target):
            path = os.path.join(target, item)
            # only plain names from the manifest; never walk out of the folder
            if os.path.basename(item) != item or not os.path.isfile(path):
                continue
            try:
                os.remove(path)
                removed.append(item)
            except OSError as e:
                LOGGER.warning("could not remove stale %s: %s", path, e)
        if removed:
            LOGGER.info("removed %d stale file(s) from %s", len(removed), target)

        with self._lock:
            self._written[name] = []
        return target

    def _read_manifest(self, target):
        manifest_path = os.path.join(target, MANIFEST_FILE)
        if not os.path.exists(manifest_path):
            return []
        try:
            with open(manifest_path, "r") as f:
                return [line.strip() for line in f if line.strip()]
        except OSError as e:
            LOGGER.warning("could not read manifest %s: %s", manifest_path, e)
            return []

    def _record(self, name, filename):
        with self._lock:
            self._written.setdefault(name, []).append(filename)
        return os.path.join(self.directory(name), filename)

    def write_json(self, name, filename, data):
        """Sorted keys and a trailing newline: equal data gives equal bytes."""
        path = self._record(name, filename)
        with open(path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def write_table(self, name, filename, header, rows):
        path = self._record(name, filename)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        return path

    def write_grid(self, name, filename, grid):
        path = self._record(name, filename)
        write_csv(grid, path)
        return path

    def write_circle(self, name, filename, grid):
        path = self._record(name, filename)
        write_circle_csv(grid, path)
        return path

    def write_figure(self, name, filename, fig):
        path = self._record(name, filename)
        save_svg(fig, path)
        return path

    def written(self, name):
        with self._lock:
            return list(self._written.get(name, []))

    def finish(self, name):
        """Writes the manifest of this run's files and returns their names."""
        files = sorted(set(self.written(name)))
        try:
            with open(os.path.join(self.directory(name), MANIFEST_FILE), "w") as f:
                for item in files:
                    f.write(item + "\n")
        except OSError as e:
            raise IOError(f"Failed to write output manifest: {e}")
        return files

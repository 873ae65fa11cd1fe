import json
import os
import shutil
import tempfile
import unittest

import numpy as np

import constants
from config import Settings, load_settings
from errors import ConfigError
from file_manager import OutputManager
from grid import GridFunction, Interval
from logger import RunLogger
from plots import grid_figure, save_svg, trend_figure
from trend import classify_trend


class TestRunLogger(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.log_file = os.path.join(self.temp_dir, "test_log.json")
        self.logger = RunLogger(self.log_file)

    def test_record_run(self):
        """Test logging a scenario run."""
        self.logger.record("example1", 1, ["example1-verdicts"], "/tmp/out/example1")

        logs = self.logger.entries()
        self.assertEqual(len(logs), 1)
        self.assertEqual(logs[0]["scenario"], "example1")
        self.assertEqual(logs[0]["exit_status"], 1)
        self.assertEqual(logs[0]["failed_checks"], ["example1-verdicts"])

    def test_entries_for_one_scenario(self):
        self.assertEqual(self.logger.entries(), [])
        for name in ("spike", "example1", "spike"):
            self.logger.record(name, 0, [], f"out/{name}")
        self.assertEqual(len(self.logger.entries("spike")), 2)
        self.assertFalse(os.path.exists(self.log_file + ".tmp"))

    def test_corrupted_log_is_reset(self):
        with open(self.log_file, "w") as f:
            f.write("{not json")
        self.logger.record("spike", 0, [], "out/spike")
        self.assertEqual([e["scenario"] for e in self.logger.entries()], ["spike"])

    def test_log_is_capped(self):
        with open(self.log_file, "w") as f:
            json.dump([{"scenario": str(i)} for i in range(500)], f)
        self.logger.record("last", 0, [], "out")
        logs = self.logger.entries()
        self.assertEqual(len(logs), 500)
        self.assertEqual(logs[0]["scenario"], "1")
        self.assertEqual(logs[-1]["scenario"], "last")

    def tearDown(self):
        shutil.rmtree(self.temp_dir)


class TestOutputManager(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.output = OutputManager(self.temp_dir)

    def test_manifest_lists_written_files(self):
        self.output.prepare("run")
        self.output.write_json("run", "report.json", {"b": 1, "a": [1.5, 2]})
        self.output.write_table("run", "t.csv", ["x", "y"], [(1, 0.1)])
        files = self.output.finish("run")

        self.assertEqual(files, ["report.json", "t.csv"])
        with open(os.path.join(self.temp_dir, "run", constants.MANIFEST_FILE)) as f:
            self.assertEqual(f.read().split(), files)
        with open(os.path.join(self.temp_dir, "run", "t.csv")) as f:
            self.assertEqual(f.read().splitlines(), ["x,y", "1,0.1"])

    def test_stale_files_are_removed(self):
        self.output.prepare("run")
        self.output.write_json("run", "old.json", {})
        self.output.finish("run")
        keep = os.path.join(self.temp_dir, "run", "notes.txt")
        with open(keep, "w") as f:
            f.write("not ours")

        self.output.prepare("run")
        self.assertFalse(os.path.exists(os.path.join(self.temp_dir, "run", "old.json")))
        self.assertTrue(os.path.exists(keep))
        self.assertEqual(self.output.written("run"), [])

    def test_manifest_cannot_escape_the_folder(self):
        outside = os.path.join(self.temp_dir, "victim.txt")
        with open(outside, "w") as f:
            f.write("x")
        os.makedirs(os.path.join(self.temp_dir, "run"))
        with open(os.path.join(self.temp_dir, "run", constants.MANIFEST_FILE), "w") as f:
            f.write("../victim.txt\n")
        self.output.prepare("run")
        self.assertTrue(os.path.exists(outside))

    def test_json_is_deterministic(self):
        self.output.prepare("a")
        self.output.prepare("b")
        first = self.output.write_json("a", "r.json", {"z": 1.0, "a": {"y": 2, "b": 3}})
        second = self.output.write_json("b", "r.json", {"a": {"b": 3, "y": 2}, "z": 1.0})
        with open(first, "rb") as f, open(second, "rb") as g:
            self.assertEqual(f.read(), g.read())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)


class TestSettings(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.path = os.path.join(self.temp_dir, constants.CONFIG_FILE_NAME)

    def write(self, text):
        with open(self.path, "w") as f:
            f.write(text)

    def test_defaults(self):
        settings = load_settings(None)
        self.assertEqual(settings.trend.plateau_spread, constants.PLATEAU_RELATIVE_SPREAD)
        self.assertEqual(settings.out, constants.DEFAULT_OUTPUT_DIR)

    def test_precedence(self):
        self.write("depth = 12\nplateau_spread = 0.1\njobs = 3\n")
        settings = load_settings(self.path, {"depth": 9, "jobs": None})
        self.assertEqual(settings.depth, 9)
        self.assertEqual(settings.jobs, 3)
        self.assertEqual(settings.trend.plateau_spread, 0.1)
        self.assertEqual(settings.trend.min_slope, Settings().trend.min_slope)

    def test_unknown_key(self):
        self.write("depht = 12\n")
        with self.assertRaises(ConfigError):
            load_settings(self.path)

    def test_tables_rejected(self):
        self.write("[trend]\nplateau_spread = 0.1\n")
        with self.assertRaises(ConfigError):
            load_settings(self.path)

    def test_bad_values(self):
        with self.assertRaises(ConfigError):
            load_settings(None, {"jobs": 0})
        with self.assertRaises(ConfigError):
            load_settings(None, {"format": "xml"})
        with self.assertRaises(ConfigError):
            load_settings(None, {"radius": 16.0})

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_settings(os.path.join(self.temp_dir, "absent.toml"))

    def tearDown(self):
        shutil.rmtree(self.temp_dir)


class TestPlots(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def test_svg_is_reproducible(self):
        trend = classify_trend([1, 2, 4, 8], [1.0, 2.0, 4.0, float("inf")], label="t")
        grid = GridFunction(Interval(0.0, 1.0), 3, np.arange(1.0, 9.0))
        paths = []
        for i in range(2):
            path = os.path.join(self.temp_dir, f"{i}.svg")
            save_svg(trend_figure([trend], "trend"), path)
            paths.append(path)
        with open(paths[0], "rb") as f, open(paths[1], "rb") as g:
            self.assertEqual(f.read(), g.read())
        path = os.path.join(self.temp_dir, "grid.svg")
        save_svg(grid_figure([grid], ["f"], log=True), path)
        with open(path) as f:
            self.assertIn("<svg", f.read())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)


if __name__ == "__main__":
    unittest.main()

""" Test the functions in json_writer.py. """

import json
import os
import shutil
import tempfile
import unittest

import numpy as np

from fracschrod.config import resolve_config
from fracschrod.json_writer import to_plain, write_manifest, write_to_json


class TestWriteToJson(unittest.TestCase):
    """Test the write_to_json function."""

    def setUp(self):
        """Set up a scratch directory for the tests."""
        self.directory = tempfile.mkdtemp()
        self.filename = os.path.join(self.directory, "nested", "summary.json")

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.directory)

    def test_write_to_json(self):
        """Test that write_to_json writes sorted keys and converts numpy values."""
        data = {
            "potential": "harmonic",
            "alpha": np.float64(2.0),
            "energies": np.array([0.5, 1.5]),
            "count": np.int64(9),
            "accepted": np.bool_(True),
        }
        path = write_to_json(self.filename, data)

        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"accepted"'), text.index('"potential"'))
        self.assertEqual(
            json.loads(text),
            {"potential": "harmonic", "alpha": 2.0, "energies": [0.5, 1.5], "count": 9, "accepted": True},
        )

    def test_identical_data_gives_identical_files(self):
        """Two writes of the same data are byte-identical."""
        first = write_to_json(os.path.join(self.directory, "a.json"), {"b": 1, "a": [1.0, 2.0]})
        second = write_to_json(os.path.join(self.directory, "b.json"), {"a": [1.0, 2.0], "b": 1})
        with open(first, "rb") as f, open(second, "rb") as g:
            self.assertEqual(f.read(), g.read())

    def test_to_plain(self):
        """Nested tuples and numpy scalars become JSON-native types."""
        plain = to_plain({1: (np.float32(0.5), np.int32(2))})
        self.assertEqual(plain, {"1": [0.5, 2]})
        self.assertIsInstance(plain["1"][1], int)

    def test_write_manifest(self):
        """The manifest echoes the subcommand, the version and every config field."""
        config = resolve_config("solve", {"potential": "ring", "alpha": 1.8})
        path = write_manifest(os.path.join(self.directory, "manifest.json"), config, "0.1.0")
        with open(path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
        self.assertEqual(manifest["subcommand"], "solve")
        self.assertEqual(manifest["version"], "0.1.0")
        self.assertEqual(manifest["config"]["alpha"], 1.8)
        self.assertEqual(manifest["config"]["domain"], [-1.0, 1.0])
        self.assertEqual(manifest["config"]["scheme"], "sixth")


if __name__ == "__main__":
    unittest.main()

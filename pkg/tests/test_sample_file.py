# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=88 et ai si
#
# License: GPLv2
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License, version 2,
# as published by the Free Software Foundation.
#
# This program is distributed in the hope that it will be useful, but
# WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the GNU
# General Public License for more details.

"""
This test verifies the sample, checkpoint and metric table formats of the
'SampleFile' module and the transparent decompression of 'TransRead'.
"""

import bz2
import gzip
import lzma
import math
import os
import tempfile
import unittest

import numpy as np

from rbminit import Experiment, Metrics, Rbm, SampleFile, TransRead


def _record(step, **changes):
    values = dict(
        precision=0.25,
        recall=0.5,
        pcdd_literal=1.0 / 3.0,
        pcdd_l2=0.125,
        med=1.5,
        top_k_concentration=42,
    )
    values.update(changes)
    return Metrics.MetricsRecord(step=step, **values)


class TestTransRead(unittest.TestCase):
    """Reading plain and compressed text files."""

    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def test_compression_types(self):
        text = "first line\nsecond line\n"
        openers = {"": open, ".gz": gzip.open, ".bz2": bz2.open, ".xz": lzma.open}
        for suffix, opener in openers.items():
            path = os.path.join(self.tmpdir, "file.txt" + suffix)
            with opener(path, "wt") as f_obj:
                f_obj.write(text)
            with TransRead.TransRead(path) as f_obj:
                self.assertEqual(list(f_obj), ["first line\n", "second line\n"])
                self.assertEqual(f_obj.compression_type, suffix[1:] or "none")

    def test_writing(self):
        path = os.path.join(self.tmpdir, "out.txt.gz")
        with TransRead.open_for_writing(path) as f_obj:
            f_obj.write("0101\n")
        with gzip.open(path, "rt") as f_obj:
            self.assertEqual(f_obj.read(), "0101\n")

    def test_missing_file(self):
        with self.assertRaises(TransRead.Error):
            TransRead.TransRead(os.path.join(self.tmpdir, "missing.txt"))

    def test_corrupted_archive(self):
        path = os.path.join(self.tmpdir, "broken.txt.gz")
        with open(path, "wb") as f_obj:
            f_obj.write(b"this is not gzip data")
        with TransRead.TransRead(path) as f_obj:
            with self.assertRaises(TransRead.Error):
                list(f_obj)

    def test_not_ascii(self):
        path = os.path.join(self.tmpdir, "binary.txt")
        with open(path, "wb") as f_obj:
            f_obj.write(b"01\n\xff\xfe\n")
        with TransRead.TransRead(path) as f_obj:
            with self.assertRaises(TransRead.Error):
                list(f_obj)


class TestSamples(unittest.TestCase):
    """Sample files."""

    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def test_write_format(self):
        path = os.path.join(self.tmpdir, "samples.txt")
        states = np.array([[0, 1, 1], [1, 0, 0]], dtype=np.uint8)
        SampleFile.write_samples(path, Rbm.StateBatch(states), {"temperature": 8})
        with open(path) as f_obj:
            lines = f_obj.read().splitlines()
        self.assertEqual(lines, [SampleFile.SAMPLES_MAGIC, "# temperature: 8", "011", "100"])

        sample_set = SampleFile.read_samples(path)
        np.testing.assert_array_equal(sample_set.batch.states, states)
        self.assertEqual(sample_set.metadata, {"temperature": "8"})

    def test_blank_lines_and_comments(self):
        path = os.path.join(self.tmpdir, "samples.txt")
        with open(path, "w") as f_obj:
            f_obj.write("# free text comment\n\n  0011  \n# device: emulator\n1100\n")
        sample_set = SampleFile.read_samples(path, 4)
        self.assertEqual(sample_set.batch.states.tolist(), [[0, 0, 1, 1], [1, 1, 0, 0]])
        self.assertEqual(sample_set.metadata, {"device": "emulator"})

    def test_bad_files(self):
        path = os.path.join(self.tmpdir, "samples.txt")
        for text in ("# only comments\n", "0011\n001\n", "0012\n"):
            with open(path, "w") as f_obj:
                f_obj.write(text)
            with self.assertRaises(SampleFile.Error):
                SampleFile.read_samples(path)
        with self.assertRaises(SampleFile.Error):
            SampleFile.read_samples(os.path.join(self.tmpdir, "missing.txt"))
        with self.assertRaises(SampleFile.Error):
            SampleFile.write_samples(path, np.zeros(4, dtype=np.uint8))


class TestCheckpoints(unittest.TestCase):
    """Model checkpoints."""

    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self._tmpdir.name, "model.ckpt")

    def tearDown(self):
        self._tmpdir.cleanup()

    def test_exact_values(self):
        params = Rbm.RbmParams.random(5, 3, np.random.default_rng(0), 0.7)
        SampleFile.write_checkpoint(self.path, params, "cd1", 11, 2000)
        loaded, header = SampleFile.read_checkpoint(self.path)
        np.testing.assert_array_equal(loaded.visible_bias, params.visible_bias)
        np.testing.assert_array_equal(loaded.hidden_bias, params.hidden_bias)
        np.testing.assert_array_equal(loaded.weights, params.weights)
        self.assertEqual(header["kind"], "cd1")
        self.assertEqual(header["seed"], 11)
        self.assertEqual(header["epoch"], 2000)
        self.assertEqual((header["n"], header["m"]), (5, 3))

    def test_bad_checkpoints(self):
        bodies = (
            "# n: 2\n# m: 1\n# kind: cd1\n# seed: 0\n0 0\n0\n0\n0\n",
            "# n: 2\n# m: 1\n# kind: cd1\n# seed: 0\n# epoch: 1\n0 0\n0\n0\n",
            "# n: 2\n# m: 1\n# kind: cd1\n# seed: 0\n# epoch: 1\n0 0\n0\n0 1\n0\n",
            "# n: 2\n# m: 1\n# kind: cd1\n# seed: 0\n# epoch: 1\n0 x\n0\n0\n0\n",
            "# n: two\n# m: 1\n# kind: cd1\n# seed: 0\n# epoch: 1\n0 0\n0\n0\n0\n",
        )
        for body in bodies:
            with open(self.path, "w") as f_obj:
                f_obj.write(body)
            with self.assertRaises(SampleFile.Error):
                SampleFile.read_checkpoint(self.path)


class TestMetricTables(unittest.TestCase):
    """Per-replicate and aggregate metric tables."""

    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def test_round_trip(self):
        path = os.path.join(self.tmpdir, "classical.csv")
        rows = [(0, _record(0, pcdd_l2=float("nan"))), (0, _record(1)), (1, _record(0))]
        SampleFile.write_metrics_csv(path, rows)
        with open(path) as f_obj:
            header = ",".join(SampleFile.METRICS_COLUMNS + ("top10",))
            self.assertEqual(f_obj.readline().strip(), header)

        back = SampleFile.read_metrics_csv(path)
        self.assertEqual([replicate for replicate, _ in back], [0, 0, 1])
        self.assertTrue(math.isnan(back[0][1].pcdd_l2))
        self.assertEqual(back[1][1], rows[1][1])
        self.assertEqual(back[2][1].pcdd_literal, 1.0 / 3.0)

    def test_not_a_table(self):
        path = os.path.join(self.tmpdir, "other.csv")
        with open(path, "w") as f_obj:
            f_obj.write("a,b\n1,2\n")
        with self.assertRaises(SampleFile.Error):
            SampleFile.read_metrics_csv(path)

    def test_top_k_column(self):
        """The concentration column follows the configured k"""

        path = os.path.join(self.tmpdir, "top3.csv")
        rows = [(0, _record(0)), (2, _record(4))]
        SampleFile.write_metrics_csv(path, rows, top_k=3)
        with open(path) as f_obj:
            self.assertTrue(f_obj.readline().strip().endswith(",med,top3"))
        self.assertEqual(SampleFile.read_metrics_csv(path), rows)

        with open(path, "w") as f_obj:
            f_obj.write(",".join(SampleFile.METRICS_COLUMNS + ("topmost",)) + "\n")
        with self.assertRaises(SampleFile.Error):
            SampleFile.read_metrics_csv(path)

    def test_aggregate_table(self):
        series = [[_record(0, precision=p), _record(5, precision=2 * p)] for p in (0.1, 0.3, 0.2)]
        path = os.path.join(self.tmpdir, "aggregate.csv")
        SampleFile.write_aggregate_csv(path, Experiment.aggregate(series))
        with open(path) as f_obj:
            lines = f_obj.read().splitlines()
        header = lines[0].split(",")
        self.assertEqual(
            header[:4], ["step", "precision_median", "precision_min", "precision_max"]
        )
        self.assertEqual(len(header), 1 + 3 * len(Metrics.METRIC_NAMES))
        self.assertEqual(len(lines), 3)
        self.assertEqual(lines[1].split(",")[:4], ["0", "0.2", "0.1", "0.3"])
        with self.assertRaises(SampleFile.Error):
            SampleFile.write_aggregate_csv(path, {})

    def test_format_record(self):
        text = SampleFile.format_record(_record(7, pcdd_l2=float("nan")))
        self.assertTrue(text.startswith("step=7 precision=0.25 "))
        self.assertIn("pcdd_l2=nan", text)
        self.assertIn("top_k_concentration=42", text)

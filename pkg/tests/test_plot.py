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
This test verifies the SVG output of the 'Plot' module.
"""

import os
import tempfile
import unittest

from rbminit import Experiment, Metrics, Plot


def _series(arm, offset):
    series = Experiment.MetricsSeries(arm, [0, 1, 2, 5, 10])
    for replicate in range(3):
        for step in series.steps:
            value = offset + 0.01 * step + 0.001 * replicate
            series.add(replicate, Metrics.MetricsRecord(step, value, value, value, value, 1.0, 3))
    return series


class TestPlot(unittest.TestCase):
    """Plotting metric series."""

    def test_all_metrics(self):
        series = {"classical": _series("classical", 0.1), "annealer_T8": _series("x", 0.3)}
        with tempfile.TemporaryDirectory() as tmpdir:
            paths = Plot.plot_all(series, tmpdir, "bas(4)")
            self.assertEqual(len(paths), len(Metrics.METRIC_NAMES))
            for path in paths:
                with open(path) as f_obj:
                    self.assertIn("<svg", f_obj.read())

    def test_errors(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "x.svg")
            with self.assertRaises(Plot.Error):
                Plot.plot_metric({}, "precision", path)
            with self.assertRaises(Plot.Error):
                Plot.plot_metric({"a": Experiment.MetricsSeries("a", [0])}, "precision", path)
            with self.assertRaises(Plot.Error):
                Plot.plot_metric({"a": _series("a", 0.1)}, "accuracy", path)
            with self.assertRaises(Plot.Error):
                Plot.plot_metric(
                    {"a": _series("a", 0.1)}, "precision", os.path.join(tmpdir, "no", "x.svg")
                )

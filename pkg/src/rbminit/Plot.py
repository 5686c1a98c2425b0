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
Render metric series as SVG files: one file per metric, one median line per
initialization arm with a shaded band between the replicate minimum and
maximum. The step axis is logarithmic past step 1 and linear around step 0.
"""

import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402 pylint: disable=C0413

from . import Metrics  # noqa: E402 pylint: disable=C0413

_log = logging.getLogger(__name__)  # pylint: disable=C0103

_LABELS = {
    "precision": "precision",
    "recall": "recall",
    "pcdd_literal": "positive samples / positives",
    "pcdd_l2": "L2 distance to uniform positives",
    "med": "mean edit distance of negatives",
    "top_k_concentration": "samples on the top-k positives",
}


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


def plot_metric(series, metric, path, title=None):
    """
    Draw 'metric' of every 'Experiment.MetricsSeries' in 'series' (a
    dictionary mapping arm names to series) into the SVG file 'path'.
    """

    if not series or not any(len(arm_series) for arm_series in series.values()):
        raise Error("nothing to plot")
    if metric not in Metrics.METRIC_NAMES:
        raise Error('unknown metric "%s"' % metric)

    fig, axes = plt.subplots(figsize=(6.4, 4.0))
    try:
        for arm, arm_series in series.items():
            if not len(arm_series):
                continue
            stats = arm_series.aggregates()[metric]
            (line,) = axes.plot(stats.steps, stats.median, label=arm, linewidth=1.2)
            axes.fill_between(
                stats.steps,
                stats.minimum,
                stats.maximum,
                color=line.get_color(),
                alpha=0.25,
                linewidth=0,
            )

        axes.set_xscale("symlog", linthresh=1)
        axes.set_xlabel("full Gibbs updates")
        axes.set_ylabel(_LABELS[metric])
        if title:
            axes.set_title(title)
        axes.grid(True, which="major", alpha=0.3)
        axes.legend(loc="best", fontsize="small")
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg")
        except (IOError, OSError) as err:
            raise Error("cannot write '%s': %s" % (path, err))
    finally:
        plt.close(fig)

    _log.info("wrote '%s'", path)
    return path


def plot_all(series, out_dir, title=None):
    """Write one '<metric>.svg' file per metric to 'out_dir'. Returns the paths."""

    if not series:
        raise Error("nothing to plot")
    return [
        plot_metric(series, metric, os.path.join(out_dir, "%s.svg" % metric), title)
        for metric in Metrics.METRIC_NAMES
    ]

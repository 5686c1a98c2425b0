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
This module reads and writes the text files shared by all the commands.

Sample files (also used for datasets and training sets) hold one example per
line as a string of '0' and '1' characters. Lines starting with '#' are
metadata; "# key: value" lines are parsed into a dictionary, other comment
lines are ignored. For example:

    # rbminit samples
    # device: emulator
    # temperature: 8.0
    0110
    1001

Checkpoint files have a "# key: value" header (n, m, kind, seed, epoch),
followed by the visible biases on one line, the hidden biases on one line
and then the weight matrix, one row per line. Floats are written with
'repr()', so reading a checkpoint gives back bit-identical parameters.

Metric tables are CSV files with the columns in 'METRICS_COLUMNS'.

All readers go through 'TransRead', so compressed files are fine too.
"""

import csv
import logging
import math
import re
from typing import NamedTuple

import numpy as np

from . import Metrics, Rbm, TransRead

_log = logging.getLogger(__name__)  # pylint: disable=C0103

SAMPLES_MAGIC = "# rbminit samples"
CHECKPOINT_MAGIC = "# rbminit checkpoint"

# Keys of the checkpoint header, in the order they are written
CHECKPOINT_KEYS = ("n", "m", "kind", "seed", "epoch")

# Columns of the metric tables, the last one is "top<k>"
METRICS_COLUMNS = (
    "replicate",
    "step",
    "precision",
    "recall",
    "pcdd_literal",
    "pcdd_l2",
    "med",
)
_TOP_K_COLUMN = re.compile(r"^top(\d+)$")


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class SampleSet(NamedTuple):
    """The contents of a sample file."""

    batch: Rbm.StateBatch
    metadata: dict


def _parse_meta(line, metadata):
    body = line[1:].strip()
    key, sep, value = body.partition(":")
    if sep and key.strip() and " " not in key.strip():
        metadata[key.strip()] = value.strip()


def read_samples(path, width=None):
    """
    Read the sample file at 'path' and return a 'SampleSet'. If 'width' is
    given, every line must have exactly that many bits.
    """

    metadata = {}
    rows = []
    try:
        with TransRead.TransRead(path) as f_obj:
            for lineno, line in enumerate(f_obj, 1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    _parse_meta(line, metadata)
                    continue
                if line.strip("01"):
                    raise Error(
                        "%s:%d: malformed sample line, only '0' and '1' are allowed"
                        % (path, lineno)
                    )
                if width is None:
                    width = len(line)
                elif len(line) != width:
                    raise Error(
                        "%s:%d: sample has %d bits, expected %d"
                        % (path, lineno, len(line), width)
                    )
                rows.append(line)
    except TransRead.Error as err:
        raise Error(str(err))

    if not rows:
        raise Error("no samples found in '%s'" % path)

    text = "".join(rows).encode("ascii")
    states = (np.frombuffer(text, dtype=np.uint8) - ord("0")).reshape(len(rows), width)
    _log.info("read %d samples of %d bits from '%s'", len(rows), width, path)
    return SampleSet(Rbm.StateBatch(states), metadata)


def write_samples(path, samples, metadata=None):
    """
    Write 'samples' (a 'StateBatch' or a 2-D byte array) to 'path', with
    'metadata' as "# key: value" lines.
    """

    states = np.asarray(getattr(samples, "states", samples), dtype=np.uint8)
    if states.ndim != 2:
        raise Error("samples must be a 2-D array, got shape %s" % (states.shape,))
    # One fixed-width byte string per row
    chars = np.ascontiguousarray(states + np.uint8(ord("0")))
    lines = chars.view("S%d" % states.shape[1]) if states.size else []

    try:
        with TransRead.open_for_writing(path) as f_obj:
            f_obj.write(SAMPLES_MAGIC + "\n")
            for key, value in (metadata or {}).items():
                f_obj.write("# %s: %s\n" % (key, value))
            for line in lines:
                f_obj.write(line[0].decode("ascii") + "\n")
    except (IOError, OSError, TransRead.Error) as err:
        raise Error("cannot write samples to '%s': %s" % (path, err))
    _log.info("wrote %d samples to '%s'", states.shape[0], path)


def write_checkpoint(path, params, kind, seed, epoch):
    header = {"n": params.n, "m": params.m, "kind": kind, "seed": seed, "epoch": epoch}

    def fmt(values):
        return " ".join(repr(float(x)) for x in values) + "\n"

    try:
        with TransRead.open_for_writing(path) as f_obj:
            f_obj.write(CHECKPOINT_MAGIC + "\n")
            for key in CHECKPOINT_KEYS:
                f_obj.write("# %s: %s\n" % (key, header[key]))
            f_obj.write(fmt(params.visible_bias))
            f_obj.write(fmt(params.hidden_bias))
            for row in params.weights:
                f_obj.write(fmt(row))
    except (IOError, OSError, TransRead.Error) as err:
        raise Error("cannot write checkpoint '%s': %s" % (path, err))
    _log.debug("wrote checkpoint '%s'", path)


def read_checkpoint(path):
    """
    Read a checkpoint and return the '(params, header)' tuple, where 'header'
    has the integer values of "n", "m", "seed" and "epoch" and the string
    "kind".
    """

    header = {}
    values = []
    try:
        with TransRead.TransRead(path) as f_obj:
            for lineno, line in enumerate(f_obj, 1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    _parse_meta(line, header)
                    continue
                try:
                    values.append([float(x) for x in line.split()])
                except ValueError as err:
                    raise Error("%s:%d: bad parameter value: %s" % (path, lineno, err))
    except TransRead.Error as err:
        raise Error(str(err))

    missing = [key for key in CHECKPOINT_KEYS if key not in header]
    if missing:
        raise Error("checkpoint '%s' lacks header keys: %s" % (path, ", ".join(missing)))
    try:
        for key in ("n", "m", "seed", "epoch"):
            header[key] = int(header[key])
    except ValueError as err:
        raise Error("checkpoint '%s' has a bad header: %s" % (path, err))

    n, m = header["n"], header["m"]
    if len(values) != n + 2 or len(values[0]) != n or len(values[1]) != m:
        raise Error("checkpoint '%s' does not hold a %dx%d model" % (path, n, m))
    if any(len(row) != m for row in values[2:]):
        raise Error("checkpoint '%s' has a weight row of the wrong length" % path)

    try:
        params = Rbm.RbmParams(values[0], values[1], values[2:])
    except Rbm.Error as err:
        raise Error("checkpoint '%s': %s" % (path, err))
    return params, header


def write_metrics_csv(path, rows, top_k=Metrics.DEFAULT_TOP_K):
    """
    Write metric records to 'path'. 'rows' is an iterable of '(replicate,
    record)' pairs where 'record' is a 'Metrics.MetricsRecord'. The
    concentration column is named after 'top_k', e.g. "top10".
    """

    try:
        with TransRead.open_for_writing(path) as f_obj:
            writer = csv.writer(f_obj, lineterminator="\n")
            writer.writerow(METRICS_COLUMNS + ("top%d" % top_k,))
            for replicate, record in rows:
                writer.writerow(
                    [replicate, record.step]
                    + [repr(float(getattr(record, name))) for name in Metrics.METRIC_NAMES[:-1]]
                    + [record.top_k_concentration]
                )
    except (IOError, OSError, TransRead.Error) as err:
        raise Error("cannot write metrics to '%s': %s" % (path, err))


def read_metrics_csv(path):
    """Inverse of 'write_metrics_csv()': return a list of '(replicate, record)'."""

    rows = []
    try:
        with TransRead.TransRead(path) as f_obj:
            reader = csv.DictReader(f_obj)
            columns = tuple(reader.fieldnames or ())
            top_k_column = columns[-1] if columns else ""
            if columns[:-1] != METRICS_COLUMNS or not _TOP_K_COLUMN.match(top_k_column):
                raise Error("'%s' is not a metrics table" % path)
            for line in reader:
                record = Metrics.MetricsRecord(
                    step=int(line["step"]),
                    precision=float(line["precision"]),
                    recall=float(line["recall"]),
                    pcdd_literal=float(line["pcdd_literal"]),
                    pcdd_l2=float(line["pcdd_l2"]),
                    med=float(line["med"]),
                    top_k_concentration=int(line[top_k_column]),
                )
                rows.append((int(line["replicate"]), record))
    except (ValueError, TypeError) as err:
        raise Error("bad value in metrics table '%s': %s" % (path, err))
    except TransRead.Error as err:
        raise Error(str(err))
    return rows


def format_record(record):
    """Render a record as "name=value" pairs for humans."""

    parts = ["step=%d" % record.step]
    for name in Metrics.METRIC_NAMES:
        value = getattr(record, name)
        if isinstance(value, float) and not math.isnan(value):
            parts.append("%s=%.6g" % (name, value))
        else:
            parts.append("%s=%s" % (name, value))
    return " ".join(parts)


def write_aggregate_csv(path, aggregates):
    """
    Write per-step aggregates ('Experiment.aggregate()' output) to 'path':
    a "step" column, then "<metric>_median", "<metric>_min" and
    "<metric>_max" for every metric.
    """

    names = [name for name in Metrics.METRIC_NAMES if name in aggregates]
    if not names:
        raise Error("no aggregates to write to '%s'" % path)
    steps = aggregates[names[0]].steps

    header = ["step"]
    for name in names:
        header += ["%s_median" % name, "%s_min" % name, "%s_max" % name]

    try:
        with TransRead.open_for_writing(path) as f_obj:
            writer = csv.writer(f_obj, lineterminator="\n")
            writer.writerow(header)
            for idx, step in enumerate(steps):
                row = [int(step)]
                for name in names:
                    stats = aggregates[name]
                    row += [repr(float(stats.median[idx])), repr(float(stats.minimum[idx]))]
                    row.append(repr(float(stats.maximum[idx])))
                writer.writerow(row)
    except (IOError, OSError, TransRead.Error) as err:
        raise Error("cannot write aggregates to '%s': %s" % (path, err))

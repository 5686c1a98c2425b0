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
This module generates the two exactly enumerable datasets used for the
sampling experiments, and provides membership and edit-distance oracles for
them.

  1. Bars and Stripes, BaS(n): 'n x n' binary images (flattened row by row)
     where either every row is constant or every column is constant. There
     are 2 * 2^n - 2 of them, since the all-zero and all-one images are both.
  2. The labeled Shifter ensemble, Shifter(n): strings of 2n + 3 bits. The
     first 3 bits are a one-hot control (shift left, no shift, shift right),
     then come 'n' original bits, then the original bits shifted cyclically
     by one position as the control says. There are 3 * 2^n of them.

The edit distance of a string is the number of bits to flip to reach the
nearest positive example.
"""

import logging

import numpy as np

from . import Rbm

_log = logging.getLogger(__name__)  # pylint: disable=C0103

# Shifts for the three one-hot control patterns, in 'numpy.roll()' terms
_SHIFTER_SHIFTS = (-1, 0, 1)

# Members are compared against in chunks of this many samples
_CHUNK = 4096


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


def _as_rows(bits, width):
    """Turn 'bits' into a 2-D byte array with 'width' columns."""

    arr = np.asarray(bits)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise Error("expected strings of %d bits, got shape %s" % (width, arr.shape))
    if np.any((arr != 0) & (arr != 1)):
        raise Error("strings must consist of 0 and 1 only")
    return arr.astype(np.uint8, copy=False)


def _squeeze(result, bits):
    """Return a scalar for a single input string, an array for a batch."""

    if np.asarray(bits).ndim == 1:
        return result[0].item()
    return result


class PositiveSet(object):
    """
    The enumerated set of positive examples of a dataset. The 'members'
    attribute is a 'K x dim' byte array of distinct strings. Membership is
    looked up by bit pattern.
    """

    def __init__(self, name, size, members):
        self.name = name
        self.size = size
        self.members = np.ascontiguousarray(members, dtype=np.uint8)
        self.members.setflags(write=False)
        self.dim = self.members.shape[1]

        self._index = {}
        for idx, key in enumerate(self._keys(self.members)):
            if key in self._index:
                raise Error("duplicate member %d in the %s set" % (idx, self.label))
            self._index[key] = idx

    @staticmethod
    def _keys(rows):
        packed = np.packbits(rows, axis=1)
        return [row.tobytes() for row in packed]

    @property
    def label(self):
        return "%s(%d)" % (self.name, self.size)

    def __len__(self):
        return self.members.shape[0]

    def __repr__(self):
        return "PositiveSet(%s, %d members of %d bits)" % (self.label, len(self), self.dim)

    def lookup(self, states):
        """
        Return, for every row of 'states', the index of the equal member or
        -1 if the row is not a positive example.
        """

        states = _as_rows(states, self.dim)
        get = self._index.get
        return np.fromiter(
            (get(key, -1) for key in self._keys(states)),
            dtype=np.int64,
            count=states.shape[0],
        )

    def is_positive(self, bits):
        return _squeeze(self.lookup(bits) >= 0, bits)

    def edit_distance(self, bits):
        if self.name == "bas":
            return bas_edit_distance(bits, self.size)
        rows = _as_rows(bits, self.dim)
        return _squeeze(hamming_to_set(rows, self.members), bits)


def bas_positives(n):
    """
    Return the positive set of BaS(n): all images whose rows are each
    constant, together with all images whose columns are each constant.
    """

    if not 1 <= n <= 16:
        raise Error("BaS size must be between 1 and 16, got %d" % n)

    patterns = Rbm.all_binary_states(n)
    # Pattern p colors row r when p[r] is set (stripes) or column c when p[c]
    # is set (bars).
    stripes = np.repeat(patterns, n, axis=1)
    bars = np.tile(patterns, (1, n))

    # Only the all-zero and the all-one images are both
    members = np.concatenate([stripes, bars[1:-1]])
    _log.debug("generated %d BaS(%d) positives", members.shape[0], n)
    return PositiveSet("bas", n, members)


def bas_is_positive(image, n):
    """True if every row of the image is constant or every column is."""

    return _squeeze(_bas_distances(image, n) == 0, image)


def _bas_distances(image, n):
    images = _as_rows(image, n * n).reshape(-1, n, n).astype(np.int64)

    row_ones = images.sum(axis=2)
    col_ones = images.sum(axis=1)
    to_stripes = np.minimum(row_ones, n - row_ones).sum(axis=1)
    to_bars = np.minimum(col_ones, n - col_ones).sum(axis=1)
    return np.minimum(to_stripes, to_bars)


def bas_edit_distance(image, n):
    """
    Return the minimal number of pixels to change to reach a BaS(n) positive.
    The nearest image with constant rows fixes every row to its majority
    value independently, and likewise for columns.
    """

    return _squeeze(_bas_distances(image, n), image)


def shifter_positives(n):
    """
    Return the positive set of Shifter(n): for each control (left, none,
    right) and each original 'o', the string control + o + shifted(o).
    """

    if not 1 <= n <= 12:
        raise Error("Shifter size must be between 1 and 12, got %d" % n)

    originals = Rbm.all_binary_states(n)
    blocks = []
    for which, shift in enumerate(_SHIFTER_SHIFTS):
        control = np.zeros((originals.shape[0], 3), dtype=np.uint8)
        control[:, which] = 1
        shifted = np.roll(originals, shift, axis=1)
        blocks.append(np.concatenate([control, originals, shifted], axis=1))

    members = np.concatenate(blocks)
    _log.debug("generated %d Shifter(%d) positives", members.shape[0], n)
    return PositiveSet("shifter", n, members)


def _shifter_size(width):
    if width < 5 or (width - 3) % 2:
        raise Error("%d is not a valid Shifter string length (2n + 3)" % width)
    return (width - 3) // 2


def shifter_is_positive(bits):
    arr = np.asarray(bits)
    rows = _as_rows(arr, arr.shape[-1])
    n = _shifter_size(rows.shape[1])

    control = rows[:, :3].astype(np.int64)
    one_hot = control.sum(axis=1) == 1
    which = np.argmax(control, axis=1)
    shifted = np.empty_like(rows[:, 3 : 3 + n])
    for idx, shift in enumerate(_SHIFTER_SHIFTS):
        sel = which == idx
        shifted[sel] = np.roll(rows[sel, 3 : 3 + n], shift, axis=1)
    result = one_hot & np.all(shifted == rows[:, 3 + n :], axis=1)
    return _squeeze(result, bits)


def hamming_to_set(states, members):
    """
    Return the minimal Hamming distance from every row of 'states' to the
    rows of 'members' by brute force.
    """

    members = np.asarray(members, dtype=np.int64)
    member_ones = members.sum(axis=1)
    result = np.empty(states.shape[0], dtype=np.int64)
    for start in range(0, states.shape[0], _CHUNK):
        chunk = states[start : start + _CHUNK].astype(np.int64)
        dist = chunk.sum(axis=1)[:, None] + member_ones[None, :] - 2 * (chunk @ members.T)
        result[start : start + _CHUNK] = dist.min(axis=1)
    return result


def shifter_edit_distance(bits):
    """Brute-force minimal Hamming distance to the Shifter(n) positives."""

    arr = np.asarray(bits)
    rows = _as_rows(arr, arr.shape[-1])
    positives = shifter_positives(_shifter_size(rows.shape[1]))
    return _squeeze(hamming_to_set(rows, positives.members), bits)


def dataset_by_name(name, n):
    """Return the positive set of dataset 'name' ("bas" or "shifter")."""

    if name == "bas":
        return bas_positives(n)
    if name == "shifter":
        return shifter_positives(n)
    raise Error('unknown dataset "%s", use "bas" or "shifter"' % name)


def sample_training_set(positives, count, rng):
    """
    Draw 'count' distinct members of 'positives' uniformly at random
    (without replacement) using the 'numpy.random.Generator' 'rng'.
    """

    if count < 1 or count > len(positives):
        raise Error(
            "cannot draw %d distinct examples from the %d members of %s"
            % (count, len(positives), positives.label)
        )

    rows = rng.choice(len(positives), size=count, replace=False)
    return Rbm.StateBatch(positives.members[rows])

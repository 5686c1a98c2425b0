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
This module contains various shared helper functions.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np


class Error(Exception):
    """A class for all the other exceptions raised by this module."""

    pass


def human_size(size):
    """Transform size in bytes into a human-readable form."""
    if size == 1:
        return "1 byte"

    if size < 512:
        return "%d bytes" % size

    for modifier in ["KiB", "MiB", "GiB", "TiB"]:
        size /= 1024.0
        if size < 1024:
            return "%.1f %s" % (size, modifier)

    return "%.1f %s" % (size, "EiB")


def human_time(seconds):
    """Transform time in seconds to the HH:MM:SS format."""
    (minutes, seconds) = divmod(seconds, 60)
    (hours, minutes) = divmod(minutes, 60)

    result = ""
    if hours:
        result = "%dh " % hours
    if minutes:
        result += "%dm " % minutes

    return result + "%.1fs" % seconds


def derive_seed(master_seed, *keys):
    """
    Derive a child seed from 'master_seed' and a path of non-negative integer
    'keys', e.g. (replicate, purpose). Different key paths give statistically
    independent seeds, the same path always gives the same seed.
    """

    if master_seed < 0:
        raise Error("seeds must be non-negative, got %d" % master_seed)
    for key in keys:
        if key < 0:
            raise Error("seed keys must be non-negative, got %r" % (keys,))

    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, np.uint64)[0])


def parallel_map(func, items, workers=1):
    """
    Apply 'func' to every element of 'items' and return the list of results
    in the order of 'items'. With 'workers' > 1 the calls run in a thread
    pool. numpy releases the GIL in the heavy kernels, so threads do help.
    """

    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

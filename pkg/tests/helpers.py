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
This module contains independent functions shared between various
tests.
"""

import os
import subprocess
import sys

import numpy as np

from rbminit import Rbm, TransRead

# Long directional experiments only run when this is set to "1"
LONG_TESTS = os.environ.get("RBMINIT_LONG_TESTS") == "1"

_SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")


def random_model(n, m, rng, scale=1.0):
    """A model with all parameters drawn from N(0, scale^2)."""

    return Rbm.RbmParams(
        rng.normal(0.0, scale, size=n),
        rng.normal(0.0, scale, size=m),
        rng.normal(0.0, scale, size=(n, m)),
    )


def empirical_distribution(states):
    """The distribution of the rows of 'states' over all 2^width binary vectors."""

    states = getattr(states, "states", states)
    idx = Rbm.states_to_indices(states)
    counts = np.bincount(idx, minlength=2 ** states.shape[1])
    return counts / counts.sum()


def tv_distance(first, second):
    """Total variation distance of two distributions over the same states."""
    return 0.5 * float(np.abs(np.asarray(first) - np.asarray(second)).sum())


def write_config(path, **values):
    """Write a "key = value" configuration file, compressed if the name asks for it."""

    with TransRead.open_for_writing(path) as f_obj:
        f_obj.write("# test configuration\n")
        for key, value in values.items():
            if isinstance(value, (list, tuple)):
                value = ", ".join(str(item) for item in value)
            f_obj.write("%s = %s\n" % (key, value))
    return path


def run_cli(*args):
    """Run the command in a subprocess and return the completed process."""

    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join(filter(None, [_SRC_DIR, env.get("PYTHONPATH")]))
    return subprocess.run(
        [sys.executable, "-m", "rbminit"] + [str(arg) for arg in args],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        check=False,
        env=env,
    )

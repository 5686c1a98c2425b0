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
Figures of merit of a multiset 'G' of generated samples against the set 'X'
of positive examples of a dataset:

  * precision - the fraction of generated samples which are positive
                (counted with multiplicity);
  * recall    - the fraction of positive examples generated at least once;
  * pcdd      - positive-case distribution distance, in two flavours: the
                literal count ratio and an L2 distance of the distribution of
                generated positives from the uniform one;
  * med       - negative-case mean edit distance, the summed edit distance of
                the negative samples divided by |G|;
  * top-k     - how many samples fall on the 'k' most generated positives.

'G' may be a 'StateBatch' or a plain 2-D byte array.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

_log = logging.getLogger(__name__)  # pylint: disable=C0103

# Number of most frequent positives summed by default
DEFAULT_TOP_K = 10


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class MetricsRecord(NamedTuple):
    """All figures of merit of the chains at Gibbs update 'step'."""

    step: int
    precision: float
    recall: float
    pcdd_literal: float
    pcdd_l2: float
    med: float
    top_k_concentration: int


# Names of the metric fields of 'MetricsRecord', in order
METRIC_NAMES = MetricsRecord._fields[1:]


def _states(samples):
    states = getattr(samples, "states", samples)
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[0] == 0:
        raise Error("need a non-empty 2-D array of samples, got shape %s" % (states.shape,))
    return states


def positive_counts(samples, positives):
    """
    Return an array with the number of times every member of 'positives'
    occurs in 'samples'.
    """

    idx = positives.lookup(_states(samples))
    return np.bincount(idx[idx >= 0], minlength=len(positives))


def precision(samples, positives):
    states = _states(samples)
    return float(positive_counts(states, positives).sum() / states.shape[0])


def recall(samples, positives):
    counts = positive_counts(samples, positives)
    return float(np.count_nonzero(counts) / len(positives))


def pcdd_literal(samples, positives):
    """The count of positive samples divided by the number of positives."""

    counts = positive_counts(samples, positives)
    return float(counts.sum() / len(positives))


def _pcdd_l2(counts):
    total = counts.sum()
    if total == 0:
        raise Error("the L2 distribution distance needs at least one positive sample")
    return math.sqrt(float(np.sum((counts / total - 1.0 / counts.size) ** 2)))


def pcdd_l2(samples, positives):
    """
    The L2 distance between the empirical distribution of the generated
    positive samples and the uniform distribution over all positives.
    """

    return _pcdd_l2(positive_counts(samples, positives))


def med(samples, positives, dist_oracle=None):
    """
    The summed edit distance of the negative samples divided by the number of
    all samples. 'dist_oracle' maps a batch of strings to their distances and
    defaults to 'positives.edit_distance'.
    """

    states = _states(samples)
    if dist_oracle is None:
        dist_oracle = positives.edit_distance

    negative = positives.lookup(states) < 0
    if not negative.any():
        return 0.0
    distances = np.asarray(dist_oracle(states[negative]))
    return float(distances.sum() / states.shape[0])


def _top_k(counts, k):
    if k < 0:
        raise Error("k must be non-negative, got %d" % k)
    if k == 0:
        return 0
    top = np.sort(counts[counts > 0])[::-1][:k]
    return int(top.sum())


def top_k_concentration(samples, positives, k=DEFAULT_TOP_K):
    """The summed counts of the 'k' most frequently generated positives."""

    return _top_k(positive_counts(samples, positives), k)


def evaluate(samples, positives, step, k=DEFAULT_TOP_K, dist_oracle=None):
    """
    Compute all figures of merit at once. The L2 distribution distance is not
    defined without positive samples; it is recorded as NaN then.
    """

    states = _states(samples)
    idx = positives.lookup(states)
    counts = np.bincount(idx[idx >= 0], minlength=len(positives))
    total = int(counts.sum())

    if total:
        l2 = _pcdd_l2(counts)
    else:
        l2 = float("nan")

    if dist_oracle is None:
        dist_oracle = positives.edit_distance
    negative = idx < 0
    if negative.any():
        med_value = float(np.asarray(dist_oracle(states[negative])).sum() / states.shape[0])
    else:
        med_value = 0.0

    record = MetricsRecord(
        step=int(step),
        precision=total / states.shape[0],
        recall=np.count_nonzero(counts) / len(positives),
        pcdd_literal=total / len(positives),
        pcdd_l2=l2,
        med=med_value,
        top_k_concentration=_top_k(counts, k),
    )
    _log.debug("metrics at step %d: %s", step, record)
    return record


def uniform_top_k_reference(positives_count, samples_count, rng, k=DEFAULT_TOP_K, trials=100):
    """
    Monte-Carlo reference for the top-k concentration of an ideal sampler:
    draw 'samples_count' positives uniformly at random from 'positives_count'
    ones, 'trials' times. Returns the array of top-k sums.
    """

    result = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        draws = rng.integers(0, positives_count, size=samples_count)
        result[trial] = _top_k(np.bincount(draws, minlength=positives_count), k)
    return result

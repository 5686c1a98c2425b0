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
This module trains RBMs by gradient ascent on the log-likelihood and provides
brute-force oracles for models small enough to enumerate.

The gradient of the average log-likelihood with respect to w_ij is the
difference of the positive phase <v_i h_j> over the data and the negative
phase <v_i h_j> over the model distribution. The positive phase is computed
exactly from the conditional probabilities p(h | v). The negative phase is
estimated by Gibbs chains, either

  * "cd" - contrastive divergence, chains start at the training examples and
    run 'k' full Gibbs updates (CD-1 for k = 1), or
  * "naive" - chains start at random binary vectors and run 'k' updates
    (50 by default).

The bias gradients use the differences of the mean visible and hidden
activations. Plain gradient steps are done: no momentum, no weight decay.
"""

# Disable the following pylint recommendations:
#   * Too many arguments - R0913
# pylint: disable=R0913

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from . import Rbm, SampleFile
from .Rbm import Stream

_log = logging.getLogger(__name__)  # pylint: disable=C0103

# Training is aborted when any parameter grows beyond this magnitude
DIVERGENCE_LIMIT = 1e6

# Largest n + m for the full (v, h) probability table
MAX_TABLE_UNITS = 20

# Largest n + m for partition functions and likelihoods
MAX_ENUM_UNITS = 24

NEGATIVE_PHASE_KINDS = ("cd", "naive")

# Default number of Gibbs updates of the negative phase chains
DEFAULT_NEGATIVE_UPDATES = {"cd": 1, "naive": 50}


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyper-parameters. A zero learning rate is accepted and makes
    training a no-op, which is handy for checking the plumbing.
    """

    learning_rate: float = 0.05
    epochs: int = 2000
    negative_phase_kind: str = "cd"
    gibbs_updates_negative: int = 1
    negative_chain_count: int = 512
    batch_size: int = 512

    def __post_init__(self):
        if self.negative_phase_kind not in NEGATIVE_PHASE_KINDS:
            raise Error(
                'unknown negative phase "%s", use one of: %s'
                % (self.negative_phase_kind, ", ".join(NEGATIVE_PHASE_KINDS))
            )
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise Error("bad learning rate %r" % self.learning_rate)
        for name in ("epochs", "gibbs_updates_negative", "negative_chain_count", "batch_size"):
            if getattr(self, name) < 1:
                raise Error("%s must be at least 1, got %r" % (name, getattr(self, name)))

    @classmethod
    def for_kind(cls, kind, **overrides):
        """
        Return the configuration for negative phase 'kind' ("cd" or
        "naive") with the matching default number of Gibbs updates.
        """

        if kind not in DEFAULT_NEGATIVE_UPDATES:
            raise Error('unknown negative phase "%s"' % kind)
        overrides.setdefault("gibbs_updates_negative", DEFAULT_NEGATIVE_UPDATES[kind])
        return cls(negative_phase_kind=kind, **overrides)

    def with_changes(self, **changes):
        return replace(self, **changes)


class PhaseStats(NamedTuple):
    """The expectations <v_i h_j>, <v_i> and <h_j> of one gradient phase."""

    vh_mean: np.ndarray
    v_mean: np.ndarray
    h_mean: np.ndarray


def _states(data):
    states = getattr(data, "states", data)
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[0] == 0:
        raise Error("need a non-empty 2-D batch of visible states, got %s" % (states.shape,))
    return states


def _expectations(params, states, weights=None):
    """
    Statistics of the visible 'states' with the hidden layer averaged out by
    p(h | v). 'weights' are per-state probabilities (uniform if None).
    """

    if states.shape[1] != params.n:
        raise Error(
            "data has %d units per example, the model has %d visible units"
            % (states.shape[1], params.n)
        )

    v = states.astype(np.float64)
    probs = Rbm.hidden_probs(params, v)
    if weights is None:
        weights = np.full(v.shape[0], 1.0 / v.shape[0])
    weighted = v * weights[:, None]
    return PhaseStats(
        vh_mean=weighted.T @ probs,
        v_mean=weighted.sum(axis=0),
        h_mean=weights @ probs,
    )


def positive_phase(params, data):
    """Data expectations, with exact hidden probabilities in place of samples."""

    return _expectations(params, _states(data))


def negative_phase_cd(params, data, k, streams, first_step=1):
    """
    Contrastive divergence: start one chain at every example of 'data', run
    'k' full Gibbs updates (update indices from 'first_step') and take the
    statistics of the final visible states.
    """

    if k < 1:
        raise Error("the negative phase needs at least one Gibbs update, got %d" % k)

    states = _states(data)
    batch = Rbm.StateBatch(states)
    final = Rbm.gibbs_chain(params, batch, streams, k, first_step)
    return _expectations(params, final.states)


def negative_phase_naive(params, chain_count, k, streams, first_step=1):
    """
    Naive Gibbs sampling: start 'chain_count' chains at random binary vectors
    and run 'k' full Gibbs updates.
    """

    if k < 1:
        raise Error("the negative phase needs at least one Gibbs update, got %d" % k)
    if chain_count < 1:
        raise Error("need at least one chain, got %d" % chain_count)

    ids = np.arange(chain_count, dtype=np.int64)
    start = streams.uniform(ids, params.n, Stream.INIT, first_step) < 0.5
    batch = Rbm.StateBatch(start.astype(np.uint8), ids)
    final = Rbm.gibbs_chain(params, batch, streams, k, first_step)
    return _expectations(params, final.states)


def exact_negative_phase(params):
    """Model expectations at T = 1, by enumerating the visible states."""

    if params.n > MAX_TABLE_UNITS:
        raise Error(
            "exact negative phase needs n <= %d, the model has %d visible units"
            % (MAX_TABLE_UNITS, params.n)
        )

    visible = Rbm.all_binary_states(params.n)
    log_weights = -Rbm.free_energy(params, visible)
    weights = np.exp(log_weights - logsumexp(log_weights))
    return _expectations(params, visible, weights)


def _step(params, positive, negative, learning_rate):
    """Apply one gradient step; raise 'Error' when the parameters diverge."""

    a = params.visible_bias + learning_rate * (positive.v_mean - negative.v_mean)
    b = params.hidden_bias + learning_rate * (positive.h_mean - negative.h_mean)
    w = params.weights + learning_rate * (positive.vh_mean - negative.vh_mean)

    for arr in (a, b, w):
        if not np.all(np.isfinite(arr)) or np.abs(arr).max() > DIVERGENCE_LIMIT:
            raise Error(
                "training diverged: a parameter exceeds %g in magnitude" % DIVERGENCE_LIMIT
            )
    return Rbm.RbmParams(a, b, w)


def train(params, data, config, streams, callback=None):
    """
    Train 'params' on 'data' and return the new parameters. Every epoch
    visits the data in mini-batches of 'config.batch_size' examples (a
    shuffled order drawn from 'streams' unless the batch is the whole data)
    and does one gradient step per mini-batch. If 'callback' is given, it is
    called as 'callback(epoch, params)' after every epoch.
    """

    states = _states(data)
    if states.shape[1] != params.n:
        raise Error(
            "data has %d units per example, the model has %d visible units"
            % (states.shape[1], params.n)
        )

    if config.learning_rate == 0:
        _log.debug("learning rate is 0, nothing to train")
        return params

    count = states.shape[0]
    batch_size = min(config.batch_size, count)
    k = config.gibbs_updates_negative
    updates = 0

    _log.debug(
        "training %r on %d examples: %s, k=%d, %d epochs, batch %d, rate %g",
        params,
        count,
        config.negative_phase_kind,
        k,
        config.epochs,
        batch_size,
        config.learning_rate,
    )

    for epoch in range(1, config.epochs + 1):
        if batch_size < count:
            order = streams.generator(Stream.SHUFFLE, epoch).permutation(count)
        else:
            order = np.arange(count)

        for start in range(0, count, batch_size):
            batch = states[order[start : start + batch_size]]
            positive = positive_phase(params, batch)
            first_step = updates * k + 1
            if config.negative_phase_kind == "cd":
                negative = negative_phase_cd(params, batch, k, streams, first_step)
            else:
                negative = negative_phase_naive(
                    params, config.negative_chain_count, k, streams, first_step
                )
            params = _step(params, positive, negative, config.learning_rate)
            updates += 1

        if epoch % 100 == 0:
            _log.debug("epoch %d/%d: %r", epoch, config.epochs, params)
        if callback:
            callback(epoch, params)

    return params


def _check_enum_size(params, limit, what):
    if params.n + params.m > limit:
        raise Error(
            "%s needs n + m <= %d, the model has %d units" % (what, limit, params.n + params.m)
        )


def exact_log_partition_function(params, temperature=1.0):
    """
    Return log Z at 'temperature'. The larger layer is summed out
    analytically, the smaller one is enumerated.
    """

    _check_enum_size(params, MAX_ENUM_UNITS, "the exact partition function")

    if params.n <= params.m:
        visible = Rbm.all_binary_states(params.n)
        return float(logsumexp(-Rbm.free_energy(params, visible, temperature)))

    # Same as above with the roles of the layers swapped
    mirrored = Rbm.RbmParams(params.hidden_bias, params.visible_bias, params.weights.T)
    hidden = Rbm.all_binary_states(params.m)
    return float(logsumexp(-Rbm.free_energy(mirrored, hidden, temperature)))


def exact_partition_function(params, temperature=1.0):
    log_z = exact_log_partition_function(params, temperature)
    if log_z > np.log(np.finfo(np.float64).max):
        raise Error("the partition function overflows, use the log-domain version")
    return float(np.exp(log_z))


class BoltzmannTable(object):
    """
    The probabilities of all (v, h) configurations. 'probs[r, c]' belongs to
    the visible state in row 'r' of 'all_binary_states(n)' and the hidden
    state in row 'c' of 'all_binary_states(m)'.
    """

    def __init__(self, probs, n, m):
        self.probs = probs
        self.n = n
        self.m = m

    def visible_marginal(self):
        return self.probs.sum(axis=1)

    def probability(self, v, h):
        return float(self.probs[Rbm.states_to_indices(v), Rbm.states_to_indices(h)])

    def joint(self):
        """The probabilities as a flat vector over the states v + h (v first)."""
        return self.probs.ravel()


def exact_boltzmann_table(params, temperature=1.0):
    """Return the 'BoltzmannTable' of the RBM at 'temperature'."""

    _check_enum_size(params, MAX_TABLE_UNITS, "the Boltzmann table")

    beta = Rbm.Temperature(temperature).beta
    visible = Rbm.all_binary_states(params.n).astype(np.float64)
    hidden = Rbm.all_binary_states(params.m).astype(np.float64)
    energies = -(
        (visible @ params.visible_bias)[:, None]
        + (hidden @ params.hidden_bias)[None, :]
        + visible @ params.weights @ hidden.T
    )
    log_weights = -beta * energies
    probs = np.exp(log_weights - logsumexp(log_weights))
    return BoltzmannTable(probs, params.n, params.m)


def exact_visible_marginal(params, temperature=1.0):
    """
    Return p(v) at 'temperature' for all rows of 'all_binary_states(n)'. Only
    the visible layer is enumerated, so the hidden layer can be of any size.
    """

    if params.n > MAX_TABLE_UNITS:
        raise Error(
            "the visible marginal needs n <= %d, the model has %d visible units"
            % (MAX_TABLE_UNITS, params.n)
        )

    log_weights = -Rbm.free_energy(params, Rbm.all_binary_states(params.n), temperature)
    return np.exp(log_weights - logsumexp(log_weights))


def exact_log_likelihood(params, data, temperature=1.0):
    """Return the sum over 'data' of log p(v) at 'temperature'."""

    _check_enum_size(params, MAX_ENUM_UNITS, "the exact log-likelihood")
    states = _states(data)
    if states.shape[1] != params.n:
        raise Error("data width %d does not match n=%d" % (states.shape[1], params.n))

    log_z = exact_log_partition_function(params, temperature)
    free = Rbm.free_energy(params, states, temperature)
    return float(-np.sum(free) - states.shape[0] * log_z)


def save_checkpoint(path, params, kind, seed, epoch):
    """Save the parameters with the training kind, seed and epoch."""

    try:
        SampleFile.write_checkpoint(path, params, kind, seed, epoch)
    except SampleFile.Error as err:
        raise Error(str(err))
    _log.info("saved %r (epoch %d) to '%s'", params, epoch, path)


def load_checkpoint(path):
    """Return the '(params, header)' tuple stored in checkpoint 'path'."""

    try:
        params, header = SampleFile.read_checkpoint(path)
    except SampleFile.Error as err:
        raise Error(str(err))
    _log.debug("loaded %r from '%s': %s", params, path, header)
    return params, header

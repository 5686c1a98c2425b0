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
This module implements the restricted Boltzmann machine (RBM) itself: the
parameters, the energy function, the conditional distributions of one layer
given the other and block Gibbs updates over batches of Markov chains.

An RBM has 'n' binary visible units 'v' and 'm' binary hidden units 'h'. The
energy of a configuration is

    E(v, h) = - sum_i a_i v_i - sum_j b_j h_j - sum_ij w_ij v_i h_j

and the model assigns the probability exp(-E(v, h) / T) / Z to it. Because
there are no connections within a layer, all hidden units are independent
given the visible ones (and vice versa), which is what makes block Gibbs
sampling cheap: a "full Gibbs update" samples the whole hidden layer given
the visible layer and then the whole visible layer given the hidden one.

Randomness is never taken from a global generator. Every random number comes
from a 'ChainStreams' object, which derives it from the master seed, a stream
tag, the update index and the chain index. Hence the result for a chain does
not depend on its position in the batch or on the number of worker threads.
"""

# Disable the following pylint recommendations:
#   * Too few public methods (R0903)
# pylint: disable=R0903

import enum
import logging

import numpy as np
from scipy.special import expit

from . import Helpers

_log = logging.getLogger(__name__)  # pylint: disable=C0103


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class Temperature(float):
    """
    The sampling temperature 'T'. This is a float which refuses non-positive
    and non-finite values and additionally provides 'beta' = 1 / T.
    """

    def __new__(cls, value):
        try:
            value = float(value)
        except (TypeError, ValueError) as err:
            raise Error("bad temperature %r: %s" % (value, err))
        if not np.isfinite(value) or value <= 0:
            raise Error("temperature must be positive and finite, got %r" % value)
        return super().__new__(cls, value)

    @property
    def beta(self):
        return 1.0 / float(self)

    def __repr__(self):
        return "Temperature(%r)" % float(self)


class RbmParams(object):
    """
    Immutable RBM parameters: the visible biases 'a' (length 'n'), the hidden
    biases 'b' (length 'm') and the 'n x m' weight matrix 'w'. The arrays are
    copied on construction and made read-only, so an instance can be shared
    between threads while sampling.
    """

    def __init__(self, visible_bias, hidden_bias, weights):
        a = np.array(visible_bias, dtype=np.float64)
        b = np.array(hidden_bias, dtype=np.float64)
        w = np.array(weights, dtype=np.float64)

        if a.ndim != 1 or b.ndim != 1 or w.ndim != 2:
            raise Error(
                "biases must be vectors and weights a matrix, got shapes %s, %s "
                "and %s" % (a.shape, b.shape, w.shape)
            )
        if a.size < 1 or b.size < 1:
            raise Error(
                "an RBM needs at least one visible and one hidden unit, got "
                "n=%d, m=%d" % (a.size, b.size)
            )
        if w.shape != (a.size, b.size):
            raise Error(
                "weight matrix has shape %s, but the biases imply %s"
                % (w.shape, (a.size, b.size))
            )
        for name, arr in (("visible bias", a), ("hidden bias", b), ("weights", w)):
            if not np.all(np.isfinite(arr)):
                raise Error("%s contains non-finite values" % name)
            arr.setflags(write=False)

        self.visible_bias = a
        self.hidden_bias = b
        self.weights = w

    @property
    def n(self):
        """Number of visible units."""
        return self.visible_bias.size

    @property
    def m(self):
        """Number of hidden units."""
        return self.hidden_bias.size

    @classmethod
    def zeros(cls, n, m):
        return cls(np.zeros(n), np.zeros(m), np.zeros((n, m)))

    @classmethod
    def random(cls, n, m, rng, scale=0.01):
        """
        Create parameters for a fresh model: zero biases and weights drawn
        from a zero-mean normal distribution with standard deviation 'scale'.
        The 'rng' argument is a 'numpy.random.Generator'.
        """

        return cls(np.zeros(n), np.zeros(m), rng.normal(0.0, scale, size=(n, m)))

    def max_abs(self):
        """Return the largest absolute value among all parameters."""
        return max(
            np.abs(self.visible_bias).max(),
            np.abs(self.hidden_bias).max(),
            np.abs(self.weights).max(),
        )

    def __repr__(self):
        return "RbmParams(n=%d, m=%d, max|theta|=%g)" % (self.n, self.m, self.max_abs())


class StateBatch(object):
    """
    A batch of 'C' independent binary chain states. 'states' is a 'C x d'
    array of bytes with values 0 and 1, 'chain_ids' gives the identity of
    every row. Chain identities select the random streams of a chain, and
    they travel with the rows when a batch is split or reordered.
    """

    def __init__(self, states, chain_ids=None):
        states = np.asarray(states)
        if states.ndim != 2:
            raise Error("a state batch must be 2-dimensional, got %s" % (states.shape,))
        if states.shape[0] < 1:
            raise Error("a state batch must contain at least one chain")
        if np.any((states != 0) & (states != 1)):
            raise Error("state batch entries must be exactly 0 or 1")

        if chain_ids is None:
            chain_ids = np.arange(states.shape[0], dtype=np.int64)
        else:
            chain_ids = np.asarray(chain_ids, dtype=np.int64)
            if chain_ids.shape != (states.shape[0],):
                raise Error(
                    "got %d chain identifiers for %d chains"
                    % (chain_ids.size, states.shape[0])
                )
            if chain_ids.size and chain_ids.min() < 0:
                raise Error("chain identifiers must be non-negative")

        self.states = states.astype(np.uint8, copy=False)
        self.chain_ids = chain_ids

    @classmethod
    def _wrap(cls, states, chain_ids):
        """Build a batch from arrays known to be valid, skipping the checks."""
        batch = cls.__new__(cls)
        batch.states = states
        batch.chain_ids = chain_ids
        return batch

    @property
    def count(self):
        """Number of chains 'C'."""
        return self.states.shape[0]

    @property
    def width(self):
        """Number of units per chain 'd'."""
        return self.states.shape[1]

    def __len__(self):
        return self.count

    def take(self, rows):
        """Return the sub-batch consisting of rows 'rows' (an index array)."""
        rows = np.asarray(rows)
        return StateBatch._wrap(self.states[rows], self.chain_ids[rows])

    def __repr__(self):
        return "StateBatch(C=%d, d=%d)" % (self.count, self.width)


class Stream(enum.IntEnum):
    """Tags of the independent random streams drawn from 'ChainStreams'."""

    HIDDEN = 0
    VISIBLE = 1
    INIT = 2
    ANNEAL = 3
    MIX = 4
    EXACT = 5
    GAUGE = 6
    SHUFFLE = 7


class ChainStreams(object):
    """
    Counter-based source of per-chain random numbers. Chains are grouped in
    blocks of 'BLOCK_SIZE' consecutive identifiers. For a given (tag, step,
    block) a generator is seeded from the master seed, and chain 'i' gets row
    'i % BLOCK_SIZE' of the numbers drawn for its block. Blocks are filled by
    up to 'workers' threads; the output does not depend on it.
    """

    BLOCK_SIZE = 1024

    def __init__(self, seed, workers=1):
        if seed < 0:
            raise Error("seeds must be non-negative, got %d" % seed)
        self.seed = int(seed)
        self.workers = max(1, int(workers))

    def _block_uniform(self, tag, step, block, width):
        seq = np.random.SeedSequence(self.seed, spawn_key=(int(tag), int(step), int(block)))
        return np.random.default_rng(seq).random((self.BLOCK_SIZE, width))

    def uniform(self, chain_ids, width, tag, step=0):
        """
        Return a 'len(chain_ids) x width' array of uniform numbers in [0, 1)
        for stream 'tag' at update 'step'.
        """

        chain_ids = np.asarray(chain_ids, dtype=np.int64)
        if step < 0:
            raise Error("the update index must be non-negative, got %d" % step)

        blocks = chain_ids // self.BLOCK_SIZE
        offsets = chain_ids % self.BLOCK_SIZE
        out = np.empty((chain_ids.size, width))

        # Group the rows by block once
        order = np.argsort(blocks, kind="stable")
        unique, starts = np.unique(blocks[order], return_index=True)
        bounds = list(zip(unique, starts, np.append(starts[1:], order.size)))

        def fill(bound):
            block, first, last = bound
            rows = order[first:last]
            out[rows] = self._block_uniform(tag, step, block, width)[offsets[rows]]

        Helpers.parallel_map(fill, bounds, self.workers)
        return out

    def generator(self, tag, step=0):
        """
        Return a 'numpy.random.Generator' for batch-wide decisions (shuffles,
        gauge choices) which do not belong to any single chain.
        """

        seq = np.random.SeedSequence(self.seed, spawn_key=(int(tag), int(step), 2**32))
        return np.random.default_rng(seq)


def all_binary_states(k):
    """
    Return all 2^k binary vectors of length 'k' as a '2^k x k' byte array.
    Row 'r' is the binary representation of 'r', most significant bit first.
    """

    if k < 0 or k > 30:
        raise Error("cannot enumerate 2^%d states" % k)
    codes = np.arange(2**k, dtype=np.int64)[:, None]
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]
    return ((codes >> shifts) & 1).astype(np.uint8)


def states_to_indices(states):
    """Inverse of 'all_binary_states()': map binary rows to their row numbers."""

    states = np.asarray(states, dtype=np.int64)
    k = states.shape[-1]
    return states @ (1 << np.arange(k - 1, -1, -1, dtype=np.int64))


def _check_last_dim(arr, size, what):
    if arr.shape[-1] != size:
        raise Error("%s has %d entries, expected %d" % (what, arr.shape[-1], size))


def energy(params, v, h):
    """
    Return the energy E(v, h). 'v' and 'h' may be single vectors or batches
    (matching leading dimensions), in which case an array of energies is
    returned.
    """

    v = np.asarray(v, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_last_dim(v, params.n, "visible vector")
    _check_last_dim(h, params.m, "hidden vector")

    result = -(
        v @ params.visible_bias
        + h @ params.hidden_bias
        + np.sum((v @ params.weights) * h, axis=-1)
    )
    if np.ndim(result) == 0:
        return float(result)
    return result


def free_energy(params, v, temperature=1.0):
    """
    Return F(v) = -log(sum_h exp(-E(v, h) / T)), the hidden layer summed out
    analytically. Works on single vectors and on batches.
    """

    beta = Temperature(temperature).beta
    v = np.asarray(v, dtype=np.float64)
    _check_last_dim(v, params.n, "visible vector")

    field = beta * (v @ params.weights + params.hidden_bias)
    result = -(beta * (v @ params.visible_bias) + np.sum(np.logaddexp(0.0, field), axis=-1))
    if np.ndim(result) == 0:
        return float(result)
    return result


def hidden_probs(params, v):
    """Return p(h_j = 1 | v) for every hidden unit (batches are supported)."""

    v = np.asarray(v, dtype=np.float64)
    _check_last_dim(v, params.n, "visible vector")
    return expit(v @ params.weights + params.hidden_bias)


def visible_probs(params, h):
    """Return p(v_i = 1 | h) for every visible unit (batches are supported)."""

    h = np.asarray(h, dtype=np.float64)
    _check_last_dim(h, params.m, "hidden vector")
    return expit(h @ params.weights.T + params.visible_bias)


def sample_hidden(params, v_batch, streams, step=0):
    """
    Sample the hidden layer of every chain of 'v_batch' from p(h | v). Returns
    a batch of width 'm' with the same chain identifiers.
    """

    if v_batch.width != params.n:
        raise Error(
            "visible batch has width %d, the model has %d visible units"
            % (v_batch.width, params.n)
        )
    probs = hidden_probs(params, v_batch.states)
    noise = streams.uniform(v_batch.chain_ids, params.m, Stream.HIDDEN, step)
    return StateBatch._wrap((noise < probs).astype(np.uint8), v_batch.chain_ids)


def sample_visible(params, h_batch, streams, step=0):
    """The mirror of 'sample_hidden()': sample 'v' from p(v | h)."""

    if h_batch.width != params.m:
        raise Error(
            "hidden batch has width %d, the model has %d hidden units"
            % (h_batch.width, params.m)
        )
    probs = visible_probs(params, h_batch.states)
    noise = streams.uniform(h_batch.chain_ids, params.n, Stream.VISIBLE, step)
    return StateBatch._wrap((noise < probs).astype(np.uint8), h_batch.chain_ids)


def gibbs_update(params, v_batch, streams, step=0):
    """
    Apply one full Gibbs update to every chain: h^(k) ~ p(h | v^(k)), then
    v^(k+1) ~ p(v | h^(k)). 'step' is the update index 'k' and selects the
    random numbers. Returns the new visible batch.
    """

    h_batch = sample_hidden(params, v_batch, streams, step)
    return sample_visible(params, h_batch, streams, step)


def gibbs_chain(params, v_batch, streams, updates, first_step=1, callback=None):
    """
    Run 'updates' full Gibbs updates with update indices 'first_step',
    'first_step + 1', etc. If 'callback' is given, it is called as
    'callback(step, batch)' after every update. Returns the final batch.
    """

    if updates < 0:
        raise Error("the number of Gibbs updates cannot be negative: %d" % updates)

    for step in range(first_step, first_step + updates):
        v_batch = gibbs_update(params, v_batch, streams, step)
        if callback:
            callback(step, v_batch)
    return v_batch


def scale_temperature(params, temperature):
    """
    Fold the temperature into the parameters: return (a/T, b/T, w/T), so that
    exp(-E(v, h) / T) of 'params' equals exp(-E'(v, h)) of the result.
    """

    temperature = Temperature(temperature)
    if temperature == 1.0:
        return params

    return RbmParams(
        params.visible_bias / temperature,
        params.hidden_bias / temperature,
        params.weights / temperature,
    )

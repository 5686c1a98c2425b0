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
This module implements the backends which produce the initial states of the
Markov chains:

  1. 'uniform_init()' - pseudo-random binary strings (classical strategy).
  2. An annealer emulator. The RBM at temperature 'T' is converted to an
     Ising model 'H(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j' over spins
     s = 2x - 1, whose Boltzmann distribution at beta = 1 is the RBM's
     distribution at 'T'. The model is handed to the simulated annealing
     sampler of 'neal' as a 'dimod' model, optionally under several
     spin-reversal (gauge) transforms.
  3. 'exact_boltzmann_init()' - exact draws from the Boltzmann distribution,
     the ideal annealer for models small enough to enumerate.
  4. 'import_samples()' - samples produced by a real device, read from a
     sample file.
  5. 'hybrid_mix()' - per-chain uniform draws from the union of two batches.

The emulator targets the classical Boltzmann distribution only; it does not
simulate quantum dynamics, and the device coefficient ranges are only
checked, never enforced by rescaling.
"""

# Disable the following pylint recommendations:
#   * Too many arguments - R0913
# pylint: disable=R0913

import logging
from dataclasses import dataclass

import dimod
import neal
import numpy as np

from . import Helpers, Rbm, RbmTrain, SampleFile
from .Rbm import Stream

_log = logging.getLogger(__name__)  # pylint: disable=C0103

# Spin-reversal transforms used by default
DEFAULT_TRANSFORMS = 10

# Annealing schedules the sampler knows
SA_SCHEDULES = ("geometric", "linear")


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class IsingModel(object):
    """
    An Ising model over 'N' spins with values -1 and +1: the 'fields' vector
    (h_i), the 'couplings' dictionary mapping '(i, j)' with 'i < j' to J_ij,
    and a constant 'offset' which is not part of H(s) but records the energy
    shift of the conversion it came from.
    """

    def __init__(self, fields, couplings, offset=0.0):
        fields = np.array(fields, dtype=np.float64)
        if fields.ndim != 1 or fields.size < 1:
            raise Error("fields must be a non-empty vector, got shape %s" % (fields.shape,))
        if not np.all(np.isfinite(fields)):
            raise Error("fields contain non-finite values")

        spins = fields.size
        matrix = np.zeros((spins, spins))
        checked = {}
        for (i, j), value in couplings.items():
            i, j, value = int(i), int(j), float(value)
            if not 0 <= i < j < spins:
                raise Error("bad coupling key (%d, %d) for %d spins" % (i, j, spins))
            if not np.isfinite(value):
                raise Error("coupling (%d, %d) is not finite" % (i, j))
            checked[(i, j)] = value
            matrix[i, j] = matrix[j, i] = value
        if not np.isfinite(offset):
            raise Error("the offset is not finite")

        fields.setflags(write=False)
        matrix.setflags(write=False)
        self.fields = fields
        self.couplings = checked
        self.offset = float(offset)
        self._matrix = matrix

    @property
    def spin_count(self):
        return self.fields.size

    def coupling_matrix(self):
        """The symmetric 'N x N' coupling matrix with a zero diagonal."""
        return self._matrix

    def energy(self, spins):
        """Return H(s), for a single spin vector or a batch of them."""

        spins = np.asarray(spins, dtype=np.float64)
        if spins.shape[-1] != self.spin_count:
            raise Error(
                "spin vector has %d entries, the model has %d spins"
                % (spins.shape[-1], self.spin_count)
            )
        result = spins @ self.fields + 0.5 * np.sum((spins @ self._matrix) * spins, axis=-1)
        if np.ndim(result) == 0:
            return float(result)
        return result

    def __repr__(self):
        return "IsingModel(N=%d, %d couplings)" % (self.spin_count, len(self.couplings))


def ising_energy(ising, spins):
    return ising.energy(spins)


def rbm_to_ising(params, temperature):
    """
    Convert the RBM at temperature 'T' into an Ising model. With
    v_i = (s_i + 1) / 2 and h_j = (s_{n+j} + 1) / 2 the identity
    H(s) + offset = E(v, h) / T holds for every state. No rescaling other
    than the division by 'T' is done.
    """

    scaled = Rbm.scale_temperature(params, temperature)
    a, b, w = scaled.visible_bias, scaled.hidden_bias, scaled.weights
    n, m = scaled.n, scaled.m

    fields = np.concatenate([-a / 2 - w.sum(axis=1) / 4, -b / 2 - w.sum(axis=0) / 4])
    rows, cols = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    couplings = dict(
        zip(zip(rows.ravel().tolist(), (cols.ravel() + n).tolist()), (-w.ravel() / 4).tolist())
    )
    offset = -a.sum() / 2 - b.sum() / 2 - w.sum() / 4
    return IsingModel(fields, couplings, offset)


def visible_to_spins(states):
    return np.asarray(states, dtype=np.int8) * 2 - 1


def spins_to_visible(spins, n, chain_ids=None):
    """Map the first 'n' spins of every row back to visible units (s + 1) / 2."""

    spins = np.asarray(spins)
    if spins.ndim != 2 or spins.shape[1] < n:
        raise Error("cannot take %d visible units from spins of shape %s" % (n, spins.shape))
    if np.any(np.abs(spins) != 1):
        raise Error("spins must be -1 or +1")
    return Rbm.StateBatch(((spins[:, :n] + 1) // 2).astype(np.uint8), chain_ids)


@dataclass(frozen=True)
class RangeLimits:
    """Largest absolute field and coupling values a device accepts."""

    h_max: float = 4.0
    j_max: float = 1.0

    def __post_init__(self):
        if not (self.h_max > 0 and self.j_max > 0):
            raise Error("range limits must be positive, got %r" % (self,))


@dataclass(frozen=True)
class Violation:
    kind: str
    key: tuple
    value: float
    limit: float


class RangeReport(object):
    """The fields and couplings of a model which exceed the range limits."""

    def __init__(self, limits, violations):
        self.limits = limits
        self.violations = violations

    @property
    def ok(self):
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def summary(self):
        fields = sum(1 for v in self.violations if v.kind == "field")
        couplings = len(self.violations) - fields
        if self.ok:
            return "all coefficients within |h| <= %g, |J| <= %g" % (
                self.limits.h_max,
                self.limits.j_max,
            )
        worst = max(self.violations, key=lambda v: abs(v.value) / v.limit)
        return "%d fields exceed |h| <= %g, %d couplings exceed |J| <= %g (worst: %s %s = %g)" % (
            fields,
            self.limits.h_max,
            couplings,
            self.limits.j_max,
            worst.kind,
            worst.key,
            worst.value,
        )


def check_ranges(ising, limits=RangeLimits()):
    """
    Return a 'RangeReport' listing every field and coupling exceeding
    'limits'. The model is never modified.
    """

    violations = []
    for idx in np.nonzero(np.abs(ising.fields) > limits.h_max)[0]:
        violations.append(Violation("field", (int(idx),), float(ising.fields[idx]), limits.h_max))
    for key, value in ising.couplings.items():
        if abs(value) > limits.j_max:
            violations.append(Violation("coupling", key, value, limits.j_max))
    return RangeReport(limits, violations)


class GaugeVector(object):
    """A spin-reversal transform: a vector of -1 and +1 entries."""

    def __init__(self, signs):
        signs = np.array(signs, dtype=np.int8)
        if signs.ndim != 1 or np.any(np.abs(signs) != 1):
            raise Error("a gauge must be a vector of -1 and +1 entries")
        signs.setflags(write=False)
        self.signs = signs

    @classmethod
    def identity(cls, spins):
        return cls(np.ones(spins, dtype=np.int8))

    @classmethod
    def random(cls, spins, rng):
        return cls(rng.integers(0, 2, size=spins) * 2 - 1)

    def __len__(self):
        return self.signs.size


def apply_gauge(ising, gauge):
    """
    Return the gauged model with h_i -> g_i h_i and J_ij -> g_i g_j J_ij, so
    that H_g(g * s) = H(s) for every 's'.
    """

    if len(gauge) != ising.spin_count:
        raise Error("gauge of length %d for %d spins" % (len(gauge), ising.spin_count))

    g = gauge.signs.astype(np.float64)
    couplings = {(i, j): g[i] * g[j] * value for (i, j), value in ising.couplings.items()}
    return IsingModel(g * ising.fields, couplings, ising.offset)


def ungauge_samples(spins, gauge):
    """Map spins of the gauged model back to the original model: s_i -> g_i s_i."""

    spins = np.asarray(spins)
    if spins.shape[-1] != len(gauge):
        raise Error("spins of width %d for a gauge of length %d" % (spins.shape[-1], len(gauge)))
    return (spins * gauge.signs).astype(np.int8)


@dataclass(frozen=True)
class SaConfig:
    """Simulated annealing schedule: 'sweeps' sweeps, beta rising from 'beta_initial'."""

    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 1.0
    schedule: str = "geometric"

    def __post_init__(self):
        if self.sweeps < 1:
            raise Error("need at least one sweep, got %d" % self.sweeps)
        if not 0 < self.beta_initial <= self.beta_final:
            raise Error(
                "need 0 < beta_initial <= beta_final, got %g and %g"
                % (self.beta_initial, self.beta_final)
            )
        if self.schedule not in SA_SCHEDULES:
            raise Error(
                'unsupported annealing schedule "%s", use: %s'
                % (self.schedule, ", ".join(SA_SCHEDULES))
            )

    @property
    def beta_range(self):
        return (self.beta_initial, self.beta_final)


def default_sa_config(temperature, sweeps=1000):
    """
    The default schedule for a model converted at temperature 'T'. The
    temperature is already folded into the coefficients, so the anneal ends
    at beta = 1.
    """

    temperature = Rbm.Temperature(temperature)
    return SaConfig(sweeps=sweeps, beta_initial=min(0.1 / temperature, 1.0), beta_final=1.0)


def ising_to_bqm(ising):
    """Return 'ising' as a spin-valued 'dimod.BinaryQuadraticModel' over 0..N-1."""

    return dimod.BinaryQuadraticModel.from_ising(
        dict(enumerate(ising.fields.tolist())), dict(ising.couplings), ising.offset
    )


def sa_sample(ising, config, chain_count, streams, group=0):
    """
    Run 'chain_count' independent simulated annealing reads of
    'config.sweeps' sweeps each and return the final spins as a
    'chain_count x N' array of -1/+1 bytes. The annealer seed comes from
    the 'ANNEAL' stream of 'streams' at index 'group', so different groups
    of the same streams are independent.
    """

    if chain_count < 1:
        raise Error("need at least one chain, got %d" % chain_count)

    seed = int(streams.generator(Stream.ANNEAL, group).integers(2**32))
    _log.debug(
        "annealing %d chains of %d spins, %d sweeps, seed %d",
        chain_count,
        ising.spin_count,
        config.sweeps,
        seed,
    )
    sampleset = neal.SimulatedAnnealingSampler().sample(
        ising_to_bqm(ising),
        num_reads=chain_count,
        num_sweeps=config.sweeps,
        beta_range=config.beta_range,
        beta_schedule_type=config.schedule,
        seed=seed,
    )

    spins = np.empty((chain_count, ising.spin_count), dtype=np.int8)
    columns = np.fromiter(sampleset.variables, dtype=np.int64, count=ising.spin_count)
    spins[:, columns] = sampleset.record.sample
    return spins


def spin_reversal_ensemble(ising, config, chain_count, transforms, streams, gauges=None):
    """
    Split the chains into 'transforms' contiguous groups, sample every group
    with 'sa_sample()' on a differently gauged model and map the spins back.
    The gauges are random unless given in 'gauges'. The groups run in up to
    'streams.workers' threads.
    """

    if not 1 <= transforms <= chain_count:
        raise Error(
            "cannot split %d chains across %d spin-reversal transforms"
            % (chain_count, transforms)
        )
    if gauges is None:
        rng = streams.generator(Stream.GAUGE)
        gauges = [GaugeVector.random(ising.spin_count, rng) for _ in range(transforms)]
    elif len(gauges) != transforms:
        raise Error("got %d gauges for %d transforms" % (len(gauges), transforms))

    groups = np.array_split(np.arange(chain_count), transforms)

    def anneal(group):
        gauge = gauges[group]
        sampled = sa_sample(apply_gauge(ising, gauge), config, groups[group].size, streams, group)
        return ungauge_samples(sampled, gauge)

    parts = Helpers.parallel_map(anneal, range(transforms), streams.workers)
    return np.concatenate(parts).astype(np.int8)


def emulate_annealer(
    params,
    temperature,
    chain_count,
    streams,
    config=None,
    transforms=DEFAULT_TRANSFORMS,
    limits=RangeLimits(),
):
    """
    The annealer emulator backend: convert the RBM at 'temperature', report
    coefficients a device would not accept, sample with spin-reversal
    transforms and return the visible part of the samples.
    """

    ising = rbm_to_ising(params, temperature)
    report = check_ranges(ising, limits)
    if report.ok:
        _log.debug("T=%g: %s", temperature, report.summary())
    else:
        _log.warning("T=%g: %s", temperature, report.summary())

    if config is None:
        config = default_sa_config(temperature)
    transforms = min(transforms, chain_count)
    spins = spin_reversal_ensemble(ising, config, chain_count, transforms, streams)
    return spins_to_visible(spins, params.n)


def uniform_init(chain_count, width, streams, first_chain=0):
    """Return 'chain_count' chains of fair-coin bits."""

    if chain_count < 1 or width < 1:
        raise Error("bad batch size %dx%d" % (chain_count, width))
    ids = np.arange(first_chain, first_chain + chain_count, dtype=np.int64)
    bits = streams.uniform(ids, width, Stream.INIT, 0) < 0.5
    return Rbm.StateBatch(bits.astype(np.uint8), ids)


def exact_boltzmann_init(params, temperature, chain_count, streams, first_chain=0):
    """
    Draw the visible part of 'chain_count' exact samples from the Boltzmann
    distribution of the RBM at 'temperature' (the ideal annealer).
    """

    if params.n > RbmTrain.MAX_TABLE_UNITS:
        raise Error(
            "exact sampling needs n <= %d, the model has %d visible units"
            % (RbmTrain.MAX_TABLE_UNITS, params.n)
        )

    cdf = np.cumsum(RbmTrain.exact_visible_marginal(params, temperature))
    ids = np.arange(first_chain, first_chain + chain_count, dtype=np.int64)
    noise = streams.uniform(ids, 1, Stream.EXACT, 0)[:, 0] * cdf[-1]
    rows = np.minimum(np.searchsorted(cdf, noise, side="right"), cdf.size - 1)
    return Rbm.StateBatch(Rbm.all_binary_states(params.n)[rows], ids)


@dataclass(frozen=True)
class AnnealTiming:
    """Per-sample device time: anneal, delay between samples and readout."""

    anneal_time_us: float = 20.0
    delay_us: float = 20.0
    readout_us: float = 214.0

    @classmethod
    def from_metadata(cls, metadata):
        """Take the timing fields present in sample file 'metadata'."""
        values = {}
        for key in ("anneal_time_us", "delay_us", "readout_us"):
            if key in metadata:
                try:
                    values[key] = float(metadata[key])
                except ValueError:
                    raise Error("bad %s value %r" % (key, metadata[key]))
        return cls(**values)

    @property
    def per_sample_us(self):
        return self.anneal_time_us + self.delay_us + self.readout_us

    def budget_seconds(self, samples):
        """Device time needed to produce 'samples' samples."""
        return self.per_sample_us * samples * 1e-6


def import_samples(path, width=None):
    """
    Read device samples (already converted to 0/1 values) from the sample
    file 'path'. Returns a 'SampleFile.SampleSet'; the metadata is logged.
    """

    try:
        sample_set = SampleFile.read_samples(path, width)
    except SampleFile.Error as err:
        raise Error(str(err))

    meta = sample_set.metadata
    _log.info(
        "imported %d samples from device '%s' at T=%s",
        sample_set.batch.count,
        meta.get("device", "unknown"),
        meta.get("temperature", "unknown"),
    )
    if "chain_break_fraction" in meta:
        _log.warning(
            "the device reported inconsistent physical qubit chains in %s of the "
            "samples; the samples are used as they are",
            meta["chain_break_fraction"],
        )
    return sample_set


def export_samples(path, batch, metadata=None):
    """Write 'batch' to the sample file 'path', the inverse of import."""

    try:
        SampleFile.write_samples(path, batch, metadata)
    except SampleFile.Error as err:
        raise Error(str(err))


def hybrid_mix(first, second, chain_count, streams):
    """
    Return 'chain_count' chains, each drawn independently and uniformly from
    the multiset union of the batches 'first' and 'second'.
    """

    if first.width != second.width:
        raise Error("cannot mix batches of width %d and %d" % (first.width, second.width))
    if chain_count < 1:
        raise Error("need at least one chain, got %d" % chain_count)

    pool = np.concatenate([first.states, second.states])
    ids = np.arange(chain_count, dtype=np.int64)
    noise = streams.uniform(ids, 1, Stream.MIX, 0)[:, 0]
    rows = np.minimum((noise * pool.shape[0]).astype(np.int64), pool.shape[0] - 1)
    return Rbm.StateBatch(pool[rows], ids)

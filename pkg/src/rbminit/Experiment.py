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
This module runs the chain initialization experiment. For every replicate:

  1. draw a training set from the positives of the dataset,
  2. train an RBM (or load it from a checkpoint),
  3. build the initial chain states of every initialization arm: classical
     (uniform bits), annealer at temperature 'T' and hybrid at 'T' (a
     uniform draw from the union of the classical and the annealer states),
  4. run the Gibbs chains and compute the figures of merit at the scheduled
     steps, starting with step 0 (the initial states themselves).

Every random number is derived from the master seed, the replicate index and
the purpose of the numbers, so a configuration and a seed determine every
output. The replicates of an arm are then aggregated into per-step medians,
minima and maxima.

The configuration file is a flat list of "key = value" lines, for example:

    dataset = bas
    size = 4
    model_kind = cd1
    init_strategy = classical, annealer, hybrid
    temperatures = 2, 8
    backend = exact
"""

# Disable the following pylint recommendations:
#   * Too many instance attributes (R0902)
#   * Too many arguments - R0913
# pylint: disable=R0902
# pylint: disable=R0913

import configparser
import dataclasses
import enum
import logging
import os
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import Datasets, Helpers, Metrics, Rbm, RbmTrain, Samplers, TransRead

_log = logging.getLogger(__name__)  # pylint: disable=C0103

MODEL_KINDS = {"cd1": "cd", "naive": "naive"}
INIT_STRATEGIES = ("classical", "annealer", "hybrid")
BACKENDS = ("emulator", "exact", "import")

# Gibbs updates and replicates of the long-run mode
LONG_RUN_UPDATES = 100000

# Per-dataset defaults: training set size, chains, epochs, batch size
_DATASET_DEFAULTS = {
    "bas": {"training_set_size": 512, "chain_count": 40000, "epochs": 2000},
    "shifter": {
        "training_set_size": 256,
        "chain_count": 4000,
        "epochs": 4000,
        "batch_size": 256,
    },
}

# The section name configparser needs, the file itself has none
_SECTION = "experiment"


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class Purpose(enum.IntEnum):
    """What the numbers of a derived seed are used for."""

    DATA = 0
    TRAIN = 1
    INIT = 2
    GIBBS = 3
    BENCH = 4
    ANNEAL = 5
    MIX = 6


def _tuple_of(convert):
    def parse(value):
        if isinstance(value, str):
            value = [item for item in value.replace(",", " ").split() if item]
        return tuple(convert(item) for item in value)

    return parse


def _optional(convert):
    def parse(value):
        if value is None or value == "" or value == "none":
            return None
        return convert(value)

    return parse


def _temperature(value):
    return float(Rbm.Temperature(value))


@dataclass
class ExperimentConfig:
    """
    Everything that defines an experiment. Settings left as 'None' get
    dataset-dependent defaults when the object is created.
    """

    dataset: str
    size: int
    model_kind: str = "cd1"
    replicates: int = 5
    training_set_size: Optional[int] = None
    chain_count: Optional[int] = None
    init_strategy: Tuple[str, ...] = ("classical", "annealer")
    temperatures: Tuple[float, ...] = (8.0,)
    gibbs_updates: int = 1000
    master_seed: int = 0
    backend: str = "emulator"
    import_path: Optional[str] = None
    hidden_units: Optional[int] = None
    learning_rate: float = 0.05
    epochs: Optional[int] = None
    batch_size: Optional[int] = None
    negative_chain_count: Optional[int] = None
    gibbs_updates_negative: Optional[int] = None
    initial_weight_scale: float = 0.01
    spin_reversal_transforms: int = Samplers.DEFAULT_TRANSFORMS
    sa_sweeps: int = 1000
    h_max: float = 4.0
    j_max: float = 1.0
    dense_until: int = 100
    sparse_stride: int = 10
    top_k: int = Metrics.DEFAULT_TOP_K
    workers: int = 1
    checkpoint_dir: Optional[str] = None

    def __post_init__(self):
        self.init_strategy = _tuple_of(str)(self.init_strategy)
        self.temperatures = _tuple_of(float)(self.temperatures)
        try:
            self.positives = Datasets.dataset_by_name(self.dataset, self.size)
        except Datasets.Error as err:
            raise Error(str(err))

        defaults = _DATASET_DEFAULTS[self.dataset]
        if self.training_set_size is None:
            self.training_set_size = min(defaults["training_set_size"], len(self.positives))
        if self.chain_count is None:
            self.chain_count = defaults["chain_count"]
        if self.epochs is None:
            self.epochs = defaults["epochs"]
        if self.batch_size is None:
            self.batch_size = min(
                defaults.get("batch_size", self.training_set_size), self.training_set_size
            )
        if self.negative_chain_count is None:
            self.negative_chain_count = self.batch_size
        if self.hidden_units is None:
            self.hidden_units = self.positives.dim
        if self.gibbs_updates_negative is None and self.model_kind in MODEL_KINDS:
            kind = MODEL_KINDS[self.model_kind]
            self.gibbs_updates_negative = RbmTrain.DEFAULT_NEGATIVE_UPDATES[kind]

        self.validate()

    def validate(self):
        """Raise 'Error' if the settings are inconsistent."""

        if self.model_kind not in MODEL_KINDS:
            raise Error('unknown model kind "%s", use "cd1" or "naive"' % self.model_kind)
        if self.backend not in BACKENDS:
            raise Error(
                'unknown backend "%s", use one of: %s' % (self.backend, ", ".join(BACKENDS))
            )
        for strategy in self.init_strategy:
            if strategy not in INIT_STRATEGIES:
                raise Error(
                    'unknown initialization strategy "%s", use: %s'
                    % (strategy, ", ".join(INIT_STRATEGIES))
                )
        if not self.init_strategy:
            raise Error("no initialization strategy given")
        if len(set(self.init_strategy)) != len(self.init_strategy):
            raise Error("initialization strategies are repeated")
        if len(set(self.temperatures)) != len(self.temperatures):
            raise Error("temperatures are repeated")

        needs_annealer = any(s in ("annealer", "hybrid") for s in self.init_strategy)
        if needs_annealer and not self.temperatures:
            raise Error("the annealer strategies need at least one temperature")
        for temperature in self.temperatures:
            try:
                Rbm.Temperature(temperature)
            except Rbm.Error as err:
                raise Error(str(err))

        for name in (
            "replicates",
            "training_set_size",
            "chain_count",
            "hidden_units",
            "epochs",
            "batch_size",
            "negative_chain_count",
            "gibbs_updates_negative",
            "spin_reversal_transforms",
            "sa_sweeps",
            "dense_until",
            "sparse_stride",
            "workers",
        ):
            if getattr(self, name) < 1:
                raise Error("%s must be positive, got %r" % (name, getattr(self, name)))
        if self.gibbs_updates < 0:
            raise Error("gibbs_updates cannot be negative, got %d" % self.gibbs_updates)
        if self.master_seed < 0:
            raise Error("master_seed cannot be negative, got %d" % self.master_seed)
        if self.top_k < 0:
            raise Error("top_k cannot be negative, got %d" % self.top_k)
        if self.training_set_size > len(self.positives):
            raise Error(
                "cannot draw %d distinct training examples from the %d positives of %s"
                % (self.training_set_size, len(self.positives), self.positives.label)
            )
        if self.learning_rate < 0 or self.initial_weight_scale < 0:
            raise Error("learning_rate and initial_weight_scale cannot be negative")
        if self.h_max <= 0 or self.j_max <= 0:
            raise Error("h_max and j_max must be positive")

        if needs_annealer and self.backend == "exact":
            if self.positives.dim > RbmTrain.MAX_TABLE_UNITS:
                raise Error(
                    "the exact backend enumerates the visible states and needs at most %d "
                    "visible units (hidden units are not limited), %s has %d"
                    % (RbmTrain.MAX_TABLE_UNITS, self.positives.label, self.positives.dim)
                )
        if needs_annealer and self.backend == "import" and not self.import_path:
            raise Error("the import backend needs import_path")

    @classmethod
    def from_file(cls, path):
        """
        Read the configuration from the "key = value" file at 'path', which
        may be compressed.
        """

        try:
            with TransRead.TransRead(path) as f_obj:
                text = f_obj.read()
        except TransRead.Error as err:
            raise Error("cannot read configuration file '%s': %s" % (path, err))

        parser = configparser.ConfigParser(
            interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
        )
        try:
            parser.read_string("[%s]\n%s" % (_SECTION, text), source=path)
        except configparser.Error as err:
            raise Error("bad configuration file '%s': %s" % (path, err))

        values = dict(parser.items(_SECTION))
        _log.debug("configuration '%s': %s", path, values)
        return cls.from_dict(values)

    @classmethod
    def from_dict(cls, values):
        """Create a configuration from a dictionary of strings."""

        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise Error("unknown configuration keys: %s" % ", ".join(unknown))
        for key in ("dataset", "size"):
            if key not in values:
                raise Error('the configuration lacks the "%s" key' % key)

        parsed = {}
        for key, value in values.items():
            try:
                parsed[key] = _CONVERTERS[key](value)
            except (ValueError, Rbm.Error) as err:
                raise Error('bad value "%s" for %s: %s' % (value, key, err))
        return cls(**parsed)

    def with_overrides(self, **changes):
        """Return a copy with 'changes' applied (and validated)."""

        changes = {key: value for key, value in changes.items() if value is not None}
        return dataclasses.replace(self, **changes)

    def long_run(self):
        """The long-run mode: one replicate with many more Gibbs updates."""
        return self.with_overrides(gibbs_updates=LONG_RUN_UPDATES, replicates=1)

    @property
    def train_config(self):
        return RbmTrain.TrainConfig.for_kind(
            MODEL_KINDS[self.model_kind],
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            gibbs_updates_negative=self.gibbs_updates_negative,
            negative_chain_count=self.negative_chain_count,
            batch_size=self.batch_size,
        )

    @property
    def schedule(self):
        return ScheduleSpec(self.dense_until, self.sparse_stride)

    def arms(self):
        """Names of the initialization arms, in output order."""

        names = []
        for strategy in self.init_strategy:
            if strategy == "classical":
                names.append("classical")
            else:
                names.extend(arm_name(strategy, t) for t in self.temperatures)
        return names


_CONVERTERS = {
    "dataset": str,
    "size": int,
    "model_kind": str,
    "replicates": int,
    "training_set_size": _optional(int),
    "chain_count": _optional(int),
    "init_strategy": _tuple_of(str),
    "temperatures": _tuple_of(_temperature),
    "gibbs_updates": int,
    "master_seed": int,
    "backend": str,
    "import_path": _optional(str),
    "hidden_units": _optional(int),
    "learning_rate": float,
    "epochs": _optional(int),
    "batch_size": _optional(int),
    "negative_chain_count": _optional(int),
    "gibbs_updates_negative": _optional(int),
    "initial_weight_scale": float,
    "spin_reversal_transforms": int,
    "sa_sweeps": int,
    "h_max": float,
    "j_max": float,
    "dense_until": int,
    "sparse_stride": int,
    "top_k": int,
    "workers": int,
    "checkpoint_dir": _optional(str),
}


def arm_name(strategy, temperature):
    """The output name of an arm, e.g. "annealer_T8"."""
    if strategy == "classical":
        return strategy
    return "%s_T%g" % (strategy, temperature)


class ScheduleSpec(NamedTuple):
    """Metrics are computed after every update up to 'dense_until', then every 'sparse_stride'."""

    dense_until: int = 100
    sparse_stride: int = 10

    def steps(self, gibbs_updates):
        """Return the sorted list of scheduled steps, step 0 included."""

        if self.dense_until < 1 or self.sparse_stride < 1:
            raise Error("schedule settings must be positive, got %r" % (self,))
        dense = list(range(0, min(self.dense_until, gibbs_updates) + 1))
        first = self.dense_until + self.sparse_stride
        sparse = range(first, gibbs_updates + 1, self.sparse_stride)
        return dense + list(sparse)


class Aggregate(NamedTuple):
    """Per-step order statistics of one metric across replicates."""

    steps: np.ndarray
    median: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray


def aggregate(series):
    """
    Aggregate replicate series. 'series' is a list with one sequence of
    'MetricsRecord' objects per replicate, all with the same steps. Returns a
    dictionary mapping every metric name to an 'Aggregate'. A NaN value makes
    the statistics of its step NaN.
    """

    if not series or not all(len(records) for records in series):
        raise Error("nothing to aggregate")

    steps = np.array([record.step for record in series[0]])
    for records in series[1:]:
        if not np.array_equal([record.step for record in records], steps):
            raise Error("replicate series have different steps")

    result = {}
    for name in Metrics.METRIC_NAMES:
        values = np.array(
            [[getattr(record, name) for record in records] for records in series],
            dtype=np.float64,
        )
        result[name] = Aggregate(
            steps=steps,
            median=np.median(values, axis=0),
            minimum=values.min(axis=0),
            maximum=values.max(axis=0),
        )
    return result


class MetricsSeries(object):
    """The metric records of one initialization arm, keyed by (replicate, step)."""

    def __init__(self, arm, steps):
        self.arm = arm
        self.steps = list(steps)
        self.records = {}

    def add(self, replicate, record):
        if record.step not in self.steps:
            raise Error("step %d is not scheduled" % record.step)
        self.records[(replicate, record.step)] = record

    @property
    def replicates(self):
        return sorted({replicate for replicate, _ in self.records})

    def per_replicate(self):
        """Return one list of records per replicate, ordered by step."""
        result = []
        for replicate in self.replicates:
            steps = [step for step in self.steps if (replicate, step) in self.records]
            result.append([self.records[(replicate, step)] for step in steps])
        return result

    def rows(self):
        """The '(replicate, record)' pairs, ordered by replicate and step."""
        return [
            (replicate, record)
            for replicate, records in zip(self.replicates, self.per_replicate())
            for record in records
        ]

    def aggregates(self):
        return aggregate(self.per_replicate())

    def __len__(self):
        return len(self.records)


class Replicate(NamedTuple):
    """A trained model with its training set."""

    index: int
    params: Rbm.RbmParams
    training_set: Rbm.StateBatch


def checkpoint_path(checkpoint_dir, replicate):
    return os.path.join(checkpoint_dir, "replicate%d.ckpt" % replicate)


def training_set_path(checkpoint_dir, replicate):
    return os.path.join(checkpoint_dir, "replicate%d-training.txt" % replicate)


def train_replicate(config, replicate, use_checkpoint=True):
    """
    Draw the training set of 'replicate' and train its model. With
    'use_checkpoint', an existing checkpoint in 'config.checkpoint_dir' is
    loaded instead of training.
    """

    data_rng = np.random.default_rng(
        Helpers.derive_seed(config.master_seed, replicate, Purpose.DATA)
    )
    training_set = Datasets.sample_training_set(
        config.positives, config.training_set_size, data_rng
    )

    seed = Helpers.derive_seed(config.master_seed, replicate, Purpose.TRAIN)
    if use_checkpoint and config.checkpoint_dir:
        path = checkpoint_path(config.checkpoint_dir, replicate)
        if os.path.exists(path):
            params, header = RbmTrain.load_checkpoint(path)
            if (params.n, params.m) != (config.positives.dim, config.hidden_units):
                raise Error(
                    "checkpoint '%s' holds a %dx%d model, expected %dx%d"
                    % (path, params.n, params.m, config.positives.dim, config.hidden_units)
                )
            if header["kind"] != config.model_kind:
                _log.warning(
                    "checkpoint '%s' was trained with %s, the configuration says %s",
                    path,
                    header["kind"],
                    config.model_kind,
                )
            return Replicate(replicate, params, training_set)

    init_rng = np.random.default_rng(seed)
    params = Rbm.RbmParams.random(
        config.positives.dim, config.hidden_units, init_rng, config.initial_weight_scale
    )
    streams = Rbm.ChainStreams(seed, config.workers)

    start = time.time()
    params = RbmTrain.train(params, training_set, config.train_config, streams)
    _log.info(
        "replicate %d: trained %r in %s",
        replicate,
        params,
        Helpers.human_time(time.time() - start),
    )
    return Replicate(replicate, params, training_set)


def temperature_key(temperature):
    """A seed key naming 'temperature' by its exact float64 bits."""
    return int(np.float64(temperature).view(np.uint64))


def replicate_streams(config, replicate, purpose, *keys, workers=1):
    """
    The 'ChainStreams' of 'replicate' for 'purpose'. The 'keys' separate the
    arms: chains of different arms never share random numbers, even when
    they have the same chain identifiers.
    """

    seed = Helpers.derive_seed(config.master_seed, replicate, purpose, *keys)
    return Rbm.ChainStreams(seed, workers)


def gibbs_streams(config, replicate, strategy, temperature=None, workers=1):
    """The streams driving the Gibbs chains of one arm."""

    keys = [INIT_STRATEGIES.index(strategy)]
    if strategy != "classical":
        keys.append(temperature_key(temperature))
    return replicate_streams(config, replicate, Purpose.GIBBS, *keys, workers=workers)


def _annealer_samples(config, replicate, params, temperature, workers=1):
    """The initial states the annealer backend gives at 'temperature'."""

    count = config.chain_count
    streams = replicate_streams(
        config, replicate, Purpose.ANNEAL, temperature_key(temperature), workers=workers
    )
    if config.backend == "exact":
        return Samplers.exact_boltzmann_init(params, temperature, count, streams)

    if config.backend == "emulator":
        sa_config = Samplers.default_sa_config(temperature, config.sa_sweeps)
        limits = Samplers.RangeLimits(config.h_max, config.j_max)
        return Samplers.emulate_annealer(
            params,
            temperature,
            count,
            streams,
            sa_config,
            config.spin_reversal_transforms,
            limits,
        )

    path = config.import_path.format(replicate=replicate, temperature="%g" % temperature)
    batch = Samplers.import_samples(path, params.n).batch
    if batch.count < count:
        raise Error(
            "'%s' holds %d samples, %d chains are needed" % (path, batch.count, count)
        )
    if batch.count > count:
        _log.warning("using the first %d of the %d samples in '%s'", count, batch.count, path)
        batch = batch.take(np.arange(count))
    return batch


def initial_states(config, replicate, params, workers=1):
    """
    Return a dictionary mapping arm names to initial 'StateBatch' objects.
    Every temperature has its own annealer and mixing streams, so the arms
    at different temperatures are independent.
    """

    init = replicate_streams(config, replicate, Purpose.INIT, workers=workers)
    classical = Samplers.uniform_init(config.chain_count, params.n, init)
    result = {}
    annealed = {}
    for strategy in config.init_strategy:
        if strategy == "classical":
            result["classical"] = classical
            continue
        for temperature in config.temperatures:
            if temperature not in annealed:
                annealed[temperature] = _annealer_samples(
                    config, replicate, params, temperature, workers
                )
            if strategy == "annealer":
                batch = annealed[temperature]
            else:
                key = temperature_key(temperature)
                mix = replicate_streams(config, replicate, Purpose.MIX, key, workers=workers)
                batch = Samplers.hybrid_mix(
                    classical, annealed[temperature], config.chain_count, mix
                )
            result[arm_name(strategy, temperature)] = batch
    return result


def run_chains(config, params, batch, streams):
    """
    Run the Gibbs chains from 'batch' and return the list of metric records
    at the scheduled steps.
    """

    steps = config.schedule.steps(config.gibbs_updates)
    wanted = set(steps)
    positives = config.positives
    records = [Metrics.evaluate(batch, positives, 0, config.top_k)]

    def measure(step, current):
        if step in wanted:
            records.append(Metrics.evaluate(current, positives, step, config.top_k))

    Rbm.gibbs_chain(params, batch, streams, config.gibbs_updates, 1, measure)
    return records


def run_replicate(config, replicate, workers=1):
    """Train (or load) the model of 'replicate' and run all arms."""

    seed_config = config.with_overrides(workers=workers)
    trained = train_replicate(seed_config, replicate)
    batches = initial_states(config, replicate, trained.params, workers)

    result = {}
    for strategy in config.init_strategy:
        temperatures = [None] if strategy == "classical" else config.temperatures
        for temperature in temperatures:
            arm = arm_name(strategy, temperature)
            batch = batches[arm]
            streams = gibbs_streams(config, replicate, strategy, temperature, workers)
            start = time.time()
            result[arm] = run_chains(config, trained.params, batch, streams)
            _log.info(
                "replicate %d, %s: %d chains, %d updates in %s",
                replicate,
                arm,
                batch.count,
                config.gibbs_updates,
                Helpers.human_time(time.time() - start),
            )
    return result


def run_experiment(config):
    """
    Run the whole experiment and return a dictionary mapping arm names to
    'MetricsSeries' objects. Replicates run in parallel when there is more
    than one worker and more than one replicate; otherwise the workers fill
    the chain blocks.
    """

    steps = config.schedule.steps(config.gibbs_updates)
    replicates = range(config.replicates)

    if config.replicates > 1 and config.workers > 1:
        outcomes = Helpers.parallel_map(
            lambda r: run_replicate(config, r, 1), replicates, config.workers
        )
    else:
        outcomes = [run_replicate(config, r, config.workers) for r in replicates]

    series = {arm: MetricsSeries(arm, steps) for arm in config.arms()}
    for replicate, outcome in zip(replicates, outcomes):
        for arm, records in outcome.items():
            for record in records:
                series[arm].add(replicate, record)

    for arm, arm_series in series.items():
        final = arm_series.aggregates()
        _log.info(
            "%s at step %d: median precision %.4g, recall %.4g, med %.4g",
            arm,
            steps[-1],
            final["precision"].median[-1],
            final["recall"].median[-1],
            final["med"].median[-1],
        )
    return series


@dataclass
class BenchReport:
    """Gibbs update timing and the equivalent annealer budget."""

    n: int
    m: int
    chain_count: int
    updates: int
    repetitions: int
    seconds: np.ndarray
    timing: Samplers.AnnealTiming

    @property
    def per_update_mean(self):
        return float(np.mean(self.seconds) / self.updates)

    @property
    def per_update_std(self):
        return float(np.std(self.seconds) / self.updates)

    @property
    def samples_per_second(self):
        return self.chain_count / self.per_update_mean

    @property
    def annealer_budget(self):
        return self.timing.budget_seconds(self.chain_count)

    @property
    def updates_in_budget(self):
        return int(self.annealer_budget // self.per_update_mean)

    def lines(self):
        return [
            "model: %d visible x %d hidden units, %d chains"
            % (self.n, self.m, self.chain_count),
            "repetitions: %d x %d full Gibbs updates" % (self.repetitions, self.updates),
            "full Gibbs update: mean %.3f ms, stddev %.3f ms"
            % (self.per_update_mean * 1e3, self.per_update_std * 1e3),
            "throughput: %.0f samples per second" % self.samples_per_second,
            "annealer: %g + %g + %g us per sample -> %.2f s per %d samples"
            % (
                self.timing.anneal_time_us,
                self.timing.delay_us,
                self.timing.readout_us,
                self.annealer_budget,
                self.chain_count,
            ),
            "%d full Gibbs updates fit into the annealer budget" % self.updates_in_budget,
        ]


def bench_gibbs(
    params, chain_count, updates, repetitions=5, seed=0, workers=1, timing=None
):
    """
    Time 'updates' full Gibbs updates of 'chain_count' chains, 'repetitions'
    times, and return a 'BenchReport'.
    """

    if chain_count < 1 or updates < 1 or repetitions < 1:
        raise Error("chain count, updates and repetitions must be positive")
    if timing is None:
        timing = Samplers.AnnealTiming()

    streams = Rbm.ChainStreams(Helpers.derive_seed(seed, 0, Purpose.BENCH), workers)
    batch = Samplers.uniform_init(chain_count, params.n, streams)
    seconds = np.empty(repetitions)
    for rep in range(repetitions):
        start = time.perf_counter()
        Rbm.gibbs_chain(params, batch, streams, updates, rep * updates + 1)
        seconds[rep] = time.perf_counter() - start
        _log.debug("repetition %d: %.3f s", rep, seconds[rep])

    return BenchReport(params.n, params.m, chain_count, updates, repetitions, seconds, timing)


def series_from_rows(arm, rows):
    """Build a 'MetricsSeries' from '(replicate, record)' pairs read back from a CSV file."""

    if not rows:
        raise Error("no metric records for %s" % arm)
    series = MetricsSeries(arm, sorted({record.step for _, record in rows}))
    for replicate, record in rows:
        series.add(replicate, record)
    return series

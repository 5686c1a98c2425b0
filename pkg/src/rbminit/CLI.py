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
A tool for studying how the initial states of Markov chains affect Gibbs
sampling of restricted Boltzmann machines: train models, produce initial
states (uniform, annealer or hybrid), run the chains and measure them.
"""

# Disable the following pylint recommendations:
#   * Too many statements (R0915)
#   * Too many branches (R0912)
# pylint: disable=R0915
# pylint: disable=R0912

import argparse
import logging
import os
import sys
import time
import traceback

import numpy as np

from . import (
    Datasets,
    Experiment,
    Helpers,
    Metrics,
    Plot,
    Rbm,
    RbmTrain,
    SampleFile,
    Samplers,
    TransRead,
)

VERSION = "1.0.0"

log = logging.getLogger()  # pylint: disable=C0103

# Module errors the commands turn into a diagnostic and exit code 1
_ERRORS = (
    Datasets.Error,
    Experiment.Error,
    Helpers.Error,
    Metrics.Error,
    Plot.Error,
    Rbm.Error,
    RbmTrain.Error,
    SampleFile.Error,
    Samplers.Error,
    TransRead.Error,
)


def print_error_with_tb(msgformat, *args):
    """Print an error message occurred along with the traceback."""

    tback = []

    if sys.exc_info()[0]:
        lines = traceback.format_exc().splitlines()
    else:
        lines = [line.strip() for line in traceback.format_stack()]

    idx = 0
    last_idx = len(lines) - 1
    while idx < len(lines):
        if lines[idx].startswith('  File "'):
            idx += 2
            last_idx = idx
        else:
            idx += 1

    tback = lines[0:last_idx]
    if tback:
        log.debug("An error occurred, here is the traceback:\n%s\n", "\n".join(tback))

    if args:
        errmsg = msgformat % args
    else:
        errmsg = str(msgformat)
    log.error(errmsg)


def error_out(msgformat, *args):
    """Print an error message and terminate program execution."""

    print_error_with_tb(str(msgformat), *args)
    raise SystemExit(1)


def load_config(args):
    """Read the configuration file and apply the command-line overrides."""

    try:
        config = Experiment.ExperimentConfig.from_file(args.config)
        temperatures = getattr(args, "temperature", None)
        config = config.with_overrides(
            master_seed=getattr(args, "seed", None),
            backend=getattr(args, "backend", None),
            temperatures=tuple(temperatures) if temperatures else None,
            workers=getattr(args, "workers", None),
        )
        if getattr(args, "long_run", False):
            config = config.long_run()
    except Experiment.Error as err:
        error_out(err)

    log.debug("configuration: %s", config)
    return config


def make_out_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as err:
        error_out("cannot create the output directory '%s': %s", path, err)


def train_command(args):
    """
    Train the model of every replicate and save the checkpoints together with
    the training sets.
    """

    config = load_config(args)
    out_dir = args.out_dir or config.checkpoint_dir or "."
    make_out_dir(out_dir)

    for replicate in range(config.replicates):
        trained = Experiment.train_replicate(config, replicate, use_checkpoint=False)
        seed = Helpers.derive_seed(config.master_seed, replicate, Experiment.Purpose.TRAIN)
        RbmTrain.save_checkpoint(
            Experiment.checkpoint_path(out_dir, replicate),
            trained.params,
            config.model_kind,
            seed,
            config.epochs,
        )
        SampleFile.write_samples(
            Experiment.training_set_path(out_dir, replicate),
            trained.training_set,
            {"dataset": config.positives.label, "replicate": replicate},
        )


def init_samples_command(args):
    """
    Write the initial chain states of one replicate to a sample file, as the
    annealer backend (emulator or exact) or the classical strategy produces
    them.
    """

    config = load_config(args)
    if args.strategy == "annealer" and config.backend == "import":
        error_out("the import backend cannot produce samples, use emulator or exact")

    trained = Experiment.train_replicate(config, args.replicate)
    metadata = {"dataset": config.positives.label, "replicate": args.replicate}
    if args.strategy == "classical":
        arm = "classical"
        metadata["device"] = "classical"
    else:
        if len(config.temperatures) != 1:
            error_out("give exactly one temperature for the annealer samples")
        temperature = config.temperatures[0]
        arm = Experiment.arm_name("annealer", temperature)
        timing = Samplers.AnnealTiming()
        metadata.update(
            {
                "device": config.backend,
                "temperature": "%g" % temperature,
                "spin_reversal_transforms": config.spin_reversal_transforms,
                "anneal_time_us": "%g" % timing.anneal_time_us,
                "delay_us": "%g" % timing.delay_us,
                "readout_us": "%g" % timing.readout_us,
            }
        )

    batch = Experiment.initial_states(
        config.with_overrides(init_strategy=(args.strategy,)),
        args.replicate,
        trained.params,
        config.workers,
    )[arm]
    Samplers.export_samples(args.output, batch, metadata)


def run_command(args):
    """Run the experiment and write one metrics table per initialization arm."""

    config = load_config(args)
    make_out_dir(args.out_dir)

    start = time.time()
    series = Experiment.run_experiment(config)
    for arm, arm_series in series.items():
        SampleFile.write_metrics_csv(
            os.path.join(args.out_dir, "%s.csv" % arm), arm_series.rows(), config.top_k
        )
        SampleFile.write_aggregate_csv(
            os.path.join(args.out_dir, "%s-aggregate.csv" % arm), arm_series.aggregates()
        )

    log.info(
        "%d arms, %d replicates, %d Gibbs updates: done in %s, results in '%s'",
        len(series),
        config.replicates,
        config.gibbs_updates,
        Helpers.human_time(time.time() - start),
        args.out_dir,
    )


def eval_command(args):
    """Compute the figures of merit of a sample file and print them."""

    if args.config:
        positives = load_config(args).positives
    elif args.dataset and args.size:
        positives = Datasets.dataset_by_name(args.dataset, args.size)
    else:
        error_out("give either --config or both --dataset and --size")

    sample_set = Samplers.import_samples(args.samples, positives.dim)
    record = Metrics.evaluate(sample_set.batch, positives, 0, args.top_k)
    print(SampleFile.format_record(record))


def bench_command(args):
    """Time full Gibbs updates and compare them with the annealer time."""

    if args.checkpoint:
        params, _ = RbmTrain.load_checkpoint(args.checkpoint)
    else:
        rng = np.random.default_rng(args.seed)
        params = Rbm.RbmParams.random(args.visible, args.hidden, rng)

    timing = None
    if args.timing_from:
        meta = SampleFile.read_samples(args.timing_from).metadata
        timing = Samplers.AnnealTiming.from_metadata(meta)

    report = Experiment.bench_gibbs(
        params,
        args.chains,
        args.updates,
        args.repetitions,
        args.seed,
        args.workers,
        timing,
    )
    for line in report.lines():
        print(line)


def plot_command(args):
    """Render metrics tables written by 'run' as SVG files."""

    make_out_dir(args.out_dir)
    series = {}
    for path in args.tables:
        arm = os.path.basename(path)
        for ext in (".gz", ".bz2", ".xz", ".csv"):
            if arm.endswith(ext):
                arm = arm[: -len(ext)]
        series[arm] = Experiment.series_from_rows(arm, SampleFile.read_metrics_csv(path))

    Plot.plot_all(series, args.out_dir, args.title)


def _add_config_options(parser, overrides=True):
    # The --config option
    text = 'the experiment configuration file ("key = value" lines)'
    parser.add_argument("-c", "--config", required=True, help=text)

    # The --seed option
    text = "the master seed (overrides the configuration file)"
    parser.add_argument("--seed", type=int, help=text)

    # The --workers option
    text = "number of worker threads (never changes the results)"
    parser.add_argument("--workers", type=int, help=text)

    if not overrides:
        return

    # The --backend option
    text = "the annealer backend (overrides the configuration file)"
    parser.add_argument("--backend", choices=Experiment.BACKENDS, help=text)

    # The --temperature option
    text = "an annealer temperature, may be given several times"
    parser.add_argument("--temperature", type=float, action="append", help=text)


def parse_arguments(argv=None):
    """A helper function which parses the input arguments."""
    text = sys.modules[__name__].__doc__
    parser = argparse.ArgumentParser(description=text, prog="rbminit")

    # The --version option
    parser.add_argument(
        "--version", action="version", version="%(prog)s " + "%s" % VERSION
    )

    # The --quiet option
    text = "be quiet"
    parser.add_argument("-q", "--quiet", action="store_true", help=text)

    # The --debug option
    text = "print debugging information"
    parser.add_argument("-d", "--debug", action="store_true", help=text)

    subparsers = parser.add_subparsers(title="commands", dest="command")
    subparsers.required = True

    #
    # Create parser for the "train" command
    #
    text = "train the model of every replicate and save checkpoints"
    parser_train = subparsers.add_parser("train", help=text)
    parser_train.set_defaults(func=train_command)
    _add_config_options(parser_train, overrides=False)

    # The --out-dir option
    text = "where to put the checkpoints (default: checkpoint_dir or .)"
    parser_train.add_argument("-o", "--out-dir", help=text)

    #
    # Create parser for the "init-samples" command
    #
    text = "write initial chain states of one replicate to a sample file"
    parser_init = subparsers.add_parser("init-samples", help=text)
    parser_init.set_defaults(func=init_samples_command)
    _add_config_options(parser_init)

    # Mandatory command-line argument - output file
    text = "the sample file to write (.gz, .bz2 and .xz are compressed)"
    parser_init.add_argument("output", help=text)

    # The --strategy option
    text = "which initial states to write (default: annealer)"
    parser_init.add_argument(
        "--strategy", choices=("annealer", "classical"), default="annealer", help=text
    )

    # The --replicate option
    text = "the replicate whose model is used (default: 0)"
    parser_init.add_argument("--replicate", type=int, default=0, help=text)

    #
    # Create parser for the "run" command
    #
    text = "run the experiment and write metrics tables"
    parser_run = subparsers.add_parser("run", help=text)
    parser_run.set_defaults(func=run_command)
    _add_config_options(parser_run)

    # The --out-dir option
    text = "the directory for the metrics tables (default: .)"
    parser_run.add_argument("-o", "--out-dir", default=".", help=text)

    # The --long-run option
    text = "one replicate with %d Gibbs updates" % Experiment.LONG_RUN_UPDATES
    parser_run.add_argument("--long-run", action="store_true", help=text)

    #
    # Create parser for the "eval" command
    #
    text = "print the figures of merit of a sample file"
    parser_eval = subparsers.add_parser("eval", help=text)
    parser_eval.set_defaults(func=eval_command)

    # Mandatory command-line argument - sample file
    text = "the sample file. Supported formats: uncompressed, " + ", ".join(
        TransRead.SUPPORTED_COMPRESSION_TYPES
    )
    parser_eval.add_argument("samples", help=text)

    # The --config option
    text = "take the dataset from this configuration file"
    parser_eval.add_argument("-c", "--config", help=text)

    # The --dataset and --size options
    text = "the dataset the samples are compared with"
    parser_eval.add_argument("--dataset", choices=("bas", "shifter"), help=text)
    text = "the dataset size parameter"
    parser_eval.add_argument("--size", type=int, help=text)

    # The --top-k option
    text = "how many most frequent positives to sum (default: %d)" % Metrics.DEFAULT_TOP_K
    parser_eval.add_argument("--top-k", type=int, default=Metrics.DEFAULT_TOP_K, help=text)

    #
    # Create parser for the "bench" command
    #
    text = "time full Gibbs updates and compare with the annealer time"
    parser_bench = subparsers.add_parser("bench", help=text)
    parser_bench.set_defaults(func=bench_command)

    text = "benchmark the model in this checkpoint instead of a random one"
    parser_bench.add_argument("--checkpoint", help=text)
    text = "visible units of the random model (default: 144)"
    parser_bench.add_argument("--visible", type=int, default=144, help=text)
    text = "hidden units of the random model (default: 144)"
    parser_bench.add_argument("--hidden", type=int, default=144, help=text)
    text = "number of chains (default: 10000)"
    parser_bench.add_argument("--chains", type=int, default=10000, help=text)
    text = "full Gibbs updates per repetition (default: 10)"
    parser_bench.add_argument("--updates", type=int, default=10, help=text)
    text = "number of repetitions (default: 5)"
    parser_bench.add_argument("--repetitions", type=int, default=5, help=text)
    text = "take the annealer timing from the metadata of this sample file"
    parser_bench.add_argument("--timing-from", help=text)
    text = "the seed of the random model and chains (default: 0)"
    parser_bench.add_argument("--seed", type=int, default=0, help=text)
    text = "number of worker threads (default: 1)"
    parser_bench.add_argument("--workers", type=int, default=1, help=text)

    #
    # Create parser for the "plot" command
    #
    text = "render metrics tables as SVG files"
    parser_plot = subparsers.add_parser("plot", help=text)
    parser_plot.set_defaults(func=plot_command)

    text = "metrics tables written by the 'run' command, one per arm"
    parser_plot.add_argument("tables", nargs="+", help=text)
    text = "the directory for the SVG files (default: .)"
    parser_plot.add_argument("-o", "--out-dir", default=".", help=text)
    text = "the title of the plots"
    parser_plot.add_argument("--title", help=text)

    return parser.parse_args(argv)


def setup_logger(loglevel):
    """
    A helper function which configures the root logger. The log level is
    initialized to 'loglevel'.
    """

    # Esc-sequences for coloured output
    esc_red = "\033[91m"  # pylint: disable=W1401
    esc_yellow = "\033[93m"  # pylint: disable=W1401
    esc_green = "\033[92m"  # pylint: disable=W1401
    esc_end = "\033[0m"  # pylint: disable=W1401

    class MyFormatter(logging.Formatter):
        """
        A custom formatter for logging messages. The reason we have it is to
        have different format for different log levels.
        """

        def __init__(self, fmt=None, datefmt=None):
            """The constructor."""
            logging.Formatter.__init__(self, fmt, datefmt)

            self._orig_fmt = self._fmt
            # Prefix with green-colored time-stamp, as well as with module name
            # and line number
            self._dbg_fmt = (
                "["
                + esc_green
                + "%(asctime)s"
                + esc_end
                + "] [%(module)s,%(lineno)d] "
                + self._fmt
            )

        def format(self, record):
            """
            The formatter which simply prefixes all debugging messages
            with a time-stamp.
            """

            if record.levelno == logging.DEBUG:
                self._fmt = self._dbg_fmt

            result = logging.Formatter.format(self, record)
            self._fmt = self._orig_fmt
            return result

    # Change log level names to something nicer than the default all-capital
    # 'INFO' etc.
    logging.addLevelName(logging.ERROR, esc_red + "ERROR" + esc_end)
    logging.addLevelName(logging.WARNING, esc_yellow + "WARNING" + esc_end)
    logging.addLevelName(logging.DEBUG, "debug")
    logging.addLevelName(logging.INFO, "info")

    log.setLevel(loglevel)
    formatter = MyFormatter("rbminit: %(levelname)s: %(message)s", "%H:%M:%S")
    where = logging.StreamHandler(sys.stderr)
    where.setFormatter(formatter)
    log.addHandler(where)


def main(argv=None):
    """Script entry point."""
    args = parse_arguments(argv)

    if args.quiet:
        loglevel = logging.WARNING
    elif args.debug:
        loglevel = logging.DEBUG
    else:
        loglevel = logging.INFO

    setup_logger(loglevel)

    if args.quiet and args.debug:
        error_out("--quiet and --debug cannot be used together")

    try:
        args.func(args)
    except _ERRORS as err:
        error_out(err)
    except KeyboardInterrupt:
        error_out("interrupted, exiting")
    except MemoryError:
        log.error("Out of memory!")
        traceback.print_exc()

        log.info("The contents of /proc/meminfo:")
        with open("/proc/meminfo", "rt") as file_obj:
            for line in file_obj:
                print(line.strip())

        log.info("The contents of /proc/self/status:")
        with open("/proc/self/status", "rt") as file_obj:
            for line in file_obj:
                print(line.strip())
        raise SystemExit(1)
    return 0


if __name__ == "__main__":
    sys.exit(main())

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
This test verifies the 'Samplers' module: the Ising image of an RBM, gauge
transforms, simulated annealing, exact sampling, sample files and mixing.
"""

import math
import os
import tempfile
import unittest

import numpy as np
from scipy import stats
from scipy.special import expit, logsumexp

from rbminit import Rbm, RbmTrain, Samplers
from tests import helpers


def _all_spins(count):
    return Rbm.all_binary_states(count).astype(np.int8) * 2 - 1


def _ising_distribution(ising):
    """Exact Boltzmann probabilities of all spin states at beta = 1."""

    log_weights = -ising.energy(_all_spins(ising.spin_count))
    return np.exp(log_weights - logsumexp(log_weights))


def _random_ising(spins, rng):
    couplings = {}
    for i in range(spins):
        for j in range(i + 1, spins):
            if rng.random() < 0.5:
                couplings[(i, j)] = rng.normal()
    return Samplers.IsingModel(rng.normal(size=spins), couplings, rng.normal())


class TestIsingModel(unittest.TestCase):
    """The Ising model type and the RBM conversion."""

    def test_validation(self):
        with self.assertRaises(Samplers.Error):
            Samplers.IsingModel([0.0, 0.0], {(1, 0): 1.0})
        with self.assertRaises(Samplers.Error):
            Samplers.IsingModel([0.0, 0.0], {(0, 2): 1.0})
        with self.assertRaises(Samplers.Error):
            Samplers.IsingModel([0.0, float("nan")], {})
        with self.assertRaises(Samplers.Error):
            Samplers.IsingModel([0.0, 0.0], {(0, 1): float("inf")})

    def test_energy(self):
        ising = Samplers.IsingModel([1.0, -2.0], {(0, 1): 0.5})
        self.assertEqual(Samplers.ising_energy(ising, [1, 1]), 1.0 - 2.0 + 0.5)
        self.assertEqual(ising.energy([-1, 1]), -1.0 - 2.0 - 0.5)
        with self.assertRaises(Samplers.Error):
            ising.energy([1, 1, 1])

    def test_zero_params(self):
        ising = Samplers.rbm_to_ising(Rbm.RbmParams.zeros(3, 2), 8.0)
        self.assertEqual(ising.spin_count, 5)
        self.assertFalse(ising.fields.any())
        self.assertEqual(len(ising.couplings), 6)
        self.assertTrue(all(value == 0.0 for value in ising.couplings.values()))
        self.assertEqual(ising.offset, 0.0)

    def test_coupling_keys(self):
        ising = Samplers.rbm_to_ising(Rbm.RbmParams.zeros(3, 2), 1.0)
        self.assertEqual(sorted(ising.couplings), [(i, 3 + j) for i in range(3) for j in range(2)])

    def test_energy_identity(self):
        """H(s) + offset equals E(v, h) / T for every state."""

        rng = np.random.default_rng(0)
        for n, m in ((3, 2), (4, 6)):
            params = helpers.random_model(n, m, rng)
            states = Rbm.all_binary_states(n + m)
            for temperature in (1.0, 8.0):
                ising = Samplers.rbm_to_ising(params, temperature)
                lhs = ising.energy(states.astype(np.int8) * 2 - 1) + ising.offset
                rhs = Rbm.energy(params, states[:, :n], states[:, n:]) / temperature
                self.assertLessEqual(np.abs(lhs - rhs).max(), 1e-12)

    def test_boltzmann_equivalence(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            params = helpers.random_model(3, 2, rng)
            for temperature in (1.0, 8.0, 64.0):
                ising = Samplers.rbm_to_ising(params, temperature)
                table = RbmTrain.exact_boltzmann_table(params, temperature)
                difference = np.abs(_ising_distribution(ising) - table.joint()).max()
                self.assertLessEqual(difference, 1e-12)

    def test_spins_to_visible(self):
        self.assertFalse(Samplers.spins_to_visible(-np.ones((2, 5)), 3).states.any())
        self.assertTrue(Samplers.spins_to_visible(np.ones((2, 5)), 3).states.all())
        states = np.random.default_rng(2).integers(0, 2, size=(20, 7))
        back = Samplers.spins_to_visible(Samplers.visible_to_spins(states), 4)
        np.testing.assert_array_equal(back.states, states[:, :4])
        with self.assertRaises(Samplers.Error):
            Samplers.spins_to_visible(np.zeros((2, 5)), 3)


class TestRanges(unittest.TestCase):
    """Checking coefficients against device limits."""

    def test_zero_model(self):
        report = Samplers.check_ranges(Samplers.rbm_to_ising(Rbm.RbmParams.zeros(3, 3), 1.0))
        self.assertTrue(report.ok)
        self.assertEqual(len(report), 0)
        self.assertIn("within", report.summary())

    def test_single_violation(self):
        ising = Samplers.IsingModel([0.0, 0.0, 0.0], {(0, 1): 2.5, (1, 2): 0.5})
        report = Samplers.check_ranges(ising, Samplers.RangeLimits(h_max=4.0, j_max=1.0))
        self.assertEqual(len(report), 1)
        self.assertEqual(report.violations[0].key, (0, 1))
        self.assertEqual(ising.couplings[(0, 1)], 2.5)

    def test_monotonic_in_temperature(self):
        params = helpers.random_model(12, 12, np.random.default_rng(3), scale=20.0)
        counts = [
            len(Samplers.check_ranges(Samplers.rbm_to_ising(params, t)))
            for t in (1.0, 8.0, 16.0, 32.0, 64.0)
        ]
        self.assertGreater(counts[0], 0)
        self.assertEqual(counts, sorted(counts, reverse=True))

    def test_bad_limits(self):
        with self.assertRaises(Samplers.Error):
            Samplers.RangeLimits(h_max=0.0)


class TestGauge(unittest.TestCase):
    """Spin-reversal transforms."""

    def test_identity(self):
        ising = _random_ising(6, np.random.default_rng(4))
        gauged = Samplers.apply_gauge(ising, Samplers.GaugeVector.identity(6))
        np.testing.assert_array_equal(gauged.fields, ising.fields)
        self.assertEqual(gauged.couplings, ising.couplings)

    def test_energy_identity(self):
        rng = np.random.default_rng(5)
        spins = _all_spins(10)
        for _ in range(5):
            ising = _random_ising(10, rng)
            gauge = Samplers.GaugeVector.random(10, rng)
            gauged = Samplers.apply_gauge(ising, gauge)
            np.testing.assert_allclose(
                gauged.energy(spins * gauge.signs), ising.energy(spins), rtol=0, atol=1e-12
            )

    def test_involution(self):
        rng = np.random.default_rng(6)
        ising = _random_ising(8, rng)
        gauge = Samplers.GaugeVector.random(8, rng)
        twice = Samplers.apply_gauge(Samplers.apply_gauge(ising, gauge), gauge)
        np.testing.assert_array_equal(twice.fields, ising.fields)
        self.assertEqual(twice.couplings, ising.couplings)

        spins = _all_spins(8)
        back = Samplers.ungauge_samples(Samplers.ungauge_samples(spins, gauge), gauge)
        np.testing.assert_array_equal(back, spins)

    def test_bad_gauge(self):
        with self.assertRaises(Samplers.Error):
            Samplers.GaugeVector([1, 0, -1])
        ising = _random_ising(4, np.random.default_rng(7))
        with self.assertRaises(Samplers.Error):
            Samplers.apply_gauge(ising, Samplers.GaugeVector.identity(5))


class TestAnnealing(unittest.TestCase):
    """Simulated annealing."""

    def test_config(self):
        config = Samplers.default_sa_config(8.0)
        self.assertEqual(config.sweeps, 1000)
        self.assertAlmostEqual(config.beta_initial, 0.0125)
        self.assertEqual(config.beta_final, 1.0)
        self.assertEqual(config.beta_range, (config.beta_initial, 1.0))
        self.assertEqual(Samplers.default_sa_config(0.01).beta_initial, 1.0)
        with self.assertRaises(Samplers.Error):
            Samplers.SaConfig(sweeps=10, beta_initial=2.0, beta_final=1.0)
        with self.assertRaises(Samplers.Error):
            Samplers.SaConfig(sweeps=0)
        with self.assertRaises(Samplers.Error):
            Samplers.SaConfig(schedule="custom")
        self.assertEqual(Samplers.SaConfig(schedule="linear").schedule, "linear")

    def test_bqm(self):
        """The sampler's model has the same energies as the Ising model"""

        ising = _random_ising(5, np.random.default_rng(6))
        bqm = Samplers.ising_to_bqm(ising)
        self.assertEqual(sorted(bqm.variables), list(range(5)))
        for spins in _all_spins(5):
            energy = bqm.energy(dict(enumerate(spins.tolist())))
            self.assertAlmostEqual(energy, ising.energy(spins) + ising.offset, places=10)

    def test_single_spin(self):
        ising = Samplers.IsingModel([-1.0], {})
        config = Samplers.SaConfig(sweeps=200, beta_initial=0.1, beta_final=1.0)
        spins = Samplers.sa_sample(ising, config, 100000, Rbm.ChainStreams(8))
        self.assertEqual(spins.shape, (100000, 1))
        self.assertAlmostEqual((spins == 1).mean(), expit(2.0), delta=0.02)

    def test_zero_model(self):
        ising = Samplers.IsingModel(np.zeros(4), {})
        spins = Samplers.sa_sample(ising, Samplers.SaConfig(sweeps=5), 100000, Rbm.ChainStreams(9))
        self.assertTrue(np.all(np.abs(spins) == 1))
        self.assertAlmostEqual(spins.mean(), 0.0, delta=0.01)

    def test_constant_beta_converges(self):
        ising = _random_ising(5, np.random.default_rng(10))
        config = Samplers.SaConfig(sweeps=300, beta_initial=1.0, beta_final=1.0)
        spins = Samplers.sa_sample(ising, config, 50000, Rbm.ChainStreams(11))
        empirical = helpers.empirical_distribution((spins + 1) // 2)
        self.assertLessEqual(helpers.tv_distance(empirical, _ising_distribution(ising)), 0.05)

    def test_rbm_image_fidelity(self):
        """Annealing the Ising image of a small RBM gives its Boltzmann distribution."""

        params = helpers.random_model(3, 2, np.random.default_rng(12))
        for temperature in (1.0, 8.0):
            ising = Samplers.rbm_to_ising(params, temperature)
            config = Samplers.default_sa_config(temperature, sweeps=2000)
            spins = Samplers.sa_sample(ising, config, 100000, Rbm.ChainStreams(13))
            empirical = helpers.empirical_distribution((spins + 1) // 2)
            exact = RbmTrain.exact_boltzmann_table(params, temperature).joint()
            self.assertLessEqual(helpers.tv_distance(empirical, exact), 0.05)

    def test_reproducible(self):
        """The same streams give the same anneals, whatever the worker count"""

        ising = _random_ising(6, np.random.default_rng(14))
        config = Samplers.SaConfig(sweeps=20)
        first = Samplers.sa_sample(ising, config, 3000, Rbm.ChainStreams(15))
        again = Samplers.sa_sample(ising, config, 3000, Rbm.ChainStreams(15, workers=4))
        np.testing.assert_array_equal(first, again)
        other = Samplers.sa_sample(ising, config, 3000, Rbm.ChainStreams(15), group=1)
        self.assertFalse(np.array_equal(first, other))

        ensemble = Samplers.spin_reversal_ensemble(ising, config, 3000, 5, Rbm.ChainStreams(16))
        threaded = Samplers.spin_reversal_ensemble(
            ising, config, 3000, 5, Rbm.ChainStreams(16, workers=3)
        )
        np.testing.assert_array_equal(ensemble, threaded)

    def test_single_transform_is_plain_annealing(self):
        ising = _random_ising(6, np.random.default_rng(16))
        config = Samplers.SaConfig(sweeps=20)
        plain = Samplers.sa_sample(ising, config, 2000, Rbm.ChainStreams(17))
        ensemble = Samplers.spin_reversal_ensemble(
            ising, config, 2000, 1, Rbm.ChainStreams(17), [Samplers.GaugeVector.identity(6)]
        )
        np.testing.assert_array_equal(plain, ensemble)

    def test_ensemble_distribution(self):
        params = helpers.random_model(3, 2, np.random.default_rng(18))
        ising = Samplers.rbm_to_ising(params, 1.0)
        config = Samplers.default_sa_config(1.0, sweeps=500)
        exact = RbmTrain.exact_boltzmann_table(params).joint()
        for transforms in (1, 10):
            spins = Samplers.spin_reversal_ensemble(
                ising, config, 50000, transforms, Rbm.ChainStreams(19)
            )
            empirical = helpers.empirical_distribution((spins + 1) // 2)
            self.assertLessEqual(helpers.tv_distance(empirical, exact), 0.05)

    def test_ensemble_errors(self):
        ising = _random_ising(3, np.random.default_rng(20))
        config = Samplers.SaConfig(sweeps=2)
        with self.assertRaises(Samplers.Error):
            Samplers.spin_reversal_ensemble(ising, config, 5, 10, Rbm.ChainStreams(0))
        with self.assertRaises(Samplers.Error):
            Samplers.spin_reversal_ensemble(
                ising, config, 10, 2, Rbm.ChainStreams(0), [Samplers.GaugeVector.identity(3)]
            )

    def test_emulator_reports_ranges(self):
        params = helpers.random_model(4, 3, np.random.default_rng(21), scale=10.0)
        config = Samplers.SaConfig(sweeps=5)
        with self.assertLogs("rbminit.Samplers", level="WARNING"):
            batch = Samplers.emulate_annealer(params, 1.0, 100, Rbm.ChainStreams(22), config)
        self.assertEqual((batch.count, batch.width), (100, 4))


class TestInitializers(unittest.TestCase):
    """Uniform, exact and hybrid initial states."""

    def test_uniform(self):
        batch = Samplers.uniform_init(10000, 100, Rbm.ChainStreams(23))
        self.assertEqual((batch.count, batch.width), (10000, 100))
        self.assertAlmostEqual(batch.states.mean(), 0.5, delta=0.01)
        again = Samplers.uniform_init(10000, 100, Rbm.ChainStreams(23))
        np.testing.assert_array_equal(batch.states, again.states)
        with self.assertRaises(Samplers.Error):
            Samplers.uniform_init(0, 5, Rbm.ChainStreams(0))

    def test_exact_zero_params(self):
        batch = Samplers.exact_boltzmann_init(
            Rbm.RbmParams.zeros(3, 2), 1.0, 100000, Rbm.ChainStreams(24)
        )
        empirical = helpers.empirical_distribution(batch)
        self.assertLessEqual(helpers.tv_distance(empirical, np.full(8, 1 / 8)), 0.01)

    def test_exact_goodness_of_fit(self):
        params = helpers.random_model(3, 2, np.random.default_rng(25))
        expected = RbmTrain.exact_boltzmann_table(params).visible_marginal()
        batch = Samplers.exact_boltzmann_init(params, 1.0, 100000, Rbm.ChainStreams(26))
        observed = np.bincount(Rbm.states_to_indices(batch.states), minlength=8)
        result = stats.chisquare(observed, expected * observed.sum())
        self.assertGreater(result.pvalue, 0.01)

    def test_exact_high_temperature(self):
        params = helpers.random_model(3, 2, np.random.default_rng(27))
        batch = Samplers.exact_boltzmann_init(params, 1e4, 100000, Rbm.ChainStreams(28))
        empirical = helpers.empirical_distribution(batch)
        self.assertLessEqual(helpers.tv_distance(empirical, np.full(8, 1 / 8)), 0.02)

    def test_exact_temperature_folding(self):
        params = helpers.random_model(3, 2, np.random.default_rng(29))
        hot = Samplers.exact_boltzmann_init(params, 4.0, 50000, Rbm.ChainStreams(30))
        folded = Samplers.exact_boltzmann_init(
            Rbm.scale_temperature(params, 4.0), 1.0, 50000, Rbm.ChainStreams(31)
        )
        table = np.vstack(
            [
                np.bincount(Rbm.states_to_indices(hot.states), minlength=8),
                np.bincount(Rbm.states_to_indices(folded.states), minlength=8),
            ]
        )
        self.assertGreater(stats.chi2_contingency(table).pvalue, 0.01)

    def test_exact_size_guard(self):
        with self.assertRaises(Samplers.Error):
            Samplers.exact_boltzmann_init(
                Rbm.RbmParams.zeros(21, 2), 1.0, 10, Rbm.ChainStreams(0)
            )

    def test_hybrid_same_batches(self):
        batch = Samplers.uniform_init(50, 8, Rbm.ChainStreams(32))
        mixed = Samplers.hybrid_mix(batch, batch, 1000, Rbm.ChainStreams(33))
        rows = {row.tobytes() for row in batch.states}
        self.assertTrue(all(row.tobytes() in rows for row in mixed.states))

    def test_hybrid_fraction(self):
        zeros = Rbm.StateBatch(np.zeros((500, 4), dtype=np.uint8))
        ones = Rbm.StateBatch(np.ones((500, 4), dtype=np.uint8))
        mixed = Samplers.hybrid_mix(zeros, ones, 100000, Rbm.ChainStreams(34))
        self.assertAlmostEqual((mixed.states.sum(axis=1) == 0).mean(), 0.5, delta=0.01)
        again = Samplers.hybrid_mix(zeros, ones, 100000, Rbm.ChainStreams(34))
        np.testing.assert_array_equal(mixed.states, again.states)

    def test_hybrid_width_mismatch(self):
        first = Rbm.StateBatch(np.zeros((2, 4), dtype=np.uint8))
        second = Rbm.StateBatch(np.zeros((2, 5), dtype=np.uint8))
        with self.assertRaises(Samplers.Error):
            Samplers.hybrid_mix(first, second, 3, Rbm.ChainStreams(0))


class TestSampleFiles(unittest.TestCase):
    """Importing and exporting device samples."""

    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def _write(self, name, text):
        path = os.path.join(self.tmpdir, name)
        with open(path, "w") as f_obj:
            f_obj.write(text)
        return path

    def test_known_file(self):
        path = self._write("device.txt", "# device: Advantage\n# temperature: 8\n0110\n1011\n")
        sample_set = Samplers.import_samples(path)
        self.assertEqual(sample_set.batch.states.tolist(), [[0, 1, 1, 0], [1, 0, 1, 1]])
        self.assertEqual(sample_set.metadata["device"], "Advantage")

    def test_round_trip(self):
        batch = Samplers.uniform_init(300, 144, Rbm.ChainStreams(35))
        for name in ("samples.txt", "samples.txt.gz", "samples.txt.xz"):
            path = os.path.join(self.tmpdir, name)
            Samplers.export_samples(path, batch, {"device": "emulator", "temperature": 8})
            sample_set = Samplers.import_samples(path, 144)
            np.testing.assert_array_equal(sample_set.batch.states, batch.states)
            self.assertEqual(sample_set.metadata["temperature"], "8")

    def test_width_mismatch(self):
        path = self._write("short.txt", "0" * 143 + "\n")
        with self.assertRaises(Samplers.Error):
            Samplers.import_samples(path, 144)

    def test_malformed_line(self):
        path = self._write("bad.txt", "0101\n01x1\n")
        with self.assertRaises(Samplers.Error):
            Samplers.import_samples(path)

    def test_chain_break_diagnostic(self):
        path = self._write("broken.txt", "# chain_break_fraction: 0.03\n01\n10\n")
        with self.assertLogs("rbminit.Samplers", level="WARNING") as logs:
            Samplers.import_samples(path)
        self.assertIn("0.03", "\n".join(logs.output))

    def test_timing(self):
        timing = Samplers.AnnealTiming()
        self.assertAlmostEqual(timing.budget_seconds(10000), 2.54)
        timing = Samplers.AnnealTiming.from_metadata({"anneal_time_us": "100", "x": "1"})
        self.assertEqual(timing.per_sample_us, 100 + 20 + 214)
        with self.assertRaises(Samplers.Error):
            Samplers.AnnealTiming.from_metadata({"delay_us": "soon"})
        self.assertTrue(math.isclose(Samplers.AnnealTiming(0, 0, 1).budget_seconds(1e6), 1.0))

#!/usr/bin/env python
#
# Copyright 2024 - The lpvfdi Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Tests for lpvfdi.internal.lib.synthesis."""

import unittest

import numpy as np
from scipy import linalg

from lpvfdi.internal import constants
from lpvfdi.internal.lib import fdi_test_lib
from lpvfdi.internal.lib import stacking
from lpvfdi.internal.lib import synthesis
from lpvfdi.public import errors


def _Stacked(h_bar, f_bar, l_bar=None, n_f=1):
    h_bar = np.atleast_2d(np.asarray(h_bar, dtype=float))
    f_bar = np.atleast_2d(np.asarray(f_bar, dtype=float))
    if l_bar is None:
        l_bar = np.eye(h_bar.shape[0])
    return stacking.StackedSystem(H_bar=h_bar, F_bar=f_bar,
                                  L_bar=np.asarray(l_bar, dtype=float),
                                  n_f=n_f)


def _RandomIsolable(rng):
    """A tall Gaussian H_bar with at least a 4-dimensional left nullspace."""
    rows = int(rng.integers(10, 31))
    cols = int(rng.integers(1, rows - 3))
    return _Stacked(rng.standard_normal((rows, cols)),
                    rng.standard_normal((rows, 2)),
                    rng.standard_normal((rows, 5)), n_f=1)


def _KktRow(h_bar, f_col):
    """Solves min ||N||^2 - N f s.t. N H = 0 through its KKT system."""
    rows, cols = h_bar.shape
    kkt = np.zeros((rows + cols, rows + cols))
    kkt[:rows, :rows] = 2.0 * np.eye(rows)
    kkt[:rows, rows:] = h_bar
    kkt[rows:, :rows] = h_bar.T
    rhs = np.concatenate([f_col, np.zeros(cols)])
    return np.linalg.solve(kkt, rhs)[:rows]


def _Objective(row, f_col):
    return row.dot(row) - row.dot(f_col)


class IsolabilityCheckTest(fdi_test_lib.BaseFdiTest):

    def setUp(self):
        super(IsolabilityCheckTest, self).setUp()
        self.rng = np.random.default_rng(5)
        self.opt = synthesis.SynthesisOptions()

    def testZeroFaultMatrix(self):
        """Test F_bar = 0 is not isolable."""
        stk = _Stacked(self.rng.standard_normal((8, 3)), np.zeros((8, 1)))
        result = synthesis.IsolabilityCheck(stk, self.opt)
        self.assertFalse(result.isolable)
        self.assertEqual(result.rank_h, result.rank_hf)

    def testAllZero(self):
        """Test degenerate all-zero matrices."""
        stk = _Stacked(np.zeros((4, 2)), np.zeros((4, 1)))
        self.assertEqual(synthesis.IsolabilityCheck(stk, self.opt),
                         synthesis.IsolabilityResult(False, 0, 0))

    def testFaultEqualsDisturbanceColumn(self):
        """Test a fault column inside range(H_bar)."""
        h_bar = self.rng.standard_normal((8, 3))
        stk = _Stacked(h_bar, h_bar[:, :1])
        self.assertFalse(synthesis.IsolabilityCheck(stk, self.opt).isolable)

    def testRandomCombinationNeverIsolable(self):
        """Test fault columns drawn from range(H_bar) never pass."""
        opt = synthesis.SynthesisOptions(rank_tol_factor=1e-10)
        for _ in range(20):
            h_bar = self.rng.standard_normal((12, 4)).dot(
                self.rng.standard_normal((4, 6)))
            f_col = h_bar.dot(self.rng.standard_normal((6, 1)))
            result = synthesis.IsolabilityCheck(_Stacked(h_bar, f_col), opt)
            self.assertFalse(result.isolable)
            self.assertEqual(result.rank_h, 4)

    def testGenericIsolable(self):
        """Test a generic fault column is isolable."""
        stk = _RandomIsolable(self.rng)
        result = synthesis.IsolabilityCheck(stk, self.opt)
        self.assertTrue(result.isolable)
        self.assertGreater(result.rank_hf, result.rank_h)


class SynthesizeExactTest(fdi_test_lib.BaseFdiTest):

    def setUp(self):
        super(SynthesizeExactTest, self).setUp()
        self.rng = np.random.default_rng(7)
        self.opt = synthesis.SynthesisOptions()

    def testFullRankSquare(self):
        """Test an empty left nullspace raises."""
        h_bar = np.eye(4) + 0.1 * self.rng.standard_normal((4, 4))
        stk = _Stacked(h_bar, self.rng.standard_normal((4, 1)))
        self.assertRaises(errors.NotIsolableError, synthesis.SynthesizeExact,
                          stk, self.opt)

    def testUnconstrained(self):
        """Test H_bar = 0, F_bar = e_i gives N = e_i / 2."""
        unit = np.zeros((5, 1))
        unit[2, 0] = 1.0
        filt = synthesis.SynthesizeExact(_Stacked(np.zeros((5, 2)), unit),
                                         self.opt)
        self.AssertArrayClose(filt.N_bar, 0.5 * unit[:, 0], atol=1e-15)
        self.assertAlmostEqual(_Objective(filt.N_bar, unit[:, 0]), -0.25,
                               places=14)
        self.assertEqual(filt.exactness, constants.EXACT)

    def testMatchesKktSolver(self):
        """Test the projector solution against a brute-force KKT solve."""
        for _ in range(20):
            h_bar = self.rng.standard_normal((6, 4))
            f_bar = self.rng.standard_normal((6, 2))
            filt = synthesis.SynthesizeExact(_Stacked(h_bar, f_bar),
                                             self.opt)
            kkt_rows = [_KktRow(h_bar, f_bar[:, j]) for j in range(2)]
            kkt_scores = [abs(row.dot(f_bar[:, j]))
                          for j, row in enumerate(kkt_rows)]
            self.assertEqual(filt.j_star, int(np.argmax(kkt_scores)))
            f_col = f_bar[:, filt.j_star]
            self.assertLessEqual(
                abs(_Objective(filt.N_bar, f_col) -
                    _Objective(kkt_rows[filt.j_star], f_col)), 1e-8)
            self.assertLessEqual(
                np.abs(filt.N_bar.dot(h_bar)).max(),
                1e-9 * np.linalg.norm(filt.N_bar) * np.linalg.norm(h_bar, 2))

    def testTieGoesToLowestIndex(self):
        """Test identical columns select the first one."""
        f_col = self.rng.standard_normal((6, 1))
        stk = _Stacked(self.rng.standard_normal((6, 2)),
                       np.hstack([f_col, f_col]))
        self.assertEqual(synthesis.SynthesizeExact(stk, self.opt).j_star, 0)

    def testScaleBehavior(self):
        """Test scaling F_bar scales N_bar and keeps j* and E."""
        stk = _RandomIsolable(self.rng)
        scaled = _Stacked(stk.H_bar, 3.5 * stk.F_bar, stk.L_bar, n_f=1)
        a = (-0.125, 0.75, -1.5, 1.0)
        base = synthesis.SynthesizeExact(stk, self.opt)
        other = synthesis.SynthesizeExact(scaled, self.opt)
        self.assertEqual(base.j_star, other.j_star)
        self.AssertArrayClose(other.N_bar, 3.5 * base.N_bar, rtol=1e-10)
        base = synthesis.BuildNumerator(base, stk, a, self.opt)
        other = synthesis.BuildNumerator(other, scaled, a, self.opt)
        # E is invariant up to the fault unit: a 3.5x larger fault
        # channel yields a 3.5x smaller estimate of the same signal.
        self.AssertArrayClose(3.5 * other.E, base.E, rtol=1e-9, atol=1e-12)


class SynthesizeAnalyticTest(fdi_test_lib.BaseFdiTest):

    def setUp(self):
        super(SynthesizeAnalyticTest, self).setUp()
        self.rng = np.random.default_rng(13)

    def testUnconstrainedGammaCancels(self):
        """Test H_bar = 0, F_bar = e_i for several gammas and solvers."""
        unit = np.zeros((4, 1))
        unit[1, 0] = 1.0
        stk = _Stacked(np.zeros((4, 3)), unit)
        for solver in (constants.SOLVER_SPECTRAL, constants.SOLVER_CHOLESKY):
            for gamma in (1.0, 1e3, 1e8):
                opt = synthesis.SynthesisOptions(gamma=gamma, solver=solver)
                filt = synthesis.SynthesizeAnalytic(stk, opt)
                self.AssertArrayClose(filt.N_bar, 0.5 * unit[:, 0],
                                      atol=1e-12)

    def testOracleEquivalence(self):
        """Test convergence to the exact row on random instances."""
        for _ in range(50):
            stk = _RandomIsolable(self.rng)
            exact = synthesis.SynthesizeExact(stk,
                                              synthesis.SynthesisOptions())
            unit_exact = fdi_test_lib.UnitRow(exact.N_bar)
            errs = {}
            for gamma in (1e4, 1e10):
                filt = synthesis.SynthesizeAnalytic(
                    stk, synthesis.SynthesisOptions(gamma=gamma))
                errs[gamma] = np.linalg.norm(
                    fdi_test_lib.UnitRow(filt.N_bar) - unit_exact)
            self.assertLessEqual(errs[1e10], 1e-6)
            self.assertGreater(errs[1e4], errs[1e10])

    def testCholeskyMatchesSpectral(self):
        """Test both evaluations of the closed form at moderate gamma."""
        for _ in range(10):
            stk = _RandomIsolable(self.rng)
            rows = [
                synthesis.SynthesizeAnalytic(
                    stk, synthesis.SynthesisOptions(gamma=1e6, solver=solver))
                for solver in (constants.SOLVER_SPECTRAL,
                               constants.SOLVER_CHOLESKY)]
            self.assertEqual(rows[0].j_star, rows[1].j_star)
            self.AssertArrayClose(rows[1].N_bar, rows[0].N_bar, rtol=1e-6,
                                  atol=1e-12 * np.abs(rows[0].N_bar).max())

    def testSingleFactorization(self):
        """Test the spectral path factors H_bar once and reuses its norm."""
        svd = self.Patch(synthesis.linalg, "svd", wraps=linalg.svd)
        for shape in ((12, 5), (8, 14)):
            h_bar = self.rng.standard_normal(shape)
            stk = _Stacked(h_bar, self.rng.standard_normal((shape[0], 2)))
            svd.reset_mock()
            filt = synthesis.SynthesizeAnalytic(
                stk, synthesis.SynthesisOptions(gamma=1e3))
            self.assertEqual(svd.call_count, 1)
            expected = (np.linalg.norm(filt.N_bar.dot(h_bar)) /
                        (np.linalg.norm(filt.N_bar) *
                         np.linalg.norm(h_bar, 2)))
            self.assertAlmostEqual(filt.decoupling / expected, 1.0,
                                   places=10)

    def testRegularizedFlag(self):
        """Test a small gamma is reported as regularized."""
        stk = _RandomIsolable(self.rng)
        filt = synthesis.SynthesizeAnalytic(
            stk, synthesis.SynthesisOptions(gamma=1.0))
        self.assertEqual(filt.exactness, constants.REGULARIZED)
        filt = synthesis.SynthesizeAnalytic(stk, synthesis.SynthesisOptions())
        self.assertEqual(filt.exactness, constants.EXACT)


class NormalizationTest(fdi_test_lib.BaseFdiTest):

    def testDcGainScalar(self):
        """Test N F 1 = 2, sum(a) = 4 gives gain -0.5."""
        stk = _Stacked([[1.0]], [[2.0]], [[1.0]])
        filt = synthesis.SynthesizedFilter(N_bar=np.array([1.0]), j_star=0,
                                           exactness=constants.EXACT,
                                           decoupling=0.0)
        self.AssertArrayClose(synthesis.DcFaultGain(filt, stk, (3.0, 1.0)),
                              [-0.5])
        built = synthesis.BuildNumerator(filt, stk, (3.0, 1.0))
        self.assertEqual(built.scale, -2.0)
        self.AssertArrayClose(built.E, [-2.0])
        self.AssertArrayClose(built.normalized_gain, [1.0])

    def testDcGainBlind(self):
        """Test N F = 0 gives zero gain and can not be normalized."""
        stk = _Stacked(np.zeros((2, 1)), [[1.0], [0.0]])
        filt = synthesis.SynthesizedFilter(N_bar=np.array([0.0, 1.0]),
                                           j_star=0,
                                           exactness=constants.EXACT,
                                           decoupling=0.0)
        self.AssertArrayEqual(synthesis.DcFaultGain(filt, stk, (0.5, 1.0)),
                              [0.0])
        self.assertRaises(errors.NotIsolableError, synthesis.BuildNumerator,
                          filt, stk, (0.5, 1.0))

    def testDcGainRootAtOne(self):
        """Test a(1) = 0 is rejected."""
        stk = _Stacked([[1.0]], [[2.0]])
        filt = synthesis.SynthesizedFilter(N_bar=np.array([1.0]), j_star=0,
                                           exactness=constants.EXACT,
                                           decoupling=0.0)
        self.assertRaises(errors.DenominatorError, synthesis.DcFaultGain,
                          filt, stk, (-1.0, 1.0))

    def testSteadyStateUnity(self):
        """Test the normalized gain is one on random instances."""
        rng = np.random.default_rng(17)
        a = (0.857375, 2.7075, 2.85, 1.0)
        for _ in range(20):
            stk = _RandomIsolable(rng)
            for synth in (synthesis.SynthesizeExact,
                          synthesis.SynthesizeAnalytic):
                filt = synth(stk, synthesis.SynthesisOptions())
                filt = synthesis.BuildNumerator(filt, stk, a)
                self.assertAlmostEqual(filt.normalized_gain[0], 1.0,
                                       delta=1e-9)
                self.assertEqual(filt.a, a)

    def testMultiFaultDecoupling(self):
        """Test the filter of one fault is blind to the other fault."""
        rng = np.random.default_rng(19)
        # Two faults over three shift blocks, columns interleaved.
        stk = _Stacked(rng.standard_normal((24, 6)),
                       rng.standard_normal((24, 6)),
                       rng.standard_normal((24, 4)), n_f=2)
        for target in (0, 1):
            opt = synthesis.SynthesisOptions(target_fault=target)
            self.assertTrue(synthesis.IsolabilityCheck(stk, opt).isolable)
            filt = synthesis.SynthesizeExact(stk, opt)
            self.assertEqual(filt.j_star % 2, target)
            other = stk.FaultColumns(1 - target)
            self.assertLessEqual(
                np.abs(filt.N_bar.dot(stk.F_bar[:, other])).max(),
                1e-9 * np.linalg.norm(filt.N_bar) *
                np.linalg.norm(stk.F_bar))
            filt = synthesis.BuildNumerator(filt, stk, (0.5, 1.0), opt)
            self.assertAlmostEqual(filt.normalized_gain[target], 1.0,
                                   delta=1e-9)
            self.assertAlmostEqual(filt.normalized_gain[1 - target], 0.0,
                                   delta=1e-8)


class SynthesisOptionsTest(unittest.TestCase):

    def testValidation(self):
        """Test invalid options are rejected."""
        self.assertRaises(errors.ConfigError, synthesis.SynthesisOptions,
                          gamma=0.0)
        self.assertRaises(errors.ConfigError, synthesis.SynthesisOptions,
                          rank_tol_factor=-1.0)
        self.assertRaises(errors.ConfigError, synthesis.SynthesisOptions,
                          solver="LU")

    def testDefaultTolerance(self):
        """Test the automatic tolerance scales with the largest dimension."""
        opt = synthesis.SynthesisOptions()
        self.assertEqual(opt.ToleranceFactor((28, 30)),
                         30 * np.finfo(float).eps)
        opt = synthesis.SynthesisOptions(rank_tol_factor=1e-8)
        self.assertEqual(opt.ToleranceFactor((28, 30)), 1e-8)


if __name__ == "__main__":
    unittest.main()

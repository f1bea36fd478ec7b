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

"""Filter synthesis on stacked matrices.

Given a StackedSystem the row filter N_bar solves, per fault column F_j,

    minimize ||N_bar||^2 - N_bar F_j   subject to   N_bar H_bar = 0

and the column with the largest sensitivity |N_bar F_j| is selected.
SynthesizeExact evaluates the minimizer through the projector onto the
left nullspace of H_bar. SynthesizeAnalytic evaluates the regularized
closed form

    N_bar = (1 / 2 gamma) F_j^T (gamma^-1 I + H_bar H_bar^T)^-1

which converges to the exact one as gamma grows and is what the
real-time path uses. BuildNumerator rescales N_bar L_bar so that the
steady-state map from a constant target fault to the residual is +1.
"""

import collections
import dataclasses
import logging

import numpy as np
from scipy import linalg

from lpvfdi.internal import constants
from lpvfdi.internal.lib import stacking
from lpvfdi.public import errors

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps

IsolabilityResult = collections.namedtuple(
    "IsolabilityResult", ["isolable", "rank_h", "rank_hf"])


@dataclasses.dataclass(frozen=True)
class SynthesisOptions(object):
    """Options of the filter synthesis.

    Attributes:
        gamma: Regularization weight of the analytic solution.
        rank_tol_factor: Relative singular value cutoff; None selects
                         max(shape) * eps of the matrix being ranked.
        target_fault: Index of the fault to estimate.
        solver: constants.SOLVER_SPECTRAL or constants.SOLVER_CHOLESKY.
    """
    gamma: float = constants.GAMMA
    rank_tol_factor: float = None
    target_fault: int = constants.TARGET_FAULT
    solver: str = constants.SOLVER_SPECTRAL

    def __post_init__(self):
        if not self.gamma > 0:
            raise errors.ConfigError("gamma must be positive, got %r" %
                                     self.gamma)
        if self.rank_tol_factor is not None and not self.rank_tol_factor > 0:
            raise errors.ConfigError(
                "rank_tol_factor must be positive, got %r" %
                self.rank_tol_factor)
        if self.target_fault < 0:
            raise errors.ConfigError("target_fault must be >= 0, got %d" %
                                     self.target_fault)
        if self.solver not in (constants.SOLVER_SPECTRAL,
                               constants.SOLVER_CHOLESKY):
            raise errors.ConfigError("Unknown solver %r" % self.solver)

    def ToleranceFactor(self, shape):
        """Returns the relative rank tolerance for a matrix shape."""
        if self.rank_tol_factor is not None:
            return self.rank_tol_factor
        return max(max(shape), 1) * _EPS


@dataclasses.dataclass(frozen=True, eq=False)
class SynthesizedFilter(object):
    """A synthesized row filter for one parameter window.

    Attributes:
        N_bar: Row of length (d_N+1) n_r.
        j_star: Column of F_bar the filter was optimized for.
        exactness: constants.EXACT or constants.REGULARIZED.
        decoupling: ||N_bar H_bar|| / (||N_bar|| ||H_bar||), 0 for a zero row.
        fault_gain: Unnormalized DC gain per fault, set by BuildNumerator.
        scale: Normalization factor s applied to N_bar L_bar.
        E: Normalized numerator of length (d_N+d_L+1) n_z.
        a: Denominator coefficients a_0 ... a_{d_a}.
    """
    N_bar: np.ndarray
    j_star: int
    exactness: str
    decoupling: float
    fault_gain: np.ndarray = None
    scale: float = None
    E: np.ndarray = None
    a: tuple = None

    @property
    def normalized_gain(self):
        """DC gain of the normalized filter per fault."""
        if self.fault_gain is None or self.scale is None:
            return None
        return self.scale * self.fault_gain


def _FullSvd(matrix):
    """Returns (U, sigma) with sigma padded by zeros to the row count."""
    rows, cols = matrix.shape
    if rows == 0:
        return np.zeros((0, 0)), np.zeros(0)
    if cols == 0:
        return np.eye(rows), np.zeros(rows)
    # U is square in both forms when rows <= cols.
    u, sigma, _ = linalg.svd(matrix, full_matrices=rows > cols)
    if sigma.size < rows:
        sigma = np.concatenate([sigma, np.zeros(rows - sigma.size)])
    return u, sigma


def _Rank(sigma, shape, opt):
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0, 0.0
    tol = opt.ToleranceFactor(shape) * sigma[0]
    return int(np.count_nonzero(sigma > tol)), tol


def IsolabilityCheck(stk, opt):
    """Checks Rank([H_bar F_bar]) > Rank(H_bar) for the target fault.

    Args:
        stk: A StackedSystem.
        opt: SynthesisOptions, for the tolerance and target fault.

    Returns:
        An IsolabilityResult.
    """
    h_aug, f_target = stacking.SplitFaultColumns(stk, opt.target_fault)
    hf = np.hstack([h_aug, f_target])
    rank_h, _ = _Rank(_FullSvd(h_aug)[1], h_aug.shape, opt)
    rank_hf, _ = _Rank(_FullSvd(hf)[1], hf.shape, opt)
    logger.debug("Isolability: rank_H=%d, rank_HF=%d", rank_h, rank_hf)
    return IsolabilityResult(isolable=rank_hf > rank_h, rank_h=rank_h,
                             rank_hf=rank_hf)


def _SelectColumn(scores):
    """Picks the largest score; near-ties go to the lowest index."""
    cutoff = np.max(scores) * (1.0 - constants.TIE_TOLERANCE)
    return int(np.flatnonzero(scores >= cutoff)[0])


def _Decoupling(row, h_aug, h_norm):
    row_norm = np.linalg.norm(row)
    if row_norm == 0.0 or h_norm == 0.0:
        return 0.0
    return float(np.linalg.norm(row.dot(h_aug)) / (row_norm * h_norm))


def _MakeFilter(candidates, f_target, target_cols, h_aug, h_norm):
    scores = np.abs(np.einsum("ij,ji->i", candidates, f_target))
    pick = _SelectColumn(scores)
    row = candidates[pick]
    decoupling = _Decoupling(row, h_aug, h_norm)
    exactness = (constants.EXACT
                 if decoupling <= constants.EXACTNESS_TOLERANCE
                 else constants.REGULARIZED)
    return SynthesizedFilter(N_bar=row, j_star=int(target_cols[pick]),
                             exactness=exactness,
                             decoupling=decoupling), scores[pick]


def SynthesizeExact(stk, opt):
    """Solves the equality-constrained QP through a nullspace projector.

    For every target column F_j the minimizer is N_j = 1/2 F_j^T P where
    P projects onto the left nullspace of H_bar.

    Args:
        stk: A StackedSystem.
        opt: SynthesisOptions.

    Returns:
        A SynthesizedFilter.

    Raises:
        errors.NotIsolableError: If no column has a nonzero sensitivity.
    """
    h_aug, f_target = stacking.SplitFaultColumns(stk, opt.target_fault)
    u, sigma = _FullSvd(h_aug)
    rank_h, _ = _Rank(sigma, h_aug.shape, opt)
    null_basis = u[:, rank_h:]
    projected = null_basis.T.dot(f_target)
    candidates = 0.5 * projected.T.dot(null_basis.T)
    filt, score = _MakeFilter(candidates, f_target,
                              stk.FaultColumns(opt.target_fault), h_aug,
                              sigma[0] if sigma.size else 0.0)
    f_norm = np.linalg.norm(f_target, 2) if f_target.size else 0.0
    if score <= opt.ToleranceFactor(h_aug.shape) * f_norm ** 2:
        raise errors.NotIsolableError(
            "Target fault %d is not isolable: rank_H=%d, left nullspace "
            "dimension %d." % (opt.target_fault, rank_h, null_basis.shape[1]),
            rank_h=rank_h)
    return filt


def _RegularizedRows(h_aug, f_target, opt):
    """Evaluates 1/2 F^T (I + gamma H H^T)^-1 for every target column.

    Returns:
        A tuple (rows, sigma_max) where sigma_max is the spectral norm of
        h_aug.
    """
    if opt.solver == constants.SOLVER_CHOLESKY:
        gram = h_aug.dot(h_aug.T)
        gram[np.diag_indices_from(gram)] += 1.0 / opt.gamma
        try:
            factor = linalg.cho_factor(gram, lower=True)
        except linalg.LinAlgError as e:
            raise errors.SynthesisError(
                "Cholesky factorization failed: %s" % str(e))
        rows = linalg.cho_solve(factor, f_target).T / (2.0 * opt.gamma)
        return rows, (np.linalg.norm(h_aug, 2) if h_aug.size else 0.0)
    u, sigma = _FullSvd(h_aug)
    weights = 1.0 / (1.0 + opt.gamma * sigma ** 2)
    rows = 0.5 * (f_target.T.dot(u) * weights).dot(u.T)
    return rows, (sigma[0] if sigma.size else 0.0)


def SynthesizeAnalytic(stk, opt):
    """Computes the gamma-regularized analytic filter row.

    Args:
        stk: A StackedSystem.
        opt: SynthesisOptions.

    Returns:
        A SynthesizedFilter whose exactness flag records whether the row
        decouples H_bar to EXACTNESS_TOLERANCE.

    Raises:
        errors.SynthesisError: If the factorization fails.
    """
    h_aug, f_target = stacking.SplitFaultColumns(stk, opt.target_fault)
    candidates, h_norm = _RegularizedRows(h_aug, f_target, opt)
    if not np.all(np.isfinite(candidates)):
        raise errors.SynthesisError("Regularized solve produced non-finite "
                                    "values at gamma=%g." % opt.gamma)
    filt, _ = _MakeFilter(candidates, f_target,
                          stk.FaultColumns(opt.target_fault), h_aug, h_norm)
    return filt


def _Coefficients(a):
    return np.asarray(getattr(a, "coeffs", a), dtype=float)


def DcFaultGain(filt, stk, a):
    """Steady-state gain -(N_bar F_bar 1) / sum(a) from faults to residual.

    Args:
        filt: A SynthesizedFilter.
        stk: The StackedSystem it was synthesized on.
        a: A DenominatorPoly or sequence of coefficients a_0 ... a_{d_a}.

    Returns:
        Array of length n_f.

    Raises:
        errors.DenominatorError: If a(1) = 0.
    """
    coeffs = _Coefficients(a)
    dc = coeffs.sum()
    if dc == 0.0 or abs(dc) <= _EPS * np.abs(coeffs).sum():
        raise errors.DenominatorError("Denominator has a root at q = 1.")
    # Column b * n_f + f is fault f at shift b.
    per_shift = filt.N_bar.dot(stk.F_bar).reshape(-1, stk.n_f)
    return -per_shift.sum(axis=0) / dc


def BuildNumerator(filt, stk, a, opt=None):
    """Normalizes N_bar L_bar to a unit steady-state fault gain.

    Args:
        filt: A SynthesizedFilter.
        stk: The StackedSystem it was synthesized on.
        a: A DenominatorPoly or sequence of coefficients.
        opt: SynthesisOptions; selects the target fault.

    Returns:
        A copy of filt with fault_gain, scale, E and a set.

    Raises:
        errors.NotIsolableError: If the target fault gain is zero.
    """
    opt = opt or SynthesisOptions()
    gain = DcFaultGain(filt, stk, a)
    target_gain = gain[opt.target_fault]
    coeffs = _Coefficients(a)
    f_target = stk.F_bar[:, stk.FaultColumns(opt.target_fault)]
    blind = _EPS * np.linalg.norm(filt.N_bar) * np.linalg.norm(f_target)
    if not np.isfinite(target_gain) or abs(target_gain * coeffs.sum()) <= blind:
        raise errors.NotIsolableError(
            "Zero DC gain for fault %d, the filter can not be normalized." %
            opt.target_fault)
    scale = 1.0 / target_gain
    numerator = scale * filt.N_bar.dot(stk.L_bar)
    return dataclasses.replace(filt, fault_gain=gain, scale=scale,
                               E=numerator, a=tuple(coeffs.tolist()))

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

"""LPV polynomial DAE models.

A model is the triple (H, L, F) of polynomial matrices in the shift
operator q whose coefficient matrices depend on a measured scheduling
point w:

    H(w_k, q)[x] + L(w_k, q)[z] + F(w_k, q)[f] = 0

x collects unknown signals (states and disturbances), z the measured
signals (outputs and inputs) and f the faults. LPV state-space models
are converted into this form by SsToDae with the orderings x = [X; d]
and z = [y; u].
"""

import dataclasses
import functools
import logging
import threading

import numpy as np

from lpvfdi.public import errors

logger = logging.getLogger(__name__)

_MEMO_LIMIT = 4096


def AsSchedulingPoint(w):
    """Converts a scalar or sequence into a 1-D float scheduling point."""
    return np.atleast_1d(np.asarray(w, dtype=float))


@dataclasses.dataclass(frozen=True)
class SchedulingBox(object):
    """Per-component bounds of the scheduling set W.

    Attributes:
        lower: Tuple of lower bounds, one per scheduling component.
        upper: Tuple of upper bounds.
    """
    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise errors.ModelError(
                "Scheduling bounds have %d lower and %d upper entries." %
                (len(self.lower), len(self.upper)))
        for low, high in zip(self.lower, self.upper):
            if not low <= high:
                raise errors.ModelError(
                    "Empty scheduling interval [%s, %s]." % (low, high))

    @classmethod
    def Interval(cls, low, high):
        """Creates a box for a scalar scheduling parameter."""
        return cls(lower=(float(low),), upper=(float(high),))

    @property
    def n_w(self):
        return len(self.lower)

    @functools.cached_property
    def _limits(self):
        return (np.asarray(self.lower, dtype=float),
                np.asarray(self.upper, dtype=float))

    def Center(self):
        """Returns the midpoint of the box."""
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def Check(self, w):
        """Validates a scheduling point against the box.

        Args:
            w: A scalar or sequence.

        Returns:
            The scheduling point as a 1-D numpy array.

        Raises:
            errors.SchedulingBoundsError: If w has the wrong size or any
                component lies outside its interval.
        """
        point = AsSchedulingPoint(w)
        if point.shape != (self.n_w,):
            raise errors.SchedulingBoundsError(
                "Scheduling point has %d components, expected %d." %
                (point.size, self.n_w))
        lower, upper = self._limits
        if np.any(point < lower) or np.any(point > upper):
            raise errors.SchedulingBoundsError(
                "Scheduling point %s outside of [%s, %s]." %
                (point.tolist(), list(self.lower), list(self.upper)))
        return point


class ParamPolyMatrix(object):
    """A polynomial matrix in q with scheduling-dependent coefficients.

    Coefficient matrices are produced by coeff_fn(w, i) for 0 <= i <= degree.
    With memoize=True evaluated coefficients are cached per (w, i) as
    read-only arrays, which keeps repeated window evaluations cheap.
    """

    def __init__(self, rows, cols, degree, coeff_fn, bounds=None,
                 memoize=False, name="M"):
        """Initialize.

        Args:
            rows: Number of rows.
            cols: Number of columns.
            degree: Declared degree d; trailing zero coefficients are allowed.
            coeff_fn: Callable (w, i) -> array of shape (rows, cols).
            bounds: A SchedulingBox or None for an unbounded parameter.
            memoize: Whether to cache evaluated coefficients.
            name: Label used in error messages.
        """
        if rows < 0 or cols < 0 or degree < 0:
            raise errors.ModelError(
                "%s: negative dimension or degree (%d, %d, %d)." %
                (name, rows, cols, degree))
        self.rows = rows
        self.cols = cols
        self.degree = degree
        self.bounds = bounds
        self.name = name
        self._coeff_fn = coeff_fn
        self._memo = {} if memoize else None
        self._memo_lock = threading.Lock()

    @classmethod
    def Constant(cls, coeffs, bounds=None, name="M"):
        """Creates a parameter-independent (LTI) polynomial matrix.

        Args:
            coeffs: List of 2-D arrays, coefficient of q^i at position i.
            bounds: Optional SchedulingBox.
            name: Label used in error messages.

        Returns:
            A ParamPolyMatrix.
        """
        frozen = []
        for coeff in coeffs:
            coeff = np.array(coeff, dtype=float, ndmin=2)
            coeff.flags.writeable = False
            frozen.append(coeff)
        rows, cols = frozen[0].shape
        return cls(rows, cols, len(frozen) - 1,
                   lambda w, i: frozen[i], bounds=bounds, name=name)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def Eval(self, w, i):
        """Evaluates the coefficient of q^i at scheduling point w.

        Args:
            w: A scheduling point.
            i: Coefficient index.

        Returns:
            A (rows, cols) numpy array. Memoized results are read-only.

        Raises:
            errors.CoefficientIndexError: If i is outside [0, degree].
            errors.SchedulingBoundsError: If w lies outside the bounds.
            errors.ModelError: If coeff_fn returns a wrongly shaped matrix.
        """
        if not 0 <= i <= self.degree:
            raise errors.CoefficientIndexError(
                "%s: coefficient index %d outside [0, %d]." %
                (self.name, i, self.degree))
        if self.bounds is not None:
            point = self.bounds.Check(w)
        else:
            point = AsSchedulingPoint(w)
        return self.EvalValidated(point, i)

    def EvalValidated(self, point, i):
        """Evaluates M_i at a point already checked against the bounds.

        Args:
            point: A 1-D float numpy array returned by SchedulingBox.Check.
            i: Coefficient index in [0, degree].

        Returns:
            A (rows, cols) numpy array. Memoized results are read-only.
        """
        if self._memo is None:
            return self._Compute(point, i)
        key = (point.tobytes(), i)
        value = self._memo.get(key)
        if value is None:
            value = self._Compute(point, i)
            value.flags.writeable = False
            with self._memo_lock:
                if len(self._memo) >= _MEMO_LIMIT:
                    self._memo.clear()
                self._memo[key] = value
        return value

    def _Compute(self, point, i):
        coeff = np.asarray(self._coeff_fn(point, i), dtype=float)
        if coeff.shape != self.shape:
            raise errors.ModelError(
                "%s: coefficient %d has shape %s, expected %s." %
                (self.name, i, coeff.shape, self.shape))
        return coeff


def EvalCoeff(m, w, i):
    """Returns the coefficient matrix M_i(w) of a ParamPolyMatrix."""
    return m.Eval(w, i)


@dataclasses.dataclass(frozen=True)
class DaeModel(object):
    """The LPV DAE H[x] + L[z] + F[f] = 0.

    Attributes:
        H: ParamPolyMatrix, n_r x n_x.
        L: ParamPolyMatrix, n_r x n_z.
        F: ParamPolyMatrix, n_r x n_f.
        bounds: SchedulingBox shared by all three matrices.
    """
    H: ParamPolyMatrix
    L: ParamPolyMatrix
    F: ParamPolyMatrix
    bounds: SchedulingBox

    def __post_init__(self):
        if not self.H.rows == self.L.rows == self.F.rows:
            raise errors.ModelError(
                "H, L and F must share their row count, got %d, %d, %d." %
                (self.H.rows, self.L.rows, self.F.rows))

    @property
    def n_r(self):
        return self.H.rows

    @property
    def n_x(self):
        return self.H.cols

    @property
    def n_z(self):
        return self.L.cols

    @property
    def n_f(self):
        return self.F.cols

    @property
    def d_h(self):
        return self.H.degree

    @property
    def d_l(self):
        return self.L.degree

    @property
    def d_f(self):
        return self.F.degree


def _AsMatrixFn(value):
    """Wraps a constant matrix into a function of w."""
    if callable(value):
        return value
    constant = np.array(value, dtype=float, ndmin=2)
    constant.flags.writeable = False
    return lambda w: constant


class LpvStateSpace(object):
    """LPV state-space model.

        G(w_k) X(k+1) = A(w_k) X(k) + B_u u(k) + B_d d(k) + B_f f(k)
        y(k) = C(w_k) X(k) + D_u u(k) + D_d d(k) + D_f f(k)

    Every matrix may be given as a constant array or a callable of w.
    Missing D matrices default to zero.
    """

    def __init__(self, A, B_u, C, bounds, G=None, B_d=None, B_f=None,
                 D_u=None, D_d=None, D_f=None, n_d=0, n_f=0):
        """Initialize and verify shapes at the center of the box.

        Args:
            A: n_X x n_X state matrix.
            B_u: n_X x n_u input matrix.
            C: n_y x n_X output matrix.
            bounds: SchedulingBox of the scheduling parameter.
            G: Descriptor matrix, identity if None.
            B_d: n_X x n_d disturbance matrix, required when n_d > 0.
            B_f: n_X x n_f fault matrix, zero if None.
            D_u: n_y x n_u feedthrough, zero if None.
            D_d: n_y x n_d disturbance feedthrough, zero if None.
            D_f: n_y x n_f fault feedthrough, zero if None.
            n_d: Number of disturbances.
            n_f: Number of faults.

        Raises:
            errors.ModelError: On any shape mismatch.
        """
        self.bounds = bounds
        center = bounds.Center()
        a0 = np.atleast_2d(_AsMatrixFn(A)(center))
        bu0 = np.atleast_2d(_AsMatrixFn(B_u)(center))
        c0 = np.atleast_2d(_AsMatrixFn(C)(center))
        self.n_X = a0.shape[0]
        self.n_u = bu0.shape[1]
        self.n_y = c0.shape[0]
        self.n_d = n_d
        self.n_f = n_f
        n_X, n_u, n_y = self.n_X, self.n_u, self.n_y

        def _Zero(rows, cols):
            return np.zeros((rows, cols))

        self.A = _AsMatrixFn(A)
        self.B_u = _AsMatrixFn(B_u)
        self.C = _AsMatrixFn(C)
        self.G = _AsMatrixFn(np.eye(n_X) if G is None else G)
        self.B_d = _AsMatrixFn(_Zero(n_X, n_d) if B_d is None else B_d)
        self.B_f = _AsMatrixFn(_Zero(n_X, n_f) if B_f is None else B_f)
        self.D_u = _AsMatrixFn(_Zero(n_y, n_u) if D_u is None else D_u)
        self.D_d = _AsMatrixFn(_Zero(n_y, n_d) if D_d is None else D_d)
        self.D_f = _AsMatrixFn(_Zero(n_y, n_f) if D_f is None else D_f)

        expected = {
            "G": (n_X, n_X), "A": (n_X, n_X), "B_u": (n_X, n_u),
            "B_d": (n_X, n_d), "B_f": (n_X, n_f), "C": (n_y, n_X),
            "D_u": (n_y, n_u), "D_d": (n_y, n_d), "D_f": (n_y, n_f),
        }
        for name, shape in sorted(expected.items()):
            actual = np.asarray(getattr(self, name)(center), dtype=float)
            actual = actual.reshape(shape) if actual.size == 0 else actual
            if actual.ndim != 2 or actual.shape != shape:
                raise errors.ModelError(
                    "%s has shape %s, expected %s." %
                    (name, actual.shape, shape))


def SsToDae(ss, memoize=True):
    """Converts an LPV state-space model into DAE form.

    H_1 = [[-G, 0], [0, 0]], H_0 = [[A, B_d], [C, D_d]],
    L_0 = [[0, B_u], [-I, D_u]], F_0 = [[B_f], [D_f]].

    Args:
        ss: An LpvStateSpace.
        memoize: Whether the DAE coefficients are cached per scheduling point.

    Returns:
        A DaeModel with n_r = n_X + n_y, n_x = n_X + n_d, n_z = n_y + n_u.
    """
    n_X, n_y, n_u, n_d, n_f = ss.n_X, ss.n_y, ss.n_u, ss.n_d, ss.n_f
    n_r = n_X + n_y
    n_x = n_X + n_d
    n_z = n_y + n_u

    def _MatH(w, i):
        out = np.zeros((n_r, n_x))
        if i == 1:
            out[:n_X, :n_X] = -np.asarray(ss.G(w))
        else:
            out[:n_X, :n_X] = ss.A(w)
            out[:n_X, n_X:] = np.reshape(ss.B_d(w), (n_X, n_d))
            out[n_X:, :n_X] = ss.C(w)
            out[n_X:, n_X:] = np.reshape(ss.D_d(w), (n_y, n_d))
        return out

    def _MatL(w, unused_i):
        out = np.zeros((n_r, n_z))
        out[:n_X, n_y:] = ss.B_u(w)
        out[n_X:, :n_y] = -np.eye(n_y)
        out[n_X:, n_y:] = ss.D_u(w)
        return out

    def _MatF(w, unused_i):
        out = np.zeros((n_r, n_f))
        out[:n_X, :] = np.reshape(ss.B_f(w), (n_X, n_f))
        out[n_X:, :] = np.reshape(ss.D_f(w), (n_y, n_f))
        return out

    logger.debug("Converting state space (n_X=%d, n_u=%d, n_y=%d, n_d=%d, "
                 "n_f=%d) into DAE form.", n_X, n_u, n_y, n_d, n_f)
    return DaeModel(
        H=ParamPolyMatrix(n_r, n_x, 1, _MatH, ss.bounds, memoize, "H"),
        L=ParamPolyMatrix(n_r, n_z, 0, _MatL, ss.bounds, memoize, "L"),
        F=ParamPolyMatrix(n_r, n_f, 0, _MatF, ss.bounds, memoize, "F"),
        bounds=ss.bounds)


def EvalResidual(model, k, x_trace, z_trace, f_trace, w_trace):
    """Evaluates H(w_k,q)[x] + L(w_k,q)[z] + F(w_k,q)[f] at sample k.

    Args:
        model: A DaeModel.
        k: Sample index; samples up to k + degree must exist.
        x_trace: Array (n_samples, n_x).
        z_trace: Array (n_samples, n_z).
        f_trace: Array (n_samples, n_f).
        w_trace: Array (n_samples,) or (n_samples, n_w).

    Returns:
        The residual vector of length n_r.
    """
    w = w_trace[k]
    out = np.zeros(model.n_r)
    for poly, trace in ((model.H, x_trace), (model.L, z_trace),
                        (model.F, f_trace)):
        for i in range(poly.degree + 1):
            out += EvalCoeff(poly, w, i).dot(trace[k + i])
    return out

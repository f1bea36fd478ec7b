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

"""Window-evaluated stacked matrices.

For a row filter N(w, q) of degree d_N the identity N H = 0 over a
window of d_N + 1 samples becomes the finite linear system N_bar H_bar = 0,
where block (i, i + j) of H_bar holds H_j(w_{k-d_a+i}). F_bar and L_bar
are stacked the same way from F and L.
"""

import collections
import dataclasses
import logging

import numpy as np

from lpvfdi.internal.lib import lpv_model
from lpvfdi.public import errors

logger = logging.getLogger(__name__)

StackShapes = collections.namedtuple("StackShapes", ["h", "f", "l"])


@dataclasses.dataclass(frozen=True, eq=False)
class ParameterWindow(object):
    """Scheduling points (w_{k-d_a}, ..., w_{k-d_a+d_N}).

    Attributes:
        samples: Array of shape (d_n + 1, n_w).
        d_a: Delay of the filter (degree of the denominator).
        d_n: Degree of the row filter.
    """
    samples: np.ndarray
    d_a: int
    d_n: int

    def __post_init__(self):
        if self.d_n < 0 or self.d_a < 0:
            raise errors.WindowError(
                "Negative window degree (d_a=%d, d_n=%d)." %
                (self.d_a, self.d_n))
        if len(self.samples) != self.d_n + 1:
            raise errors.WindowError(
                "Window holds %d samples, expected d_n + 1 = %d." %
                (len(self.samples), self.d_n + 1))

    @classmethod
    def Create(cls, samples, d_a, d_n):
        """Creates a window from a sequence of scheduling points."""
        points = np.array([lpv_model.AsSchedulingPoint(w) for w in samples],
                          dtype=float)
        points.flags.writeable = False
        return cls(samples=points, d_a=d_a, d_n=d_n)

    @classmethod
    def FromTrace(cls, w_trace, k, d_a, d_n):
        """Cuts the window ending at w_{k-d_a+d_n} out of a trace.

        Args:
            w_trace: Sequence of scheduling points indexed by sample.
            k: Current sample.
            d_a: Filter delay.
            d_n: Filter degree.

        Returns:
            A ParameterWindow.

        Raises:
            errors.WindowError: If the window reaches before sample 0.
        """
        start = k - d_a
        if start < 0 or start + d_n >= len(w_trace):
            raise errors.WindowError(
                "Window [%d, %d] is outside the trace of length %d." %
                (start, start + d_n, len(w_trace)))
        return cls.Create(w_trace[start:start + d_n + 1], d_a, d_n)

    @classmethod
    def Constant(cls, w, d_a, d_n):
        """Creates a window frozen at a single scheduling point."""
        return cls.Create([w] * (d_n + 1), d_a, d_n)


@dataclasses.dataclass(frozen=True, eq=False)
class StackedSystem(object):
    """Stacked matrices of one window.

    Attributes:
        H_bar: (d_N+1) n_r x (d_N+d_H+1) n_x.
        F_bar: (d_N+1) n_r x (d_N+d_F+1) n_f, column b*n_f + f is fault f
               at shift b.
        L_bar: (d_N+1) n_r x (d_N+d_L+1) n_z.
        n_f: Number of fault signals.
    """
    H_bar: np.ndarray
    F_bar: np.ndarray
    L_bar: np.ndarray
    n_f: int

    def FaultColumns(self, fault):
        """Returns the F_bar column indices that belong to one fault."""
        if not 0 <= fault < self.n_f:
            raise errors.ModelError(
                "Fault index %d outside [0, %d)." % (fault, self.n_f))
        return np.arange(fault, self.F_bar.shape[1], self.n_f)


def RowWidth(model, d_n):
    """Computes the stacked matrix shapes for a filter degree.

    Args:
        model: A DaeModel.
        d_n: Filter degree.

    Returns:
        A StackShapes of (rows, cols) tuples for H_bar, F_bar and L_bar.
    """
    rows = (d_n + 1) * model.n_r
    return StackShapes(
        h=(rows, (d_n + model.d_h + 1) * model.n_x),
        f=(rows, (d_n + model.d_f + 1) * model.n_f),
        l=(rows, (d_n + model.d_l + 1) * model.n_z))


def _Stack(poly, points, bounds, shape):
    if poly.bounds is not None and poly.bounds is not bounds:
        points = [poly.bounds.Check(w) for w in points]
    out = np.zeros(shape)
    rows, cols = poly.rows, poly.cols
    for i, w in enumerate(points):
        for j in range(poly.degree + 1):
            col = (i + j) * cols
            out[i * rows:(i + 1) * rows, col:col + cols] = (
                poly.EvalValidated(w, j))
    return out


def BuildStacked(model, win):
    """Builds H_bar, F_bar and L_bar for a parameter window.

    Args:
        model: A DaeModel.
        win: A ParameterWindow.

    Returns:
        A StackedSystem.

    Raises:
        errors.WindowError: If d_a < d_N + d_L (non-causal filter).
        errors.SchedulingBoundsError: If a window point is outside W.
    """
    if win.d_a < win.d_n + model.d_l:
        raise errors.WindowError(
            "Non-causal window: d_a=%d < d_N + d_L = %d." %
            (win.d_a, win.d_n + model.d_l))
    shapes = RowWidth(model, win.d_n)
    points = [model.bounds.Check(w) for w in win.samples]
    return StackedSystem(
        H_bar=_Stack(model.H, points, model.bounds, shapes.h),
        F_bar=_Stack(model.F, points, model.bounds, shapes.f),
        L_bar=_Stack(model.L, points, model.bounds, shapes.l),
        n_f=model.n_f)


def SplitFaultColumns(stk, target_fault):
    """Moves the non-target fault columns of F_bar into H_bar.

    A filter synthesized against the result is decoupled from every
    fault other than target_fault.

    Args:
        stk: A StackedSystem.
        target_fault: Index of the fault to keep.

    Returns:
        A tuple (H_aug, F_target) of numpy arrays.
    """
    target = stk.FaultColumns(target_fault)
    if stk.n_f == 1:
        return stk.H_bar, stk.F_bar
    others = np.setdiff1d(np.arange(stk.F_bar.shape[1]), target)
    logger.debug("Decoupling %d columns of other faults.", len(others))
    return (np.hstack([stk.H_bar, stk.F_bar[:, others]]),
            stk.F_bar[:, target])

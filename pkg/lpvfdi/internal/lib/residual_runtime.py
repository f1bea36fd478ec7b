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

"""Causal recursive residual generator.

Every sample the filter synthesizes the normalized numerator E(w) for the
current parameter window and runs the denominator recursion

    a_{d_a} r(k) = E(w) [z(k-d_a); ...; z(k-d_a+d_N+d_L)]
                   - sum_{h<d_a} a_h r(k-d_a+h)

Outputs are 0 until d_a + 1 samples have been received.
"""

import collections
import dataclasses
import logging

import numpy as np
from scipy import linalg

from lpvfdi.internal import constants
from lpvfdi.internal.lib import stacking
from lpvfdi.internal.lib import synthesis
from lpvfdi.public import errors

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class DenominatorPoly(object):
    """Denominator a(q) = a_0 + a_1 q + ... + a_{d_a} q^{d_a}.

    Attributes:
        coeffs: Tuple of coefficients in ascending powers of q.
    """
    coeffs: tuple

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise errors.DenominatorError("Denominator needs coefficients.")
        if coeffs[-1] == 0.0:
            raise errors.DenominatorError(
                "Leading coefficient a_%d is zero." % (coeffs.size - 1))
        if coeffs.size > 1:
            roots = linalg.eigvals(linalg.companion(coeffs[::-1]))
            radius = np.abs(roots).max()
            if radius >= 1.0 - constants.STABILITY_MARGIN:
                raise errors.DenominatorError(
                    "Unstable denominator, spectral radius %.12g." % radius)
        if coeffs.sum() == 0.0:
            raise errors.DenominatorError("Denominator has a root at q = 1.")

    @property
    def d_a(self):
        return len(self.coeffs) - 1

    @property
    def dc(self):
        return float(np.sum(self.coeffs))


def MakeDenominator(poles):
    """Expands a monic denominator from its poles.

    Args:
        poles: Sequence of real poles or complex-conjugate pairs.

    Returns:
        A DenominatorPoly.

    Raises:
        errors.DenominatorError: If a pole is on or outside the unit circle
            or a complex pole misses its conjugate.
    """
    poles = np.asarray(list(poles), dtype=complex)
    for pole in poles:
        if abs(pole) >= 1.0:
            raise errors.DenominatorError("Pole %s is not inside the unit "
                                          "circle." % pole)
    unmatched = [p for p in poles if p.imag != 0.0 and
                 np.count_nonzero(np.isclose(poles, p.conjugate(),
                                             rtol=0.0, atol=1e-12)) !=
                 np.count_nonzero(np.isclose(poles, p, rtol=0.0, atol=1e-12))]
    if unmatched:
        raise errors.DenominatorError(
            "Complex poles without conjugate: %s" % unmatched)
    descending = np.real(np.poly(poles)) if poles.size else np.ones(1)
    return DenominatorPoly(coeffs=tuple(descending[::-1].tolist()))


def SynthesizeWindow(model, win, a, opt):
    """Builds the stacked system of a window and returns its normalized filter.

    Args:
        model: A DaeModel.
        win: A stacking.ParameterWindow.
        a: A DenominatorPoly.
        opt: synthesis.SynthesisOptions.

    Returns:
        A synthesis.SynthesizedFilter with E set.
    """
    stk = stacking.BuildStacked(model, win)
    filt = synthesis.SynthesizeAnalytic(stk, opt)
    return synthesis.BuildNumerator(filt, stk, a, opt)


class ResidualFilterState(object):
    """Ring buffers and caches of one running residual filter.

    A state is owned by a single caller; independent states may run on
    independent threads.
    """

    def __init__(self, model, a, d_n=None, cache_windows=False,
                 fixed_numerator=None):
        """Initialize.

        Args:
            model: The DaeModel the filter runs on.
            a: A DenominatorPoly.
            d_n: Filter degree, d_a when None.
            cache_windows: Reuse numerators of windows that agree after
                           quantization to WINDOW_CACHE_QUANTUM.
            fixed_numerator: A frozen E used instead of per-step synthesis.

        Raises:
            errors.WindowError: If d_a < d_N + d_L.
        """
        self.d_a = a.d_a
        self.d_n = self.d_a if d_n is None else d_n
        if self.d_n < 0 or self.d_a < self.d_n + model.d_l:
            raise errors.WindowError(
                "Non-causal filter: d_a=%d < d_N + d_L = %d." %
                (self.d_a, self.d_n + model.d_l))
        self.n_z = model.n_z
        self.z_width = (self.d_n + model.d_l + 1) * self.n_z
        if fixed_numerator is not None:
            fixed_numerator = np.asarray(fixed_numerator, dtype=float)
            if fixed_numerator.shape != (self.z_width,):
                raise errors.WindowError(
                    "Fixed numerator has shape %s, expected (%d,)." %
                    (fixed_numerator.shape, self.z_width))
        self.fixed_numerator = fixed_numerator
        self.z_history = collections.deque(maxlen=self.d_a + 1)
        self.w_history = collections.deque(maxlen=self.d_a + 1)
        self.r_history = collections.deque([0.0] * self.d_a,
                                           maxlen=self.d_a)
        self.k = 0
        self.cache_windows = cache_windows
        self.cache_hits = 0
        self.last_filter = None
        self._cache = collections.OrderedDict()

    @property
    def warm(self):
        return len(self.z_history) == self.d_a + 1

    def Numerator(self, model, a, opt):
        """Returns E for the window held in w_history."""
        if self.fixed_numerator is not None:
            return self.fixed_numerator
        win = stacking.ParameterWindow.Create(
            list(self.w_history)[:self.d_n + 1], self.d_a, self.d_n)
        key = None
        if self.cache_windows:
            key = tuple(np.round(win.samples.ravel() /
                                 constants.WINDOW_CACHE_QUANTUM).astype(
                                     np.int64).tolist())
            cached = self._cache.get(key)
            if cached is not None:
                self._cache.move_to_end(key)
                self.cache_hits += 1
                self.last_filter = cached
                return cached.E
        filt = SynthesizeWindow(model, win, a, opt)
        self.last_filter = filt
        if key is not None:
            self._cache[key] = filt
            if len(self._cache) > constants.WINDOW_CACHE_SIZE:
                self._cache.popitem(last=False)
        return filt.E


def Step(state, model, a, opt, z_k, w_k):
    """Consumes one sample and returns the residual r(k).

    Args:
        state: A ResidualFilterState, updated in place.
        model: The DaeModel.
        a: A DenominatorPoly.
        opt: synthesis.SynthesisOptions.
        z_k: Measurement vector [y(k); u(k)] of length n_z.
        w_k: Scheduling point at sample k.

    Returns:
        The residual as a float; 0.0 during warm-up.

    Raises:
        errors.ModelError: If z_k has the wrong size.
        errors.NotIsolableError: If the window filter can not be normalized.
    """
    z_k = np.asarray(z_k, dtype=float).ravel()
    if z_k.size != state.n_z:
        raise errors.ModelError("Measurement has %d entries, expected %d." %
                                (z_k.size, state.n_z))
    state.z_history.append(z_k)
    state.w_history.append(model.bounds.Check(w_k))
    state.k += 1
    if not state.warm:
        if state.d_a:
            state.r_history.append(0.0)
        return 0.0
    numerator = state.Numerator(model, a, opt)
    z_window = np.concatenate(
        [state.z_history[i] for i in range(state.z_width // state.n_z)])
    coeffs = a.coeffs
    feedback = 0.0
    for h in range(state.d_a):
        feedback += coeffs[h] * state.r_history[h]
    r_k = (float(numerator.dot(z_window)) - feedback) / coeffs[state.d_a]
    if state.d_a:
        state.r_history.append(r_k)
    return r_k


def RunBatch(model, a, opt, z_trace, w_trace, d_n=None, cache_windows=False):
    """Runs a fresh filter over recorded traces.

    Args:
        model: The DaeModel.
        a: A DenominatorPoly.
        opt: synthesis.SynthesisOptions.
        z_trace: Array-like (n_samples, n_z).
        w_trace: Array-like of n_samples scheduling points.
        d_n: Filter degree, d_a when None.
        cache_windows: See ResidualFilterState.

    Returns:
        A numpy array of n_samples residuals.

    Raises:
        errors.WindowError: If the traces differ in length.
    """
    if len(z_trace) != len(w_trace):
        raise errors.WindowError("Trace lengths differ: %d vs %d." %
                                 (len(z_trace), len(w_trace)))
    state = ResidualFilterState(model, a, d_n=d_n,
                                cache_windows=cache_windows)
    out = np.zeros(len(z_trace))
    for k in range(len(z_trace)):
        out[k] = Step(state, model, a, opt, z_trace[k], w_trace[k])
    logger.debug("Ran %d samples, %d cache hits.", len(z_trace),
                 state.cache_hits)
    return out

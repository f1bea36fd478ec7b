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

"""Define errors that are raised by the filter library and the fdi tool."""


class FdiError(Exception):
    """Base fault estimation filter exception."""


class ConfigError(FdiError):
    """Error related to config."""


class CommandArgError(FdiError):
    """Error related to command line args."""


class ModelError(FdiError):
    """Raised when model matrices have inconsistent shapes."""


class SchedulingBoundsError(ModelError):
    """Raised when a scheduling point lies outside the declared box."""


class CoefficientIndexError(ModelError):
    """Raised when a coefficient index exceeds the declared degree."""


class WindowError(FdiError):
    """Raised when a parameter window or a trace has the wrong length."""


class NotIsolableError(FdiError):
    """Raised when the target fault can not be isolated.

    Attributes:
        rank_h: Numerical rank of the stacked disturbance matrix.
        rank_hf: Numerical rank of the stacked disturbance matrix
                 augmented with the target fault columns.
    """

    def __init__(self, message, rank_h=None, rank_hf=None):
        self.rank_h = rank_h
        self.rank_hf = rank_hf
        super(NotIsolableError, self).__init__(message)


class DenominatorError(FdiError):
    """Raised when a filter denominator is unstable or degenerate."""


class SynthesisError(FdiError):
    """Raised when filter synthesis fails numerically."""


class SimulationDivergedError(FdiError):
    """Raised when the simulated plant state blows up.

    Attributes:
        sample: The sample index at which the guard tripped.
    """

    def __init__(self, message, sample=None):
        self.sample = sample
        super(SimulationDivergedError, self).__init__(message)


class BenchmarkError(FdiError):
    """Raised when the mean step time does not beat the sampling time."""

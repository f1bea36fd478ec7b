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

"""Filter test library."""

import unittest

import mock
import numpy as np


class BaseFdiTest(unittest.TestCase):
    """Base class for filter library tests."""

    def setUp(self):
        """Set up test."""
        self._patchers = []

    def tearDown(self):
        """Tear down test."""
        for patcher in reversed(self._patchers):
            patcher.stop()

    def Patch(self, *args, **kwargs):
        """A wrapper for mock.patch.object.

        This wrapper starts a patcher and store it in self._patchers,
        so that we can later stop them in tearDown.

        Args:
          *args: Arguments to pass to mock.patch.
          **kwargs: Keyword arguments to pass to mock.patch.

        Returns:
          Mock object
        """
        patcher = mock.patch.object(*args, **kwargs)
        self._patchers.append(patcher)
        return patcher.start()

    def AssertArrayClose(self, actual, expected, atol=0.0, rtol=1e-12):
        """Asserts two arrays agree elementwise within tolerance."""
        np.testing.assert_allclose(np.asarray(actual), np.asarray(expected),
                                   rtol=rtol, atol=atol)

    def AssertArrayEqual(self, actual, expected):
        """Asserts two arrays are bitwise identical."""
        np.testing.assert_array_equal(np.asarray(actual), np.asarray(expected))


def UnitRow(row):
    """Returns a row scaled to unit norm with a positive largest entry.

    Args:
        row: A 1-D numpy array.

    Returns:
        The normalized row, or the row itself when it is zero.
    """
    row = np.asarray(row, dtype=float)
    norm = np.linalg.norm(row)
    if norm == 0.0:
        return row
    row = row / norm
    pivot = np.argmax(np.abs(row))
    return row if row[pivot] >= 0 else -row

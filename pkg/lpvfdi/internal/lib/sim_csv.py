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

"""Reads and writes simulation logs as CSV.

Rows are written with LF line endings and floats with 17 significant
digits, so parsing a file and writing it back reproduces it byte for byte.
"""

import csv
import logging

import numpy as np

from lpvfdi.public import errors

logger = logging.getLogger(__name__)

HEADER = ("k", "t", "v_x", "u", "y_yawrate", "y_lat", "y_head", "phi",
          "kappa", "f_true", "r_lpv", "r_lti", "synth_time_s")
_FLOAT_FORMAT = "%.17g"


def FormatFloat(value):
    """Formats a float with 17 significant digits, never as "-0"."""
    return _FLOAT_FORMAT % (float(value) + 0.0)


def SimLogRows(log):
    """Converts a SimLog into CSV rows of strings.

    Args:
        log: A vehicle_case.SimLog.

    Returns:
        A list of rows, one per sample, in HEADER order.
    """
    phi = np.arcsin(log.d[:, 0]) if len(log) else np.zeros(0)
    rows = []
    for i in range(len(log)):
        values = (log.t[i], log.v_x[i], log.u[i], log.y[i, 0], log.y[i, 1],
                  log.y[i, 2], phi[i], log.d[i, 1], log.f_true[i],
                  log.r_lpv[i], log.r_lti[i], log.synth_time[i])
        rows.append(["%d" % log.k[i]] + [FormatFloat(v) for v in values])
    return rows


def WriteRows(path, header, rows):
    """Writes a header and rows of strings to path."""
    with open(path, "w", newline="", encoding="utf-8") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def WriteSimLog(log, path):
    """Writes a SimLog to a CSV file.

    Args:
        log: A vehicle_case.SimLog.
        path: Output file path.

    Raises:
        errors.FdiError: If the file can not be written.
    """
    try:
        WriteRows(path, HEADER, SimLogRows(log))
    except (IOError, OSError) as e:
        raise errors.FdiError("Failed to write %s: %s" % (path, e))
    logger.info("Wrote %d rows to %s", len(log), path)


def ReadRows(path):
    """Reads a CSV file into (header, rows) of strings.

    Raises:
        errors.FdiError: If the file is missing or empty.
    """
    try:
        with open(path, newline="", encoding="utf-8") as src:
            lines = list(csv.reader(src))
    except (IOError, OSError) as e:
        raise errors.FdiError("Failed to read %s: %s" % (path, e))
    if not lines:
        raise errors.FdiError("%s has no header." % path)
    return lines[0], lines[1:]


def ReadColumns(path):
    """Reads a simulation CSV into a dict of float arrays keyed by column.

    Raises:
        errors.FdiError: If the header does not match HEADER.
    """
    header, rows = ReadRows(path)
    if tuple(header) != HEADER:
        raise errors.FdiError("Unexpected CSV header in %s: %s" %
                              (path, ",".join(header)))
    table = np.array(rows, dtype=float).reshape(len(rows), len(HEADER))
    return {name: table[:, i] for i, name in enumerate(HEADER)}

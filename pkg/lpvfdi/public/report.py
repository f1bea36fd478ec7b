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

"""Outcome record of one fdi command.

Each handler in filter_driver fills a Report: an overall status, a list of
error strings and a free-form data dict. The CLI logs the report and, with
--report_file, writes it as json. A "check" run on a window sequence with
one rank-deficient window dumps as:

  {
    "command": "check",
    "data": {
      "windows": [
        {"index": 0, "v_x": [14.2, 14.2, 14.2, 14.2],
         "rank_h": 27, "rank_hf": 27, "isolable": false}
      ]
    },
    "errors": ["1 of 100 windows are not isolable."],
    "status": "FAIL"
  }

Timing results of "bench" land under data as mean_step_s, median_step_s
and p99_step_s.
"""

import json
import logging
import os

logger = logging.getLogger(__name__)


class Status(object):
    """Outcome levels, ranked from least to most severe."""

    UNKNOWN = "UNKNOWN"
    SUCCESS = "SUCCESS"
    FAIL = "FAIL"
    ERROR = "ERROR"

    _RANKED = (UNKNOWN, SUCCESS, FAIL, ERROR)

    @classmethod
    def Rank(cls, status):
        """Position of status in the severity ranking.

        Raises:
            ValueError: status is not one of the levels above.
        """
        try:
            return cls._RANKED.index(status)
        except ValueError:
            raise ValueError("Unknown report status: %r" % (status,))

    @classmethod
    def IsMoreSevere(cls, candidate, reference):
        """True if candidate ranks strictly above reference."""
        return cls.Rank(candidate) > cls.Rank(reference)


class Report(object):
    """Status, errors and data gathered while one command runs.

    The status only escalates: once a window fails, a later success does
    not hide it.
    """

    def __init__(self, command):
        self.command = command
        self.status = Status.UNKNOWN
        self.errors = []
        self.data = {}

    def AddData(self, key, value):
        """Appends value to the list kept under key."""
        self.data.setdefault(key, []).append(value)

    def SetData(self, key, value):
        """Stores value under key, overwriting."""
        self.data[key] = value

    def AddError(self, error):
        self.errors.append(error)

    def SetStatus(self, status):
        """Escalates the status.

        Args:
            status: One of the Status levels.

        Raises:
            ValueError: status is not a Status level.
        """
        if not Status.IsMoreSevere(status, self.status):
            logger.debug("%s: keeping status %s over %s", self.command,
                         self.status, status)
            return
        self.status = status

    def AsDict(self):
        return {"command": self.command, "status": self.status,
                "errors": self.errors, "data": self.data}

    def Dump(self, report_file=None):
        """Logs the report and writes it to report_file when one is given.

        A write failure is logged, not raised, so the command's exit code
        still reflects its status.
        """
        content = self.AsDict()
        logger.info("%s report: %s", self.command,
                    json.dumps(content, indent=2))
        if not report_file:
            return
        try:
            with open(report_file, "w", encoding="utf-8") as out:
                json.dump(content, out, indent=2)
        except OSError as e:
            logger.error("Cannot write report %s: %s", report_file, e)
            return
        logger.info("Wrote report to %s", os.path.abspath(report_file))

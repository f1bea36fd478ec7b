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

"""Tests for lpvfdi.public.fdi_main."""

import json
import os
import sys
import unittest

import mock

from lpvfdi.internal.lib import fdi_test_lib
from lpvfdi.internal.lib import utils
from lpvfdi.public import fdi_main
from lpvfdi.public import filter_driver
from lpvfdi.public import report

_SHORT = """
scenario { n_samples: 30 fault_start_sample: 10 record_timing: false }
filter { check_windows: 3 }
bench { repetitions: 1 }
"""


class FdiMainTest(fdi_test_lib.BaseFdiTest):
    """Test the command line entry."""

    def setUp(self):
        """Set up test."""
        super(FdiMainTest, self).setUp()
        self.Patch(fdi_main, "_SetupLogging")
        self.stdout = self.Patch(sys, "stdout")
        self.stderr = self.Patch(sys, "stderr")
        self._temp = utils.TempDir()
        self.tmp = self._temp.__enter__()

    def tearDown(self):
        """Tear down test."""
        self._temp.Cleanup()
        super(FdiMainTest, self).tearDown()

    def _WriteConfig(self, text, name="fdi.config"):
        path = os.path.join(self.tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def _ReadReport(self, path):
        with open(path) as f:
            return json.load(f)

    def testParseArgs(self):
        """Test subcommands and their options."""
        args = fdi_main._ParseArgs(
            ["simulate", "--seed", "3", "--out", "x.csv", "--cache_windows"])
        self.assertEqual(args.which, fdi_main.CMD_SIMULATE)
        self.assertEqual(args.seed, 3)
        self.assertEqual(args.out, "x.csv")
        self.assertTrue(args.cache_windows)
        self.assertIsNone(args.config_file)
        args = fdi_main._ParseArgs(["synth"])
        self.assertEqual(args.velocity, 19.0)
        args = fdi_main._ParseArgs(["bench", "--repetitions", "4"])
        self.assertEqual(args.repetitions, 4)

    def testUnknownCommand(self):
        """Test argparse rejects an unknown command."""
        with self.assertRaises(SystemExit) as cm:
            fdi_main._ParseArgs(["train"])
        self.assertEqual(cm.exception.code, 2)

    def testCheckSuccess(self):
        """Test check prints the windows and returns 0."""
        config_path = self._WriteConfig(_SHORT)
        report_path = os.path.join(self.tmp, "report.json")
        code = fdi_main.main(["check", "--config", config_path,
                              "--report_file", report_path])
        self.assertEqual(code, 0)
        result = self._ReadReport(report_path)
        self.assertEqual(result["status"], report.Status.SUCCESS)
        self.assertEqual(len(result["data"]["windows"]), 3)
        lines = "".join(c[0][0] for c in self.stdout.write.call_args_list)
        self.assertEqual(lines.count("isolable=True"), 3)

    def testCheckNotIsolable(self):
        """Test a zero fault channel exits with 1."""
        config_path = self._WriteConfig(
            _SHORT + "model { fault_channel_scale: 0 }")
        self.assertEqual(fdi_main.main(["check", "--config", config_path]), 1)
        self.assertTrue(self.stderr.write.called)

    def testMalformedConfig(self):
        """Test a config that does not parse exits with 2."""
        config_path = self._WriteConfig("scenario { n_samples: }")
        report_path = os.path.join(self.tmp, "report.json")
        code = fdi_main.main(["check", "--config", config_path,
                              "--report_file", report_path])
        self.assertEqual(code, 2)
        result = self._ReadReport(report_path)
        self.assertEqual(result["status"], report.Status.ERROR)
        self.assertTrue(result["errors"][0].startswith(config_path + ":1:"))

    def testInvalidConfigValue(self):
        """Test a config failing verification exits with 2."""
        config_path = self._WriteConfig(_SHORT + "filter { poles: [0.5] }")
        self.assertEqual(fdi_main.main(["check", "--config", config_path]), 2)

    def testNegativeSeed(self):
        """Test a negative seed exits with 2."""
        self.assertEqual(fdi_main.main(["check", "--seed", "-1"]), 2)

    def testConfigAndManifest(self):
        """Test --config and --manifest are exclusive."""
        self.assertEqual(
            fdi_main.main(["simulate", "--config", "a", "--manifest", "b"]), 2)

    def testMissingOutputDirectory(self):
        """Test simulate rejects an output in a missing directory."""
        out = os.path.join(self.tmp, "missing", "sim.csv")
        self.assertEqual(fdi_main.main(["simulate", "--out", out]), 2)

    def testBadThreadCount(self):
        """Test bench rejects a malformed FDI_THREADS."""
        self.Patch(os, "environ", {"FDI_THREADS": "zero"})
        self.assertEqual(fdi_main.main(["bench"]), 2)

    def testSynthOutsideBox(self):
        """Test synth at a velocity outside the scheduling box exits with 1."""
        self.assertEqual(fdi_main.main(["synth", "--velocity", "70"]), 1)

    def testSimulateAndReplay(self):
        """Test simulate then replay from the manifest."""
        config_path = self._WriteConfig(_SHORT)
        out = os.path.join(self.tmp, "sim.csv")
        self.assertEqual(
            fdi_main.main(["simulate", "--config", config_path, "--seed", "5",
                           "--out", out]), 0)
        self.assertTrue(os.path.exists(out))
        manifest = filter_driver.ManifestPath(out)
        self.assertTrue(os.path.exists(manifest))

        again = os.path.join(self.tmp, "again.csv")
        report_path = os.path.join(self.tmp, "report.json")
        self.assertEqual(
            fdi_main.main(["simulate", "--manifest", manifest, "--out", again,
                           "--report_file", report_path]), 0)
        result = self._ReadReport(report_path)
        self.assertTrue(result["data"]["reproduced"])
        self.assertEqual(utils.Sha256File(out), utils.Sha256File(again))

    def testSimulateEmpty(self):
        """Test simulate with no samples writes the header only."""
        config_path = self._WriteConfig("scenario { n_samples: 0 }")
        out = os.path.join(self.tmp, "sim.csv")
        self.assertEqual(
            fdi_main.main(["simulate", "--config", config_path, "--out", out]),
            0)
        with open(out) as f:
            self.assertEqual(len(f.read().splitlines()), 1)

    @mock.patch.object(filter_driver, "Bench")
    def testBenchDispatch(self, mock_bench):
        """Test bench passes the overridden config to the driver."""
        r = report.Report(command="bench")
        r.SetStatus(report.Status.SUCCESS)
        mock_bench.return_value = r
        config_path = self._WriteConfig(_SHORT)
        self.assertEqual(
            fdi_main.main(["bench", "--config", config_path,
                           "--repetitions", "3", "--cache_windows"]), 0)
        cfg = mock_bench.call_args[0][0]
        self.assertEqual(cfg.repetitions, 3)
        self.assertTrue(cfg.cache_windows)


if __name__ == "__main__":
    unittest.main()

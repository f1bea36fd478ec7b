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

"""Tests for lpvfdi.internal.proto.config_schema."""

import unittest

import mock
from google.protobuf import text_format

from lpvfdi.internal import constants
from lpvfdi.internal.lib import fdi_test_lib
from lpvfdi.internal.proto import config_schema


class ConfigSchemaTest(fdi_test_lib.BaseFdiTest):

    def testDefaultsFollowConstants(self):
        """Test an empty config carries the lane keeping defaults."""
        cfg = config_schema.FdiConfig()
        self.assertEqual(cfg.model.c_f, constants.CORNERING_STIFFNESS_FRONT)
        self.assertEqual(cfg.scenario.fault_magnitude,
                         constants.FAULT_MAGNITUDE)
        self.assertEqual(cfg.scenario.velocity_frequency,
                         constants.VELOCITY_FREQUENCY)
        self.assertEqual(cfg.filter.gamma, constants.GAMMA)
        self.assertTrue(cfg.scenario.record_timing)
        self.assertFalse(cfg.noise.enabled)
        self.assertEqual(len(cfg.filter.poles), 0)

    def testEnumNames(self):
        """Test enum values resolve to their names."""
        cfg = config_schema.FdiConfig()
        text_format.Merge("model { matrix_signs: AS_PRINTED }\n"
                          "filter { solver: CHOLESKY }", cfg)
        self.assertEqual(config_schema.EnumName(cfg.model, "matrix_signs"),
                         constants.MATRIX_SIGNS_AS_PRINTED)
        self.assertEqual(config_schema.EnumName(cfg.filter, "solver"),
                         constants.SOLVER_CHOLESKY)
        self.assertEqual(
            config_schema.EnumName(cfg.scenario, "disturbance_profile"),
            constants.DISTURBANCE_SINUSOID)

    def testFillDefaultsPrintsEveryField(self):
        """Test filled defaults survive a text round trip."""
        cfg = config_schema.FillDefaults(config_schema.FdiConfig())
        text = text_format.MessageToString(cfg)
        self.assertIn("c_f: 150000", text)
        self.assertIn("record_timing: true", text)
        parsed = config_schema.FdiConfig()
        text_format.Merge(text, parsed)
        self.assertEqual(parsed, cfg)
        self.assertTrue(parsed.scenario.HasField("rng_seed"))

    def testIsRepeated(self):
        """Test repeated fields are found on the installed descriptors."""
        fields = config_schema.FdiConfig().filter.DESCRIPTOR.fields_by_name
        self.assertTrue(config_schema.IsRepeated(fields["poles"]))
        self.assertFalse(config_schema.IsRepeated(fields["degree"]))

    def testIsRepeatedWithoutLabel(self):
        """Test descriptors that only expose is_repeated."""
        field = mock.Mock(spec=["is_repeated"], is_repeated=True)
        self.assertTrue(config_schema.IsRepeated(field))
        field = mock.Mock(spec=["is_repeated"], is_repeated=False)
        self.assertFalse(config_schema.IsRepeated(field))

    def testIsRepeatedWithLabelOnly(self):
        """Test descriptors that only expose label."""
        field = mock.Mock(spec=["label", "LABEL_REPEATED"], label=3,
                          LABEL_REPEATED=3)
        self.assertTrue(config_schema.IsRepeated(field))
        field.label = 1
        self.assertFalse(config_schema.IsRepeated(field))

    def testManifestEmbedsConfig(self):
        """Test the manifest message nests a config."""
        manifest = config_schema.RunManifest(command="simulate", seed=4)
        manifest.config.scenario.n_samples = 7
        parsed = config_schema.RunManifest()
        text_format.Merge(text_format.MessageToString(manifest), parsed)
        self.assertEqual(parsed.config.scenario.n_samples, 7)
        self.assertEqual(parsed.seed, 4)


if __name__ == "__main__":
    unittest.main()

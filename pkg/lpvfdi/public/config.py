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

"""Config manager.

Config files and run manifests are text-format protocol buffers whose
schema lives in lpvfdi/internal/proto/config_schema.py.

   config file            manifest file
        |                       |
        v                       v
    FdiConfig              RunManifest
  (proto message)        (proto message)
        |                       |
        |->     FdiConfig     <-|   (manifest.config)
                 (python)
                    |
                    v
   BicycleParams, ScenarioConfig, SynthesisOptions

At runtime, FdiConfigManager performs the following steps.
- Load the config file (or the config echoed in a manifest) into a
  FdiConfig message instance.
- Create the python FdiConfig, which verifies the values.
- Commands override fields from the command line and build the library
  inputs from it.
"""

import logging
import os

from google.protobuf import text_format

from lpvfdi.internal import constants
from lpvfdi.internal.lib import residual_runtime
from lpvfdi.internal.lib import synthesis
from lpvfdi.internal.lib import vehicle_case
from lpvfdi.internal.proto import config_schema
from lpvfdi.public import errors

_CONFIG_DATA_PATH = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "data")

logger = logging.getLogger(__name__)


class FdiConfig(object):
    """A class that holds all configurations for fdi."""

    def __init__(self, cfg_proto, path=None):
        """Initialize.

        Args:
            cfg_proto: A config_schema.FdiConfig message.
            path: Path of the file the message was read from.
        """
        self.proto = cfg_proto
        self.path = path
        self.poles = (tuple(cfg_proto.filter.poles) or
                      constants.DEFAULT_POLES)
        self.seed = cfg_proto.scenario.rng_seed
        self.repetitions = cfg_proto.bench.repetitions
        self.cache_windows = cfg_proto.filter.cache_windows

        # Verify validity of configurations.
        self.Verify()

    def OverrideWithArgs(self, parsed_args):
        """Override configuration values with args passed in from cmd line.

        Args:
            parsed_args: Args parsed from command line.
        """
        if getattr(parsed_args, "seed", None) is not None:
            self.seed = parsed_args.seed
        if getattr(parsed_args, "repetitions", None) is not None:
            self.repetitions = parsed_args.repetitions
        if getattr(parsed_args, "cache_windows", False):
            self.cache_windows = True
        self.Verify()

    def Verify(self):
        """Verify configuration fields.

        Raises:
            errors.ConfigError: If any value is out of range.
        """
        if self.seed < 0:
            raise errors.ConfigError("rng_seed must be >= 0, got %d" %
                                     self.seed)
        if self.repetitions < 1:
            raise errors.ConfigError("repetitions must be >= 1, got %d" %
                                     self.repetitions)
        filter_cfg = self.proto.filter
        if len(self.poles) < filter_cfg.degree:
            raise errors.ConfigError(
                "%d poles give d_a = %d, which is less than degree %d." %
                (len(self.poles), len(self.poles), filter_cfg.degree))
        if filter_cfg.check_windows < 1 or not (
                filter_cfg.check_velocity_min <=
                filter_cfg.check_velocity_max):
            raise errors.ConfigError(
                "Invalid check range: %d windows in [%r, %r]." %
                (filter_cfg.check_windows, filter_cfg.check_velocity_min,
                 filter_cfg.check_velocity_max))
        try:
            residual_runtime.MakeDenominator(self.poles)
            self.BicycleParams()
            self.ScenarioConfig()
            self.SynthesisOptions()
        except errors.ConfigError:
            raise
        except errors.FdiError as e:
            raise errors.ConfigError("Invalid configuration: %s" % e)

    def BicycleParams(self):
        """Returns the vehicle_case.BicycleParams of the model section."""
        model = self.proto.model
        return vehicle_case.BicycleParams(
            c_f=model.c_f, c_r=model.c_r, l_f=model.l_f, l_r=model.l_r,
            mass=model.mass, inertia=model.inertia, gravity=model.gravity,
            h=model.sampling_time,
            matrix_signs=config_schema.EnumName(model, "matrix_signs"),
            fault_channel_scale=model.fault_channel_scale,
            velocity_min=model.velocity_min, velocity_max=model.velocity_max)

    def ScenarioConfig(self):
        """Returns the vehicle_case.ScenarioConfig of the scenario."""
        scenario = self.proto.scenario
        noise = self.proto.noise
        controller = self.proto.controller
        return vehicle_case.ScenarioConfig(
            n_samples=scenario.n_samples,
            velocity_offset=scenario.velocity_offset,
            velocity_amplitude=scenario.velocity_amplitude,
            velocity_frequency=scenario.velocity_frequency,
            fault_magnitude=scenario.fault_magnitude,
            fault_start_sample=scenario.fault_start_sample,
            fault_end_sample=scenario.fault_end_sample,
            disturbance_profile=config_schema.EnumName(
                scenario, "disturbance_profile"),
            bank_amplitude=scenario.bank_amplitude,
            bank_frequency=scenario.bank_frequency,
            curvature_amplitude=scenario.curvature_amplitude,
            curvature_frequency=scenario.curvature_frequency,
            noise_enabled=noise.enabled,
            noise_std=(noise.yaw_rate_std, noise.lateral_std,
                       noise.heading_std),
            rng_seed=self.seed,
            poles=self.poles,
            filter_degree=self.proto.filter.degree,
            lti_baseline_velocity=scenario.lti_baseline_velocity,
            cache_windows=self.cache_windows,
            record_timing=scenario.record_timing,
            controller=vehicle_case.ControllerGains(
                kp=controller.kp, kd=controller.kd, kpsi=controller.kpsi,
                saturation=controller.saturation))

    def SynthesisOptions(self):
        """Returns the synthesis.SynthesisOptions of the filter section."""
        filter_cfg = self.proto.filter
        return synthesis.SynthesisOptions(
            gamma=filter_cfg.gamma,
            rank_tol_factor=filter_cfg.rank_tol_factor or None,
            target_fault=filter_cfg.target_fault,
            solver=config_schema.EnumName(filter_cfg, "solver"))

    def Resolved(self):
        """Returns a config message with every value spelled out.

        Command line overrides are folded in, so feeding the result back
        reproduces this configuration.
        """
        resolved = config_schema.FdiConfig()
        resolved.CopyFrom(self.proto)
        config_schema.FillDefaults(resolved)
        del resolved.filter.poles[:]
        resolved.filter.poles.extend(self.poles)
        resolved.scenario.rng_seed = self.seed
        resolved.bench.repetitions = self.repetitions
        resolved.filter.cache_windows = self.cache_windows
        return resolved


class FdiConfigManager(object):
    """A class that loads configurations."""

    DEFAULT_CONFIG_PATH = os.path.join(_CONFIG_DATA_PATH,
                                       "lane_keeping.config")

    def __init__(self, config_path=None):
        """Initialize.

        Args:
            config_path: path to the config, the lane keeping config if None.
        """
        self._config_path = config_path or self.DEFAULT_CONFIG_PATH

    def Load(self):
        """Load the configuration.

        Returns:
            A FdiConfig.

        Raises:
            errors.ConfigError: If the file can not be read or parsed.
        """
        cfg_proto = self._ReadFile(self._config_path,
                                   config_schema.FdiConfig)
        logger.debug("Loaded config %s", self._config_path)
        return FdiConfig(cfg_proto, self._config_path)

    def LoadFromManifest(self):
        """Load the configuration echoed by a run manifest.

        Returns:
            A tuple (FdiConfig, RunManifest message).
        """
        manifest = self._ReadFile(self._config_path,
                                  config_schema.RunManifest)
        if not manifest.HasField("config"):
            raise errors.ConfigError("Manifest %s holds no config." %
                                     self._config_path)
        logger.debug("Loaded manifest %s of command %s", self._config_path,
                     manifest.command)
        return FdiConfig(manifest.config, self._config_path), manifest

    def _ReadFile(self, path, message_type):
        try:
            with open(path, "r", encoding="utf-8") as config_file:
                return self.LoadConfigFromProtocolBuffer(
                    config_file, message_type, path)
        except (IOError, OSError) as e:
            raise errors.ConfigError("Could not load config file: %s" %
                                     str(e))

    @staticmethod
    def LoadConfigFromProtocolBuffer(config_file, message_type,
                                     path="<config>"):
        """Load config from a text-based protocol buffer file.

        Args:
            config_file: A python File object.
            message_type: A proto message class.
            path: Name used in diagnostics.

        Returns:
            An instance of type "message_type" populated with data
            from the file.

        Raises:
            errors.ConfigError: On a parse error, with a
                <path>:<line>:<column>: prefix when the position is known.
        """
        try:
            config = message_type()
            text_format.Merge(config_file.read(), config)
            return config
        except text_format.ParseError as e:
            if e.GetLine() is not None:
                detail = str(e).split(" : ", 1)[-1]
                raise errors.ConfigError("%s:%d:%d: %s" %
                                         (path, e.GetLine(),
                                          e.GetColumn() or 0, detail))
            raise errors.ConfigError("%s: could not parse config: %s" %
                                     (path, str(e)))

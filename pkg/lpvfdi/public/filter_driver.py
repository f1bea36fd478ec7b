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

"""Public filter driver APIs.

This module provides the fdi commands as functions that can be called
as a Python library. Every function takes a config.FdiConfig and returns
a report.Report.
"""

import concurrent.futures
import dataclasses
import datetime
import logging
import time

import dateutil.tz
import numpy as np
from google.protobuf import text_format

from lpvfdi.internal import constants
from lpvfdi.internal.lib import residual_runtime
from lpvfdi.internal.lib import sim_csv
from lpvfdi.internal.lib import stacking
from lpvfdi.internal.lib import synthesis
from lpvfdi.internal.lib import utils
from lpvfdi.internal.lib import vehicle_case
from lpvfdi.internal.proto import config_schema
from lpvfdi.public import errors
from lpvfdi.public import report

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest"


def _CheckWindows(cfg, d_a, d_n):
    """Draws the parameter windows of the isolability check.

    Args:
        cfg: A FdiConfig.
        d_a: Filter delay.
        d_n: Filter degree.

    Returns:
        A list of stacking.ParameterWindow.
    """
    filter_cfg = cfg.proto.filter
    rng = np.random.default_rng(cfg.seed)
    samples = rng.uniform(filter_cfg.check_velocity_min,
                          filter_cfg.check_velocity_max,
                          (filter_cfg.check_windows, d_n + 1))
    return [stacking.ParameterWindow.Create(row, d_a, d_n)
            for row in samples]


def CheckIsolability(cfg):
    """Checks isolability of the bicycle model over sampled windows.

    Args:
        cfg: A FdiConfig.

    Returns:
        A Report instance; status FAIL if any window is not isolable.
    """
    r = report.Report(command="check")
    try:
        model = vehicle_case.BicycleModel(cfg.BicycleParams())
        opt = cfg.SynthesisOptions()
        failed = 0
        windows = _CheckWindows(cfg, len(cfg.poles), cfg.proto.filter.degree)
        for index, win in enumerate(windows):
            result = synthesis.IsolabilityCheck(
                stacking.BuildStacked(model, win), opt)
            r.AddData("windows", {
                "index": index,
                "v_x": [float(v) for v in win.samples[:, 0]],
                "rank_h": int(result.rank_h),
                "rank_hf": int(result.rank_hf),
                "isolable": bool(result.isolable)})
            if not result.isolable:
                failed += 1
        logger.info("%d of %d windows isolable.", len(windows) - failed,
                    len(windows))
        if failed:
            r.AddError("%d of %d windows are not isolable." %
                       (failed, len(windows)))
            r.SetStatus(report.Status.FAIL)
        else:
            r.SetStatus(report.Status.SUCCESS)
    except errors.FdiError as e:
        r.AddError(str(e))
        r.SetStatus(report.Status.FAIL)
    return r


def SynthesizeAt(cfg, velocity):
    """Synthesizes and dumps the normalized filter of a frozen window.

    Args:
        cfg: A FdiConfig.
        velocity: Scheduling velocity of every window sample.

    Returns:
        A Report instance holding N_bar, E and the diagnostics.
    """
    r = report.Report(command="synth")
    try:
        model = vehicle_case.BicycleModel(cfg.BicycleParams())
        a = residual_runtime.MakeDenominator(cfg.poles)
        win = stacking.ParameterWindow.Constant(velocity, a.d_a,
                                                cfg.proto.filter.degree)
        filt = residual_runtime.SynthesizeWindow(model, win, a,
                                                 cfg.SynthesisOptions())
        r.SetData("velocity", float(velocity))
        r.SetData("denominator", [float(c) for c in a.coeffs])
        r.SetData("j_star", int(filt.j_star))
        r.SetData("exactness", filt.exactness)
        r.SetData("decoupling", float(filt.decoupling))
        r.SetData("scale", float(filt.scale))
        r.SetData("normalized_gain", [float(g) for g in filt.normalized_gain])
        r.SetData("N_bar", [float(v) for v in filt.N_bar])
        r.SetData("E", [float(v) for v in filt.E])
        r.SetStatus(report.Status.SUCCESS)
    except errors.FdiError as e:
        r.AddError(str(e))
        r.SetStatus(report.Status.FAIL)
    return r


def ManifestPath(out_path):
    """Returns the manifest path written next to an output file."""
    return out_path + MANIFEST_SUFFIX


def WriteManifest(path, command, cfg, output_path, digest, rows, seconds):
    """Writes a RunManifest in protobuf text format.

    Args:
        path: Manifest file path.
        command: Name of the command.
        cfg: The FdiConfig that produced the output.
        output_path: Path of the output file.
        digest: Hex sha256 of the output file.
        rows: Number of data rows written.
        seconds: Wall clock time of the command.

    Returns:
        The RunManifest message.
    """
    manifest = config_schema.RunManifest(
        command=command,
        config_path=cfg.path or "",
        code_version=constants.VERSION,
        seed=cfg.seed,
        created_at=datetime.datetime.now(dateutil.tz.tzutc()).isoformat(),
        wall_clock_seconds=seconds,
        output_path=output_path,
        output_sha256=digest,
        rows=rows)
    manifest.config.CopyFrom(cfg.Resolved())
    with open(path, "w", encoding="utf-8") as out:
        out.write(text_format.MessageToString(manifest))
    logger.info("Manifest written to %s", path)
    return manifest


def Simulate(cfg, out_path, expected_digest=None):
    """Runs the lane keeping scenario and writes the CSV and its manifest.

    Args:
        cfg: A FdiConfig.
        out_path: Path of the CSV file.
        expected_digest: sha256 a reproduced run must match, or None.

    Returns:
        A Report instance.
    """
    r = report.Report(command="simulate")
    try:
        start = time.time()
        scenario = cfg.ScenarioConfig()
        log = vehicle_case.Simulate(scenario, cfg.BicycleParams(),
                                    cfg.SynthesisOptions())
        sim_csv.WriteSimLog(log, out_path)
        digest = utils.Sha256File(out_path)
        manifest_path = ManifestPath(out_path)
        WriteManifest(manifest_path, "simulate", cfg, out_path, digest,
                      len(log), time.time() - start)
        r.SetData("csv", out_path)
        r.SetData("manifest", manifest_path)
        r.SetData("sha256", digest)
        r.SetData("rows", len(log))
        r.SetData("max_gain_error", float(log.max_gain_error))
        r.SetData("regularized_windows", int(log.regularized_windows))
        if len(log):
            r.SetData("final_r_lpv", float(log.r_lpv[-1]))
            r.SetData("final_r_lti", float(log.r_lti[-1]))
            r.SetData("final_f_true", float(log.f_true[-1]))
            r.SetData("mean_step_s", float(log.synth_time.mean()))
        r.SetStatus(report.Status.SUCCESS)
        if expected_digest is not None:
            reproduced = expected_digest == digest
            r.SetData("reproduced", reproduced)
            if not reproduced:
                if scenario.record_timing:
                    logger.warning("Timing column is recorded; set "
                                   "scenario.record_timing to false for "
                                   "reproducible digests.")
                r.AddError("Digest %s differs from the manifest's %s." %
                           (digest, expected_digest))
                r.SetStatus(report.Status.FAIL)
    except errors.FdiError as e:
        r.AddError(str(e))
        r.SetStatus(report.Status.FAIL)
    return r


def _StepTimes(scenario, params, opt):
    log = vehicle_case.Simulate(scenario, params, opt)
    return log.synth_time[len(scenario.poles):]


def Bench(cfg, threads=None):
    """Times the per-step synthesis and evaluation of the LPV filter.

    Repetitions run on a thread pool of FDI_THREADS workers, each with its
    own filter state.

    Args:
        cfg: A FdiConfig.
        threads: Worker count, read from FDI_THREADS when None.

    Returns:
        A Report instance; status FAIL if the mean step time is not below
        the sampling time.
    """
    r = report.Report(command="bench")
    try:
        scenario = dataclasses.replace(cfg.ScenarioConfig(),
                                       record_timing=True)
        params = cfg.BicycleParams()
        opt = cfg.SynthesisOptions()
        workers = min(threads or utils.GetThreadCount(), cfg.repetitions)
        logger.info("Running %d repetitions on %d threads.", cfg.repetitions,
                    workers)
        with concurrent.futures.ThreadPoolExecutor(
                max_workers=workers) as pool:
            runs = list(pool.map(lambda _: _StepTimes(scenario, params, opt),
                                 range(cfg.repetitions)))
        times = np.concatenate(runs)
        r.SetData("repetitions", cfg.repetitions)
        r.SetData("threads", workers)
        r.SetData("cache_windows", bool(scenario.cache_windows))
        r.SetData("steps", int(times.size))
        if not times.size:
            raise errors.BenchmarkError("Scenario has no timed steps.")
        mean = float(times.mean())
        r.SetData("mean_step_s", mean)
        r.SetData("median_step_s", float(np.median(times)))
        r.SetData("p99_step_s", float(np.percentile(times, 99)))
        if mean >= params.h:
            raise errors.BenchmarkError(
                "Mean step time %.3g s is not below the sampling time %g s." %
                (mean, params.h))
        r.SetStatus(report.Status.SUCCESS)
    except errors.FdiError as e:
        r.AddError(str(e))
        r.SetStatus(report.Status.FAIL)
    return r

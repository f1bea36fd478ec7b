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

r"""Fault estimation filter tool.

This CLI checks, synthesizes, simulates and benchmarks the LPV fault
estimation filter of the lane keeping case study.

- Configuration:
  The tool takes an optional text protobuf config, which looks like
     <Start of the file>
     scenario {
       n_samples: 500
       fault_start_sample: 150
       record_timing: false
     }
     noise { enabled: true }
     filter {
       poles: [0.98, 0.98, 0.98]
       degree: 3
     }
     <End of the file>
  Unset fields take their defaults; without --config the packaged
  lane_keeping.config is used.

- Example calls:
  - Check isolability over 100 sampled windows:
  $ fdi check --config /path/to/fdi.config

  - Simulate the scenario into a CSV and its manifest:
  $ fdi simulate --config /path/to/fdi.config --seed 3 --out /tmp/sim.csv

  - Reproduce a run from its manifest:
  $ fdi simulate --manifest /tmp/sim.csv.manifest --out /tmp/again.csv

  - Time the per-step synthesis on FDI_THREADS threads:
  $ FDI_THREADS=4 fdi bench --repetitions 10 --report_file /tmp/bench.json
"""
import argparse
import logging
import os
import sys

from lpvfdi.internal import constants
from lpvfdi.internal.lib import utils
from lpvfdi.public import config
from lpvfdi.public import errors
from lpvfdi.public import fdi_common
from lpvfdi.public import filter_driver
from lpvfdi.public import report

LOGGING_FMT = "%(asctime)s |%(levelname)s| %(module)s:%(lineno)s| %(message)s"
LOGGER_NAME = "lpvfdi"

# Commands
CMD_CHECK = "check"
CMD_SYNTH = "synth"
CMD_SIMULATE = "simulate"
CMD_BENCH = "bench"

DEFAULT_OUT_FILE = "fdi_simulation.csv"


def _ParseArgs(args):
    """Parse args.

    Args:
        args: Argument list passed from main.

    Returns:
        Parsed args.
    """
    usage = ",".join([CMD_CHECK, CMD_SYNTH, CMD_SIMULATE, CMD_BENCH])
    parser = argparse.ArgumentParser(
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        usage="%(prog)s {" + usage + "} ...")
    subparsers = parser.add_subparsers(dest="which")
    subparsers.required = True
    subparser_list = []

    # Command "check"
    check_parser = subparsers.add_parser(CMD_CHECK)
    check_parser.set_defaults(which=CMD_CHECK)
    subparser_list.append(check_parser)

    # Command "synth"
    synth_parser = subparsers.add_parser(CMD_SYNTH)
    synth_parser.set_defaults(which=CMD_SYNTH)
    synth_parser.add_argument(
        "--velocity",
        type=float,
        dest="velocity",
        default=constants.LTI_BASELINE_VELOCITY,
        help="Velocity of the frozen window, default to %g m/s." %
        constants.LTI_BASELINE_VELOCITY)
    subparser_list.append(synth_parser)

    # Command "simulate"
    simulate_parser = subparsers.add_parser(CMD_SIMULATE)
    simulate_parser.set_defaults(which=CMD_SIMULATE)
    simulate_parser.add_argument(
        "--out",
        type=str,
        dest="out",
        default=DEFAULT_OUT_FILE,
        help="Path of the CSV file; the manifest is written next to it.")
    subparser_list.append(simulate_parser)

    # Command "bench"
    bench_parser = subparsers.add_parser(CMD_BENCH)
    bench_parser.set_defaults(which=CMD_BENCH)
    bench_parser.add_argument(
        "--repetitions",
        type=int,
        dest="repetitions",
        default=None,
        help="Override bench.repetitions.")
    subparser_list.append(bench_parser)

    for p in (simulate_parser, bench_parser):
        p.add_argument(
            "--cache_windows",
            dest="cache_windows",
            action="store_true",
            default=False,
            help="Reuse numerators of windows that agree to 1e-6.")

    # Add common arguments.
    for p in subparser_list:
        fdi_common.AddCommonArguments(p)

    return parser.parse_args(args)


def _VerifyArgs(parsed_args):
    """Verify args.

    Args:
        parsed_args: Parsed args.

    Raises:
        errors.CommandArgError: If args are invalid.
    """
    if parsed_args.config_file and parsed_args.manifest_file:
        raise errors.CommandArgError(
            "--config and --manifest can not be used together.")
    if parsed_args.seed is not None and parsed_args.seed < 0:
        raise errors.CommandArgError("--seed must be >= 0.")
    if parsed_args.which == CMD_SIMULATE:
        out_dir = os.path.dirname(os.path.abspath(parsed_args.out))
        if not os.path.isdir(out_dir):
            raise errors.CommandArgError(
                "Output directory %s does not exist." % out_dir)
    if parsed_args.which == CMD_BENCH:
        if (parsed_args.repetitions is not None and
                parsed_args.repetitions < 1):
            raise errors.CommandArgError("--repetitions must be >= 1.")
        utils.GetThreadCount()


def _SetupLogging(log_file, verbose, very_verbose):
    """Setup logging.

    Args:
        log_file: path to log file.
        verbose: If True, log at DEBUG level, otherwise log at INFO level.
        very_verbose: If True, log at DEBUG level and turn on logging on
                      all libraries. Take take precedence over |verbose|.
    """
    if very_verbose:
        logger = logging.getLogger()
    else:
        logger = logging.getLogger(LOGGER_NAME)

    logging_level = logging.DEBUG if verbose or very_verbose else logging.INFO
    logger.setLevel(logging_level)

    if not log_file:
        handler = logging.StreamHandler()
    else:
        handler = logging.FileHandler(filename=log_file)
    log_formatter = logging.Formatter(LOGGING_FMT)
    handler.setFormatter(log_formatter)
    logger.addHandler(handler)


def _LoadConfig(parsed_args):
    """Loads the config named on the command line.

    Returns:
        A tuple (FdiConfig, RunManifest or None).
    """
    if parsed_args.manifest_file:
        return config.FdiConfigManager(
            parsed_args.manifest_file).LoadFromManifest()
    return config.FdiConfigManager(parsed_args.config_file).Load(), None


def _PrintWindows(r):
    for window in r.data.get("windows", []):
        sys.stdout.write(
            "window %3d v_x=[%s] rank_H=%d rank_HF=%d isolable=%s\n" %
            (window["index"], ", ".join("%.3f" % v for v in window["v_x"]),
             window["rank_h"], window["rank_hf"], window["isolable"]))


def main(argv):
    """Main entry.

    Args:
        argv: A list of system arguments.

    Returns:
        0 if success, 1 if the command failed, 2 on a config or argument
        error.
    """
    args = _ParseArgs(argv)
    _SetupLogging(args.log_file, args.verbose, args.very_verbose)
    try:
        _VerifyArgs(args)
        cfg, manifest = _LoadConfig(args)
        cfg.OverrideWithArgs(args)
    except (errors.ConfigError, errors.CommandArgError) as e:
        r = report.Report(command=args.which)
        r.AddError(str(e))
        r.SetStatus(report.Status.ERROR)
        r.Dump(args.report_file)
        sys.stderr.write("%s\n" % e)
        return 2

    if args.which == CMD_CHECK:
        r = filter_driver.CheckIsolability(cfg)
        _PrintWindows(r)
    elif args.which == CMD_SYNTH:
        r = filter_driver.SynthesizeAt(cfg, args.velocity)
    elif args.which == CMD_SIMULATE:
        r = filter_driver.Simulate(
            cfg, args.out, manifest.output_sha256 if manifest else None)
    elif args.which == CMD_BENCH:
        r = filter_driver.Bench(cfg)
    else:
        sys.stderr.write("Invalid command %s" % args.which)
        return 2

    r.Dump(args.report_file)
    if r.errors:
        msg = "\n".join(r.errors)
        sys.stderr.write("Encountered the following errors:\n%s\n" % msg)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

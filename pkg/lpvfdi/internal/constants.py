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

"""This module holds constants used by the filter library and fdi tool."""
import math

# Package.
VERSION = "0.1"

# Bicycle model.
CORNERING_STIFFNESS_FRONT = 1.5e5  # N/rad
CORNERING_STIFFNESS_REAR = 1.1e5  # N/rad
DISTANCE_FRONT_AXLE = 1.3  # m
DISTANCE_REAR_AXLE = 1.7  # m
VEHICLE_MASS = 1500.0  # kg
YAW_INERTIA = 2600.0  # kg m^2
GRAVITY = 9.81  # m/s^2
SAMPLING_TIME = 0.01  # s
FAULT_CHANNEL_SCALE = 1.0
VELOCITY_MIN = 1.0  # m/s
VELOCITY_MAX = 50.0  # m/s
MATRIX_SIGNS_STANDARD = "STANDARD"
MATRIX_SIGNS_AS_PRINTED = "AS_PRINTED"

# Scenario.
N_SAMPLES = 500
VELOCITY_OFFSET = 19.0
VELOCITY_AMPLITUDE = 5.0
VELOCITY_FREQUENCY = 0.1 * math.pi  # rad/s
FAULT_MAGNITUDE = 0.1 * math.pi / 180.0  # rad
FAULT_START_SAMPLE = 150
FAULT_END_SAMPLE = 0  # 0 keeps the fault active to the end.
BANK_AMPLITUDE = 0.03  # rad
BANK_FREQUENCY = 0.2 * math.pi
CURVATURE_AMPLITUDE = 0.002  # 1/m
CURVATURE_FREQUENCY = 0.05 * math.pi
DISTURBANCE_SINUSOID = "SINUSOID"
DISTURBANCE_WHITE_NOISE = "WHITE_NOISE"
DISTURBANCE_NONE = "NONE"
RNG_SEED = 1
LTI_BASELINE_VELOCITY = 19.0
DIVERGENCE_LIMIT = 1e6

# Sensor noise on (yaw rate, lateral offset, heading error).
YAW_RATE_NOISE_STD = 8e-4  # rad/s
LATERAL_NOISE_STD = 5e-2  # m
HEADING_NOISE_STD = 3e-3  # rad

# Filter.
GAMMA = 1e20
FILTER_DEGREE = 3
DEFAULT_POLES = (0.95, 0.95, 0.95)
TARGET_FAULT = 0
WINDOW_CACHE_QUANTUM = 1e-6
WINDOW_CACHE_SIZE = 4096
CHECK_WINDOWS = 100
CHECK_VELOCITY_MIN = 14.0
CHECK_VELOCITY_MAX = 24.0
SOLVER_SPECTRAL = "SPECTRAL"
SOLVER_CHOLESKY = "CHOLESKY"
EXACT = "exact"
REGULARIZED = "regularized"
EXACTNESS_TOLERANCE = 1e-9
TIE_TOLERANCE = 1e-12
STABILITY_MARGIN = 1e-9

# Lane keeping PD controller.
CONTROLLER_KP = 0.05
CONTROLLER_KD = 0.005
CONTROLLER_KPSI = 0.6
STEERING_SATURATION = 0.5  # rad

# Bench.
BENCH_REPETITIONS = 10

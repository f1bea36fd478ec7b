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

"""Protocol buffer schema of fdi config and run manifest files.

The messages are declared in proto2 syntax, package lpvfdi.config:

    message FdiConfig {
      optional ModelConfig model = 1;
      optional ScenarioConfig scenario = 2;
      optional NoiseConfig noise = 3;
      optional FilterConfig filter = 4;
      optional ControllerConfig controller = 5;
      optional BenchConfig bench = 6;
    }
    message RunManifest {
      optional string command = 1;
      optional string config_path = 2;
      optional FdiConfig config = 3;
      ...
    }

Field defaults are taken from lpvfdi.internal.constants, so an empty
config file describes the lane keeping scenario. The file descriptor is
assembled here and registered in a private descriptor pool; message
classes are obtained from the pool with message_factory.
"""

from google.protobuf import descriptor_pb2
from google.protobuf import descriptor_pool
from google.protobuf import message_factory

from lpvfdi.internal import constants

PACKAGE = "lpvfdi.config"
_FILE_NAME = "lpvfdi/config/fdi_config.proto"

_Field = descriptor_pb2.FieldDescriptorProto
_DOUBLE = _Field.TYPE_DOUBLE
_INT32 = _Field.TYPE_INT32
_UINT64 = _Field.TYPE_UINT64
_BOOL = _Field.TYPE_BOOL
_STRING = _Field.TYPE_STRING
_ENUM = _Field.TYPE_ENUM
_MESSAGE = _Field.TYPE_MESSAGE

# Enum name -> value names; the first value is the proto2 default.
_ENUMS = (
    ("MatrixSigns", (constants.MATRIX_SIGNS_STANDARD,
                     constants.MATRIX_SIGNS_AS_PRINTED)),
    ("DisturbanceProfile", (constants.DISTURBANCE_SINUSOID,
                            constants.DISTURBANCE_WHITE_NOISE,
                            constants.DISTURBANCE_NONE)),
    ("Solver", (constants.SOLVER_SPECTRAL, constants.SOLVER_CHOLESKY)),
)

# Message name -> (field name, type, default, type name or None).
# A default of None leaves the field without an explicit default.
_MESSAGES = (
    ("ModelConfig", (
        ("c_f", _DOUBLE, constants.CORNERING_STIFFNESS_FRONT, None),
        ("c_r", _DOUBLE, constants.CORNERING_STIFFNESS_REAR, None),
        ("l_f", _DOUBLE, constants.DISTANCE_FRONT_AXLE, None),
        ("l_r", _DOUBLE, constants.DISTANCE_REAR_AXLE, None),
        ("mass", _DOUBLE, constants.VEHICLE_MASS, None),
        ("inertia", _DOUBLE, constants.YAW_INERTIA, None),
        ("gravity", _DOUBLE, constants.GRAVITY, None),
        ("sampling_time", _DOUBLE, constants.SAMPLING_TIME, None),
        ("matrix_signs", _ENUM, constants.MATRIX_SIGNS_STANDARD,
         "MatrixSigns"),
        ("fault_channel_scale", _DOUBLE, constants.FAULT_CHANNEL_SCALE,
         None),
        ("velocity_min", _DOUBLE, constants.VELOCITY_MIN, None),
        ("velocity_max", _DOUBLE, constants.VELOCITY_MAX, None),
    )),
    ("ScenarioConfig", (
        ("n_samples", _INT32, constants.N_SAMPLES, None),
        ("velocity_offset", _DOUBLE, constants.VELOCITY_OFFSET, None),
        ("velocity_amplitude", _DOUBLE, constants.VELOCITY_AMPLITUDE, None),
        ("velocity_frequency", _DOUBLE, constants.VELOCITY_FREQUENCY, None),
        ("fault_magnitude", _DOUBLE, constants.FAULT_MAGNITUDE, None),
        ("fault_start_sample", _INT32, constants.FAULT_START_SAMPLE, None),
        ("fault_end_sample", _INT32, constants.FAULT_END_SAMPLE, None),
        ("disturbance_profile", _ENUM, constants.DISTURBANCE_SINUSOID,
         "DisturbanceProfile"),
        ("bank_amplitude", _DOUBLE, constants.BANK_AMPLITUDE, None),
        ("bank_frequency", _DOUBLE, constants.BANK_FREQUENCY, None),
        ("curvature_amplitude", _DOUBLE, constants.CURVATURE_AMPLITUDE,
         None),
        ("curvature_frequency", _DOUBLE, constants.CURVATURE_FREQUENCY,
         None),
        ("rng_seed", _UINT64, constants.RNG_SEED, None),
        ("lti_baseline_velocity", _DOUBLE, constants.LTI_BASELINE_VELOCITY,
         None),
        ("record_timing", _BOOL, True, None),
    )),
    ("NoiseConfig", (
        ("enabled", _BOOL, False, None),
        ("yaw_rate_std", _DOUBLE, constants.YAW_RATE_NOISE_STD, None),
        ("lateral_std", _DOUBLE, constants.LATERAL_NOISE_STD, None),
        ("heading_std", _DOUBLE, constants.HEADING_NOISE_STD, None),
    )),
    ("FilterConfig", (
        ("gamma", _DOUBLE, constants.GAMMA, None),
        ("rank_tol_factor", _DOUBLE, 0.0, None),
        ("target_fault", _INT32, constants.TARGET_FAULT, None),
        ("poles", _DOUBLE, None, None),
        ("degree", _INT32, constants.FILTER_DEGREE, None),
        ("cache_windows", _BOOL, False, None),
        ("solver", _ENUM, constants.SOLVER_SPECTRAL, "Solver"),
        ("check_windows", _INT32, constants.CHECK_WINDOWS, None),
        ("check_velocity_min", _DOUBLE, constants.CHECK_VELOCITY_MIN, None),
        ("check_velocity_max", _DOUBLE, constants.CHECK_VELOCITY_MAX, None),
    )),
    ("ControllerConfig", (
        ("kp", _DOUBLE, constants.CONTROLLER_KP, None),
        ("kd", _DOUBLE, constants.CONTROLLER_KD, None),
        ("kpsi", _DOUBLE, constants.CONTROLLER_KPSI, None),
        ("saturation", _DOUBLE, constants.STEERING_SATURATION, None),
    )),
    ("BenchConfig", (
        ("repetitions", _INT32, constants.BENCH_REPETITIONS, None),
    )),
    ("FdiConfig", (
        ("model", _MESSAGE, None, "ModelConfig"),
        ("scenario", _MESSAGE, None, "ScenarioConfig"),
        ("noise", _MESSAGE, None, "NoiseConfig"),
        ("filter", _MESSAGE, None, "FilterConfig"),
        ("controller", _MESSAGE, None, "ControllerConfig"),
        ("bench", _MESSAGE, None, "BenchConfig"),
    )),
    ("RunManifest", (
        ("command", _STRING, None, None),
        ("config_path", _STRING, None, None),
        ("config", _MESSAGE, None, "FdiConfig"),
        ("code_version", _STRING, None, None),
        ("seed", _UINT64, None, None),
        ("created_at", _STRING, None, None),
        ("wall_clock_seconds", _DOUBLE, None, None),
        ("output_path", _STRING, None, None),
        ("output_sha256", _STRING, None, None),
        ("rows", _INT32, None, None),
    )),
)

_REPEATED_FIELDS = frozenset([("FilterConfig", "poles")])


def _DefaultString(field_type, default):
    """Renders a default the way descriptor.proto stores it."""
    if field_type == _BOOL:
        return "true" if default else "false"
    if field_type == _DOUBLE:
        return repr(float(default))
    return str(default)


def BuildFileDescriptorProto():
    """Returns the FileDescriptorProto of the config schema."""
    file_proto = descriptor_pb2.FileDescriptorProto(
        name=_FILE_NAME, package=PACKAGE, syntax="proto2")
    for enum_name, values in _ENUMS:
        enum = file_proto.enum_type.add(name=enum_name)
        for number, value in enumerate(values):
            enum.value.add(name=value, number=number)
    for message_name, fields in _MESSAGES:
        message = file_proto.message_type.add(name=message_name)
        for number, (name, field_type, default, type_name) in enumerate(
                fields, 1):
            field = message.field.add(name=name, number=number,
                                      type=field_type)
            if (message_name, name) in _REPEATED_FIELDS:
                field.label = _Field.LABEL_REPEATED
            else:
                field.label = _Field.LABEL_OPTIONAL
            if type_name:
                field.type_name = ".%s.%s" % (PACKAGE, type_name)
            if default is not None:
                field.default_value = _DefaultString(field_type, default)
    return file_proto


_POOL = descriptor_pool.DescriptorPool()
_POOL.AddSerializedFile(BuildFileDescriptorProto().SerializeToString())


def _MessageClass(name):
    return message_factory.GetMessageClass(
        _POOL.FindMessageTypeByName("%s.%s" % (PACKAGE, name)))


ModelConfig = _MessageClass("ModelConfig")
ScenarioConfig = _MessageClass("ScenarioConfig")
NoiseConfig = _MessageClass("NoiseConfig")
FilterConfig = _MessageClass("FilterConfig")
ControllerConfig = _MessageClass("ControllerConfig")
BenchConfig = _MessageClass("BenchConfig")
FdiConfig = _MessageClass("FdiConfig")
RunManifest = _MessageClass("RunManifest")


def EnumName(message, field_name):
    """Returns the value name of an enum field of a message."""
    field = message.DESCRIPTOR.fields_by_name[field_name]
    return field.enum_type.values_by_number[getattr(message,
                                                    field_name)].name


def IsRepeated(field):
    """Whether a FieldDescriptor is repeated.

    upb descriptors of protobuf 7 dropped `label`; older releases lack
    `is_repeated`.
    """
    is_repeated = getattr(field, "is_repeated", None)
    if is_repeated is not None:
        return bool(is_repeated)
    return field.label == field.LABEL_REPEATED


def FillDefaults(message):
    """Sets every unset singular field to its default, recursively.

    The result prints every value with text_format, which makes a config
    echo independent of the defaults of the code reading it back.

    Args:
        message: A message of this schema, modified in place.

    Returns:
        The message.
    """
    for field in message.DESCRIPTOR.fields:
        if IsRepeated(field):
            continue
        if field.message_type is not None:
            child = getattr(message, field.name)
            child.SetInParent()
            FillDefaults(child)
        elif field.has_default_value:
            setattr(message, field.name, getattr(message, field.name))
    return message

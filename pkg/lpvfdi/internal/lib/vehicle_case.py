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

"""Lane keeping case study.

Linear bicycle lateral dynamics with state X = (v_y, yaw rate, lateral
offset y_e, heading error psi_e), scheduled by the longitudinal velocity
v_x. The steering input u and an additive steering offset fault f enter
through the same channel; road bank angle phi and curvature kappa act as
disturbances d = (sin(phi), kappa). The measured outputs are
(yaw rate, y_e, psi_e).

The plant is discretized exactly at every velocity, closed with a PD lane
keeping law, and monitored by two residual filters: the LPV filter that
re-synthesizes at every sample and an LTI baseline frozen at one velocity.
"""

import collections
import dataclasses
import functools
import logging
import time

import numpy as np
from scipy import linalg

from lpvfdi.internal import constants
from lpvfdi.internal.lib import lpv_model
from lpvfdi.internal.lib import residual_runtime
from lpvfdi.internal.lib import stacking
from lpvfdi.public import errors

logger = logging.getLogger(__name__)

N_STATES = 4
N_OUTPUTS = 3
N_DISTURBANCES = 2
_DISCRETIZATION_CACHE_SIZE = 8192

ContinuousModel = collections.namedtuple("ContinuousModel",
                                         ["A", "B_u", "B_f", "B_d", "C"])
DiscreteModel = collections.namedtuple("DiscreteModel",
                                       ["A", "B_u", "B_f", "B_d"])


@dataclasses.dataclass(frozen=True)
class BicycleParams(object):
    """Vehicle parameters and model options.

    Attributes:
        c_f: Front cornering stiffness, N/rad.
        c_r: Rear cornering stiffness, N/rad.
        l_f: Distance from the front axle to the center of gravity, m.
        l_r: Distance from the rear axle to the center of gravity, m.
        mass: Vehicle mass, kg.
        inertia: Yaw moment of inertia, kg m^2.
        gravity: Gravitational acceleration, m/s^2.
        h: Sampling time, s.
        matrix_signs: MATRIX_SIGNS_STANDARD for the stable textbook signs,
                      MATRIX_SIGNS_AS_PRINTED for the literal variant.
        fault_channel_scale: Multiplier of the fault input matrix.
        velocity_min: Lower scheduling bound, m/s.
        velocity_max: Upper scheduling bound, m/s.
    """
    c_f: float = constants.CORNERING_STIFFNESS_FRONT
    c_r: float = constants.CORNERING_STIFFNESS_REAR
    l_f: float = constants.DISTANCE_FRONT_AXLE
    l_r: float = constants.DISTANCE_REAR_AXLE
    mass: float = constants.VEHICLE_MASS
    inertia: float = constants.YAW_INERTIA
    gravity: float = constants.GRAVITY
    h: float = constants.SAMPLING_TIME
    matrix_signs: str = constants.MATRIX_SIGNS_STANDARD
    fault_channel_scale: float = constants.FAULT_CHANNEL_SCALE
    velocity_min: float = constants.VELOCITY_MIN
    velocity_max: float = constants.VELOCITY_MAX

    def __post_init__(self):
        for name in ("c_f", "c_r", "l_f", "l_r", "mass", "inertia", "gravity",
                     "h", "velocity_min"):
            if not getattr(self, name) > 0:
                raise errors.ModelError("%s must be positive, got %r" %
                                        (name, getattr(self, name)))
        if not self.velocity_min < self.velocity_max:
            raise errors.ModelError("Empty velocity range [%r, %r]." %
                                    (self.velocity_min, self.velocity_max))
        if self.matrix_signs not in (constants.MATRIX_SIGNS_STANDARD,
                                     constants.MATRIX_SIGNS_AS_PRINTED):
            raise errors.ModelError("Unknown matrix_signs %r" %
                                    self.matrix_signs)


@dataclasses.dataclass(frozen=True)
class ControllerGains(object):
    """Gains of the PD lane keeping law."""
    kp: float = constants.CONTROLLER_KP
    kd: float = constants.CONTROLLER_KD
    kpsi: float = constants.CONTROLLER_KPSI
    saturation: float = constants.STEERING_SATURATION


@dataclasses.dataclass(frozen=True)
class ScenarioConfig(object):
    """Inputs of one closed-loop simulation.

    Velocities follow v_x(t) = velocity_offset
    + velocity_amplitude * sin(velocity_frequency * t).
    """
    n_samples: int = constants.N_SAMPLES
    velocity_offset: float = constants.VELOCITY_OFFSET
    velocity_amplitude: float = constants.VELOCITY_AMPLITUDE
    velocity_frequency: float = constants.VELOCITY_FREQUENCY
    fault_magnitude: float = constants.FAULT_MAGNITUDE
    fault_start_sample: int = constants.FAULT_START_SAMPLE
    fault_end_sample: int = constants.FAULT_END_SAMPLE
    disturbance_profile: str = constants.DISTURBANCE_SINUSOID
    bank_amplitude: float = constants.BANK_AMPLITUDE
    bank_frequency: float = constants.BANK_FREQUENCY
    curvature_amplitude: float = constants.CURVATURE_AMPLITUDE
    curvature_frequency: float = constants.CURVATURE_FREQUENCY
    noise_enabled: bool = False
    noise_std: tuple = (constants.YAW_RATE_NOISE_STD,
                        constants.LATERAL_NOISE_STD,
                        constants.HEADING_NOISE_STD)
    rng_seed: int = constants.RNG_SEED
    poles: tuple = constants.DEFAULT_POLES
    filter_degree: int = constants.FILTER_DEGREE
    lti_baseline_velocity: float = constants.LTI_BASELINE_VELOCITY
    cache_windows: bool = False
    record_timing: bool = True
    controller: ControllerGains = ControllerGains()

    def __post_init__(self):
        if self.n_samples < 0:
            raise errors.ConfigError("n_samples must be >= 0, got %d" %
                                     self.n_samples)
        if len(self.noise_std) != N_OUTPUTS or min(self.noise_std) < 0:
            raise errors.ConfigError("noise_std needs %d non-negative "
                                     "entries, got %r" %
                                     (N_OUTPUTS, self.noise_std))
        if self.disturbance_profile not in (constants.DISTURBANCE_SINUSOID,
                                            constants.DISTURBANCE_WHITE_NOISE,
                                            constants.DISTURBANCE_NONE):
            raise errors.ConfigError("Unknown disturbance profile %r" %
                                     self.disturbance_profile)

    def Velocity(self, t):
        """Scheduled longitudinal velocity at time t."""
        return (self.velocity_offset +
                self.velocity_amplitude * np.sin(self.velocity_frequency * t))

    def Fault(self, k):
        """Injected fault at sample k."""
        active = (k >= self.fault_start_sample and
                  (self.fault_end_sample <= 0 or k < self.fault_end_sample))
        return self.fault_magnitude if active else 0.0


@dataclasses.dataclass(frozen=True, eq=False)
class SimLog(object):
    """Per-sample record of a simulation; all fields are numpy arrays."""
    k: np.ndarray
    t: np.ndarray
    v_x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    d: np.ndarray
    f_true: np.ndarray
    r_lpv: np.ndarray
    r_lti: np.ndarray
    synth_time: np.ndarray
    states: np.ndarray
    max_gain_error: float = 0.0
    regularized_windows: int = 0

    def __len__(self):
        return len(self.k)


def ContinuousMatrices(p, v_x):
    """Continuous-time bicycle matrices at a velocity.

    Args:
        p: BicycleParams.
        v_x: Longitudinal velocity, m/s.

    Returns:
        A ContinuousModel.

    Raises:
        errors.ModelError: If v_x is not positive.
    """
    if not v_x > 0:
        raise errors.ModelError("Velocity must be positive, got %r" % v_x)
    a_tilde = np.zeros((N_STATES, N_STATES))
    a_tilde[0, 0] = (p.c_f + p.c_r) / (v_x * p.mass)
    a_tilde[0, 1] = (p.l_f * p.c_f - p.l_r * p.c_r) / (v_x * p.mass)
    a_tilde[1, 0] = (p.l_f * p.c_f - p.l_r * p.c_r) / (v_x * p.inertia)
    a_tilde[1, 1] = (p.l_f ** 2 * p.c_f + p.l_r ** 2 * p.c_r) / (
        v_x * p.inertia)
    if p.matrix_signs == constants.MATRIX_SIGNS_STANDARD:
        a_tilde[:2, :2] *= -1.0
        a_tilde[0, 1] -= v_x
    a_tilde[2, 0] = -1.0
    a_tilde[2, 3] = v_x
    a_tilde[3, 1] = -1.0
    b_u = -np.array([[p.c_f / p.mass], [p.l_f * p.c_f / p.inertia], [0.0],
                     [0.0]])
    b_d = np.array([[p.gravity, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, v_x]])
    c = np.hstack([np.zeros((N_OUTPUTS, 1)), np.eye(N_OUTPUTS)])
    return ContinuousModel(A=a_tilde, B_u=b_u,
                           B_f=p.fault_channel_scale * b_u, B_d=b_d, C=c)


def ExactDiscretize(a_tilde, b_tildes, h):
    """Zero-order-hold discretization through one augmented exponential.

    The top blocks of exp([[A, B], [0, 0]] h) are e^{A h} and
    int_0^h e^{A s} ds B, which equals A^-1 (e^{A h} - I) B whenever A is
    invertible.

    Args:
        a_tilde: Continuous state matrix, n x n.
        b_tildes: Sequence of continuous input matrices, n x m_i.
        h: Sampling time.

    Returns:
        A tuple (A, B_1, B_2, ...).

    Raises:
        errors.ModelError: If h is not positive.
    """
    if not h > 0:
        raise errors.ModelError("Sampling time must be positive, got %r" % h)
    a_tilde = np.atleast_2d(np.asarray(a_tilde, dtype=float))
    b_tildes = [np.atleast_2d(np.asarray(b, dtype=float)) for b in b_tildes]
    n = a_tilde.shape[0]
    widths = [b.shape[1] for b in b_tildes]
    size = n + sum(widths)
    augmented = np.zeros((size, size))
    augmented[:n, :n] = a_tilde
    if widths:
        augmented[:n, n:] = np.hstack(b_tildes)
    expo = linalg.expm(augmented * h)
    out = [expo[:n, :n]]
    col = n
    for width in widths:
        out.append(expo[:n, col:col + width])
        col += width
    return tuple(out)


def _Freeze(matrix):
    matrix = np.ascontiguousarray(matrix)
    matrix.flags.writeable = False
    return matrix


class BicycleStateSpace(lpv_model.LpvStateSpace):
    """The discrete LPV state-space model of the bicycle, n_d = 2, n_f = 1.

    Discretizations are cached per velocity and shared by the plant
    simulation and the DAE coefficients.
    """

    def __init__(self, p):
        """Initialize.

        Args:
            p: BicycleParams.
        """
        self.params = p
        self.Discretize = functools.lru_cache(
            maxsize=_DISCRETIZATION_CACHE_SIZE)(self._Discretize)
        super(BicycleStateSpace, self).__init__(
            A=self._At("A"), B_u=self._At("B_u"),
            C=np.hstack([np.zeros((N_OUTPUTS, 1)), np.eye(N_OUTPUTS)]),
            bounds=lpv_model.SchedulingBox.Interval(p.velocity_min,
                                                    p.velocity_max),
            B_d=self._At("B_d"), B_f=self._At("B_f"),
            n_d=N_DISTURBANCES, n_f=1)

    def _Discretize(self, v_x):
        """Returns the DiscreteModel at velocity v_x."""
        cont = ContinuousMatrices(self.params, v_x)
        a, b_u, b_f, b_d = ExactDiscretize(
            cont.A, (cont.B_u, cont.B_f, cont.B_d), self.params.h)
        return DiscreteModel(A=_Freeze(a), B_u=_Freeze(b_u),
                             B_f=_Freeze(b_f), B_d=_Freeze(b_d))

    def _At(self, field):
        return lambda w: getattr(self.Discretize(float(w[0])), field)


def BicycleModel(p):
    """The bicycle DAE model with n_r = 7, n_x = 6, n_z = 4, n_f = 1."""
    return lpv_model.SsToDae(BicycleStateSpace(p))


def PdController(y_e, psi_e, prev_y_e, gains, h):
    """PD lane keeping law.

    Args:
        y_e: Measured lateral offset.
        psi_e: Measured heading error.
        prev_y_e: Lateral offset of the previous sample, None on the first.
        gains: ControllerGains.
        h: Sampling time.

    Returns:
        The saturated steering command.
    """
    if prev_y_e is None:
        prev_y_e = y_e
    u = -(gains.kp * y_e + gains.kd * (y_e - prev_y_e) / h +
          gains.kpsi * psi_e)
    return float(np.clip(u, -gains.saturation, gains.saturation))


def LtiBaselineFilter(model, a, opt, v_fixed, d_n=None):
    """Synthesizes a numerator once for a window frozen at v_fixed.

    Args:
        model: The bicycle DaeModel.
        a: A DenominatorPoly.
        opt: synthesis.SynthesisOptions.
        v_fixed: Design velocity.
        d_n: Filter degree, d_a when None.

    Returns:
        The constant numerator E.
    """
    d_n = a.d_a if d_n is None else d_n
    win = stacking.ParameterWindow.Constant(v_fixed, a.d_a, d_n)
    return residual_runtime.SynthesizeWindow(model, win, a, opt).E


def _Disturbance(cfg, t, rng):
    if cfg.disturbance_profile == constants.DISTURBANCE_SINUSOID:
        phi = cfg.bank_amplitude * np.sin(cfg.bank_frequency * t)
        kappa = cfg.curvature_amplitude * np.sin(cfg.curvature_frequency * t)
    elif cfg.disturbance_profile == constants.DISTURBANCE_WHITE_NOISE:
        phi, kappa = rng.standard_normal(2) * (cfg.bank_amplitude,
                                               cfg.curvature_amplitude)
    else:
        phi, kappa = 0.0, 0.0
    return np.array([np.sin(phi), kappa])


def Simulate(cfg, p, opt):
    """Runs the closed-loop scenario with both residual filters.

    Args:
        cfg: ScenarioConfig.
        p: BicycleParams.
        opt: synthesis.SynthesisOptions.

    Returns:
        A SimLog of cfg.n_samples records.

    Raises:
        errors.NotIsolableError: If a window can not be normalized.
        errors.SimulationDivergedError: If the plant state exceeds
            DIVERGENCE_LIMIT.
    """
    ss = BicycleStateSpace(p)
    model = lpv_model.SsToDae(ss)
    a = residual_runtime.MakeDenominator(cfg.poles)
    lpv_state = residual_runtime.ResidualFilterState(
        model, a, d_n=cfg.filter_degree, cache_windows=cfg.cache_windows)
    lti_state = residual_runtime.ResidualFilterState(
        model, a, d_n=cfg.filter_degree,
        fixed_numerator=LtiBaselineFilter(model, a, opt,
                                          cfg.lti_baseline_velocity,
                                          cfg.filter_degree))
    noise_seq, disturbance_seq = np.random.SeedSequence(cfg.rng_seed).spawn(2)
    noise_rng = np.random.default_rng(noise_seq)
    disturbance_rng = np.random.default_rng(disturbance_seq)
    noise_std = np.asarray(cfg.noise_std, dtype=float)
    c = ss.C(None)

    n = cfg.n_samples
    columns = {
        "v_x": np.zeros(n), "u": np.zeros(n), "f_true": np.zeros(n),
        "r_lpv": np.zeros(n), "r_lti": np.zeros(n),
        "synth_time": np.zeros(n), "y": np.zeros((n, N_OUTPUTS)),
        "d": np.zeros((n, N_DISTURBANCES)), "states": np.zeros((n, N_STATES)),
    }
    state = np.zeros(N_STATES)
    prev_y_e = None
    max_gain_error = 0.0
    regularized = 0
    logger.info("Simulating %d samples (poles %s, gamma %g, noise %s).", n,
                list(cfg.poles), opt.gamma, cfg.noise_enabled)
    for k in range(n):
        t = k * p.h
        v_x = cfg.Velocity(t)
        d = _Disturbance(cfg, t, disturbance_rng)
        f = cfg.Fault(k)
        y = c.dot(state)
        if cfg.noise_enabled:
            y = y + noise_std * noise_rng.standard_normal(N_OUTPUTS)
        u = PdController(y[1], y[2], prev_y_e, cfg.controller, p.h)
        prev_y_e = y[1]
        z = np.concatenate([y, [u]])

        start = time.perf_counter()
        r_lpv = residual_runtime.Step(lpv_state, model, a, opt, z, v_x)
        elapsed = time.perf_counter() - start
        columns["r_lti"][k] = residual_runtime.Step(lti_state, model, a, opt,
                                                    z, v_x)
        built = lpv_state.last_filter
        if lpv_state.warm and built is not None:
            target = built.normalized_gain[opt.target_fault]
            max_gain_error = max(max_gain_error, abs(target - 1.0))
            if built.exactness != constants.EXACT:
                regularized += 1

        columns["v_x"][k] = v_x
        columns["u"][k] = u
        columns["f_true"][k] = f
        columns["r_lpv"][k] = r_lpv
        columns["synth_time"][k] = elapsed if cfg.record_timing else 0.0
        columns["y"][k] = y
        columns["d"][k] = d
        columns["states"][k] = state

        disc = ss.Discretize(float(v_x))
        state = (disc.A.dot(state) + disc.B_u[:, 0] * u +
                 disc.B_f[:, 0] * f + disc.B_d.dot(d))
        if not np.all(np.isfinite(state)) or (
                np.abs(state).max() > constants.DIVERGENCE_LIMIT):
            raise errors.SimulationDivergedError(
                "Plant state diverged at sample %d: %s" % (k, state.tolist()),
                sample=k)
    if regularized:
        logger.warning("%d windows were synthesized with a regularized "
                       "(not exactly decoupling) filter.", regularized)
    return SimLog(k=np.arange(n), t=np.arange(n) * p.h,
                  max_gain_error=max_gain_error,
                  regularized_windows=regularized, **columns)

"""
Created on 2026-10-19

@author: wf

Closed loop simulation step: controller -> allocation -> actuators ->
rotor wrench -> rigid body dynamics.
"""

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy
from basemkit.yamlable import lod_storable

from omnisim.actuators import ActuatorState, WindingFault
from omnisim.allocation import Allocator
from omnisim.flight_control import (
    ControllerGains,
    FlightController,
    PositionIntegrator,
    Setpoint,
    StateEstimate,
)
from omnisim.flight_log import LogRecord
from omnisim.rigid_body import RigidBodyState, integrate
from omnisim.rotor_wrench import Wrench, body_wrench
from omnisim.spatial import body_to_inertial, vec3
from omnisim.vehicle import RotorGeometry, VehicleParams, rotor_geometry

logger = logging.getLogger(__name__)


@lod_storable
class Disturbance:
    """
    seeded zero mean white noise plus a constant bias acting on the body
    as stand-in for unmodeled rotor interference
    """

    force_std: float = 0.0  # [N] per axis
    torque_std: float = 0.0  # [N m] per axis
    force_bias: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    torque_bias: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])

    @property
    def is_zero(self) -> bool:
        zero = (
            self.force_std == 0.0
            and self.torque_std == 0.0
            and not any(self.force_bias)
            and not any(self.torque_bias)
        )
        return zero

    def sample(self, rng: numpy.random.Generator) -> Wrench:
        """
        draw the disturbance wrench for one physics step
        """
        force = numpy.array(self.force_bias, dtype=float)
        torque = numpy.array(self.torque_bias, dtype=float)
        if self.force_std > 0:
            force = force + rng.normal(0.0, self.force_std, 3)
        if self.torque_std > 0:
            torque = torque + rng.normal(0.0, self.torque_std, 3)
        return Wrench(F=force, M=torque)


@dataclass
class SimState:
    """
    complete state of a simulated vehicle
    """

    body: RigidBodyState
    actuators: ActuatorState
    integrator: PositionIntegrator
    allocator: Allocator
    time: float = 0.0
    saturated: numpy.ndarray = field(default_factory=lambda: numpy.zeros(6, dtype=bool))
    rng: Optional[numpy.random.Generator] = None

    @classmethod
    def initial(
        cls,
        params: VehicleParams,
        setpoint: Setpoint,
        gains: Optional[ControllerGains] = None,
        geometry: Optional[RotorGeometry] = None,
        epsilon_axis: float = math.radians(2.0),
        seed: int = 0,
        preposition_idle: bool = False,
        realign_tolerance: float = math.radians(6.0),
    ) -> "SimState":
        """
        Get the state at rest in the setpoint with the actuators trimmed to
        the allocation of the gravity compensation wrench.

        Args:
            params: vehicle parameters
            setpoint: initial position and attitude
            gains: controller gains (integrator clamp)
            geometry: rotor placement
            epsilon_axis: vertical arm threshold [rad] of the mask selection
            seed: seed of the disturbance generator
            preposition_idle: steer the tilt of excluded rotors to their six rotor solution
            realign_tolerance: max tilt error [rad] of idle rotors for the return to six rotors
        """
        if gains is None:
            gains = ControllerGains()
        if geometry is None:
            geometry = rotor_geometry(params)
        body = RigidBodyState(p=setpoint.p_des.copy(), q=setpoint.q_des)
        allocator = Allocator(
            params,
            geometry,
            epsilon_axis=epsilon_axis,
            preposition_idle=preposition_idle,
            realign_tolerance=realign_tolerance,
        )
        anti_gravity = vec3(0.0, 0.0, params.m * params.g)
        trim = Wrench(F=body_to_inertial(body.q).T @ anti_gravity, M=vec3())
        mask = allocator.select_mask(setpoint.q_des)
        _f_dec, command = allocator.allocate(trim, mask)
        sim = cls(
            body=body,
            actuators=ActuatorState().apply(command),
            integrator=PositionIntegrator(limit=gains.integrator_limit),
            allocator=allocator,
            rng=numpy.random.default_rng(seed),
        )
        return sim

    @property
    def geometry(self) -> RotorGeometry:
        return self.allocator.geometry


def substep_count(dt_ctrl: float, dt_phys: float) -> int:
    """
    number of physics steps per control tick
    """
    if dt_phys <= 0 or dt_ctrl <= 0:
        raise ValueError(f"time steps must be positive: dt_ctrl={dt_ctrl} dt_phys={dt_phys}")
    ratio = dt_ctrl / dt_phys
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > 1e-9 * ratio:
        raise ValueError(
            f"dt_ctrl={dt_ctrl} must be an integer multiple of dt_phys={dt_phys}"
        )
    return count


def simulate_step(
    sim: SimState,
    setpoint: Setpoint,
    gains: ControllerGains,
    params: VehicleParams,
    dt_ctrl: float,
    dt_phys: float,
    disturbance: Optional[Disturbance] = None,
    instant_actuators: bool = False,
) -> Tuple[SimState, LogRecord]:
    """
    Run one control tick followed by the physics substeps.

    Args:
        sim: the current simulation state
        setpoint: the setpoint of this tick
        gains: controller gains
        params: vehicle parameters
        dt_ctrl: control period [s]
        dt_phys: physics step [s], dt_ctrl must be an integer multiple
        disturbance: optional disturbance wrench
        instant_actuators: apply the actuator command without dynamics

    Returns:
        the next state and the log record of this tick

    Raises:
        AllocationRankError: if the allocation mask is rank deficient
        WindingFault: if a tilt angle reaches the winding limit
    """
    substeps = substep_count(dt_ctrl, dt_phys)
    estimate = StateEstimate.of_body(sim.body)
    controller = FlightController(gains, params, integrator=sim.integrator.copy())
    saturated = bool(numpy.any(sim.saturated))
    wrench_cmd = controller.step(setpoint, estimate, dt_ctrl, saturated=saturated)

    allocator = sim.allocator.copy()
    mask = allocator.select_mask(setpoint.q_des, alpha=sim.actuators.alpha)
    _f_dec, command = allocator.allocate(wrench_cmd, mask)

    geometry = allocator.geometry
    actuators = sim.actuators
    if instant_actuators:
        actuators = actuators.apply(command)
    realized = body_wrench(actuators, params, geometry)
    record = LogRecord(
        t=sim.time,
        p=sim.body.p.copy(),
        q=sim.body.q,
        omega=sim.body.omega.copy(),
        alpha=actuators.alpha.copy(),
        n=actuators.n.copy(),
        wrench_cmd=wrench_cmd.as_vector(),
        wrench_real=realized.as_vector(),
        mask=mask.size,
        saturated=command.saturated.copy(),
    )

    body = sim.body
    # leave the generator of the input state untouched
    rng = copy.deepcopy(sim.rng) if sim.rng is not None else numpy.random.default_rng(0)
    for k in range(substeps):
        wrench = body_wrench(actuators, params, geometry)
        if disturbance is not None and not disturbance.is_zero:
            wrench = wrench + disturbance.sample(rng)
        body = integrate(body, lambda _state, w=wrench: w, dt_phys, params)
        if not instant_actuators:
            actuators, faults = actuators.step(command, params, dt_phys)
            if faults:
                raise WindingFault(faults, time=sim.time + (k + 1) * dt_phys)

    next_sim = SimState(
        body=body,
        actuators=actuators,
        integrator=controller.integrator,
        allocator=allocator,
        time=sim.time + dt_ctrl,
        saturated=command.saturated.copy(),
        rng=rng,
    )
    return next_sim, record

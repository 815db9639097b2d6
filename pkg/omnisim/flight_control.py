"""
Created on 2026-10-19

@author: wf

Cascaded position, attitude and rate control producing the desired
body wrench.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy
from basemkit.yamlable import lod_storable

from omnisim.rotor_wrench import Wrench
from omnisim.spatial import (
    UnitQuaternion,
    body_to_inertial,
    quat_conjugate,
    quat_multiply,
    quat_to_rotation,
    vec3,
)
from omnisim.vehicle import VehicleParams


@lod_storable
class ControllerGains:
    """
    gains of the position PID and the attitude / rate controllers

    the defaults are tuned for the default vehicle parameters
    """

    kp: float = 12.8  # position proportional gain [N/m]
    kd: float = 12.8  # position derivative gain [N s/m]
    ki: float = 1.0  # position integral gain [N/(m s)]
    integrator_limit: float = 1.0  # clamp of each integrator component [m s]
    kq: float = 8.0  # attitude gain [1/s]
    kr: float = 0.3  # rate gain [N m s]

    def problems(self, path: str = "gains") -> List[Tuple[str, str]]:
        problems = []
        for name in ["kp", "kd", "ki", "integrator_limit", "kq", "kr"]:
            value = getattr(self, name)
            if value is None or not numpy.isfinite(value) or value < 0:
                problems.append((f"{path}.{name}", f"must be >= 0 but is {value}"))
        return problems


@dataclass
class Setpoint:
    """
    desired position [m], velocity [m/s], acceleration [m/s²] in the
    inertial frame and desired attitude
    """

    p_des: numpy.ndarray = field(default_factory=vec3)
    v_des: numpy.ndarray = field(default_factory=vec3)
    a_des: numpy.ndarray = field(default_factory=vec3)
    q_des: UnitQuaternion = field(default_factory=UnitQuaternion.identity)


@dataclass
class StateEstimate:
    """
    estimated position and velocity (inertial), attitude and body rates
    """

    p: numpy.ndarray = field(default_factory=vec3)
    v: numpy.ndarray = field(default_factory=vec3)
    q: UnitQuaternion = field(default_factory=UnitQuaternion.identity)
    omega: numpy.ndarray = field(default_factory=vec3)

    @classmethod
    def of_body(cls, body) -> "StateEstimate":
        """
        ground truth estimate of the given rigid body state
        """
        estimate = cls(
            p=body.p.copy(),
            v=body_to_inertial(body.q) @ body.v,
            q=body.q,
            omega=body.omega.copy(),
        )
        return estimate


@dataclass
class PositionIntegrator:
    """
    clamped integral of the position error
    """

    limit: float = 1.0
    value: numpy.ndarray = field(default_factory=vec3)
    frozen: bool = False

    def update(self, p_err: numpy.ndarray, dt: float) -> numpy.ndarray:
        if not self.frozen:
            self.value = numpy.clip(self.value + p_err * dt, -self.limit, self.limit)
        return self.value

    def copy(self) -> "PositionIntegrator":
        return PositionIntegrator(
            limit=self.limit, value=self.value.copy(), frozen=self.frozen
        )


def position_control(
    sp: Setpoint,
    st: StateEstimate,
    integ: PositionIntegrator,
    gains: ControllerGains,
    params: VehicleParams,
    dt: float,
) -> numpy.ndarray:
    """
    PID position control with gravity and acceleration feedforward.

    Args:
        sp: the setpoint
        st: the state estimate
        integ: the position integrator - updated in place
        gains: controller gains
        params: vehicle parameters
        dt: control period [s]

    Returns:
        numpy.ndarray: desired force [N] in the body frame
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive but is {dt}")
    p_err = sp.p_des - st.p
    v_err = sp.v_des - st.v
    integral = integ.update(p_err, dt)
    # force opposing the weight in the z-up inertial frame
    anti_gravity = vec3(0.0, 0.0, params.m * params.g)
    f_inertial = (
        gains.kp * p_err
        + gains.kd * v_err
        + gains.ki * integral
        + anti_gravity
        + params.m * sp.a_des
    )
    f_des = body_to_inertial(st.q).T @ f_inertial
    return f_des


def attitude_control(
    q_des: UnitQuaternion, q_est: UnitQuaternion, kq: float
) -> numpy.ndarray:
    """
    desired body rate [rad/s] from the quaternion error

    the sign of the scalar error part avoids unwinding, sign(0) = +1.
    The vector part of q_err lives in the level frame and is rotated
    into the body frame of the estimate.
    """
    q_err = quat_multiply(q_des, quat_conjugate(q_est))
    sign = 1.0 if q_err.w >= 0 else -1.0
    omega_des = kq * sign * (quat_to_rotation(q_est).T @ q_err.v)
    return omega_des


def rate_control(
    omega_des: numpy.ndarray,
    omega_est: numpy.ndarray,
    f_des: numpy.ndarray,
    params: VehicleParams,
    kr: float,
) -> numpy.ndarray:
    """
    desired moment [N m] with center of mass offset and gyroscopic
    compensation
    """
    omega_est = numpy.asarray(omega_est, dtype=float)
    m_des = (
        kr * (omega_des - omega_est)
        - numpy.cross(params.offset, f_des)
        + numpy.cross(omega_est, params.inertia @ omega_est)
    )
    return m_des


def controller_step(
    sp: Setpoint,
    st: StateEstimate,
    integ: PositionIntegrator,
    gains: ControllerGains,
    params: VehicleParams,
    dt: float,
) -> Wrench:
    """
    run the position, attitude and rate controller once
    """
    f_des = position_control(sp, st, integ, gains, params, dt)
    omega_des = attitude_control(sp.q_des, st.q, gains.kq)
    m_des = rate_control(omega_des, st.omega, f_des, params, gains.kr)
    wrench = Wrench(F=f_des, M=m_des)
    return wrench


class FlightController:
    """
    the controller of one vehicle with its own position integrator
    """

    def __init__(
        self,
        gains: ControllerGains,
        params: VehicleParams,
        integrator: Optional[PositionIntegrator] = None,
    ):
        self.gains = gains
        self.params = params
        if integrator is None:
            integrator = PositionIntegrator(limit=gains.integrator_limit)
        self.integrator = integrator

    def step(
        self, sp: Setpoint, st: StateEstimate, dt: float, saturated: bool = False
    ) -> Wrench:
        """
        get the desired wrench for the next control tick

        Args:
            sp: the setpoint
            st: the state estimate
            dt: the control period [s]
            saturated: the previous allocation clamped a rotor - freezes the integrator
        """
        self.integrator.frozen = saturated
        wrench = controller_step(sp, st, self.integrator, self.gains, self.params, dt)
        return wrench

    def reset(self) -> None:
        self.integrator = PositionIntegrator(limit=self.gains.integrator_limit)

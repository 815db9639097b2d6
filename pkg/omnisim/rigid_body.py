"""
Created on 2026-10-19

@author: wf

Newton-Euler rigid body dynamics and fixed step RK4 integration.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy

from omnisim.rotor_wrench import Wrench
from omnisim.spatial import UnitQuaternion, body_to_inertial, hamilton, vec3
from omnisim.vehicle import VehicleParams


@dataclass
class RigidBodyState:
    """
    position [m] in the inertial frame, velocity [m/s] and body rates
    [rad/s] in the body frame and the attitude
    """

    p: numpy.ndarray = field(default_factory=vec3)
    v: numpy.ndarray = field(default_factory=vec3)
    q: UnitQuaternion = field(default_factory=UnitQuaternion.identity)
    omega: numpy.ndarray = field(default_factory=vec3)

    def as_vector(self) -> numpy.ndarray:
        x = numpy.concatenate([self.p, self.v, self.q.as_array(), self.omega])
        return x

    @classmethod
    def of_vector(cls, x: numpy.ndarray) -> "RigidBodyState":
        state = cls(
            p=x[0:3].copy(),
            v=x[3:6].copy(),
            q=UnitQuaternion.of_array(x[6:10]),
            omega=x[10:13].copy(),
        )
        return state

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(
            p=self.p.copy(), v=self.v.copy(), q=self.q, omega=self.omega.copy()
        )

    def velocity_inertial(self) -> numpy.ndarray:
        return body_to_inertial(self.q) @ self.v


@dataclass
class StateDerivative:
    """
    time derivative of a RigidBodyState
    """

    p_dot: numpy.ndarray
    v_dot: numpy.ndarray
    q_dot: numpy.ndarray
    omega_dot: numpy.ndarray

    def as_vector(self) -> numpy.ndarray:
        return numpy.concatenate([self.p_dot, self.v_dot, self.q_dot, self.omega_dot])


def derivative(
    body: RigidBodyState, wrench_body: Wrench, params: VehicleParams
) -> StateDerivative:
    """
    Newton-Euler equations in the body frame with gravity.

    Args:
        body: the rigid body state
        wrench_body: actuator (and disturbance) wrench in the body frame
        params: vehicle parameters (mass, inertia, gravity)

    Returns:
        StateDerivative: the derivative of the state
    """
    r_ib = body_to_inertial(body.q)
    weight = vec3(0.0, 0.0, -params.m * params.g)
    force = wrench_body.F + r_ib.T @ weight
    v_dot = force / params.m - numpy.cross(body.omega, body.v)
    inertia = params.inertia
    omega_dot = numpy.linalg.solve(
        inertia, wrench_body.M - numpy.cross(body.omega, inertia @ body.omega)
    )
    p_dot = r_ib @ body.v
    q_dot = 0.5 * hamilton(body.q.as_array(), numpy.concatenate([[0.0], body.omega]))
    return StateDerivative(p_dot=p_dot, v_dot=v_dot, q_dot=q_dot, omega_dot=omega_dot)


def _derivative_vector(
    x: numpy.ndarray, wrench_fn: Callable, params: VehicleParams
) -> numpy.ndarray:
    # RK4 stages work on unnormalized quaternions
    q_raw = x[6:10]
    body = RigidBodyState(
        p=x[0:3], v=x[3:6], q=UnitQuaternion.of_array(q_raw), omega=x[10:13]
    )
    d = derivative(body, wrench_fn(body), params)
    return d.as_vector()


def integrate(
    state: RigidBodyState,
    wrench_fn: Callable[[RigidBodyState], Wrench],
    dt: float,
    params: VehicleParams,
) -> RigidBodyState:
    """
    One classical fourth order Runge-Kutta step.

    Args:
        state: the current state
        wrench_fn: body wrench as function of the state
        dt: time step [s]
        params: vehicle parameters

    Returns:
        RigidBodyState: the state after dt with renormalized attitude
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive but is {dt}")
    x = state.as_vector()
    k1 = _derivative_vector(x, wrench_fn, params)
    k2 = _derivative_vector(x + 0.5 * dt * k1, wrench_fn, params)
    k3 = _derivative_vector(x + 0.5 * dt * k2, wrench_fn, params)
    k4 = _derivative_vector(x + dt * k3, wrench_fn, params)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    next_state = RigidBodyState.of_vector(x_next)
    return next_state


def kinetic_energy(body: RigidBodyState, params: VehicleParams) -> float:
    """
    rotational kinetic energy ½ωᵀJω [J]
    """
    energy = 0.5 * float(body.omega @ (params.inertia @ body.omega))
    return energy


def angular_momentum_inertial(
    body: RigidBodyState, params: VehicleParams
) -> numpy.ndarray:
    """
    angular momentum Jω [kg m²/s] expressed in the inertial frame
    """
    momentum = body_to_inertial(body.q) @ (params.inertia @ body.omega)
    return momentum

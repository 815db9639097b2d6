"""
Created on 2026-10-19

@author: wf

First order rotor speed and tilt dynamics with tilt rate saturation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy

from omnisim.vehicle import VehicleParams

logger = logging.getLogger(__name__)


class WindingFault(RuntimeError):
    """
    a tilt angle reached the cable winding limit
    """

    def __init__(self, rotors: List[int], time: float = None):
        self.rotors = rotors
        self.time = time
        msg = f"tilt winding limit reached for rotor(s) {rotors}"
        if time is not None:
            msg += f" at t={time:.4f}s"
        super().__init__(msg)


def step_rotor(
    n: float,
    n_des: float,
    tau_n: float,
    dt: float,
    n_min: float = 0.0,
    n_max: float = math.inf,
) -> float:
    """
    Advance a first order rotor by the exact discretization.

    Args:
        n: current speed [rad/s]
        n_des: desired speed [rad/s]
        tau_n: time constant [s]
        dt: time step [s]
        n_min: lower speed bound
        n_max: upper speed bound

    Returns:
        float: the new speed clamped to [n_min, n_max]
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive but is {dt}")
    n_next = n_des + (n - n_des) * math.exp(-dt / tau_n)
    n_next = min(max(n_next, n_min), n_max)
    return n_next


def step_tilt(
    alpha: float,
    alpha_des: float,
    tau_alpha: float,
    omega_max: float,
    dt: float,
    limit: float = 4 * math.pi,
) -> Tuple[float, bool]:
    """
    Advance a tilt unit: first order tracking with the rate clamped to
    ±omega_max.

    Args:
        alpha: current angle [rad]
        alpha_des: desired angle [rad]
        tau_alpha: time constant [s]
        omega_max: max tilt rate [rad/s]
        dt: time step [s]
        limit: winding limit [rad]

    Returns:
        Tuple[float, bool]: the new angle and whether it is held at the
        winding limit
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive but is {dt}")
    delta = (alpha_des - alpha) * (1.0 - math.exp(-dt / tau_alpha))
    max_delta = omega_max * dt
    if abs(delta) > max_delta:
        delta = math.copysign(max_delta, delta)
    alpha_next = alpha + delta
    at_limit = False
    if abs(alpha_next) > limit:
        alpha_next = math.copysign(limit, alpha_next)
        at_limit = True
    return alpha_next, at_limit


@dataclass
class ActuatorState:
    """
    actual rotor speeds and (unwrapped) tilt angles
    """

    n: numpy.ndarray = field(default_factory=lambda: numpy.zeros(6))
    alpha: numpy.ndarray = field(default_factory=lambda: numpy.zeros(6))

    @classmethod
    def hover(cls, params: VehicleParams) -> "ActuatorState":
        """
        level hover with six equally loaded untilted rotors
        """
        state = cls(n=numpy.full(6, params.hover_speed()), alpha=numpy.zeros(6))
        return state

    def copy(self) -> "ActuatorState":
        return ActuatorState(n=self.n.copy(), alpha=self.alpha.copy())

    def apply(self, command) -> "ActuatorState":
        """
        get the state with the command applied instantly
        """
        state = ActuatorState(
            n=numpy.array(command.n_des, dtype=float),
            alpha=numpy.array(command.alpha_des, dtype=float),
        )
        return state

    def step(
        self, command, params: VehicleParams, dt: float
    ) -> Tuple["ActuatorState", List[int]]:
        """
        advance all twelve actuators towards the command

        Args:
            command: the actuator command with n_des and alpha_des
            params: the vehicle parameters
            dt: time step [s]

        Returns:
            the new state and the 1-based indices of rotors held at the
            winding limit
        """
        n = numpy.empty(6)
        alpha = numpy.empty(6)
        faults = []
        for i in range(6):
            n[i] = step_rotor(
                self.n[i],
                command.n_des[i],
                params.tau_n,
                dt,
                n_min=params.n_min,
                n_max=params.n_max,
            )
            alpha[i], at_limit = step_tilt(
                self.alpha[i],
                command.alpha_des[i],
                params.tau_alpha,
                params.omega_alpha_max,
                dt,
                limit=params.winding_limit,
            )
            if at_limit:
                faults.append(i + 1)
        if faults:
            logger.warning("tilt winding limit reached for rotors %s", faults)
        return ActuatorState(n=n, alpha=alpha), faults

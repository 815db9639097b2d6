"""
Created on 2026-10-19

@author: wf

Nonlinear least squares allocation over rotor thrust and tilt angle.
Too slow for the control loop - used as an offline oracle to check
the linear allocation.
"""

import logging
import math
from typing import List, Optional

import numpy
from scipy.optimize import least_squares

from omnisim.allocation import ActuatorCommand, DecomposedForces, decompose_stack
from omnisim.rotor_wrench import Wrench
from omnisim.vehicle import RotorGeometry, VehicleParams

logger = logging.getLogger(__name__)


class AllocationConvergenceError(RuntimeError):
    """
    no start of the nonlinear least squares reached the residual tolerance
    """


class NlsSolution:
    """
    a solution found by the nonlinear least squares oracle
    """

    def __init__(
        self,
        thrust: numpy.ndarray,
        alpha: numpy.ndarray,
        params: VehicleParams,
        residual: float,
    ):
        self.thrust = thrust
        self.alpha = alpha
        self.n = numpy.sqrt(thrust / params.mu)
        self.residual = residual
        self.f_dec: DecomposedForces = decompose_stack(self.n, self.alpha, params.mu)

    def command(self) -> ActuatorCommand:
        command = ActuatorCommand(n_des=self.n.copy(), alpha_des=self.alpha.copy())
        return command


def geometric_wrench(
    thrust: numpy.ndarray,
    alpha: numpy.ndarray,
    params: VehicleParams,
    geometry: RotorGeometry,
) -> numpy.ndarray:
    """
    vectorized body wrench 6-vector for the given rotor thrusts [N] and tilts

    rotor i pushes along -z_i with z_i = cos α_i·e_z - sin α_i·t_i
    """
    cos_a = numpy.cos(alpha)[:, None]
    sin_a = numpy.sin(alpha)[:, None]
    e_z = numpy.array([0.0, 0.0, 1.0])
    axes = cos_a * e_z - sin_a * geometry.tangents
    forces = -thrust[:, None] * axes
    ratio = params.kappa / params.mu
    torques = ratio * geometry.spin_signs[:, None] * forces
    moments = numpy.cross(geometry.positions, forces) + torques
    wrench = numpy.concatenate([forces.sum(axis=0), moments.sum(axis=0)])
    return wrench


def nls_solutions(
    wrench_des: Wrench,
    params: VehicleParams,
    geometry: RotorGeometry,
    starts: int = 8,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> List[NlsSolution]:
    """
    Run a multi-start bounded least squares over (thrust, α) per rotor.

    Args:
        wrench_des: desired body wrench
        params: vehicle parameters
        geometry: rotor placement
        starts: number of random starts
        seed: seed of the start generator
        tolerance: residual [N, N m] below which a start counts as exact

    Returns:
        list of converged solutions sorted by residual
    """
    target = wrench_des.as_vector()
    rng = numpy.random.default_rng(seed)
    hover_thrust = params.m * params.g / 6.0

    def residual(x: numpy.ndarray) -> numpy.ndarray:
        thrust, alpha = x[:6], x[6:]
        return geometric_wrench(thrust, alpha, params, geometry) - target

    upper_thrust = params.mu * params.n_max * params.n_max * 4.0
    lower = numpy.concatenate([numpy.zeros(6), numpy.full(6, -2 * math.pi)])
    upper = numpy.concatenate([numpy.full(6, upper_thrust), numpy.full(6, 2 * math.pi)])
    solutions = []
    for _start in range(starts):
        x0 = numpy.concatenate(
            [
                rng.uniform(0.2, 2.0, 6) * hover_thrust,
                rng.uniform(-math.pi, math.pi, 6),
            ]
        )
        # weak vehicles can not reach the hover thrust of the start range
        x0 = numpy.clip(x0, lower, upper)
        try:
            result = least_squares(
                residual,
                x0,
                bounds=(lower, upper),
                method="trf",
                xtol=1e-12,
                ftol=1e-12,
                gtol=1e-12,
                max_nfev=500,
            )
        except ValueError as ex:
            logger.debug("start %d failed: %s", _start, ex)
            continue
        error = float(numpy.max(numpy.abs(result.fun)))
        if error < tolerance:
            solutions.append(
                NlsSolution(result.x[:6], result.x[6:], params, residual=error)
            )
    solutions.sort(key=lambda solution: solution.residual)
    logger.debug("%d of %d starts converged", len(solutions), starts)
    return solutions


def nls_reference_allocate(
    wrench_des: Wrench,
    params: VehicleParams,
    geometry: RotorGeometry,
    starts: int = 8,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> ActuatorCommand:
    """
    get the best command of the nonlinear least squares oracle

    Raises:
        AllocationConvergenceError: if no start converged
    """
    solutions: Optional[List[NlsSolution]] = nls_solutions(
        wrench_des, params, geometry, starts=starts, seed=seed, tolerance=tolerance
    )
    if not solutions:
        raise AllocationConvergenceError(
            f"nonlinear allocation did not converge in {starts} starts for wrench {wrench_des.as_vector()}"
        )
    command = solutions[0].command()
    return command

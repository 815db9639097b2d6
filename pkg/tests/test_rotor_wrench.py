"""
Created on 2026-10-19

@author: wf
"""

import math

import numpy
from basemkit.basetest import Basetest

from omnisim.actuators import ActuatorState
from omnisim.rotor_wrench import (
    Wrench,
    allocation_matrix,
    allocation_rank,
    body_wrench,
    rotor_drag_torque,
    rotor_frame_rotation,
    rotor_thrust,
)
from omnisim.vehicle import default_params, rotor_geometry


class TestRotorWrench(Basetest):
    """
    test the rotor aerodynamics and the tilt dependent allocation matrix
    """

    def setUp(self, debug=False, profile=True):
        Basetest.setUp(self, debug=debug, profile=profile)
        self.params = default_params()
        self.geometry = rotor_geometry(self.params)

    def test_thrust(self):
        mu = self.params.mu
        self.assertEqual(0.0, rotor_thrust(0.0, mu))
        self.assertAlmostEqual(13.7, rotor_thrust(self.params.n_max, mu), delta=1e-9)
        self.assertAlmostEqual(4 * rotor_thrust(300.0, mu), rotor_thrust(600.0, mu), delta=1e-12)
        self.assertAlmostEqual(
            rotor_drag_torque(500.0, self.params.kappa),
            self.params.drag_ratio * rotor_thrust(500.0, mu),
            delta=1e-12,
        )
        with self.assertRaises(ValueError):
            rotor_thrust(-1.0, mu)
        with self.assertRaises(ValueError):
            rotor_drag_torque(-1.0, self.params.kappa)

    def test_rotor_frame(self):
        r = rotor_frame_rotation(self.geometry, 1, 0.0)
        numpy.testing.assert_allclose(r, numpy.eye(3), atol=1e-12)
        r = rotor_frame_rotation(self.geometry, 3, 0.4)
        numpy.testing.assert_allclose(r @ r.T, numpy.eye(3), atol=1e-12)
        with self.assertRaises(ValueError):
            rotor_frame_rotation(self.geometry, 0, 0.0)

    def test_hover_wrench(self):
        """
        six untilted rotors at hover speed carry the weight without moment
        """
        params = self.params
        wrench = body_wrench(ActuatorState.hover(params), params, self.geometry)
        numpy.testing.assert_allclose(wrench.F, [0.0, 0.0, -params.m * params.g], atol=1e-9)
        numpy.testing.assert_allclose(wrench.M, numpy.zeros(3), atol=1e-9)
        self.assertTrue(wrench.is_finite())

    def test_single_rotor(self):
        """
        a single rotor tilted by 90° pushes along its tangent
        """
        params = self.params
        n = numpy.zeros(6)
        n[0] = 800.0
        alpha = numpy.zeros(6)
        alpha[0] = math.pi / 2
        wrench = body_wrench(ActuatorState(n=n, alpha=alpha), params, self.geometry)
        thrust = params.mu * 800.0**2
        numpy.testing.assert_allclose(wrench.F, thrust * self.geometry.tangents[0], atol=1e-9)
        expected_moment = numpy.cross(self.geometry.positions[0], wrench.F) + params.drag_ratio * wrench.F
        numpy.testing.assert_allclose(wrench.M, expected_moment, atol=1e-9)

    def test_allocation_matrix(self):
        """
        A(α)·n² equals the summed rotor wrench for random configurations
        """
        rng = numpy.random.default_rng(42)
        for _ in range(20):
            n = rng.uniform(0.0, self.params.n_max, 6)
            alpha = rng.uniform(-math.pi, math.pi, 6)
            a = allocation_matrix(alpha, self.params, self.geometry)
            wrench = body_wrench(ActuatorState(n=n, alpha=alpha), self.params, self.geometry)
            numpy.testing.assert_allclose(a @ (n * n), wrench.as_vector(), atol=1e-9)

    def test_singular_at_zero_tilt(self):
        """
        untilted rotors can't produce lateral force, A(0) is rank deficient
        """
        self.assertLess(allocation_rank(numpy.zeros(6), self.params, self.geometry), 6)
        alpha = numpy.array([0.3, -0.5, 0.7, -0.2, 0.4, -0.6])
        self.assertEqual(6, allocation_rank(alpha, self.params, self.geometry))

    def test_wrench_vector(self):
        wrench = Wrench.of_vector([1, 2, 3, 4, 5, 6])
        numpy.testing.assert_array_equal(wrench.as_vector(), [1, 2, 3, 4, 5, 6])
        total = wrench + wrench
        numpy.testing.assert_array_equal(total.M, [8, 10, 12])
        self.assertFalse(Wrench.of_vector([0, 0, math.nan, 0, 0, 0]).is_finite())

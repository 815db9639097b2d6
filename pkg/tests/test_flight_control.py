"""
Created on 2026-10-19

@author: wf
"""

import math

import numpy
from basemkit.basetest import Basetest

from omnisim.flight_control import (
    ControllerGains,
    FlightController,
    PositionIntegrator,
    Setpoint,
    StateEstimate,
    attitude_control,
    controller_step,
    position_control,
    rate_control,
)
from omnisim.spatial import UnitQuaternion, quat_from_axis_angle, quat_multiply, vec3
from omnisim.vehicle import VehicleParams, default_params


class TestFlightControl(Basetest):
    """
    test the cascaded position, attitude and rate control
    """

    def setUp(self, debug=False, profile=True):
        Basetest.setUp(self, debug=debug, profile=profile)
        self.params = default_params()
        self.gains = ControllerGains()

    def test_gravity_feedforward(self):
        """
        at rest in the setpoint the force carries the weight
        """
        weight = self.params.m * self.params.g
        cases = [
            (UnitQuaternion.identity(), vec3(0, 0, -weight)),
            (quat_from_axis_angle(vec3(0, 1, 0), math.pi), vec3(0, 0, weight)),
            (quat_from_axis_angle(vec3(0, 1, 0), math.pi / 2), vec3(weight, 0, 0)),
        ]
        for q, expected in cases:
            with self.subTest(q=q):
                sp = Setpoint(p_des=vec3(0, 0, 1), q_des=q)
                st = StateEstimate(p=vec3(0, 0, 1), q=q)
                integ = PositionIntegrator()
                f_des = position_control(sp, st, integ, self.gains, self.params, 0.004)
                numpy.testing.assert_allclose(f_des, expected, atol=1e-9)

    def test_position_error(self):
        """
        a position error below the setpoint pushes upward
        """
        sp = Setpoint(p_des=vec3(0, 0, 1))
        st = StateEstimate(p=vec3(0, 0, 0.9))
        integ = PositionIntegrator()
        f_des = position_control(sp, st, integ, self.gains, self.params, 0.004)
        weight = self.params.m * self.params.g
        self.assertAlmostEqual(-(weight + self.gains.kp * 0.1 + self.gains.ki * 0.1 * 0.004), f_des[2], delta=1e-9)
        with self.assertRaises(ValueError):
            position_control(sp, st, integ, self.gains, self.params, 0.0)

    def test_integrator(self):
        integ = PositionIntegrator(limit=0.5)
        for _ in range(1000):
            integ.update(vec3(1.0, -1.0, 0.0), 0.01)
        numpy.testing.assert_array_equal(integ.value, [0.5, -0.5, 0.0])
        frozen = integ.copy()
        frozen.frozen = True
        frozen.update(vec3(-100.0, 0.0, 0.0), 1.0)
        numpy.testing.assert_array_equal(frozen.value, [0.5, -0.5, 0.0])

    def test_attitude_control(self):
        """
        the desired rate turns towards the setpoint along the short way
        """
        q_est = UnitQuaternion.identity()
        q_des = quat_from_axis_angle(vec3(0, 1, 0), 0.2)
        omega_des = attitude_control(q_des, q_est, self.gains.kq)
        self.assertGreater(omega_des[1], 0.0)
        self.assertAlmostEqual(0.0, omega_des[0], delta=1e-12)
        # the double cover sign must not change the command
        omega_neg = attitude_control(-q_des, q_est, self.gains.kq)
        numpy.testing.assert_allclose(omega_des, omega_neg, atol=1e-12)
        # beyond a half turn the short way is the other direction
        q_far = quat_from_axis_angle(vec3(0, 1, 0), 1.2 * math.pi)
        self.assertLess(attitude_control(q_far, q_est, self.gains.kq)[1], 0.0)
        self.assertEqual(0.0, float(numpy.linalg.norm(attitude_control(q_est, q_est, 8.0))))

    def test_attitude_body_frame(self):
        """
        the error axis is expressed in the body frame of the estimate
        """
        q_est = quat_from_axis_angle(vec3(1, 0, 0), math.pi / 2)
        # a small turn about the body y axis of the rolled estimate
        q_des = quat_multiply(q_est, quat_from_axis_angle(vec3(0, 1, 0), 0.1))
        omega_des = attitude_control(q_des, q_est, 1.0)
        numpy.testing.assert_allclose(omega_des, [0.0, math.sin(0.05), 0.0], atol=1e-12)

    def test_rate_control(self):
        params = VehicleParams(r_off=[0.0, 0.0, 0.01])
        f_des = vec3(0, 0, -30.0)
        m_des = rate_control(vec3(1, 0, 0), vec3(), f_des, params, 0.3)
        numpy.testing.assert_allclose(m_des, [0.3, 0.0, 0.0], atol=1e-12)
        f_lateral = vec3(10.0, 0, 0)
        m_des = rate_control(vec3(), vec3(), f_lateral, params, 0.3)
        numpy.testing.assert_allclose(m_des, -numpy.cross(params.offset, f_lateral), atol=1e-12)
        omega = vec3(1.0, 2.0, 0.5)
        m_des = rate_control(omega, omega, vec3(), self.params, 0.3)
        numpy.testing.assert_allclose(
            m_des, numpy.cross(omega, self.params.inertia @ omega), atol=1e-12
        )

    def test_controller_step(self):
        sp = Setpoint(p_des=vec3(0, 0, 1))
        st = StateEstimate(p=vec3(0, 0, 1))
        wrench = controller_step(sp, st, PositionIntegrator(), self.gains, self.params, 0.004)
        numpy.testing.assert_allclose(
            wrench.as_vector(), [0, 0, -self.params.m * self.params.g, 0, 0, 0], atol=1e-9
        )

    def test_gains(self):
        self.assertEqual([], self.gains.problems())
        gains = ControllerGains(kp=-1.0)
        self.assertEqual("gains.kp", gains.problems()[0][0])

    def test_flight_controller(self):
        """
        the controller keeps its integrator between ticks and freezes it on saturation
        """
        controller = FlightController(self.gains, self.params)
        sp = Setpoint(p_des=vec3(0, 0, 1))
        st = StateEstimate(p=vec3(0, 0, 0.9))
        controller.step(sp, st, 0.004)
        controller.step(sp, st, 0.004)
        numpy.testing.assert_allclose(controller.integrator.value, [0, 0, 0.1 * 0.008], atol=1e-12)
        controller.step(sp, st, 0.004, saturated=True)
        numpy.testing.assert_allclose(controller.integrator.value, [0, 0, 0.1 * 0.008], atol=1e-12)
        controller.reset()
        numpy.testing.assert_array_equal(controller.integrator.value, numpy.zeros(3))

"""
Created on 2026-10-19

@author: wf
"""

import math

import numpy
from basemkit.basetest import Basetest

from omnisim.actuators import ActuatorState, step_rotor, step_tilt
from omnisim.allocation import ActuatorCommand
from omnisim.vehicle import default_params


class TestActuators(Basetest):
    """
    test the rotor speed and tilt dynamics
    """

    def setUp(self, debug=False, profile=True):
        Basetest.setUp(self, debug=debug, profile=profile)
        self.params = default_params()

    def test_rotor_step_response(self):
        """
        a step reaches 63.2% after one time constant
        """
        tau = self.params.tau_n
        for dt in [0.001, 0.0005, 0.005]:
            with self.subTest(dt=dt):
                n = 0.0
                steps = int(round(tau / dt))
                for _ in range(steps):
                    n = step_rotor(n, 1000.0, tau, dt)
                self.assertAlmostEqual(0.632, n / 1000.0, delta=0.005)
                self.assertAlmostEqual(1.0 - math.exp(-1.0), n / 1000.0, delta=1e-9)

    def test_rotor_clamp(self):
        n = step_rotor(500.0, 5000.0, 0.05, 1.0, n_max=1100.0)
        self.assertEqual(1100.0, n)
        n = step_rotor(500.0, -100.0, 0.05, 1.0, n_min=0.0)
        self.assertEqual(0.0, n)
        with self.assertRaises(ValueError):
            step_rotor(500.0, 600.0, 0.05, 0.0)

    def test_tilt_rate_limit(self):
        """
        a large tilt step is followed at the maximum tilt rate
        """
        params = self.params
        dt = 0.001
        alpha = 0.0
        max_rate = 0.0
        for _ in range(300):
            alpha_next, at_limit = step_tilt(
                alpha, math.pi, params.tau_alpha, params.omega_alpha_max, dt
            )
            self.assertFalse(at_limit)
            max_rate = max(max_rate, abs(alpha_next - alpha) / dt)
            alpha = alpha_next
        self.assertLessEqual(max_rate, params.omega_alpha_max + 1e-12)
        self.assertAlmostEqual(params.omega_alpha_max, max_rate, delta=1e-9)

    def test_tilt_small_step(self):
        """
        a small step follows the first order response
        """
        tau = self.params.tau_alpha
        alpha = 0.0
        dt = 0.001
        for _ in range(int(round(tau / dt))):
            alpha, _at_limit = step_tilt(alpha, 0.01, tau, self.params.omega_alpha_max, dt)
        self.assertAlmostEqual(0.01 * (1.0 - math.exp(-1.0)), alpha, delta=1e-12)

    def test_winding_limit(self):
        alpha, at_limit = step_tilt(4 * math.pi - 1e-4, 20.0, 0.15, 7.85, 0.001)
        self.assertTrue(at_limit)
        self.assertEqual(4 * math.pi, alpha)

    def test_state_step(self):
        params = self.params
        state = ActuatorState.hover(params)
        command = ActuatorCommand(n_des=numpy.full(6, 900.0), alpha_des=numpy.full(6, 0.2))
        next_state, faults = state.step(command, params, 0.001)
        self.assertEqual([], faults)
        self.assertTrue(numpy.all(next_state.n > state.n))
        self.assertTrue(numpy.all(next_state.alpha > 0.0))
        instant = state.apply(command)
        numpy.testing.assert_array_equal(instant.n, command.n_des)
        far = ActuatorCommand(n_des=numpy.zeros(6), alpha_des=numpy.full(6, 100.0))
        state = ActuatorState(n=numpy.zeros(6), alpha=numpy.full(6, 4 * math.pi - 1e-3))
        _next_state, faults = state.step(far, params, 0.001)
        self.assertEqual([1, 2, 3, 4, 5, 6], faults)

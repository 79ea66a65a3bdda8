import pytest

from vssea.core.control import (
    SfbGains,
    SmcParams,
    StiffnessGains,
    clamp_torque,
    equivalent_term,
    scalar_dob_update,
    sfb_control,
    sliding_variable,
    smc_control,
    smooth_sign,
    solve_input_loop,
    stiffness_control,
)
from vssea.core.plant import PlantParams, StiffnessState
from vssea.core.reconstruction import ErrorState
from vssea.core.synthesis import ControllerConfig
from vssea.suite import simulate_stiffness_loop

SMC = SmcParams((64.0, 48.0, 12.0, 1.0), 200.0, 0.5)


class TestStateFeedback:
    gains = SfbGains((1.0, 2.0, 3.0, 4.0))
    e = ErrorState(1.0, 1.0, 1.0, 1.0)

    def test_compensated(self):
        assert sfb_control(self.gains, self.e, 0.5, 0.2, 2.0) == pytest.approx(21.4)

    def test_flipped_sign(self):
        assert sfb_control(self.gains, self.e, 0.5, 0.2, 2.0, compensation_sign=-1.0) == pytest.approx(19.4)


class TestSlidingMode:
    def test_sliding_variable(self):
        assert sliding_variable(SMC, ErrorState(1.0, 0.0, 0.0, 1.0)) == pytest.approx(65.0)

    def test_smooth_sign(self):
        assert smooth_sign(0.25, 0.5) == pytest.approx(0.5)
        assert smooth_sign(5.0, 0.5) == 1.0
        assert smooth_sign(-5.0, 0.5) == -1.0
        assert smooth_sign(-0.1, 0.0) == -1.0
        assert smooth_sign(0.0, 0.0) == 0.0

    def test_equivalent_term(self):
        e = ErrorState(0.0, 1.0, 1.0, 1.0)
        assert equivalent_term(SMC, e, 0.5, 0.25, 0.125) == pytest.approx(0.875 + 124.0)

    def test_control_inside_layer(self):
        e = ErrorState(0.001, 0.0, 0.0, 0.0)
        tau = smc_control(SMC, e, 0.0, 0.0, 0.0, 0.5)
        assert tau == pytest.approx(0.5 * 200.0 * 0.064 / 0.5)

    def test_control_outside_layer_saturates(self):
        e = ErrorState(1.0, 0.0, 0.0, 0.0)
        assert smc_control(SMC, e, 0.0, 0.0, 0.0, 0.5) == pytest.approx(100.0)


class TestInputLoop:
    def test_affine_fixed_point(self):
        assert solve_input_loop(lambda u: 3.0 + 0.5 * u) == pytest.approx(6.0)

    def test_negative_slope(self):
        u = solve_input_loop(lambda u: 2.0 - 3.0 * u)
        assert u == pytest.approx(2.0 - 3.0 * u)

    def test_unit_slope(self):
        with pytest.raises(ZeroDivisionError):
            solve_input_loop(lambda u: 1.0 + u)

    def test_clamp(self):
        assert clamp_torque(15.0, 10.0) == 10.0
        assert clamp_torque(-15.0, 10.0) == -10.0
        assert clamp_torque(15.0, 0.0) == 15.0


class TestStiffness:
    def test_pd_plus_feedforward(self):
        gains = StiffnessGains(4.0, 0.4, 50.0)
        tau = stiffness_control(gains, 0.1, 0.0, StiffnessState(0.05, 0.1), 0.2)
        assert tau == pytest.approx(0.4 * -0.1 + 4.0 * 0.05 + 0.2)

    def test_scalar_dob_recovers_constant_load(self):
        params = PlantParams()
        g_ms, v, load = 50.0, 0.3, 0.05
        z = g_ms * params.j_ms * v
        d_hat = 0.0
        # tau == load keeps the rate constant at v
        for _ in range(1000):
            z, d_hat = scalar_dob_update(z, v, load, params, g_ms, 1e-3)
        assert d_hat == pytest.approx(load, rel=1e-9)

    def test_scalar_dob_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            scalar_dob_update(0.0, 0.0, 0.0, PlantParams(), 0.0, 1e-3)

    def test_loop_rejects_load_with_dob(self):
        params = PlantParams()
        gains = ControllerConfig().stiffness_gains()
        _, with_dob = simulate_stiffness_loop(params, gains, 0.1, 0.05, True, 3.0, 1e-3)
        _, without = simulate_stiffness_loop(params, gains, 0.1, 0.05, False, 3.0, 1e-3)
        assert abs(without[-1] - 0.1) == pytest.approx(0.05 / gains.kp, rel=0.02)
        assert abs(with_dob[-1] - 0.1) < 0.01 * abs(without[-1] - 0.1)

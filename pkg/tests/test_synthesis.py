import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import solve_continuous_are

from vssea.core.control import SfbGains
from vssea.core.numkit import SynthesisError, is_hurwitz
from vssea.core.observer import ObserverSettings
from vssea.core.plant import PlantParams
from vssea.core.synthesis import (
    CHAIN_INPUT,
    ControllerConfig,
    LqrSettings,
    PolePlacementSettings,
    SmcSettings,
    chain_closed_loop,
    lyapunov_certificate,
    synthesize,
    synthesize_gains,
)
from vssea.core.reconstruction import gamma_model


class TestControllerConfig:
    def test_laws(self):
        assert ControllerConfig(kind="pp").law == "sfb"
        assert ControllerConfig(kind="lqr+dob").law == "sfb"
        assert ControllerConfig(kind="smc").law == "smc"
        assert ControllerConfig(kind="open").law == "open"

    def test_disturbance_source(self):
        assert ControllerConfig(kind="pp+dob").uses_disturbance_source
        assert ControllerConfig(kind="smc").uses_disturbance_source
        assert not ControllerConfig(kind="lqr").uses_disturbance_source

    def test_smc_params_append_unit_coefficient(self):
        params = ControllerConfig(kind="smc").smc_params()
        assert params.S == (64.0, 48.0, 12.0, 1.0)

    def test_to_dict_encodes_complex_poles(self):
        ctrl = ControllerConfig(pole_placement=PolePlacementSettings((-1 + 1j, -1 - 1j, -2.0, -2.0)))
        assert ctrl.to_dict()["poles"][0] == [-1.0, 1.0]


class TestGains:
    def test_default_pole_placement(self):
        result = synthesize_gains(ControllerConfig(kind="pp"))
        assert result.method == "pole placement"
        assert_allclose(result.gains.K, [256.0, 256.0, 96.0, 16.0])
        assert_allclose(result.polynomial.coef, [256.0, 256.0, 96.0, 16.0, 1.0])

    def test_lqr_matches_scipy(self):
        ctrl = ControllerConfig(kind="lqr")
        result = synthesize_gains(ctrl)
        gamma, _ = gamma_model(1.0)
        Q = np.diag(ctrl.lqr.q)
        P = solve_continuous_are(gamma, CHAIN_INPUT, Q, np.eye(1))
        expected = (CHAIN_INPUT.T @ P).reshape(4)
        assert result.method == "lqr"
        assert_allclose(result.gains.K, expected, rtol=1e-8)
        assert result.care_iterations >= 1
        assert result.care_residual <= 1e-8 * (1 + np.linalg.norm(P))

    def test_lqr_weights_change_gain(self):
        soft = synthesize_gains(ControllerConfig(kind="lqr", lqr=LqrSettings(r=10.0)))
        hard = synthesize_gains(ControllerConfig(kind="lqr"))
        assert soft.gains.K[0] < hard.gains.K[0]

    def test_unstable_pole_rejected(self):
        ctrl = ControllerConfig(kind="pp", pole_placement=PolePlacementSettings((1.0, -1.0, -1.0, -1.0)))
        with pytest.raises(SynthesisError):
            synthesize_gains(ctrl)

    def test_no_gain_for_smc(self):
        with pytest.raises(SynthesisError):
            synthesize_gains(ControllerConfig(kind="smc"))


class TestCertificate:
    @pytest.mark.parametrize("kind", ["pp+dob", "lqr+dob"])
    def test_certificate_holds(self, kind):
        cert = synthesize_gains(ControllerConfig(kind=kind)).certificate
        assert cert.positive_definite
        assert cert.eig_min > 0
        assert cert.residual <= 2e-9
        assert_allclose(cert.P, cert.P.T)

    def test_closed_loop_is_hurwitz(self):
        K = synthesize_gains(ControllerConfig()).gains.K
        assert is_hurwitz(chain_closed_loop(K))

    def test_non_hurwitz_gain_rejected(self):
        with pytest.raises(SynthesisError):
            lyapunov_certificate(SfbGains((-1.0, 1.0, 1.0, 1.0)))


class TestReport:
    def test_default_report(self):
        report = synthesize(PlantParams(), ControllerConfig(), ObserverSettings())
        assert report.chain_rank == 4
        assert report.plant_rank == 4
        assert report.gain is not None
        assert report.smc_hurwitz is None
        assert report.observer_gains == (300.0, 30000.0, 1e6)
        assert report.observer_hurwitz and report.observer_matrix_hurwitz

    def test_smc_report(self):
        report = synthesize(PlantParams(), ControllerConfig(kind="smc"), ObserverSettings(bandwidth=20.0))
        assert report.gain is None
        assert report.smc_hurwitz

    def test_bad_manifold(self):
        ctrl = ControllerConfig(kind="smc", smc=SmcSettings(s=(10.0, 1.0, 1.0)))
        with pytest.raises(SynthesisError):
            synthesize(PlantParams(), ctrl, ObserverSettings())

    def test_open_loop_has_no_gain(self):
        report = synthesize(PlantParams(), ControllerConfig(kind="open"), ObserverSettings())
        assert report.gain is None

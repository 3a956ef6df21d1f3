import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from husl.balance import (
    BalanceGains, Scenario, StabilityIndicator, arm_target, fuse_controls, pd_torque, stability_indicator,
)
from husl.gait import Foot, FootstepCommand
from husl.gait import ReferenceMotion, initial_state
from husl.model import ArmState, ModelParams, arm_com_offset

CMD = FootstepCommand(Foot.LEFT, np.array([0.5, 0.1, 0.0]), 0.01)
vec2 = st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2).map(np.array)
vec4 = st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4).map(np.array)


def test_stability_indicator_examples():
    np.testing.assert_allclose(stability_indicator([0.30, 0.10], [0.25, 0.10]).d_xy, [0.05, 0.0], atol=1e-15)
    assert np.array_equal(stability_indicator([0.3, 0.1], [0.3, 0.1]).d_xy, np.zeros(2))


@given(vec2, vec2)
def test_stability_indicator_antisymmetric(a, b):
    assert np.array_equal(stability_indicator(a, b).d_xy, -stability_indicator(b, a).d_xy)


def test_stability_indicator_rejects_nan():
    with pytest.raises(ValueError):
        stability_indicator([np.nan, 0.0], [0.0, 0.0])


def test_default_gains():
    g = BalanceGains()
    assert np.array_equal(g.kp, np.full(4, 60.0)) and np.array_equal(g.kd, np.full(4, 4.0))
    assert np.array_equal(g.q_base, [0.4, 0.0, 0.4, 0.0])
    assert np.array_equal(g.static_pose, [1.2, 0.0, 1.2, 0.0])
    assert g.kp_arm[0, 0] == g.kp_arm[2, 0] == 2.0


def test_default_gains_shift_arm_mass_against_the_error():
    g = BalanceGains()
    params = ModelParams(payload_mass=20.0)
    for d in ([0.05, 0.0], [0.0, 0.05], [-0.03, -0.04]):
        q = arm_target(g, StabilityIndicator(np.array(d)))
        state = initial_state(params, ReferenceMotion.from_model(params), q)
        base = initial_state(params, ReferenceMotion.from_model(params), g.q_base)
        shift = arm_com_offset(state, params)[0] - arm_com_offset(base, params)[0]
        assert shift @ np.array(d) < 0


def test_gains_validation():
    with pytest.raises(ValueError):
        BalanceGains(kp=np.full(4, -1.0))
    with pytest.raises(ValueError):
        BalanceGains(kp_arm=np.zeros((2, 2)))


def test_arm_target_examples():
    g = BalanceGains()
    assert np.array_equal(arm_target(g, StabilityIndicator(np.zeros(2))), g.q_base)
    g = BalanceGains(kp_arm=np.array([[1.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
                     q_base=np.array([0.2, 0.0, 0.0, 0.0]))
    assert arm_target(g, StabilityIndicator(np.array([0.05, 0.0])))[0] == pytest.approx(0.125, abs=1e-15)


@given(vec2, vec2)
def test_arm_target_affine_before_clamp(d1, d2):
    g = BalanceGains()
    a = arm_target(g, StabilityIndicator(d1), clamp=False)
    b = arm_target(g, StabilityIndicator(d2), clamp=False)
    c = arm_target(g, StabilityIndicator(d1 + d2), clamp=False)
    np.testing.assert_allclose(a + b - g.q_base, c, atol=1e-12)
    twice = arm_target(g, StabilityIndicator(2 * d1), clamp=False)
    np.testing.assert_allclose(twice - g.q_base, 2 * (a - g.q_base), atol=1e-12)


@given(vec2.map(lambda d: 10 * d))
def test_arm_target_clamped(d):
    g = BalanceGains()
    assert np.all(np.abs(arm_target(g, StabilityIndicator(d))) <= g.joint_limit)


def test_pd_examples():
    assert pd_torque(0.5, 0.3, 1.0, 40.0, 2.0) == pytest.approx(6.0, abs=1e-12)
    assert pd_torque(0.5, 0.5, 0.0, 40.0, 2.0) == 0.0
    assert pd_torque(0.5, 0.5, 0.3, 40.0, 2.0) < 0.0


@given(vec4, vec4, vec4, st.floats(-3, 3))
def test_pd_linear(err, qdot, q, k):
    kp, kd = np.full(4, 60.0), np.full(4, 4.0)
    base = pd_torque(q + err, q, qdot, kp, kd)
    scaled = pd_torque(q + k * err, q, k * qdot, kp, kd)
    np.testing.assert_allclose(scaled, k * base, atol=1e-9)


def test_fusion_modes():
    g = BalanceGains()
    tau = np.array([1.0, -2.0, 3.0, -4.0])
    out = fuse_controls(CMD, tau, Scenario.DYNAMIC_BALANCING)
    assert out.leg is CMD and np.array_equal(out.arm_torques, tau) and out.arms_present
    out = fuse_controls(CMD, tau, Scenario.BASELINE)
    assert out.leg is CMD and np.array_equal(out.arm_torques, np.zeros(4)) and not out.arms_present
    held = ArmState(g.static_pose.copy(), np.zeros(4))
    out = fuse_controls(CMD, tau, Scenario.STATIC_PAYLOAD, held, g)
    assert out.leg is CMD and np.array_equal(out.arm_torques, np.zeros(4))


@given(vec4, vec4, st.sampled_from(list(Scenario)))
def test_fusion_never_touches_legs(q, tau, mode):
    cmd = FootstepCommand(Foot.RIGHT, np.array([0.1, -0.1, 0.0]), 0.02)
    out = fuse_controls(cmd, tau, mode, ArmState(q, np.zeros(4)), BalanceGains())
    assert out.leg is cmd
    assert np.array_equal(out.leg.target_pose, [0.1, -0.1, 0.0]) and out.leg.timing_offset == 0.02

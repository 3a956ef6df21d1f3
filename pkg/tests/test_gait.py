import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from husl.gait import (
    Foot, FootstepCommand, LocomotionController, LocomotionGains, ReferenceMotion, ResidualBounds, apply_residual,
    dcm_plan, footstep_plan, initial_state, reference_state,
)
from husl.model import ModelParams, total_com

REF = ReferenceMotion(stride_period=1.0, forward_speed=0.5, lateral_sway_amplitude=0.03, step_width=0.2)


def test_reference_phase_origin():
    s = reference_state(0.0, REF)
    np.testing.assert_allclose(s.com_xy, [0.0, 0.0], atol=1e-15)


def test_reference_sway_peak():
    assert reference_state(0.25, REF).com_xy[1] == pytest.approx(0.03, abs=1e-15)


@given(st.floats(-3.0, 3.0))
def test_reference_periodic(phi):
    a, b = reference_state(phi, REF), reference_state(phi + 1.0, REF)
    np.testing.assert_allclose(b.com_xy - a.com_xy, [REF.stride_length, 0.0], atol=1e-12)
    np.testing.assert_allclose(b.com_vel_xy, a.com_vel_xy, atol=1e-12)


@given(st.floats(-3.0, 3.0))
def test_reference_continuous(phi):
    h = 1e-7
    a, b = reference_state(phi - h, REF), reference_state(phi + h, REF)
    assert np.linalg.norm(b.com_xy - a.com_xy) < 1e-5


def test_footstep_plan_examples():
    np.testing.assert_allclose(footstep_plan(0, REF), [0.0, 0.1, 0.0])
    np.testing.assert_allclose(footstep_plan(1, REF), [REF.step_length, -0.1, 0.0])
    for k in range(6):
        gap = footstep_plan(k + 2, REF) - footstep_plan(k, REF)
        np.testing.assert_allclose(gap, [2 * REF.step_length, 0.0, 0.0], atol=1e-15)


NOMINAL = FootstepCommand(Foot.LEFT, np.array([0.5, 0.1, 0.0]), 0.0)


def test_zero_residual_is_identity():
    out = apply_residual(NOMINAL, np.zeros(3))
    assert out.next_foot is Foot.LEFT and out.timing_offset == 0.0
    assert np.array_equal(out.target_pose, NOMINAL.target_pose)


def test_residual_clamped_and_additive():
    out = apply_residual(NOMINAL, [5.0, -5.0, 1.0], ResidualBounds(0.1, 0.1, 0.05))
    np.testing.assert_allclose(out.target_pose, [0.6, 0.0, 0.0], atol=1e-15)
    assert out.timing_offset == 0.05
    out = apply_residual(NOMINAL, [0.05, 0.0, 0.0])
    np.testing.assert_allclose(out.target_pose, [0.55, 0.1, 0.0], atol=1e-15)


def test_residual_wrong_shape():
    with pytest.raises(ValueError):
        apply_residual(NOMINAL, [0.0, 0.0])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(-np.pi, np.pi))
def test_residual_always_within_bounds(action, yaw):
    bounds = ResidualBounds()
    nominal = FootstepCommand(Foot.RIGHT, np.array([0.2, -0.1, yaw]), 0.0)
    out = apply_residual(nominal, action, bounds)
    shift = out.target_pose[:2] - nominal.target_pose[:2]
    c, s = math.cos(yaw), math.sin(yaw)
    local = np.array([c * shift[0] + s * shift[1], -s * shift[0] + c * shift[1]])
    assert abs(local[0]) <= bounds.dx + 1e-12 and abs(local[1]) <= bounds.dy + 1e-12
    assert abs(out.timing_offset) <= bounds.dt
    assert out.target_pose[2] == yaw


def test_dcm_plan_is_lipm_consistent():
    # the planned capture point moves away from the planned stance foot at rate omega
    params = ModelParams()
    ref = ReferenceMotion.from_model(params)
    t = params.t_double + 0.1
    h = 1e-6
    rate = (dcm_plan(t + h, ref, params) - dcm_plan(t - h, ref, params)) / (2 * h)
    stance = footstep_plan(0, ref)[:2]
    np.testing.assert_allclose(rate, params.omega * (dcm_plan(t, ref, params) - stance), rtol=1e-5, atol=1e-7)


def test_controller_with_exact_model_starts_on_plan():
    params = ModelParams()
    ref = ReferenceMotion.from_model(params)
    state = initial_state(params, ref)
    ctl = LocomotionController(params, ref, LocomotionGains(step_dcm=1.0))
    np.testing.assert_allclose(total_com(state, params)[:2], reference_state(0.0, ref).com_xy, atol=1e-12)
    cmd = ctl.nominal_command(state)
    assert cmd.next_foot is Foot.RIGHT
    np.testing.assert_allclose(cmd.target_pose[:2], footstep_plan(1, ref)[:2] + ctl.dcm_error(state), atol=1e-12)


def test_controller_misjudges_unknown_payload():
    params = ModelParams(payload_mass=30.0)
    ref = ReferenceMotion.from_model(params)
    state = initial_state(params, ref, [1.2, 0.0, 1.2, 0.0])
    exact = LocomotionController(params, ref, assumed_payload=None)
    wrong = LocomotionController(params, ref, assumed_payload=20.0)
    com_true = total_com(state, params)[:2]
    np.testing.assert_allclose(exact.estimated_com(state)[0], com_true, atol=1e-12)
    assert wrong.estimated_com(state)[0][0] < com_true[0] - 1e-3  # lighter payload: CoM believed further back

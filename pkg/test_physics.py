"""Vehicle kinematics, impulse resolution and rollouts."""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from models.evaluation import ScenarioFamily
from models.scenario import default_scenario
from models.state import Pair, SimState
from services.baseline import ConstantDecelController, non_ethical
from services.physics import (
    advance,
    all_stopped,
    initial_state,
    lead_accel,
    rear_accel,
    resolve_collision,
    rollout,
    step,
    trajectory_frame,
)
from utils.errors import ContractViolation
from utils.seeding import episode_generators

masses = st.floats(min_value=0.5, max_value=20.0)
speeds = st.floats(min_value=0.0, max_value=40.0)


def _free_scenario(**overrides):
    """Gaps too wide to touch and Vehicle 3 cruising for the whole run."""
    fields = {"d1_0": 500.0, "d2_0": 500.0, "v0": (10.0, 10.0, 10.0), "dt": 0.1, "tau3": 100.0}
    fields.update(overrides)
    return default_scenario(**fields)


@pytest.mark.parametrize(
    "t, expected",
    [(1.0, -6.0), (4.0, 0.0)],
)
def test_lead_schedule(t, expected):
    assert lead_accel(t, 20.0, 6.0) == expected


def test_lead_schedule_at_standstill():
    assert lead_accel(0.0, 0.0, 6.0) == 0.0


@pytest.mark.parametrize(
    "t, expected",
    [(0.5, 0.0), (1.0, -6.0), (4.2, 0.0)],
)
def test_rear_schedule(t, expected):
    assert rear_accel(t, 0.8, 20.0, 6.0) == expected


@pytest.mark.parametrize("offset, expected", [(1e-12, -6.0), (1e-6, 0.0)])
def test_rear_alert_time_is_shared_with_the_kernel(offset, expected):
    scenario = _free_scenario(tau3=0.5 + offset)
    state = SimState(x=(400.0, 200.0, 0.0), v=(10.0, 10.0, 10.0), n=5)
    next_state, _ = step(state, 0.0, scenario)
    assert next_state.last_u3 == expected
    assert rear_accel(state.time(scenario.dt), scenario.tau3, 10.0, 6.0) == expected


def test_resolve_collision_example():
    v_front, v_rear = resolve_collision(5.0, 10.0, 4.5, 5.5, 0.3)
    assert v_front == pytest.approx(8.575, abs=1e-12)
    assert v_rear == pytest.approx(7.075, abs=1e-12)


def test_resolve_collision_elastic_equal_masses_swap():
    assert resolve_collision(3.0, 8.0, 2.0, 2.0, 1.0) == pytest.approx((8.0, 3.0))


def test_resolve_collision_plastic_equal_masses_average():
    assert resolve_collision(3.0, 8.0, 2.0, 2.0, 0.0) == pytest.approx((5.5, 5.5))


@pytest.mark.parametrize("v_front, v_rear", [(5.0, 5.0), (6.0, 4.0)])
def test_resolve_collision_needs_closing_pair(v_front, v_rear):
    with pytest.raises(ContractViolation):
        resolve_collision(v_front, v_rear, 4.5, 5.5, 0.3)


@given(
    v_front=speeds,
    closing=st.floats(min_value=0.01, max_value=30.0),
    m_front=masses,
    m_rear=masses,
    e=st.floats(min_value=0.0, max_value=1.0),
)
def test_impulse_conserves_momentum_and_restitution(v_front, closing, m_front, m_rear, e):
    v_rear = v_front + closing
    front_post, rear_post = resolve_collision(v_front, v_rear, m_front, m_rear, e)
    momentum = m_front * v_front + m_rear * v_rear
    assert m_front * front_post + m_rear * rear_post == pytest.approx(momentum, rel=1e-9, abs=1e-9)
    assert front_post - rear_post == pytest.approx(e * (v_rear - v_front), rel=1e-9, abs=1e-9)


def test_zero_order_hold_step():
    scenario = _free_scenario()
    state = initial_state(scenario)
    next_state, events = step(state, 1.0, scenario)
    assert events == []
    assert next_state.x[1] - state.x[1] == pytest.approx(1.005, abs=1e-12)
    assert next_state.v[1] == pytest.approx(10.1, abs=1e-12)
    assert next_state.v[0] == pytest.approx(9.4)
    assert next_state.last_u1 == -6.0
    assert next_state.last_u3 == 0.0
    assert next_state.n == 1


def test_command_is_clipped_to_the_braking_cap():
    scenario = _free_scenario()
    next_state, _ = step(initial_state(scenario), -20.0, scenario)
    assert next_state.last_u2 == -7.0


def test_speed_cap_on_vehicle_two():
    scenario = _free_scenario(v0=(10.0, 29.9, 10.0))
    next_state, _ = step(initial_state(scenario), 7.0, scenario)
    assert next_state.v[1] == 30.0


def test_vehicle_stops_exactly_inside_a_step():
    scenario = _free_scenario(v0=(0.3, 10.0, 10.0))
    next_state, _ = step(initial_state(scenario), 0.0, scenario)
    assert next_state.v[0] == 0.0
    assert next_state.x[0] == pytest.approx(0.3 * 0.3 / 12.0)


@pytest.mark.parametrize("command", [math.nan, math.inf, -math.inf])
def test_non_finite_command_is_rejected(command):
    scenario = default_scenario()
    with pytest.raises(ContractViolation):
        step(initial_state(scenario), command, scenario)


def test_constructed_front_crossing():
    scenario = _free_scenario(tau3=100.0)
    state = SimState(x=(0.0, -0.2, -100.0), v=(0.0, 3.5, 0.0), n=50)
    # Vehicle 2 cruises one step of 0.1 s: x2 = 0.15, so d1 = -0.15 with closing speed 3.5
    next_state, events = step(state, 0.0, scenario)
    assert len(events) == 1
    event = events[0]
    assert event.pair == Pair.FRONT
    assert event.step == 51
    assert event.v_rel_pre == pytest.approx(3.5)
    assert event.gap == pytest.approx(-0.15)
    front_post, rear_post = resolve_collision(0.0, 3.5, 4.5, 5.5, 0.3)
    assert next_state.v[:2] == pytest.approx((front_post, rear_post))
    assert event.v_rel_post == pytest.approx(-0.3 * 3.5)
    assert next_state.gaps[0] == 0.0
    assert next_state.pair_collided == (True, False)


def test_touching_pair_exchanges_nothing():
    scenario = _free_scenario()
    state = SimState(x=(0.0, 0.0, -100.0), v=(0.0, 0.0, 0.0), n=5)
    next_state, events = step(state, 0.0, scenario)
    assert events == []
    assert next_state.v == (0.0, 0.0, 0.0)


def test_wide_gaps_never_collide():
    scenario = default_scenario(d1_0=200.0, d2_0=200.0)
    for controller in (non_ethical, ConstantDecelController(0.0), ConstantDecelController(2.5)):
        trajectory = rollout(scenario, controller)
        assert trajectory.events == []


def test_tight_scenario_collides_under_full_braking(tight_scenario):
    trajectory = rollout(tight_scenario, non_ethical)
    assert trajectory.collided
    assert any(event.pair == Pair.REAR for event in trajectory.events)


def test_standstill_terminates_after_one_step():
    scenario = default_scenario(v0=(0.0, 0.0, 0.0))
    trajectory = rollout(scenario, non_ethical)
    assert trajectory.terminated_at == 1
    assert trajectory.events == []
    assert all_stopped(trajectory.states[-1])


def test_controller_only_acts_from_tau2(tight_scenario):
    trajectory = rollout(tight_scenario, non_ethical)
    alert_step = round(tight_scenario.tau2 / tight_scenario.dt)
    assert trajectory.actions_u2[:alert_step] == [0.0] * alert_step
    assert trajectory.actions_u2[alert_step] == -7.0


def test_rollout_is_deterministic(tight_scenario):
    assert rollout(tight_scenario, non_ethical) == rollout(tight_scenario, non_ethical)


def test_gaps_never_negative_after_resolution(tight_scenario):
    for state in rollout(tight_scenario, ConstantDecelController(3.0)).states:
        assert min(state.gaps) >= 0.0
        assert min(state.v) >= 0.0


def _stopping_positions(scenario):
    """Closed-form standstill positions of freely braking vehicles, independent of the simulator."""
    delays = (0.0, scenario.tau2, scenario.tau3)
    caps = [vehicle.decel_cap for vehicle in scenario.vehicles]
    return [
        start + speed * delay + speed * speed / (2.0 * cap)
        for start, speed, delay, cap in zip(initial_state(scenario).x, scenario.v0, delays, caps)
    ]


def _kinematics_check(count):
    # only speeds and gaps vary across the family, so one batch carries every scenario
    family = ScenarioFamily(d1_range=(150.0, 300.0), d2_range=(150.0, 300.0), dt=0.001, horizon=12000, count=count)
    scenarios = [family.draw(rng) for rng in episode_generators(11, count)]
    shared = scenarios[0]
    x = np.array([initial_state(scenario).x for scenario in scenarios])
    v = np.array([scenario.v0 for scenario in scenarios])
    cap = shared.vehicles[1].decel_cap
    for n in range(shared.horizon):
        command = np.full(count, -cap if n * shared.dt >= shared.tau2 - 1e-9 else 0.0)
        x, v, _, rear, front = advance(x, v, n, command, shared)
        assert not rear.hit.any() and not front.hit.any()
        if not v.any():
            break
    assert not v.any()
    expected = np.array([_stopping_positions(scenario) for scenario in scenarios])
    np.testing.assert_allclose(x, expected, rtol=0.0, atol=1e-3)


def test_free_braking_stops_where_closed_form_says():
    _kinematics_check(20)


@pytest.mark.slow
def test_free_braking_stops_where_closed_form_says_at_scale():
    _kinematics_check(1000)


@hypothesis_settings(max_examples=50, deadline=None)
@given(
    speed=st.floats(min_value=0.5, max_value=30.0),
    fraction=st.floats(min_value=0.01, max_value=0.99),
    e=st.floats(min_value=0.0, max_value=1.0),
    pair=st.sampled_from([Pair.FRONT, Pair.REAR]),
)
def test_impacts_conserve_pair_momentum(speed, fraction, e, pair):
    # the struck vehicle stands still and the striking one cruises into it within one step
    scenario = _free_scenario(e=e)
    gap = fraction * speed * scenario.dt
    if pair == Pair.FRONT:
        state = SimState(x=(0.0, -gap, -100.0), v=(0.0, speed, 0.0), n=50)
        front, rear = 0, 1
    else:
        state = SimState(x=(100.0, 0.0, -gap), v=(0.0, 0.0, speed), n=50)
        front, rear = 1, 2
    next_state, events = step(state, 0.0, scenario)
    assert [event.pair for event in events] == [pair]
    masses = scenario.masses
    momentum = masses[front] * next_state.v[front] + masses[rear] * next_state.v[rear]
    assert momentum == pytest.approx(masses[rear] * speed, rel=1e-9)
    assert next_state.v[front] - next_state.v[rear] == pytest.approx(e * speed, rel=1e-9, abs=1e-12)


@hypothesis_settings(max_examples=25, deadline=None)
@given(
    d1=st.floats(min_value=0.5, max_value=15.0),
    d2=st.floats(min_value=0.5, max_value=15.0),
    a2=st.floats(min_value=0.0, max_value=7.0),
)
def test_every_impact_reverses_closing_speed_by_restitution(d1, d2, a2):
    scenario = default_scenario(d1_0=d1, d2_0=d2)
    trajectory = rollout(scenario, ConstantDecelController(a2))
    for event in trajectory.events:
        assert event.v_rel_pre > 0
        assert event.v_rel_post == pytest.approx(-scenario.e * event.v_rel_pre, rel=1e-9, abs=1e-9)


def test_trajectory_frame_columns(tight_scenario):
    trajectory = rollout(tight_scenario, non_ethical)
    frame = trajectory_frame(trajectory, tight_scenario)
    assert list(frame.columns) == [
        "step", "t", "x1", "x2", "x3", "v1", "v2", "v3", "u1", "u2", "u3", "d1", "d2",
    ]
    assert len(frame) == len(trajectory.states)
    assert frame["step"].iloc[-1] == trajectory.terminated_at

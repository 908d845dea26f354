"""Hybrid longitudinal dynamics of the three-vehicle string.

Vehicles follow zero-order-hold kinematics between samples; at the end of each
step overlapping pairs that are closing exchange an impulse (momentum
conserved, restitution ``e``) and the rear vehicle is put back in contact.
The kernel works on ``(B, 3)`` arrays so the same arithmetic drives a single
rollout (B = 1) and the batched constant-deceleration sweep in
``services.baseline``; both therefore agree bit for bit.
"""
import math
from typing import Callable, List, NamedTuple, Tuple

import numpy as np
import pandas as pd

from models.scenario import ScenarioConfig
from models.state import CollisionEvent, Pair, SimState, Trajectory
from services.harm import harm_shares
from utils.errors import ContractViolation

# tolerance for comparing sample times against delays (n * dt is inexact)
TIME_EPS = 1e-9

Controller = Callable[[SimState, ScenarioConfig], float]


def lead_accel(t: float, v1_0: float, cap: float) -> float:
    """Nominal schedule of Vehicle 1: full braking from t = 0 until standstill."""
    if v1_0 <= 0:
        return 0.0
    return -cap if 0 <= t <= v1_0 / cap else 0.0


def rear_braking(t: float, tau3: float) -> bool:
    """Vehicle 3 has received the alert; sample times within TIME_EPS of tau3 count as reached."""
    return t >= tau3 - TIME_EPS


def rear_accel(t: float, tau3: float, v3_0: float, cap: float) -> float:
    """Nominal schedule of Vehicle 3: cruise until tau3, then full braking until standstill."""
    if not rear_braking(t, tau3) or v3_0 <= 0:
        return 0.0
    return -cap if t <= tau3 + v3_0 / cap else 0.0


def _exchange(v_front, v_rear, m_front, m_rear, e):
    closing = v_rear - v_front
    total = m_front + m_rear
    v_front_post = v_front + (m_rear / total) * (1.0 + e) * closing
    v_rear_post = v_rear - (m_front / total) * (1.0 + e) * closing
    return v_front_post, v_rear_post


def resolve_collision(
    v_front: float, v_rear: float, m_front: float, m_rear: float, e: float
) -> Tuple[float, float]:
    """Post-impact velocities of a closing pair."""
    if not v_rear - v_front > 0:
        raise ContractViolation(
            f"impulse requires a closing pair (v_rear - v_front = {v_rear - v_front} <= 0)"
        )
    return _exchange(v_front, v_rear, m_front, m_rear, e)


class PairContact(NamedTuple):
    hit: np.ndarray  # (B,) bool, impulse applied
    gap: np.ndarray  # (B,) gap before the position clamp
    closing: np.ndarray  # (B,) relative velocity before impulse
    closing_post: np.ndarray  # (B,) relative velocity after impulse


def _accelerations(t: float, v: np.ndarray, u2_cmd: np.ndarray, scenario: ScenarioConfig) -> np.ndarray:
    lead, ego, rear = scenario.vehicles
    u = np.empty_like(v)
    u[:, 0] = np.where(v[:, 0] > 0, -lead.decel_cap, 0.0)
    u[:, 1] = np.clip(u2_cmd, -ego.decel_cap, ego.accel_cap)
    if rear_braking(t, scenario.tau3):
        u[:, 2] = np.where(v[:, 2] > 0, -rear.decel_cap, 0.0)
    else:
        u[:, 2] = 0.0
    return u


def _integrate(x: np.ndarray, v: np.ndarray, u: np.ndarray, dt: float, v2_max: float):
    v_next = v + u * dt
    x_next = x + v * dt + 0.5 * u * dt * dt
    stopping = v_next < 0
    if stopping.any():
        # vehicle reaches standstill inside the step and stays there
        safe_u = np.where(stopping, u, -1.0)
        x_stop = x - v * v / (2.0 * safe_u)
        x_next = np.where(stopping, x_stop, x_next)
        v_next = np.where(stopping, 0.0, v_next)
    v_next[:, 1] = np.minimum(v_next[:, 1], v2_max)
    return x_next, v_next


def _resolve_pair(x, v, front: int, masses, e) -> PairContact:
    rear = front + 1
    gap = x[:, front] - x[:, rear]
    closing = v[:, rear] - v[:, front]
    hit = (gap <= 0) & (closing > 0)
    if hit.any():
        v_front_post, v_rear_post = _exchange(v[:, front], v[:, rear], masses[front], masses[rear], e)
        v[:, front] = np.where(hit, v_front_post, v[:, front])
        v[:, rear] = np.where(hit, v_rear_post, v[:, rear])
    x[:, rear] = np.minimum(x[:, rear], x[:, front])
    return PairContact(hit, gap, closing, v[:, rear] - v[:, front])


def _resolve(x: np.ndarray, v: np.ndarray, scenario: ScenarioConfig):
    """Rear pair first, then front pair; returns (rear contact, front contact)."""
    masses = scenario.masses
    rear = _resolve_pair(x, v, 1, masses, scenario.e)
    front = _resolve_pair(x, v, 0, masses, scenario.e)
    # moving Vehicle 2 back to contact may reopen an overlap behind it
    x[:, 2] = np.minimum(x[:, 2], x[:, 1])
    # no reverse motion, even after an impulse
    np.maximum(v, 0.0, out=v)
    return rear, front


def advance(
    x: np.ndarray, v: np.ndarray, n: int, u2_cmd: np.ndarray, scenario: ScenarioConfig
):
    """One batched step; returns (x, v, u, rear contact, front contact)."""
    u = _accelerations(n * scenario.dt, v, u2_cmd, scenario)
    x, v = _integrate(x, v, u, scenario.dt, scenario.v2_max)
    rear, front = _resolve(x, v, scenario)
    return x, v, u, rear, front


def initial_state(scenario: ScenarioConfig) -> SimState:
    x2 = -scenario.d1_0
    return SimState(x=(0.0, x2, x2 - scenario.d2_0), v=tuple(scenario.v0))


def initial_arrays(scenario: ScenarioConfig, batch: int) -> Tuple[np.ndarray, np.ndarray]:
    state = initial_state(scenario)
    x = np.tile(np.array(state.x, dtype=float), (batch, 1))
    v = np.tile(np.array(state.v, dtype=float), (batch, 1))
    return x, v


def _event(pair: Pair, step: int, contact: PairContact, m_front: float, m_rear: float) -> CollisionEvent:
    closing = float(contact.closing[0])
    harm_front, harm_rear = harm_shares(closing, m_front, m_rear)
    return CollisionEvent(
        pair=pair,
        step=step,
        gap=float(contact.gap[0]),
        v_rel_pre=closing,
        v_rel_post=float(contact.closing_post[0]),
        harm_front_vehicle=harm_front,
        harm_rear_vehicle=harm_rear,
    )


def step(state: SimState, u2_cmd: float, scenario: ScenarioConfig) -> Tuple[SimState, List[CollisionEvent]]:
    if not math.isfinite(u2_cmd):
        raise ContractViolation(f"non-finite acceleration command {u2_cmd!r}")
    x = np.array([state.x], dtype=float)
    v = np.array([state.v], dtype=float)
    x, v, u, rear, front = advance(x, v, state.n, np.array([u2_cmd], dtype=float), scenario)

    n = state.n + 1
    masses = scenario.masses
    events = []
    if rear.hit[0]:
        events.append(_event(Pair.REAR, n, rear, masses[1], masses[2]))
    if front.hit[0]:
        events.append(_event(Pair.FRONT, n, front, masses[0], masses[1]))

    next_state = SimState(
        x=tuple(float(value) for value in x[0]),
        v=tuple(float(value) for value in v[0]),
        n=n,
        pair_collided=(
            state.pair_collided[0] or bool(front.hit[0]),
            state.pair_collided[1] or bool(rear.hit[0]),
        ),
        last_u1=float(u[0, 0]),
        last_u2=float(u[0, 1]),
        last_u3=float(u[0, 2]),
    )
    return next_state, events


def controller_active(state: SimState, scenario: ScenarioConfig) -> bool:
    """Vehicle 2 follows its controller only from tau2 onward."""
    return state.time(scenario.dt) >= scenario.tau2 - TIME_EPS


def all_stopped(state: SimState) -> bool:
    return all(speed == 0.0 for speed in state.v)


def rollout(scenario: ScenarioConfig, controller: Controller) -> Trajectory:
    state = initial_state(scenario)
    states = [state]
    actions: List[float] = []
    events: List[CollisionEvent] = []
    for _ in range(scenario.horizon):
        command = controller(state, scenario) if controller_active(state, scenario) else 0.0
        state, new_events = step(state, command, scenario)
        states.append(state)
        actions.append(state.last_u2)
        events.extend(new_events)
        if all_stopped(state):
            break
    return Trajectory(states=states, actions_u2=actions, events=events, terminated_at=state.n)


def trajectory_frame(trajectory: Trajectory, scenario: ScenarioConfig) -> pd.DataFrame:
    """Per-step table: step, t, positions, velocities, applied accelerations, gaps."""
    rows = []
    for state in trajectory.states:
        d1, d2 = state.gaps
        rows.append({
            "step": state.n,
            "t": state.time(scenario.dt),
            "x1": state.x[0], "x2": state.x[1], "x3": state.x[2],
            "v1": state.v[0], "v2": state.v[1], "v3": state.v[2],
            "u1": state.last_u1, "u2": state.last_u2, "u3": state.last_u3,
            "d1": d1, "d2": d2,
        })
    return pd.DataFrame(rows)

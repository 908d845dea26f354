"""Vehicle 2's emergency-braking decision problem as a gymnasium environment."""
import math
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import gymnasium
import numpy as np
from gymnasium import spaces

from config import settings
from models.evaluation import ScenarioFamily
from models.rewards import RewardWeights
from models.scenario import ScenarioConfig, VehicleParams
from models.state import CollisionEvent, Pair, SimState
from services import physics

OBS_DIM = 9
ACTION_DIM = 1


def observe(state: SimState, scenario: ScenarioConfig) -> np.ndarray:
    d1, d2 = state.gaps
    since_alert = max(0.0, state.time(scenario.dt) - scenario.tau2)
    return np.array(
        [
            state.v[0] / settings.V_SCALE,
            state.v[1] / settings.V_SCALE,
            state.v[2] / settings.V_SCALE,
            d1 / settings.D_SCALE,
            d2 / settings.D_SCALE,
            state.last_u1 / settings.A_SCALE,
            state.last_u3 / settings.A_SCALE,
            state.last_u2 / settings.A_SCALE,
            since_alert / scenario.horizon_seconds,
        ],
        dtype=np.float64,
    )


def scale_action(raw: float, vehicle: VehicleParams) -> float:
    """Map a policy output in [-1, 1] onto [-decel_cap, accel_cap]."""
    raw = min(1.0, max(-1.0, float(raw)))
    return -vehicle.decel_cap + (raw + 1.0) * 0.5 * (vehicle.decel_cap + vehicle.accel_cap)


def _sigmoid(value: float) -> float:
    if value >= 0:
        return 1.0 / (1.0 + math.exp(-value))
    z = math.exp(value)
    return z / (1.0 + z)


def r_collision(events: Sequence[CollisionEvent], weights: RewardWeights) -> float:
    total = 0.0
    for event in events:
        k = weights.k_energy_1 if event.pair == Pair.FRONT else weights.k_energy_2
        total -= k * event.v_rel_pre * event.v_rel_pre
    return total


def time_to_collision(gap: float, closing: float, weights: RewardWeights) -> float:
    if closing <= 0:
        return math.inf
    return (gap - weights.d_safe) / closing


def r_risk(d1: float, d2: float, v_rel_1: float, v_rel_2: float, weights: RewardWeights) -> float:
    total = 0.0
    for gap, closing in ((d1, v_rel_1), (d2, v_rel_2)):
        ttc = time_to_collision(gap, closing, weights)
        if math.isfinite(ttc):
            total -= _sigmoid(-ttc / weights.tau_scale)
        total -= _sigmoid(weights.k_d * (weights.d_target - gap))
    return total


def r_jerk(u2_now: float, u2_prev: float, dt: float) -> float:
    jerk = (u2_now - u2_prev) / dt
    return -(jerk * jerk)


def r_terminal(ended: bool, any_collision: bool, r_safe: float) -> float:
    return r_safe if ended and not any_collision else 0.0


class RewardComponents(NamedTuple):
    collision: float = 0.0
    risk: float = 0.0
    jerk: float = 0.0
    terminal: float = 0.0


def total_reward(components: RewardComponents, weights: RewardWeights) -> float:
    return (
        weights.w_h * components.collision
        + weights.w_p * components.risk
        + weights.w_j * components.jerk
        + components.terminal
    )


class BrakingEnv(gymnasium.Env):
    """One emergency per episode; the agent controls Vehicle 2 from tau2 on.

    Steps before tau2 (Vehicle 2 still cruising) are simulated inside ``reset``
    and any collision they produce is charged to the first agent step. The
    episode terminates once every vehicle is at standstill and is truncated at
    the scenario horizon.
    """

    metadata = {"render_modes": []}

    def __init__(
        self,
        scenario: Optional[ScenarioConfig] = None,
        family: Optional[ScenarioFamily] = None,
        weights: Optional[RewardWeights] = None,
    ):
        if (scenario is None) == (family is None):
            raise ValueError("BrakingEnv needs exactly one of scenario or family")
        self.fixed_scenario = scenario
        self.family = family
        self.weights = weights or RewardWeights()
        self.observation_space = spaces.Box(-np.inf, np.inf, shape=(OBS_DIM,), dtype=np.float64)
        self.action_space = spaces.Box(-1.0, 1.0, shape=(ACTION_DIM,), dtype=np.float64)
        self.scenario: Optional[ScenarioConfig] = None
        self.state: Optional[SimState] = None
        self._pending: List[CollisionEvent] = []
        self._collided = False

    def reset(self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None):
        super().reset(seed=seed)
        if options and "scenario" in options:
            self.scenario = options["scenario"]
        elif self.fixed_scenario is not None:
            self.scenario = self.fixed_scenario
        else:
            self.scenario = self.family.draw(self.np_random)

        self.state = physics.initial_state(self.scenario)
        self._pending = []
        while (
            not physics.controller_active(self.state, self.scenario)
            and self.state.n < self.scenario.horizon - 1
            and not physics.all_stopped(self.state)
        ):
            self.state, events = physics.step(self.state, 0.0, self.scenario)
            self._pending.extend(events)
        self._collided = bool(self._pending)
        return observe(self.state, self.scenario), {"scenario": self.scenario}

    def step(self, action) -> Tuple[np.ndarray, float, bool, bool, Dict[str, Any]]:
        if self.state is None:
            raise RuntimeError("step() called before reset()")
        raw = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        vehicle = self.scenario.vehicles[1]
        u2_prev = self.state.last_u2

        self.state, events = physics.step(self.state, scale_action(raw, vehicle), self.scenario)
        events = self._pending + events
        self._pending = []
        self._collided = self._collided or bool(events)

        terminated = physics.all_stopped(self.state)
        truncated = not terminated and self.state.n >= self.scenario.horizon
        d1, d2 = self.state.gaps
        v_rel_1, v_rel_2 = self.state.closing_speeds
        components = RewardComponents(
            collision=r_collision(events, self.weights),
            risk=r_risk(d1, d2, v_rel_1, v_rel_2, self.weights),
            jerk=r_jerk(self.state.last_u2, u2_prev, self.scenario.dt),
            terminal=r_terminal(terminated or truncated, self._collided, self.weights.r_safe),
        )
        reward = total_reward(components, self.weights)
        info = {
            "events": events,
            "components": components,
            "collided": self._collided,
        }
        return observe(self.state, self.scenario), reward, terminated, truncated, info

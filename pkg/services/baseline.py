"""Reference strategies for Vehicle 2.

``NonEthicalController`` brakes as hard as possible; the constant-deceleration
baseline picks the braking magnitude that minimizes total harm by sweeping a
grid of magnitudes through the batched simulator.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from models.baseline import BaselineSolution
from models.scenario import ScenarioConfig, with_timestep
from models.state import SimState
from services.harm import harm_shares
from services.physics import TIME_EPS, advance, initial_arrays
from utils.errors import ContractViolation

logger = logging.getLogger(__name__)


class ConstantDecelController:
    """Brake at a fixed magnitude from tau2 until standstill."""

    def __init__(self, magnitude: float):
        self.magnitude = float(magnitude)

    def __call__(self, state: SimState, scenario: ScenarioConfig) -> float:
        if state.time(scenario.dt) < scenario.tau2 - TIME_EPS or state.v[1] <= 0:
            return 0.0
        return -self.magnitude

    def __repr__(self) -> str:
        return f"ConstantDecelController({self.magnitude})"


def non_ethical(state: SimState, scenario: ScenarioConfig) -> float:
    return ConstantDecelController(scenario.vehicles[1].decel_cap)(state, scenario)


class NonEthicalController:
    """Maximum braking, the reference every harm decrease is measured against."""

    def __call__(self, state: SimState, scenario: ScenarioConfig) -> float:
        return non_ethical(state, scenario)

    def __repr__(self) -> str:
        return "NonEthicalController()"


def sweep_harm(scenario: ScenarioConfig, magnitudes: np.ndarray, dt: Optional[float] = None) -> np.ndarray:
    """First-per-pair total harm for each constant braking magnitude, all rollouts batched."""
    if dt is not None:
        scenario = with_timestep(scenario, dt)
    magnitudes = np.asarray(magnitudes, dtype=float)
    batch = magnitudes.shape[0]
    x, v = initial_arrays(scenario, batch)
    masses = scenario.masses
    total = np.zeros(batch)
    seen_rear = np.zeros(batch, dtype=bool)
    seen_front = np.zeros(batch, dtype=bool)
    for n in range(scenario.horizon):
        active = n * scenario.dt >= scenario.tau2 - TIME_EPS
        command = np.where(active & (v[:, 1] > 0), -magnitudes, 0.0)
        x, v, _, rear, front = advance(x, v, n, command, scenario)
        # rear pair before front pair, as events are emitted by step()
        for contact, seen, m_front, m_rear in (
            (rear, seen_rear, masses[1], masses[2]),
            (front, seen_front, masses[0], masses[1]),
        ):
            counted = contact.hit & ~seen
            if counted.any():
                harm_front, harm_rear = harm_shares(contact.closing, m_front, m_rear)
                total = total + np.where(counted, harm_front + harm_rear, 0.0)
                seen |= contact.hit
        if not v.any():
            break
    return total


def constant_decel_harm(a2: float, scenario: ScenarioConfig, dt: Optional[float] = None) -> float:
    cap = scenario.vehicles[1].decel_cap
    if not 0 <= a2 <= cap:
        raise ContractViolation(f"a2 must lie in [0, {cap}] (got {a2})")
    return float(sweep_harm(scenario, np.array([a2]), dt=dt)[0])


def decel_grid(cap: float, grid_step: float) -> np.ndarray:
    """{0, step, 2 step, ..., cap}; the cap itself is always the last point."""
    if not grid_step > 0:
        raise ContractViolation(f"grid_step must be > 0 (got {grid_step})")
    count = max(1, math.ceil(cap / grid_step - 1e-9))
    # rounding keeps points of nested grids (0.01 inside 0.001) bitwise identical
    grid = np.minimum(np.round(np.arange(count + 1) * grid_step, 12), cap)
    grid[-1] = cap
    return grid


def _zero_interval(grid: np.ndarray, harm: np.ndarray, index: int) -> Optional[Tuple[float, float]]:
    if harm[index] != 0.0:
        return None
    low = index
    while low > 0 and harm[low - 1] == 0.0:
        low -= 1
    high = index
    while high < len(grid) - 1 and harm[high + 1] == 0.0:
        high += 1
    return float(grid[low]), float(grid[high])


def solve_with_curve(
    scenario: ScenarioConfig, grid_step: float, dt: Optional[float] = None
) -> Tuple[BaselineSolution, pd.DataFrame]:
    """Best magnitude on the grid together with the full harm-vs-a2 curve."""
    grid = decel_grid(scenario.vehicles[1].decel_cap, grid_step)
    harm = sweep_harm(scenario, grid, dt=dt)
    # argmin returns the first minimum, i.e. the gentlest braking among ties
    best = int(np.argmin(harm))
    solution = BaselineSolution(
        a_star=float(grid[best]),
        h_star=float(harm[best]),
        zero_harm_interval=_zero_interval(grid, harm, best),
    )
    logger.debug(f"Baseline over {len(grid)} magnitudes: a*={solution.a_star:.3f} H*={solution.h_star:.4f}")
    return solution, pd.DataFrame({"a2": grid, "harm": harm})


def solve(scenario: ScenarioConfig, grid_step: float, dt: Optional[float] = None) -> BaselineSolution:
    return solve_with_curve(scenario, grid_step, dt)[0]

from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict


class Pair(str, Enum):
    FRONT = "front"  # vehicles 1-2
    REAR = "rear"  # vehicles 2-3


class SimState(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: Tuple[float, float, float]  # m, lead at origin initially
    v: Tuple[float, float, float]  # m/s
    n: int = 0
    pair_collided: Tuple[bool, bool] = (False, False)  # (front, rear)
    last_u1: float = 0.0
    last_u2: float = 0.0
    last_u3: float = 0.0

    @property
    def gaps(self) -> Tuple[float, float]:
        return self.x[0] - self.x[1], self.x[1] - self.x[2]

    @property
    def closing_speeds(self) -> Tuple[float, float]:
        """Relative velocities v_{i+1} - v_i; positive means the gap is closing."""
        return self.v[1] - self.v[0], self.v[2] - self.v[1]

    def time(self, dt: float) -> float:
        return self.n * dt


class CollisionEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    pair: Pair
    step: int
    gap: float  # m, at detection (<= 0)
    v_rel_pre: float  # m/s, > 0
    v_rel_post: float  # m/s, equals -e * v_rel_pre
    harm_front_vehicle: float
    harm_rear_vehicle: float

    @property
    def harm(self) -> float:
        return self.harm_front_vehicle + self.harm_rear_vehicle


class Trajectory(BaseModel):
    states: List[SimState]
    actions_u2: List[float]
    events: List[CollisionEvent]
    terminated_at: int

    @property
    def collided(self) -> bool:
        return bool(self.events)

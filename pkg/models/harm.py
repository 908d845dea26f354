from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict


class CountingPolicy(str, Enum):
    ALL_EVENTS = "all-events"  # reward signal
    FIRST_PER_PAIR = "first-per-pair"  # evaluation protocol


class HarmReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    per_vehicle: Tuple[float, float, float] = (0.0, 0.0, 0.0)  # m^2/s^2
    total: float = 0.0
    events_counted: int = 0
    events_observed: int = 0

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.scenario import ScenarioConfig, VehicleParams


class ScenarioFamily(BaseModel):
    """Uniform sampling ranges for Monte-Carlo scenarios; other fields stay fixed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "random-test"
    d1_range: Tuple[float, float] = (5.0, 10.0)
    d2_range: Tuple[float, float] = (5.0, 10.0)
    v1_range: Tuple[float, float] = (18.0, 22.0)
    v2_range: Tuple[float, float] = (18.0, 22.0)
    v3_range: Tuple[float, float] = (18.0, 22.0)
    tau2: float = 0.5
    tau3: float = 0.8
    masses: Tuple[float, float, float] = (4.5, 5.5, 5.9)
    decel_caps: Tuple[float, float, float] = (6.0, 7.0, 6.0)
    accel_caps: Tuple[float, float, float] = (6.0, 7.0, 6.0)
    e: float = 0.3
    v2_max: float = 30.0
    dt: float = 0.05
    horizon: int = 240
    count: int = Field(1000, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _ranges_nonempty(self) -> "ScenarioFamily":
        for name in ("d1_range", "d2_range", "v1_range", "v2_range", "v3_range"):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name}: empty range [{low}, {high}]")
        return self

    def draw(self, rng: np.random.Generator) -> ScenarioConfig:
        """One scenario with gaps and speeds drawn uniformly and independently."""
        d1, d2, v1, v2, v3 = (
            float(rng.uniform(low, high))
            for low, high in (self.d1_range, self.d2_range, self.v1_range, self.v2_range, self.v3_range)
        )
        vehicles = tuple(
            VehicleParams(mass=mass, decel_cap=decel, accel_cap=accel)
            for mass, decel, accel in zip(self.masses, self.decel_caps, self.accel_caps)
        )
        return ScenarioConfig(
            vehicles=vehicles,
            v0=(v1, v2, v3),
            d1_0=d1,
            d2_0=d2,
            tau2=self.tau2,
            tau3=self.tau3,
            e=self.e,
            v2_max=self.v2_max,
            dt=self.dt,
            horizon=self.horizon,
        )


class EvalSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: str
    episodes: int
    excluded: int = 0
    collisions: int
    collision_rate: float
    avg_harm: float
    std_harm: float
    harm_decrease_vs_reference: float
    decrease_defined: bool = True

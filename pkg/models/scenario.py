import math
from typing import Any, Dict, List, Mapping, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError


class VehicleParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mass: float  # tonnes
    decel_cap: float  # braking limit, m/s^2
    accel_cap: float  # acceleration limit, m/s^2

    def issues(self, prefix: str = "") -> List[str]:
        found = []
        if not self.mass > 0:
            found.append(f"{prefix}mass: must be > 0 (got {self.mass})")
        if not self.decel_cap > 0:
            found.append(f"{prefix}decel_cap: must be > 0 (got {self.decel_cap})")
        if not self.accel_cap >= 0:
            found.append(f"{prefix}accel_cap: must be >= 0 (got {self.accel_cap})")
        return found


class ScenarioConfig(BaseModel):
    """Initial conditions and physical parameters of one emergency-braking episode.

    Vehicles are ordered lead -> rear. Bounds are checked by ``validate`` rather
    than at construction so that every violation can be reported at once.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    vehicles: Tuple[VehicleParams, VehicleParams, VehicleParams]
    v0: Tuple[float, float, float]  # m/s
    d1_0: float  # m
    d2_0: float  # m
    tau2: float = 0.5  # s
    tau3: float = 0.8  # s
    e: float = 0.3
    v2_max: float = 30.0  # m/s
    dt: float = 0.05  # s
    horizon: int = 240  # steps

    @property
    def masses(self) -> Tuple[float, float, float]:
        return tuple(vehicle.mass for vehicle in self.vehicles)

    @property
    def horizon_seconds(self) -> float:
        return self.horizon * self.dt

    def issues(self) -> List[str]:
        found = []
        for index, vehicle in enumerate(self.vehicles):
            found.extend(vehicle.issues(prefix=f"vehicles[{index}]."))
        for index, speed in enumerate(self.v0):
            if not (math.isfinite(speed) and speed >= 0):
                found.append(f"v0[{index}]: initial velocity must be >= 0 (got {speed})")
        if not self.d1_0 > 0:
            found.append(f"d1_0: initial gap must be positive (got {self.d1_0})")
        if not self.d2_0 > 0:
            found.append(f"d2_0: initial gap must be positive (got {self.d2_0})")
        if not self.tau2 >= 0:
            found.append(f"tau2: reaction delay must be >= 0 (got {self.tau2})")
        if not self.tau3 >= 0:
            found.append(f"tau3: reaction delay must be >= 0 (got {self.tau3})")
        if not 0 <= self.e <= 1:
            found.append(f"e: restitution out of [0,1] (got {self.e})")
        if not self.v2_max > 0:
            found.append(f"v2_max: must be > 0 (got {self.v2_max})")
        elif self.v0[1] > self.v2_max:
            found.append(f"v0[1]: exceeds v2_max {self.v2_max} (got {self.v0[1]})")
        if not self.dt > 0:
            found.append(f"dt: step must be > 0 (got {self.dt})")
        if not self.horizon >= 1:
            found.append(f"horizon: must be >= 1 step (got {self.horizon})")
        return found


def validate(config: Union[ScenarioConfig, Mapping[str, Any]]) -> List[str]:
    """Return every violated invariant; an empty list means the config is valid."""
    if not isinstance(config, ScenarioConfig):
        try:
            config = ScenarioConfig.model_validate(config)
        except ValidationError as exc:
            return [
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
                for error in exc.errors()
            ]
    return config.issues()


DEFAULT_VEHICLES = (
    VehicleParams(mass=4.5, decel_cap=6.0, accel_cap=6.0),
    VehicleParams(mass=5.5, decel_cap=7.0, accel_cap=7.0),
    VehicleParams(mass=5.9, decel_cap=6.0, accel_cap=6.0),
)

PRESETS: Dict[str, Dict[str, Any]] = {
    "default": {"v0": (20.0, 18.0, 20.0), "d1_0": 7.0, "d2_0": 7.0},
    "scenario-1": {"v0": (20.0, 18.0, 20.0), "d1_0": 10.0, "d2_0": 8.0},
    "scenario-2": {"v0": (22.0, 18.0, 20.0), "d1_0": 5.0, "d2_0": 9.0},
}


def default_scenario(**overrides: Any) -> ScenarioConfig:
    fields: Dict[str, Any] = {"vehicles": DEFAULT_VEHICLES, **PRESETS["default"]}
    fields.update(overrides)
    return ScenarioConfig(**fields)


def preset(name: str, **overrides: Any) -> ScenarioConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown scenario preset '{name}' (known: {', '.join(PRESETS)})")
    return default_scenario(**{**PRESETS[name], **overrides})


def with_timestep(scenario: ScenarioConfig, dt: float) -> ScenarioConfig:
    """Same scenario re-discretized at ``dt`` over the same horizon in seconds."""
    if dt == scenario.dt:
        return scenario
    horizon = max(1, math.ceil(scenario.horizon_seconds / dt - 1e-9))
    return scenario.model_copy(update={"dt": dt, "horizon": horizon})

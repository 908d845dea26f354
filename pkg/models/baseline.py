from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class BaselineSolution(BaseModel):
    """Best constant deceleration for Vehicle 2 and the harm it leaves."""

    model_config = ConfigDict(frozen=True)

    a_star: float  # deceleration magnitude, m/s^2
    h_star: float  # m^2/s^2
    zero_harm_interval: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _interval_contains_a_star(self) -> "BaselineSolution":
        if self.zero_harm_interval is not None:
            low, high = self.zero_harm_interval
            if not low <= self.a_star <= high:
                raise ValueError(f"a_star {self.a_star} outside zero-harm interval {self.zero_harm_interval}")
        return self

from typing import Optional

from pydantic import BaseModel, ConfigDict, model_validator


class ShieldDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta_safe: int  # 1 = DRL policy, 0 = constant-deceleration baseline
    h_rl: float
    h_star: Optional[float] = None
    a_star: Optional[float] = None
    baseline_skipped: bool = False

    @model_validator(mode="after")
    def _consistent(self) -> "ShieldDecision":
        if self.h_star is not None and self.beta_safe != int(self.h_rl <= self.h_star):
            raise ValueError("beta_safe must be 1 exactly when h_rl <= h_star")
        if self.h_star is None and not (self.baseline_skipped and self.beta_safe == 1):
            raise ValueError("h_star may only be absent when the baseline was skipped for a safe policy")
        return self

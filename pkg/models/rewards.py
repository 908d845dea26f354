from pydantic import BaseModel, ConfigDict, Field


class RewardWeights(BaseModel):
    """Coefficients of the four reward terms. Defaults are this lab's choices."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w_h: float = Field(1.0, ge=0)
    w_p: float = Field(0.5, ge=0)
    w_j: float = Field(1e-4, ge=0)
    k_energy_1: float = Field(1.0, ge=0)
    k_energy_2: float = Field(1.0, ge=0)
    k_d: float = Field(0.5, gt=0)
    d_safe: float = Field(1.0, ge=0)  # m
    d_target: float = Field(5.0, ge=0)  # m
    tau_scale: float = Field(2.0, gt=0)  # s, TTC time scale (not a V2X delay)
    r_safe: float = Field(10.0, ge=0)

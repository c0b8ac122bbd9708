from pydantic import BaseModel, ConfigDict, Field


class PlanConfig(BaseModel):
    """
    Offline planning parameters. `alpha` is the percentile of the per-slot demand used as the
    expected demand of an aggregate; `quantiles` is the number of equal rejection slices.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=80.0, gt=0, le=100)
    resamples: int = Field(default=1000, ge=100)
    confidence: float = Field(default=0.95, gt=0, lt=1)
    quantiles: int = Field(default=10, ge=1)
    psi: float | None = Field(default=None, ge=0)
    seed: int = 0

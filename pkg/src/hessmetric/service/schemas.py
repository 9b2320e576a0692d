"""Request/response models for the scenario service."""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator


class CoordinateModel(BaseModel):
    n: int = Field(ge=1)
    q: int = Field(ge=1)


class ProfileModel(BaseModel):
    coordinate: CoordinateModel
    breakpoints: list[float]
    slopes: list[float]


class ParamsModel(BaseModel):
    n: int = Field(ge=1)
    m: int = Field(ge=1)

    @field_validator("m")
    @classmethod
    def _m_at_most_n(cls, v, info):
        n = info.data.get("n")
        if n is not None and v > n:
            raise ValueError("m must satisfy 1 <= m <= n")
        return v


class ScenarioModel(BaseModel):
    params: ParamsModel
    profiles: dict[str, ProfileModel] = Field(default_factory=dict)
    weight: str | None = None
    options: dict = Field(default_factory=dict)


class ReportRowModel(BaseModel):
    quantity: str
    inputs: str
    expected: float
    actual: float
    rel_err: float
    tolerance: float
    provenance: str
    passed: bool = Field(alias="pass")

    model_config = {"populate_by_name": True}


class ReportModel(BaseModel):
    command: str
    rows: list[ReportRowModel]
    all_passed: bool
    version: str


class ReproduceRequest(BaseModel):
    options: dict = Field(default_factory=dict)


class HealthModel(BaseModel):
    status: str
    version: str

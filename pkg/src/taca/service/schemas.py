"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class ScenarioBody(BaseModel):
    scenario: str = Field(..., description="scenario file text")


class Counts(BaseModel):
    entities: int
    relations: int
    total: int


class ValidateResponse(BaseModel):
    valid: bool
    counts: Counts | None = None
    error: str | None = None
    line: int = 0
    column: int = 0


class RunRequest(ScenarioBody):
    max_ticks: int = Field(1000, ge=1)
    seed: int = 0


class RunResponse(BaseModel):
    exit_code: int
    result: str
    metrics: str = ""
    trace: str = ""
    error: str | None = None


class QueryRequest(ScenarioBody):
    query: str
    args: list[str] = Field(default_factory=list)
    overrides: dict[str, str] = Field(default_factory=dict)
    require: list[str] = Field(default_factory=list)


class QueryResponse(BaseModel):
    items: list[str]


class GenerateRequest(BaseModel):
    n_actions: int = Field(1, ge=1)
    n_sa: int = Field(0, ge=0)
    n_pa: int = Field(0, ge=0)


class GenerateResponse(BaseModel):
    scenario: str
    predicted: int
    counted: int
    per_action: list[int] = Field(default_factory=list)


class SessionInfo(BaseModel):
    id: str
    services: list[str]
    counts: Counts


class ServiceCall(BaseModel):
    request: dict[str, Any] = Field(default_factory=dict)


class ServiceResult(BaseModel):
    response: Any = None


class DiagnosticBody(BaseModel):
    source: str = "client"
    kind: str
    key: str
    value: str
    tick: int = Field(0, ge=0)


class DiagnosticResult(BaseModel):
    accepted: bool
    events: list[str] = Field(default_factory=list)


class ErrorBody(BaseModel):
    detail: str

import logging
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class RunStep(str, Enum):
    QUEUED = "queued"
    PARSING = "parsing"
    COMPUTING = "computing"
    VERIFYING = "verifying"
    COMPLETED = "completed"
    ERROR = "error"


class CommandResult(BaseModel):
    command: str
    module: str | None = None
    results: dict[str, Any] = Field(default_factory=dict)
    certificates: dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    """Everything one invocation computed. Field order is the JSON key order."""

    schema_version: int = Field(SCHEMA_VERSION, serialization_alias="schema", validation_alias="schema")
    ring: dict[str, Any] = Field(default_factory=dict)
    command: str = ""
    results: list[CommandResult] = Field(default_factory=list)
    certificates: dict[str, Any] = Field(default_factory=dict)
    status: RunStep = Field(RunStep.QUEUED, exclude=True)
    progress_message: str = Field("Run queued", exclude=True)
    error: dict | None = None

    model_config = {"populate_by_name": True}

    def update(self, status: RunStep, message: str) -> None:
        self.status = status
        self.progress_message = message
        logger.debug(f"[{self.command}] {status.value}: {message}")

    def add(self, result: CommandResult) -> None:
        self.results.append(result)
        for key, value in result.certificates.items():
            label = f"{result.command}:{result.module}" if result.module else result.command
            self.certificates.setdefault(label, {})[key] = value

    def to_dict(self) -> dict:
        data = self.model_dump(mode="json", by_alias=True)
        if data.get("error") is None:
            data.pop("error", None)
        return data

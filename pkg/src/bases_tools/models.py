import csv
import hashlib
import io
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from bases_tools.bases_complex import BasesSpec
from bases_tools.zl_linalg import Modulus

Command = Literal["vertices", "build", "betti", "orbit", "connect", "fill", "quotient", "coinvariants", "verify"]
Suite = Literal["linalg", "simplicial", "bases", "sp", "heisenberg", "all"]

CSV_COLUMNS = ["g", "L", "delta_k", "restrict_W", "check", "dim", "value", "expected", "pass", "elapsed_ms", "seed"]


class JobSpec(BaseModel):
    model_config = ConfigDict(frozen=True, validate_by_name=True, validate_by_alias=True)

    command: Command
    g: int = Field(gt=0)
    modulus: Modulus = Field(alias="L")
    delta_k: int = Field(default=0, ge=0)
    restrict_w: bool = Field(default=False, alias="restrict_W")
    max_dim: int | None = Field(default=None, ge=0)
    up_to: int | None = Field(default=None, ge=0)
    suite: Suite = "all"
    factor: int = Field(default=2, ge=2)
    cache_dir: Path | None = None
    output_format: Literal["json", "csv"] = "json"
    seed: int = 0
    budget: int | None = Field(default=None, gt=0)

    @field_validator("modulus")
    @classmethod
    def _check_level(cls, value: int) -> int:
        if value < 2:
            raise ValueError("commands run at a finite level L >= 2")
        return value

    def bases_spec(self, max_dim: int | None = None) -> BasesSpec:
        return BasesSpec(
            g=self.g,
            modulus=self.modulus,
            delta_k=self.delta_k,
            restrict_w=self.restrict_w,
            max_dim=self.max_dim if max_dim is None else max_dim,
        )

    def digest(self) -> str:
        """SHA-256 of the job, cache location excluded."""
        payload = self.model_dump_json(by_alias=True, exclude={"cache_dir"})
        return hashlib.sha256(payload.encode()).hexdigest()


class CheckOutcome(BaseModel):
    """One verified claim; failures carry a witness."""

    check: str
    status: Literal["pass", "fail", "skip"]
    oracle: str
    dim: int | None = None
    value: Any = None
    expected: Any = None
    witness: Any = None
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != "fail"


class Report(BaseModel):
    model_config = ConfigDict(validate_by_name=True, validate_by_alias=True)

    tool_version: str
    job: JobSpec
    seed: int
    job_hash: str
    cache_key: str | None = None
    checks: list[CheckOutcome] = []
    elapsed_ms: float = 0.0
    exit_code: int = 0
    error: str | None = None

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for check in self.checks:
            writer.writerow(
                [
                    self.job.g,
                    self.job.modulus,
                    self.job.delta_k,
                    self.job.restrict_w,
                    check.check,
                    "" if check.dim is None else check.dim,
                    "" if check.value is None else check.value,
                    "" if check.expected is None else check.expected,
                    check.status,
                    f"{check.elapsed_ms:.1f}",
                    self.seed,
                ]
            )
        return buffer.getvalue()

    def render(self) -> str:
        return self.to_csv() if self.job.output_format == "csv" else self.to_json()

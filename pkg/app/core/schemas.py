from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.novikov import as_fraction


def _check_rational(value: Any) -> str:
    text = str(value).strip()
    try:
        as_fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"{value!r} is not a rational number") from e
    return text


Rational = Annotated[str, Field(min_length=1)]


# =========================
# Enums
# =========================
class BlowupKindName(str, Enum):
    TORIC = "toric"
    NONTORIC = "nontoric"


class Command(str, Enum):
    TROPICALIZE = "tropicalize"
    SUBDIVIDE = "subdivide"
    HORI_VAFA = "hori-vafa"
    BLOWUP = "blowup"
    SOLVE = "solve"
    VERIFY = "verify"
    SCAN_CONTINUUM = "scan-continuum"


# =========================
# MODEL FILE
# =========================
class FanSpec(BaseModel):
    rays: List[List[int]] = Field(min_length=3)
    lambdas: List[Rational]

    @field_validator("rays")
    @classmethod
    def rays_are_pairs(cls, v: List[List[int]]) -> List[List[int]]:
        for r in v:
            if len(r) != 2:
                raise ValueError(f"ray {r} must have two integer entries")
        return v

    @field_validator("lambdas", mode="before")
    @classmethod
    def lambdas_are_rational(cls, v: Any) -> List[str]:
        return [_check_rational(x) for x in v]

    @model_validator(mode="after")
    def same_length(self) -> "FanSpec":
        if len(self.rays) != len(self.lambdas):
            raise ValueError(f"{len(self.rays)} rays but {len(self.lambdas)} lambdas")
        return self


class ToricBlowupSpec(BaseModel):
    kind: Literal["toric"] = "toric"
    corner: int = Field(ge=0)
    size: Rational
    force: bool = False

    @field_validator("size", mode="before")
    @classmethod
    def size_is_rational(cls, v: Any) -> str:
        return _check_rational(v)


class NonToricBlowupSpec(BaseModel):
    kind: Literal["nontoric"] = "nontoric"
    ray: List[int] = Field(min_length=2, max_length=2)
    sizes: List[Rational] = Field(min_length=1)

    @field_validator("sizes", mode="before")
    @classmethod
    def sizes_are_rational(cls, v: Any) -> List[str]:
        return [_check_rational(x) for x in v]


BlowupSpec = Annotated[Union[ToricBlowupSpec, NonToricBlowupSpec], Field(discriminator="kind")]


class TermSpec(BaseModel):
    exp: List[int] = Field(min_length=2, max_length=2)
    coeff: str = "1"


class ModelFile(BaseModel):
    """
    Model file: a fan and an ordered blowup log.

    Example (TOML):
        schema_version = 1
        name = "p2"
        [fan]
        rays = [[1, 0], [0, 1], [-1, -1]]
        lambdas = ["0", "0", "1"]
    """

    schema_version: Literal[1] = 1
    name: str = "model"
    trunc_order: Optional[Rational] = None
    fan: FanSpec
    blowups: List[BlowupSpec] = Field(default_factory=list)
    perturbation: List[TermSpec] = Field(default_factory=list)

    model_config = ConfigDict(extra="forbid")

    @field_validator("trunc_order", mode="before")
    @classmethod
    def trunc_is_rational(cls, v: Any) -> Optional[str]:
        return None if v is None else _check_rational(v)


class SeriesFile(BaseModel):
    """A raw Laurent series with Novikov coefficients in text form."""

    schema_version: Literal[1] = 1
    name: str = "series"
    trunc_order: Rational
    terms: List[TermSpec] = Field(min_length=1)

    model_config = ConfigDict(extra="forbid")

    @field_validator("trunc_order", mode="before")
    @classmethod
    def trunc_is_rational(cls, v: Any) -> str:
        return _check_rational(v)


# =========================
# RUN CONFIG
# =========================
class RunConfig(BaseModel):
    command: Command
    input: Optional[Path] = None
    trunc_order: Optional[Rational] = None
    tol: float = Field(default=1e-9, gt=0, le=1e-3)
    seed: int = 0
    json_path: Optional[Path] = None
    svg_path: Optional[Path] = None

    @field_validator("trunc_order", mode="before")
    @classmethod
    def trunc_is_rational(cls, v: Any) -> Optional[str]:
        if v is None:
            return None
        text = _check_rational(v)
        if as_fraction(text) <= 0:
            raise ValueError("trunc_order must be positive")
        return text

    @field_validator("json_path", "svg_path")
    @classmethod
    def parent_exists(cls, v: Optional[Path]) -> Optional[Path]:
        if v is not None and not v.resolve().parent.is_dir():
            raise ValueError(f"directory of {v} does not exist")
        return v


# =========================
# VERIFICATION
# =========================
class CheckResult(BaseModel):
    name: str
    passed: bool
    message: str = ""


class StepVerdict(BaseModel):
    step: int
    description: str
    found: int
    expected: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.found == self.expected and all(c.passed for c in self.checks)


class VerificationVerdict(BaseModel):
    model: str
    digest: str
    toric: int
    nontoric: int
    expected_rank: int
    steps: List[StepVerdict] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps) and all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Optional[str]:
        for s in self.steps:
            for c in s.checks:
                if not c.passed:
                    return f"step {s.step}: {c.name}: {c.message}"
            if s.found != s.expected:
                return f"step {s.step}: found {s.found} points, expected {s.expected}"
        for c in self.checks:
            if not c.passed:
                return f"{c.name}: {c.message}"
        return None

    def to_report(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        data["passed"] = self.passed
        data["first_failure"] = self.first_failure
        for step, raw in zip(self.steps, data["steps"]):
            raw["passed"] = step.passed
        return data

"""
Job files: TOML with [field], [ring], [module.<name>] and [run] sections.

    [field]
    char = 32003

    [ring]
    vars = ["x", "y", "z"]
    weights = [1, 1, 1]
    ideal = ["x^2 - y*z"]

    [module.m]
    type = "ideal"
    gens = ["x", "y", "z"]

    [run]
    commands = ["approx", "invariants"]
"""

import logging
import re
from typing import Literal

import galois
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from core.config import settings
from core.errors import HomogeneityError, JobReferenceError, ParseError
from services.algebra import FreeModule, GradedRing
from services.approximation import power_of_maximal_ideal
from services.modules import GradedModule

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

logger = logging.getLogger(__name__)

COMMANDS = ("approx", "hull", "rescomplex", "invariants", "fundamental", "betti", "is-mcm", "canonical", "index")
MODULE_TYPES = ("ideal", "presentation", "residue-field", "power", "residue-power", "quotient", "ring")

_TOML_POSITION = re.compile(r"line (\d+), column (\d+)")


# ---------------------------------------------------------------------------
# Job models
# ---------------------------------------------------------------------------
class FieldSection(BaseModel):
    char: int = Field(settings.characteristic, ge=2, description="Prime characteristic of the ground field")

    @field_validator("char")
    @classmethod
    def _check_prime(cls, v: int) -> int:
        if not galois.is_prime(v):
            raise ValueError(f"characteristic {v} is not prime")
        return v


class RingSection(BaseModel):
    vars: list[str] = Field(..., min_length=1, description="Variable names")
    weights: list[int] | None = Field(None, description="Positive variable degrees; all 1 when omitted")
    ideal: list[str] = Field(default_factory=list, description="Homogeneous generators of the defining ideal")

    @model_validator(mode="after")
    def _check_weights(self):
        if self.weights is not None:
            if len(self.weights) != len(self.vars):
                raise ValueError("weights must list one degree per variable")
            if any(w <= 0 for w in self.weights):
                raise ValueError("weights must be positive")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("variable names must be distinct")
        return self


class ModuleSpec(BaseModel):
    type: Literal["ideal", "presentation", "residue-field", "power", "residue-power", "quotient", "ring"] = Field(
        ..., description="How the module is given"
    )
    gens: list[str] = Field(default_factory=list, description="Ideal generators for 'ideal' and 'quotient'")
    matrix: list[list[str]] = Field(default_factory=list, description="Presentation matrix, row by row")
    degrees: list[int] | None = Field(None, description="Generator degrees of a presentation; all 0 when omitted")
    n: int = Field(1, ge=1, description="Exponent for 'power' and 'residue-power'")

    @model_validator(mode="after")
    def _check_shape(self):
        if self.type in ("ideal", "quotient") and not self.gens:
            raise ValueError(f"module type '{self.type}' needs gens")
        if self.type == "presentation":
            if not self.matrix and not self.degrees:
                raise ValueError("presentation needs a matrix or generator degrees")
            widths = {len(row) for row in self.matrix}
            if len(widths) > 1:
                raise ValueError("presentation rows must have equal length")
            if self.degrees is not None and self.matrix and len(self.degrees) != len(self.matrix):
                raise ValueError("presentation degrees must list one degree per row")
        return self


class RunSection(BaseModel):
    commands: list[str] = Field(default_factory=list, description="Commands executed by 'cma run'")
    module: str | None = Field(None, description="Module the commands run on; every module when omitted")

    @model_validator(mode="after")
    def _check_commands(self):
        unknown = [c for c in self.commands if c not in COMMANDS]
        if unknown:
            raise ValueError(f"unknown commands {unknown}")
        return self


class JobDescription(BaseModel):
    field: FieldSection = Field(default_factory=FieldSection)
    ring: RingSection
    module: dict[str, ModuleSpec] = Field(default_factory=dict, description="Named modules")
    run: RunSection = Field(default_factory=RunSection)

    def module_names(self) -> list[str]:
        return list(self.module)

    def spec(self, name: str) -> ModuleSpec:
        if name not in self.module:
            raise JobReferenceError(name)
        return self.module[name]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
def parse_job(text: str, characteristic: int | None = None) -> JobDescription:
    """Validate a job file. Every expression is parsed and checked for homogeneity here."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_POSITION.search(str(e))
        line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
        raise ParseError(f"Invalid job file: {e}", line, column) from e
    try:
        job = JobDescription.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        line = _line_of(text, first["loc"])
        raise ParseError(f"Invalid job file: {where}: {first['msg']}", line, 1 if line else None) from e
    if characteristic is not None:
        job.field.char = characteristic
    if job.run.module is not None:
        job.spec(job.run.module)
    # parse-time homogeneity checks
    ring = build_ring(job)
    for name in job.module:
        build_module(job, name, ring)
    logger.debug(f"Parsed job: {len(job.module)} modules, run {job.run.commands}")
    return job


def load_job(path: str, characteristic: int | None = None) -> JobDescription:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ParseError(f"Cannot read job file {path}: {e}") from e
    return parse_job(text, characteristic)


def _line_of(text: str, loc: tuple) -> int | None:
    """Line of the section header or key a validation error points at."""
    keys = [str(x) for x in loc if isinstance(x, str)]
    if not keys:
        return None
    header = None
    if keys[0] == "module" and len(keys) > 1:
        header = f"[module.{keys[1]}]"
    elif keys[0] in ("field", "ring", "run"):
        header = f"[{keys[0]}]"
    lines = text.splitlines()
    start = 0
    if header:
        for i, raw in enumerate(lines):
            if raw.strip() == header:
                start = i
                break
    leaf = keys[-1]
    for i in range(start, len(lines)):
        if re.match(rf"\s*{re.escape(leaf)}\s*=", lines[i]):
            return i + 1
    return start + 1 if header else None


# ---------------------------------------------------------------------------
# Building rings and modules
# ---------------------------------------------------------------------------
def build_ring(job: JobDescription) -> GradedRing:
    r = job.ring
    try:
        return GradedRing(r.vars, r.weights, r.ideal, characteristic=job.field.char)
    except HomogeneityError:
        raise
    except ParseError:
        raise
    except ValueError as e:
        raise ParseError(f"Invalid ring: {e}") from e


def _parse_homogeneous(ring: GradedRing, text: str) -> dict:
    f = ring.poly_ring.parse(text)
    if not ring.poly_ring.is_homogeneous(f):
        raise HomogeneityError(text)
    return f


def build_module(job: JobDescription, name: str, ring: GradedRing) -> GradedModule:
    spec = job.spec(name)
    kind = spec.type
    if kind == "ring":
        return GradedModule.free_module(ring, name=name)
    if kind == "residue-field":
        module = GradedModule.residue_field(ring)
        module.name = name
        return module
    if kind == "ideal":
        return GradedModule.ideal(ring, [_parse_homogeneous(ring, g) for g in spec.gens], name=name)
    if kind == "quotient":
        return GradedModule.quotient_ring(ring, [_parse_homogeneous(ring, g) for g in spec.gens], name=name)
    if kind == "power":
        return GradedModule.ideal(ring, power_of_maximal_ideal(ring, spec.n), name=name)
    if kind == "residue-power":
        return GradedModule.quotient_ring(ring, power_of_maximal_ideal(ring, spec.n), name=name)
    return _presentation_module(ring, spec, name)


def _presentation_module(ring: GradedRing, spec: ModuleSpec, name: str) -> GradedModule:
    pr = ring.poly_ring
    rows = len(spec.matrix) if spec.matrix else len(spec.degrees or ())
    degrees = tuple(spec.degrees) if spec.degrees is not None else (0,) * rows
    cols = len(spec.matrix[0]) if spec.matrix else 0
    relations = []
    for c in range(cols):
        column: dict = {}
        col_degree = None
        for r in range(rows):
            text = spec.matrix[r][c]
            f = pr.parse(text)
            if not f:
                continue
            if not pr.is_homogeneous(f):
                raise HomogeneityError(text)
            d = pr.poly_degree(f) + degrees[r]
            if col_degree is not None and d != col_degree:
                raise HomogeneityError(f"column {c + 1} of module '{name}'", "of mixed degree")
            col_degree = d
            column.update({(r, m): v for m, v in f.items()})
        if column:
            relations.append(column)
    return GradedModule(FreeModule(ring, degrees), relations, name=name)


def build_modules(job: JobDescription, ring: GradedRing, names: list[str] | None = None) -> dict[str, GradedModule]:
    names = job.module_names() if names is None else names
    return {name: build_module(job, name, ring) for name in names}

from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from desgraph.utils import si_format


class Role(str, Enum):
    UNIT = "unit"
    TREATMENT = "trt"
    RECORD = "rcrd"

    @property
    def abbreviation(self) -> str:
        return {"unit": "U", "trt": "T", "rcrd": "R"}[self.value]


class EdgeKind(str, Enum):
    NESTS = "nests"
    ALLOTS = "allots"
    RECORDS = "records"


class AllotmentKind(str, Enum):
    TRTS_TO_UNIT = "trts_to_unit"
    UNIT_TO_UNIT = "unit_to_unit"


Scalar = Union[int, float, str]


class FactorNode(BaseModel):
    id: int
    name: str
    role: Role
    value_type: str = "chr"
    # levels labelled name+index (True) or by their own values (False)
    indexed: bool = True
    # parent used for per-parent labels when serving with label_nested
    nesting_parent: Optional[int] = None
    conditioned_on: Optional[int] = None


class LevelNode(BaseModel):
    id: int
    factor: int
    label: str
    value: Scalar


class Allotment(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: List[str]
    rhs: str
    kind: AllotmentKind

    def __str__(self):
        return f"{':'.join(self.lhs)} ~ {self.rhs}"


class RangeRule(BaseModel):
    type: Literal["range"] = "range"
    min: Optional[float] = None
    max: Optional[float] = None
    min_inclusive: bool = False
    max_inclusive: bool = False

    @model_validator(mode="after")
    def _has_bound(self):
        if self.min is None and self.max is None:
            raise ValueError("range rule needs at least one bound")
        return self


class LevelsRule(BaseModel):
    type: Literal["levels"] = "levels"
    allowed: List[str] = Field(min_length=1)


class ValueTypeRule(BaseModel):
    type: Literal["valuetype"] = "valuetype"
    valuetype: Literal["numeric", "integer", "text"]


RuleKind = Annotated[
    Union[RangeRule, LevelsRule, ValueTypeRule], Field(discriminator="type")
]


class ValidationRule(BaseModel):
    record: str
    unit: str
    rule: RuleKind


VALIDATION_RULES = TypeAdapter(List[ValidationRule])


class ColumnInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    role: Optional[Role] = None
    levels: int
    value_type: str

    @property
    def role_tag(self) -> str:
        if self.role is None:
            return ""
        return f"<{self.role.abbreviation}({si_format(self.levels)})>"


class ExportManifest(BaseModel):
    title: str
    seed: Optional[int] = None
    files: List[str]
    rows: Dict[str, int]

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from desgraph.levels import LevelSpec
from desgraph.models import Scalar

BLOCK_KINDS = ("units", "trts", "rcrds", "expect", "allot", "assign", "output")


@dataclass(frozen=True)
class FactorDecl:
    name: str
    spec: LevelSpec
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RecordDecl:
    name: str
    unit: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExpectDecl:
    """
    `record < x` and friends carry `value`, `record in [...]` carries `allowed`
    """

    record: str
    op: str
    value: Optional[Scalar] = None
    allowed: Tuple[Scalar, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AllotDecl:
    lhs: Tuple[str, ...]
    rhs: str
    line: int = field(default=0, compare=False)

    @property
    def formula(self) -> str:
        return f"{':'.join(self.lhs)} ~ {self.rhs}"


@dataclass(frozen=True)
class OrderDecl:
    # "trts" for order, "units" for unit_order
    target: str
    names: Tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SeedDecl:
    value: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ConstrainDecl:
    unit: str
    names: Tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LabelNestedDecl:
    names: Union[bool, Tuple[str, ...]]
    line: int = field(default=0, compare=False)


Item = Union[
    FactorDecl,
    RecordDecl,
    ExpectDecl,
    AllotDecl,
    OrderDecl,
    SeedDecl,
    ConstrainDecl,
    LabelNestedDecl,
]


@dataclass(frozen=True)
class Block:
    kind: str
    items: Tuple[Item, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SpecAst:
    """
    A parsed design spec: the title and its blocks in document order
    """

    title: str
    blocks: Tuple[Block, ...] = ()

    def items(self, kind: str) -> Tuple[Item, ...]:
        return tuple(item for block in self.blocks if block.kind == kind for item in block.items)

    @property
    def units(self) -> Tuple[FactorDecl, ...]:
        return self.items("units")  # type: ignore

    @property
    def trts(self) -> Tuple[FactorDecl, ...]:
        return self.items("trts")  # type: ignore

    @property
    def rcrds(self) -> Tuple[RecordDecl, ...]:
        return self.items("rcrds")  # type: ignore

    @property
    def allotments(self) -> Tuple[AllotDecl, ...]:
        return self.items("allot")  # type: ignore

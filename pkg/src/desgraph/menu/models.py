from dataclasses import dataclass
from typing import Any, Dict, Tuple

from pydantic import BaseModel


@dataclass(frozen=True)
class MenuEntry:
    name: str
    args: Tuple[str, ...]
    name_full: str


class Recipe(BaseModel):
    """
    A named design written out as spec text, ready to copy, edit or take out
    """

    kind: str
    name_full: str
    params: Dict[str, Any]
    seed: int
    source: str

    def __str__(self):
        return self.source

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
from loguru import logger

from desgraph.exceptions.exceptions import (
    CyclicLinkError,
    DuplicateFactorError,
    UnknownFactorError,
)
from desgraph.models import EdgeKind, FactorNode, LevelNode, Role, Scalar


class Provenance(object):
    """
    Low-level store of the factor graph and the level graph.

    Factor and level ids are increasing integers given at creation, every listing is ordered by id.
    """

    def __init__(self):
        self.factor_graph = nx.DiGraph()
        self.level_graph = nx.DiGraph()
        self._factor_ids: Dict[str, int] = {}
        self._level_ids: Dict[int, List[int]] = {}
        self._next_factor_id = 1
        self._next_level_id = 1

    def copy(self) -> "Provenance":
        other = Provenance()
        other.factor_graph = self.factor_graph.copy()
        other.level_graph = self.level_graph.copy()
        other._factor_ids = dict(self._factor_ids)
        other._level_ids = {fid: list(ids) for fid, ids in self._level_ids.items()}
        other._next_factor_id = self._next_factor_id
        other._next_level_id = self._next_level_id
        return other

    # factors

    def add_factor(self, name: str, role: Role, **attrs) -> FactorNode:
        if name in self._factor_ids:
            raise DuplicateFactorError(f"Factor {name!r} is already defined", name=name)
        node = FactorNode(id=self._next_factor_id, name=name, role=role, **attrs)
        self._next_factor_id += 1
        self.factor_graph.add_node(node.id, factor=node)
        self._factor_ids[name] = node.id
        self._level_ids[node.id] = []
        logger.debug(f"Factor {name} ({role.value}) created with id {node.id}")
        return node

    def update_factor(self, fid: int, **changes) -> FactorNode:
        node = self.factor(fid).model_copy(update=changes)
        self.factor_graph.nodes[fid]["factor"] = node
        return node

    def has_factor(self, name: str) -> bool:
        return name in self._factor_ids

    def factor(self, key: Union[str, int]) -> FactorNode:
        """
        Factor by name or id
        """
        if isinstance(key, str):
            if key not in self._factor_ids:
                raise UnknownFactorError(f"Factor {key!r} is not defined", name=key)
            key = self._factor_ids[key]
        return self.factor_graph.nodes[key]["factor"]

    def factors(self, role: Optional[Role] = None) -> List[FactorNode]:
        nodes = [self.factor_graph.nodes[fid]["factor"] for fid in sorted(self.factor_graph)]
        if role is None:
            return nodes
        return [node for node in nodes if node.role == role]

    def link_factors(self, src: int, dst: int, kind: EdgeKind):
        if src == dst or nx.has_path(self.factor_graph, dst, src):
            raise CyclicLinkError(
                f"Linking {self.factor(src).name} to {self.factor(dst).name} creates a cycle"
            )
        self.factor_graph.add_edge(src, dst, kind=kind)
        logger.debug(
            f"Edge {self.factor(src).name} -> {self.factor(dst).name} ({kind.value})"
        )

    def factor_edges(self) -> List[Tuple[int, int, EdgeKind]]:
        return sorted(
            (src, dst, data["kind"]) for src, dst, data in self.factor_graph.edges(data=True)
        )

    def parents(self, fid: int, role: Optional[Role] = None) -> List[FactorNode]:
        nodes = [self.factor(pid) for pid in sorted(self.factor_graph.predecessors(fid))]
        return [node for node in nodes if role is None or node.role == role]

    def children(self, fid: int, role: Optional[Role] = None) -> List[FactorNode]:
        nodes = [self.factor(cid) for cid in sorted(self.factor_graph.successors(fid))]
        return [node for node in nodes if role is None or node.role == role]

    def unit_ancestors(self, fid: int, exclude: Iterable[int] = ()) -> List[FactorNode]:
        """
        Unit factors reachable upwards through unit-to-unit edges
        :param exclude: unit factors not to walk through
        """
        blocked = set(exclude)
        seen: Set[int] = set()
        stack = [fid]
        while stack:
            for parent in self.parents(stack.pop(), Role.UNIT):
                if parent.id not in seen and parent.id not in blocked:
                    seen.add(parent.id)
                    stack.append(parent.id)
        return [self.factor(pid) for pid in sorted(seen)]

    # levels

    def add_levels(
        self, fid: int, labels: Sequence[str], values: Sequence[Scalar]
    ) -> List[LevelNode]:
        created = []
        for label, value in zip(labels, values):
            node = LevelNode(id=self._next_level_id, factor=fid, label=label, value=value)
            self._next_level_id += 1
            self.level_graph.add_node(node.id, level=node)
            self._level_ids[fid].append(node.id)
            created.append(node)
        return created

    def level(self, lid: int) -> LevelNode:
        return self.level_graph.nodes[lid]["level"]

    def levels(self, fid: int) -> List[LevelNode]:
        return [self.level(lid) for lid in self._level_ids.get(fid, [])]

    def link_levels(self, src: int, dst: int, kind: EdgeKind):
        self.level_graph.add_edge(src, dst, kind=kind)

    def unlink_levels(self, src_factor: int, dst_factor: int) -> int:
        """
        Drop every level edge from one factor to another, used when assignment is redone
        """
        dst_levels = set(self._level_ids.get(dst_factor, []))
        edges = [
            (src, dst)
            for src in self._level_ids.get(src_factor, [])
            for dst in self.level_graph.successors(src)
            if dst in dst_levels
        ]
        self.level_graph.remove_edges_from(edges)
        return len(edges)

    def level_parents(self, lid: int, fid: Optional[int] = None) -> List[int]:
        parents = sorted(self.level_graph.predecessors(lid))
        if fid is None:
            return parents
        return [pid for pid in parents if self.level(pid).factor == fid]

    def unit_level_ancestors(self, lid: int) -> Dict[int, Set[int]]:
        """
        Unit levels above a unit level, grouped by factor id
        """
        found: Dict[int, Set[int]] = {}
        seen = {lid}
        stack = [lid]
        while stack:
            for pid in self.level_graph.predecessors(stack.pop()):
                if pid in seen:
                    continue
                parent = self.level(pid)
                if self.factor(parent.factor).role != Role.UNIT:
                    continue
                seen.add(pid)
                found.setdefault(parent.factor, set()).add(pid)
                stack.append(pid)
        return found

    def ancestor_level(self, lid: int, fid: int) -> Optional[int]:
        """
        The single level of unit factor `fid` above `lid`, or None
        """
        if self.level(lid).factor == fid:
            return lid
        found = self.unit_level_ancestors(lid).get(fid, set())
        return next(iter(found)) if len(found) == 1 else None

    def check_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(
            self.factor_graph
        ) and nx.is_directed_acyclic_graph(self.level_graph)

    # combining

    def merged(self, other: "Provenance") -> "Provenance":
        """
        Union with another provenance, ids of `other` shifted after the ids of this one
        """
        for name in other._factor_ids:
            if name in self._factor_ids:
                raise DuplicateFactorError(
                    f"Factor {name!r} is defined in both designs", name=name
                )
        out = self.copy()
        fshift = self._next_factor_id - 1
        lshift = self._next_level_id - 1

        def shifted(fid: Optional[int]) -> Optional[int]:
            return None if fid is None else fid + fshift

        for node in other.factors():
            moved = node.model_copy(
                update={
                    "id": node.id + fshift,
                    "nesting_parent": shifted(node.nesting_parent),
                    "conditioned_on": shifted(node.conditioned_on),
                }
            )
            out.factor_graph.add_node(moved.id, factor=moved)
            out._factor_ids[moved.name] = moved.id
            out._level_ids[moved.id] = [
                lid + lshift for lid in other._level_ids.get(node.id, [])
            ]
        for src, dst, data in other.factor_graph.edges(data=True):
            out.factor_graph.add_edge(src + fshift, dst + fshift, **data)
        for lid in sorted(other.level_graph):
            level = other.level(lid)
            out.level_graph.add_node(
                lid + lshift,
                level=level.model_copy(
                    update={"id": lid + lshift, "factor": level.factor + fshift}
                ),
            )
        for src, dst, data in other.level_graph.edges(data=True):
            out.level_graph.add_edge(src + lshift, dst + lshift, **data)
        out._next_factor_id = other._next_factor_id + fshift
        out._next_level_id = other._next_level_id + lshift
        return out

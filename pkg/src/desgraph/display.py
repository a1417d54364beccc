import json
from typing import TYPE_CHECKING, List

from desgraph.models import FactorNode, Role

if TYPE_CHECKING:
    from desgraph.design import Design

GRAPHS = ("factors", "levels")
FORMATS = ("dot", "json")


def _children(design: "Design", node: FactorNode) -> List[FactorNode]:
    prov = design.provenance
    return [child for child in prov.children(node.id) if child.role in (Role.UNIT, Role.RECORD)]


def _branch(design: "Design", node: FactorNode) -> str:
    if node.role == Role.RECORD:
        return f"{node.name} (record)"
    return f"{node.name} ({len(design.provenance.levels(node.id))} levels)"


def _tree_lines(design: "Design", nodes: List[FactorNode], prefix: str) -> List[str]:
    lines = []
    for i, node in enumerate(nodes):
        last = i == len(nodes) - 1
        elbow = "\\-" if last else "+-"
        lines.append(f"{prefix}{elbow}{_branch(design, node)}")
        if node.role == Role.UNIT:
            lines.extend(_tree_lines(design, _children(design, node), prefix + ("  " if last else "| ")))
    return lines


def print_tree(design: "Design") -> str:
    """
    Title followed by the factors as a tree: units branch into the units and records below
    them, a unit below several parents shows under each, treatments sit at the root
    """
    prov = design.provenance
    roots = [
        node
        for node in prov.factors()
        if node.role == Role.TREATMENT or (node.role == Role.UNIT and not prov.parents(node.id, Role.UNIT))
    ]
    return "\n".join([design.title] + _tree_lines(design, roots, ""))


def _quote(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _factor_document(design: "Design") -> dict:
    prov = design.provenance
    return {
        "title": design.title,
        "nodes": [
            {
                "id": node.id,
                "name": node.name,
                "role": node.role.value,
                "levels": len(prov.levels(node.id)),
            }
            for node in prov.factors()
        ],
        "edges": [
            {"from": src, "to": dst, "kind": kind.value} for src, dst, kind in prov.factor_edges()
        ],
    }


def _level_document(design: "Design") -> dict:
    prov = design.provenance
    nodes = []
    for factor in prov.factors():
        for level in prov.levels(factor.id):
            nodes.append(
                {
                    "id": level.id,
                    "name": level.label,
                    "factor": factor.name,
                    "role": factor.role.value,
                    "value": level.value,
                }
            )
    edges = sorted(
        (src, dst, data["kind"].value) for src, dst, data in prov.level_graph.edges(data=True)
    )
    return {
        "title": design.title,
        "nodes": sorted(nodes, key=lambda node: node["id"]),
        "edges": [{"from": src, "to": dst, "kind": kind} for src, dst, kind in edges],
    }


def _dot(document: dict, which: str) -> str:
    lines = ["digraph design {"]
    for node in document["nodes"]:
        label = f"{node['name']} ({node['levels']})" if which == "factors" else node["name"]
        lines.append(f"  n{node['id']} [label={_quote(label)}, role={_quote(node['role'])}];")
    for edge in document["edges"]:
        lines.append(f"  n{edge['from']} -> n{edge['to']} [kind={_quote(edge['kind'])}];")
    lines.append("}")
    return "\n".join(lines)


def graph_export(design: "Design", which: str = "factors", fmt: str = "dot") -> str:
    """
    DOT or JSON text of the factor graph or the level graph, nodes and edges ordered by id
    """
    if which not in GRAPHS:
        raise ValueError(f"which must be one of {GRAPHS}, got {which!r}")
    if fmt not in FORMATS:
        raise ValueError(f"fmt must be one of {FORMATS}, got {fmt!r}")
    document = _factor_document(design) if which == "factors" else _level_document(design)
    if fmt == "json":
        return json.dumps(document, indent=2)
    return _dot(document, which)

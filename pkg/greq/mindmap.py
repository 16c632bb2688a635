"""Concept-map views of a model for managerial review (Graphviz dot and FreeMind).

A map is first built as a neutral tree of :class:`MapNode` plus relationship
links, then handed to one of the renderers. Node identifiers are the element kind
and name (``goal:Déposer une soumission``), so they never depend on iteration
order.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from lxml import etree

from .model import GreqError, Goal, Model, Step, responsibility_map
from .printer import format_actions

logger = logging.getLogger(__name__)

FREEMIND_VERSION = "1.0.1"

DOT_SHAPES = {
    "root": "doubleoctagon",
    "branch": "folder",
    "organization": "house",
    "agent": "ellipse",
    "goal": "box",
    "entity": "box3d",
    "attribute": "note",
    "privilege": "component",
    "step": "cds",
}


class MindmapFilterError(GreqError):
    """The requested focus cannot be resolved against the model."""


class FilterMode(str, Enum):
    FULL = "full"
    CONCEPTS_ONLY = "concepts_only"
    GOALS_ONLY = "goals_only"
    GOALS_OF_AGENT = "goals_of_agent"


@dataclass(frozen=True)
class MapFilter:
    mode: FilterMode = FilterMode.FULL
    agent: Optional[str] = None

    @classmethod
    def full(cls) -> "MapFilter":
        return cls(FilterMode.FULL)

    @classmethod
    def concepts_only(cls) -> "MapFilter":
        return cls(FilterMode.CONCEPTS_ONLY)

    @classmethod
    def goals_only(cls) -> "MapFilter":
        return cls(FilterMode.GOALS_ONLY)

    @classmethod
    def goals_of_agent(cls, agent: str) -> "MapFilter":
        return cls(FilterMode.GOALS_OF_AGENT, agent)


@dataclass
class MapNode:
    node_id: str
    kind: str
    label: str
    children: List["MapNode"] = field(default_factory=list)

    def walk(self) -> Iterator["MapNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class MapLink:
    source: str
    target: str
    label: str


@dataclass
class MindMap:
    root: MapNode
    links: List[MapLink] = field(default_factory=list)

    def node_ids(self) -> List[str]:
        return [node.node_id for node in self.root.walk()]


def _organization_branch(model: Model) -> MapNode:
    branch = MapNode("branch:Organization", "branch", "Organization")
    for org in model.organizations:
        node = MapNode(f"org:{org.name}", "organization", org.name)
        node.children = [MapNode(f"agent:{agent.name}", "agent", agent.name) for agent in org.agents]
        branch.children.append(node)
    return branch


def _goal_label(goal: Goal, owner: Optional[str]) -> str:
    if goal.is_composite:
        return goal.name
    label = goal.name
    if owner:
        label += f" [{owner}]"
    if goal.entry:
        label += f" → {goal.entry}"
    return label


def _goal_nodes(goals: Tuple[Goal, ...], owners: Dict[str, Optional[str]], keep: Callable[[Goal], bool]) -> List[MapNode]:
    nodes: List[MapNode] = []
    for goal in goals:
        children = _goal_nodes(goal.sub_goals, owners, keep)
        if keep(goal):
            nodes.append(MapNode(f"goal:{goal.name}", "goal", _goal_label(goal, owners.get(goal.name)), children))
        else:
            # Matching descendants are lifted to the nearest kept ancestor.
            nodes.extend(children)
    return nodes


def _concept_branch(model: Model) -> Tuple[MapNode, List[MapLink]]:
    branch = MapNode("branch:Concepts", "branch", "Concepts")
    for entity in model.entities:
        node = MapNode(f"entity:{entity.name}", "entity", entity.name)
        node.children = [
            MapNode(f"attribute:{entity.name}.{attr.name}", "attribute", f"{attr.name}: {attr.kind.value}")
            for attr in entity.attributes
        ]
        branch.children.append(node)
    links = [MapLink(f"entity:{rel.source}", f"entity:{rel.target}", rel.name) for rel in model.relationships]
    return branch, links


def _step_label(step: Step) -> str:
    if step.via is None:
        return f"entry {step.entity} {format_actions(step)}"
    return f"{step.via} → {step.entity} {format_actions(step)}"


def _privilege_branch(model: Model, keep: Callable[[Goal], bool]) -> MapNode:
    branch = MapNode("branch:Privileges", "branch", "Privileges")
    for goal in model.leaf_goals():
        privileges = model.privileges_for(goal.name)
        if not privileges or not keep(goal):
            continue
        goal_node = MapNode(f"privileges:{goal.name}", "privilege", goal.name)
        for number, privilege in enumerate(privileges, start=1):
            parent = goal_node
            for index, step in enumerate(privilege.walk()):
                node = MapNode(f"step:{goal.name}#{number}.{index}", "step", _step_label(step))
                parent.children.append(node)
                parent = node
        branch.children.append(goal_node)
    return branch


def build_mindmap(model: Model, focus: MapFilter = MapFilter()) -> MindMap:
    owners = responsibility_map(model)
    if focus.mode is FilterMode.GOALS_OF_AGENT:
        known = {agent.name for agent in model.all_agents()}
        if focus.agent not in known:
            raise MindmapFilterError(f"unknown agent '{focus.agent}'")

        def keep(goal: Goal) -> bool:
            return owners.get(goal.name) == focus.agent
    else:

        def keep(goal: Goal) -> bool:
            return True

    root = MapNode("root", "root", model.display_name())
    links: List[MapLink] = []
    mode = focus.mode
    if mode in (FilterMode.FULL, FilterMode.GOALS_ONLY):
        root.children.append(_organization_branch(model))
    if mode in (FilterMode.FULL, FilterMode.GOALS_ONLY, FilterMode.GOALS_OF_AGENT):
        root.children.append(MapNode("branch:Goals", "branch", "Goals", _goal_nodes(model.goals, owners, keep)))
    if mode in (FilterMode.FULL, FilterMode.CONCEPTS_ONLY):
        concepts, links = _concept_branch(model)
        root.children.append(concepts)
    if mode in (FilterMode.FULL, FilterMode.GOALS_OF_AGENT):
        root.children.append(_privilege_branch(model, keep))

    mindmap = MindMap(root, links)
    logger.debug("mind map %s: %d node(s)", mode.value, len(mindmap.node_ids()))
    return mindmap


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(mindmap: MindMap) -> str:
    lines = [f"digraph {_dot_quote(mindmap.root.label)} {{"]
    nodes = list(mindmap.root.walk())
    for node in nodes:
        lines.append(f"  {_dot_quote(node.node_id)} [label={_dot_quote(node.label)}, shape={DOT_SHAPES[node.kind]}];")
    for node in nodes:
        for child in node.children:
            lines.append(f"  {_dot_quote(node.node_id)} -> {_dot_quote(child.node_id)};")
    for link in mindmap.links:
        lines.append(
            f"  {_dot_quote(link.source)} -> {_dot_quote(link.target)} [label={_dot_quote(link.label)}, dir=none];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _freemind_node(parent: etree._Element, node: MapNode, links: Dict[str, List[MapLink]]) -> None:
    element = etree.SubElement(parent, "node", ID=node.node_id, TEXT=node.label)
    for link in links.get(node.node_id, []):
        etree.SubElement(element, "arrowlink", DESTINATION=link.target, ENDARROW="None", STARTARROW="None")
    for link in links.get(node.node_id, []):
        etree.SubElement(element, "attribute", NAME=link.label, VALUE=link.target.split(":", 1)[1])
    for child in node.children:
        _freemind_node(element, child, links)


def render_freemind(mindmap: MindMap) -> str:
    by_source: Dict[str, List[MapLink]] = {}
    for link in mindmap.links:
        by_source.setdefault(link.source, []).append(link)
    document = etree.Element("map", version=FREEMIND_VERSION)
    _freemind_node(document, mindmap.root, by_source)
    return etree.tostring(document, encoding="unicode", pretty_print=True)


RENDERERS: Dict[str, Callable[[MindMap], str]] = {
    "dot": render_dot,
    "freemind": render_freemind,
}


def emit_mindmap(model: Model, focus: MapFilter = MapFilter(), output_format: str = "dot") -> str:
    """Render the (possibly filtered) concept map of a model as dot or FreeMind text."""
    renderer = RENDERERS.get(output_format)
    if renderer is None:
        raise MindmapFilterError(f"unknown mind map format '{output_format}'")
    return renderer(build_mindmap(model, focus))

"""Concept graph: entities as nodes, relationships as edges.

Traversal ignores edge direction: a privilege may walk a relationship from its
target back to its source.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Set, Tuple

from .model import Action, GreqError, Model, Privilege, ordered_actions

logger = logging.getLogger(__name__)


class GraphError(GreqError):
    """A concept-graph query that cannot be answered for this model."""


class Edge(NamedTuple):
    name: str
    source: str
    target: str

    def joins(self, first: str, second: str) -> bool:
        return (first, second) in ((self.source, self.target), (self.target, self.source))


@dataclass(frozen=True)
class ConceptGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    def edge(self, name: str) -> Optional[Edge]:
        return next((edge for edge in self.edges if edge.name == name), None)


class WalkCheck(NamedTuple):
    valid: bool
    offending_step: Optional[int] = None


@dataclass(frozen=True)
class GoalView:
    """The partial view of the information system granted to one goal."""

    goal: str
    entities: Tuple[str, ...]
    actions_by_entity: Mapping[str, FrozenSet[Action]]
    updated_attributes: Mapping[str, Tuple[str, ...]]


def build_graph(model: Model) -> ConceptGraph:
    graph = ConceptGraph(
        nodes=tuple(entity.name for entity in model.entities),
        edges=tuple(Edge(rel.name, rel.source, rel.target) for rel in model.relationships),
    )
    logger.debug("concept graph: %d node(s), %d edge(s)", len(graph.nodes), len(graph.edges))
    return graph


def walk_is_valid(graph: ConceptGraph, privilege: Privilege) -> WalkCheck:
    """Check that every step's relationship joins the previous entity to the step's entity."""
    previous = privilege.entry_step.entity
    for index, step in enumerate(privilege.steps):
        edge = graph.edge(step.via) if step.via is not None else None
        if edge is None or not edge.joins(previous, step.entity):
            return WalkCheck(False, index)
        previous = step.entity
    return WalkCheck(True)


def neighbours(graph: ConceptGraph, entity: str) -> List[Tuple[str, str]]:
    """(relationship, entity) pairs adjacent to ``entity``, ignoring direction."""
    adjacent = []
    for edge in graph.edges:
        if edge.source == entity:
            adjacent.append((edge.name, edge.target))
        if edge.target == entity and edge.source != entity:
            adjacent.append((edge.name, edge.source))
    return adjacent


def reachable_entities(graph: ConceptGraph, start: str) -> FrozenSet[str]:
    if start not in graph.nodes:
        raise GraphError(f"unknown entity '{start}'")
    seen: Set[str] = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for _, other in neighbours(graph, current):
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return frozenset(seen)


def goal_view(model: Model, goal_name: str, graph: Optional[ConceptGraph] = None) -> GoalView:
    goal = model.find_goal(goal_name)
    if goal is None:
        raise GraphError(f"unknown goal '{goal_name}'")
    if goal.is_composite:
        raise GraphError(f"goal '{goal_name}' is decomposed; only leaf goals carry a view")
    privileges = model.privileges_for(goal_name)
    if not privileges:
        raise GraphError(f"goal '{goal_name}' has no privilege")
    graph = graph or build_graph(model)

    entities: List[str] = []
    actions: Dict[str, Set[Action]] = {}
    updated: Dict[str, List[str]] = {}
    for privilege in privileges:
        check = walk_is_valid(graph, privilege)
        if not check.valid:
            raise GraphError(
                f"privilege for '{goal_name}' has an invalid walk at step {check.offending_step}"
            )
        for step in privilege.walk():
            if step.entity not in actions:
                entities.append(step.entity)
                actions[step.entity] = set()
                updated[step.entity] = []
            actions[step.entity] |= step.actions
            for attribute in step.updated_attributes:
                if attribute not in updated[step.entity]:
                    updated[step.entity].append(attribute)

    return GoalView(
        goal=goal_name,
        entities=tuple(entities),
        actions_by_entity={name: frozenset(actions[name]) for name in entities},
        updated_attributes={name: tuple(updated[name]) for name in entities},
    )


def render_goal_view(view: GoalView) -> str:
    """Compact text such as ``Rapport{create, update(commentaire)}, Article{read}``."""
    parts = []
    for entity in view.entities:
        rendered = []
        for action in ordered_actions(view.actions_by_entity[entity]):
            attributes = view.updated_attributes[entity]
            if action is Action.UPDATE and attributes:
                rendered.append(f"update({', '.join(attributes)})")
            else:
                rendered.append(action.value)
        parts.append(f"{entity}{{{', '.join(rendered)}}}")
    return ", ".join(parts)

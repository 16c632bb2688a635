import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import PurePosixPath
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

logger = logging.getLogger(__name__)

# Names are written on one line in source and as XML attribute text.
UNPRINTABLE_NAME_CHARACTERS = re.compile(r"[\x00-\x1f\x7f-\x9f\ud800-\udfff\ufffe\uffff]")
MAX_GOAL_DEPTH = 32


class GreqError(Exception):
    """Base class for every error raised by the toolkit."""


class AttributeKind(str, Enum):
    TEXT = "text"
    NUMBER = "number"
    DATE = "date"
    BOOLEAN = "boolean"


class Action(str, Enum):
    CREATE = "create"
    READ = "read"
    UPDATE = "update"
    DELETE = "delete"


ACTION_ORDER: Tuple[Action, ...] = (Action.CREATE, Action.READ, Action.UPDATE, Action.DELETE)


def ordered_actions(actions: FrozenSet[Action]) -> List[Action]:
    return [action for action in ACTION_ORDER if action in actions]


@dataclass(frozen=True)
class Agent:
    name: str


@dataclass(frozen=True)
class Organization:
    name: str
    agents: Tuple[Agent, ...] = ()


@dataclass(frozen=True)
class Goal:
    """Node of the goal decomposition forest.

    ``children`` is ``None`` for a leaf goal. A tuple, even an empty one, marks a
    decomposed goal; the empty tuple is the degenerate ``{}`` decomposition.
    """

    name: str
    responsible: Optional[str] = None
    entry: Optional[str] = None
    children: Optional[Tuple["Goal", ...]] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def is_composite(self) -> bool:
        return self.children is not None

    @property
    def sub_goals(self) -> Tuple["Goal", ...]:
        return self.children or ()


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: AttributeKind


@dataclass(frozen=True)
class Entity:
    name: str
    attributes: Tuple[Attribute, ...] = ()

    def attribute_names(self) -> List[str]:
        return [attribute.name for attribute in self.attributes]


@dataclass(frozen=True)
class Relationship:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Step:
    entity: str
    actions: FrozenSet[Action]
    via: Optional[str] = None
    updated_attributes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Privilege:
    goal: str
    entry_step: Step
    steps: Tuple[Step, ...] = ()

    def walk(self) -> Tuple[Step, ...]:
        """Entry step followed by the traversal steps."""
        return (self.entry_step,) + self.steps


@dataclass(frozen=True)
class Model:
    source_name: str = ""
    organizations: Tuple[Organization, ...] = ()
    goals: Tuple[Goal, ...] = ()
    entities: Tuple[Entity, ...] = ()
    relationships: Tuple[Relationship, ...] = ()
    privileges: Tuple[Privilege, ...] = ()

    def all_agents(self) -> List[Agent]:
        return [agent for organization in self.organizations for agent in organization.agents]

    def iter_goals(self) -> Iterator[Goal]:
        """Yield every goal of the forest in pre-order."""
        stack = list(reversed(self.goals))
        while stack:
            goal = stack.pop()
            yield goal
            stack.extend(reversed(goal.sub_goals))

    def leaf_goals(self) -> List[Goal]:
        return [goal for goal in self.iter_goals() if goal.is_leaf]

    def find_goal(self, name: str) -> Optional[Goal]:
        return next((goal for goal in self.iter_goals() if goal.name == name), None)

    def find_entity(self, name: str) -> Optional[Entity]:
        return next((entity for entity in self.entities if entity.name == name), None)

    def find_relationship(self, name: str) -> Optional[Relationship]:
        return next((rel for rel in self.relationships if rel.name == name), None)

    def privileges_for(self, goal_name: str) -> List[Privilege]:
        return [privilege for privilege in self.privileges if privilege.goal == goal_name]

    def display_name(self) -> str:
        name = PurePosixPath(self.source_name.replace("\\", "/")).name
        if name.endswith(".greq"):
            name = name[: -len(".greq")]
        return name or "model"


def responsibility_map(model: Model) -> Dict[str, Optional[str]]:
    """Map each goal name to its responsible agent, inherited from the nearest ancestor."""
    resolved: Dict[str, Optional[str]] = {}
    stack: List[Tuple[Goal, Optional[str]]] = [(root, None) for root in reversed(model.goals)]
    while stack:
        goal, inherited = stack.pop()
        owner = goal.responsible or inherited
        resolved[goal.name] = owner
        stack.extend((child, owner) for child in reversed(goal.sub_goals))
    return resolved


def goal_levels(model: Model) -> Iterator[Tuple[Goal, int]]:
    """Yield every goal in pre-order with its level, roots being level 1."""
    stack = [(root, 1) for root in reversed(model.goals)]
    while stack:
        goal, level = stack.pop()
        yield goal, level
        stack.extend((child, level + 1) for child in reversed(goal.sub_goals))


def goal_tree_depth(model: Model) -> int:
    return max((level for _, level in goal_levels(model)), default=0)


@dataclass(frozen=True)
class ModelIssue:
    """A violated construction invariant."""

    invariant: str
    kind: str
    name: str
    message: str

    def __str__(self) -> str:
        return f"[{self.invariant}] {self.kind} '{self.name}': {self.message}"


class ModelError(GreqError):
    def __init__(self, issues: List[ModelIssue]):
        super().__init__("; ".join(str(issue) for issue in issues) or "invalid model")
        self.issues = list(issues)


def _duplicates(kind: str, names: List[str]) -> List[ModelIssue]:
    seen = set()
    issues = []
    for name in names:
        if name in seen:
            issues.append(
                ModelIssue("unique-names", kind, name, f"{kind} '{name}' is declared more than once")
            )
        seen.add(name)
    return issues


def check_model(model: Model) -> List[ModelIssue]:
    """Return every construction invariant the model violates, in a stable order."""
    issues: List[ModelIssue] = []
    goals = list(model.iter_goals())
    agents = model.all_agents()

    named = (
        [("organization", org.name) for org in model.organizations]
        + [("agent", agent.name) for agent in agents]
        + [("goal", goal.name) for goal in goals]
        + [("entity", entity.name) for entity in model.entities]
        + [("relationship", rel.name) for rel in model.relationships]
        + [(f"attribute of {entity.name}", attr.name) for entity in model.entities for attr in entity.attributes]
    )
    for kind, name in named:
        if not name:
            issues.append(ModelIssue("non-empty-name", kind, name, f"{kind} has an empty name"))
        elif UNPRINTABLE_NAME_CHARACTERS.search(name):
            issues.append(
                ModelIssue("printable-name", kind, name, f"{kind} name contains an unprintable character")
            )
    if UNPRINTABLE_NAME_CHARACTERS.search(model.source_name):
        issues.append(
            ModelIssue("printable-name", "model", model.source_name, "source name contains an unprintable character")
        )
    for goal, level in goal_levels(model):
        if level == MAX_GOAL_DEPTH + 1:
            issues.append(
                ModelIssue("goal-depth", "goal", goal.name, f"goals nest deeper than {MAX_GOAL_DEPTH} levels")
            )

    issues += _duplicates("organization", [org.name for org in model.organizations])
    issues += _duplicates("agent", [agent.name for agent in agents])
    issues += _duplicates("goal", [goal.name for goal in goals])
    issues += _duplicates("entity", [entity.name for entity in model.entities])
    issues += _duplicates("relationship", [rel.name for rel in model.relationships])
    for entity in model.entities:
        issues += _duplicates(f"attribute of {entity.name}", entity.attribute_names())

    agent_names = {agent.name for agent in agents}
    entities = {entity.name: entity for entity in model.entities}
    relationships = {rel.name for rel in model.relationships}
    goals_by_name = {goal.name: goal for goal in goals}

    def _unresolved(kind: str, name: str, what: str, target: str) -> ModelIssue:
        return ModelIssue("resolved-reference", kind, name, f"unknown {what} '{target}'")

    for goal in goals:
        if goal.responsible is not None and goal.responsible not in agent_names:
            issues.append(_unresolved("goal", goal.name, "agent", goal.responsible))
        if goal.entry is not None and goal.entry not in entities:
            issues.append(_unresolved("goal", goal.name, "entity", goal.entry))
        if goal.children == () and (goal.responsible or goal.entry):
            issues.append(
                ModelIssue(
                    "empty-decomposition",
                    "goal",
                    goal.name,
                    "an empty decomposition cannot carry responsible or entry",
                )
            )

    for rel in model.relationships:
        for end in (rel.source, rel.target):
            if end not in entities:
                issues.append(_unresolved("relationship", rel.name, "entity", end))

    for privilege in model.privileges:
        goal = goals_by_name.get(privilege.goal)
        if goal is None:
            issues.append(_unresolved("privilege", privilege.goal, "goal", privilege.goal))
        elif goal.is_composite:
            issues.append(
                ModelIssue(
                    "leaf-privilege",
                    "privilege",
                    privilege.goal,
                    f"goal '{goal.name}' is decomposed; privileges attach to leaf goals only",
                )
            )
        for index, step in enumerate(privilege.walk()):
            is_entry = index == 0
            if is_entry != (step.via is None):
                issues.append(
                    ModelIssue(
                        "entry-step-shape",
                        "privilege",
                        privilege.goal,
                        "only the entry step may omit its relationship",
                    )
                )
            if step.via is not None and step.via not in relationships:
                issues.append(_unresolved("privilege", privilege.goal, "relationship", step.via))
            if not step.actions:
                issues.append(
                    ModelIssue(
                        "non-empty-actions",
                        "privilege",
                        privilege.goal,
                        f"step on '{step.entity}' grants no action",
                    )
                )
            entity = entities.get(step.entity)
            if entity is None:
                issues.append(_unresolved("privilege", privilege.goal, "entity", step.entity))
                continue
            known = set(entity.attribute_names())
            for attribute in step.updated_attributes:
                if attribute not in known:
                    issues.append(
                        ModelIssue(
                            "known-attribute",
                            "privilege",
                            privilege.goal,
                            f"entity '{entity.name}' has no attribute '{attribute}'",
                        )
                    )
            if step.updated_attributes and Action.UPDATE not in step.actions:
                issues.append(
                    ModelIssue(
                        "known-attribute",
                        "privilege",
                        privilege.goal,
                        f"step on '{step.entity}' lists attributes without an update action",
                    )
                )

    logger.debug("checked model %s: %d issue(s)", model.source_name, len(issues))
    return issues


def ensure_valid(model: Model) -> Model:
    issues = check_model(model)
    if issues:
        raise ModelError(issues)
    return model

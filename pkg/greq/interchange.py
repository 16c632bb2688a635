"""Canonical JSON interchange form of a model (``.greq.json``)."""

import json
import logging
from typing import Any, Dict, List, Optional

from jsonschema import Draft7Validator

from .file_io import load_schema
from .model import (
    Action,
    Agent,
    Attribute,
    AttributeKind,
    Goal,
    Entity,
    Model,
    ModelError,
    ModelIssue,
    Organization,
    Privilege,
    Relationship,
    Step,
    check_model,
    ordered_actions,
)

logger = logging.getLogger(__name__)

INTERCHANGE_SUFFIX = ".greq.json"


class InterchangeError(ModelError):
    """A document that is malformed JSON, off-schema, or violates a model invariant.

    ``offset`` is the byte offset of a JSON syntax error, ``None`` otherwise.
    """

    def __init__(self, issues: List[ModelIssue], offset: Optional[int] = None):
        super().__init__(issues)
        self.offset = offset


def _goal_document(goal: Goal) -> Dict[str, Any]:
    return {
        "name": goal.name,
        "responsible": goal.responsible,
        "entry": goal.entry,
        "children": None if goal.children is None else [_goal_document(child) for child in goal.children],
    }


def _step_document(step: Step) -> Dict[str, Any]:
    return {
        "entity": step.entity,
        "via": step.via,
        "actions": [action.value for action in ordered_actions(step.actions)],
        "updated_attributes": list(step.updated_attributes),
    }


def to_document(model: Model) -> Dict[str, Any]:
    return {
        "source_name": model.source_name,
        "organizations": [
            {"name": org.name, "agents": [{"name": agent.name} for agent in org.agents]}
            for org in model.organizations
        ],
        "goals": [_goal_document(goal) for goal in model.goals],
        "entities": [
            {
                "name": entity.name,
                "attributes": [
                    {"name": attribute.name, "kind": attribute.kind.value} for attribute in entity.attributes
                ],
            }
            for entity in model.entities
        ],
        "relationships": [
            {"name": rel.name, "source": rel.source, "target": rel.target} for rel in model.relationships
        ],
        "privileges": [
            {
                "goal": privilege.goal,
                "entry_step": _step_document(privilege.entry_step),
                "steps": [_step_document(step) for step in privilege.steps],
            }
            for privilege in model.privileges
        ],
    }


def dump_json(document: Any) -> str:
    """Deterministic JSON text: insertion key order, 2-space indent, trailing newline."""
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def canonical_serialize(model: Model) -> str:
    return dump_json(to_document(model))


def _goal_from(document: Dict[str, Any]) -> Goal:
    children = document["children"]
    return Goal(
        name=document["name"],
        responsible=document["responsible"],
        entry=document["entry"],
        children=None if children is None else tuple(_goal_from(child) for child in children),
    )


def _step_from(document: Dict[str, Any]) -> Step:
    return Step(
        entity=document["entity"],
        via=document["via"],
        actions=frozenset(Action(action) for action in document["actions"]),
        updated_attributes=tuple(document["updated_attributes"]),
    )


def from_document(document: Dict[str, Any]) -> Model:
    """Build a model from a schema-valid document without checking invariants."""
    return Model(
        source_name=document["source_name"],
        organizations=tuple(
            Organization(org["name"], tuple(Agent(agent["name"]) for agent in org["agents"]))
            for org in document["organizations"]
        ),
        goals=tuple(_goal_from(goal) for goal in document["goals"]),
        entities=tuple(
            Entity(
                entity["name"],
                tuple(Attribute(attr["name"], AttributeKind(attr["kind"])) for attr in entity["attributes"]),
            )
            for entity in document["entities"]
        ),
        relationships=tuple(
            Relationship(rel["name"], rel["source"], rel["target"]) for rel in document["relationships"]
        ),
        privileges=tuple(
            Privilege(
                goal=privilege["goal"],
                entry_step=_step_from(privilege["entry_step"]),
                steps=tuple(_step_from(step) for step in privilege["steps"]),
            )
            for privilege in document["privileges"]
        ),
    )


def _nested_too_deeply() -> InterchangeError:
    return InterchangeError(
        [ModelIssue("nesting", "document", "", "document nests too deeply to be read")]
    )


def canonical_deserialize(document: str) -> Model:
    """Parse an interchange document and re-check every model invariant.

    Raises :class:`InterchangeError` listing every problem found.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        offset = len(document[: exc.pos].encode("utf-8"))
        issue = ModelIssue(
            "json-syntax",
            "document",
            "",
            f"{exc.msg} at line {exc.lineno} column {exc.colno} (byte offset {offset})",
        )
        raise InterchangeError([issue], offset=offset) from exc
    except RecursionError as exc:
        raise _nested_too_deeply() from exc

    validator = Draft7Validator(load_schema("interchange.schema.json"))
    try:
        errors = sorted(validator.iter_errors(data), key=lambda error: list(map(str, error.absolute_path)))
        schema_issues = [
            ModelIssue(
                "schema",
                "document",
                "/" + "/".join(str(part) for part in error.absolute_path),
                error.message,
            )
            for error in errors
        ]
        if schema_issues:
            raise InterchangeError(schema_issues)
        model = from_document(data)
    except RecursionError as exc:
        raise _nested_too_deeply() from exc

    issues = check_model(model)
    if issues:
        raise InterchangeError(issues)
    logger.debug("deserialized %s", model.source_name)
    return model

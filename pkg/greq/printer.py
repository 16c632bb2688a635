import re
from typing import List

from .model import Action, Goal, Model, Step, ordered_actions

PLAIN_NAME = re.compile(r"\w+")
INDENT = "  "


def quote_name(name: str) -> str:
    """Write a name bare when it lexes as one identifier, quoted otherwise."""
    if PLAIN_NAME.fullmatch(name):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_actions(step: Step) -> str:
    rendered = []
    for action in ordered_actions(step.actions):
        if action is Action.UPDATE and step.updated_attributes:
            attributes = ", ".join(quote_name(name) for name in step.updated_attributes)
            rendered.append(f"update({attributes})")
        else:
            rendered.append(action.value)
    return "{" + ", ".join(rendered) + "}"


def _goal_lines(goal: Goal, depth: int) -> List[str]:
    pad = INDENT * depth
    header = f"{pad}goal {quote_name(goal.name)}"
    body: List[str] = []
    if goal.responsible is not None:
        body.append(f"{pad}{INDENT}responsible: {quote_name(goal.responsible)}")
    if goal.entry is not None:
        body.append(f"{pad}{INDENT}entry: {quote_name(goal.entry)}")
    for child in goal.sub_goals:
        body.extend(_goal_lines(child, depth + 1))
    if not body:
        return [header + " {}"] if goal.children == () else [header]
    return [header + " {"] + body + [f"{pad}}}"]


def format_model(model: Model) -> str:
    """Pretty-print a model as canonical ``.greq`` source that parses back to the same model."""
    blocks: List[List[str]] = []
    for organization in model.organizations:
        lines = [f"organization {quote_name(organization.name)} {{"]
        lines += [f"{INDENT}agent {quote_name(agent.name)}" for agent in organization.agents]
        blocks.append(lines + ["}"])
    for goal in model.goals:
        blocks.append(_goal_lines(goal, 0))
    for entity in model.entities:
        lines = [f"entity {quote_name(entity.name)} {{"]
        lines += [
            f"{INDENT}attribute {quote_name(attribute.name)}: {attribute.kind.value}"
            for attribute in entity.attributes
        ]
        blocks.append(lines + ["}"])
    for rel in model.relationships:
        blocks.append(
            [f"relationship {quote_name(rel.name)}: {quote_name(rel.source)} -> {quote_name(rel.target)}"]
        )
    for privilege in model.privileges:
        entry = privilege.entry_step
        lines = [
            f"privilege for {quote_name(privilege.goal)} {{",
            f"{INDENT}entry {quote_name(entry.entity)} {format_actions(entry)}",
        ]
        for step in privilege.steps:
            lines.append(
                f"{INDENT}step {quote_name(step.via or '')} -> {quote_name(step.entity)} {format_actions(step)}"
            )
        blocks.append(lines + ["}"])
    return "\n".join("\n".join(block) + "\n" for block in blocks)

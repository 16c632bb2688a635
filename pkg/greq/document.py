"""Requirements document ("cahier des charges") rendered as Markdown."""

import logging
from typing import List

from .model import Goal, Model, Privilege, responsibility_map
from .printer import format_actions
from .validate import DiagnosticReport, render_report_text

logger = logging.getLogger(__name__)

SECTION_TITLES = (
    "1. Enterprise",
    "2. Goals",
    "3. Information structure",
    "4. Privileges",
    "5. Diagnostics",
)


def _cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|")


def _enterprise(model: Model) -> List[str]:
    lines: List[str] = []
    for org in model.organizations:
        lines += ["", f"### Organization {org.name}", ""]
        lines += [f"- {agent.name}" for agent in org.agents] or ["_No agent declared._"]
    return lines


def _goal_items(goal: Goal, depth: int, owners) -> List[str]:
    notes = []
    if goal.responsible:
        notes.append(f"responsible: {goal.responsible}")
    elif goal.is_leaf and owners.get(goal.name):
        notes.append(f"responsible: {owners[goal.name]} (inherited)")
    if goal.entry:
        notes.append(f"entry: {goal.entry}")
    if goal.children == ():
        notes.append("no sub-goal")
    suffix = f" ({'; '.join(notes)})" if notes else ""
    lines = [f"{'  ' * depth}- {goal.name}{suffix}"]
    for child in goal.sub_goals:
        lines += _goal_items(child, depth + 1, owners)
    return lines


def _goals(model: Model) -> List[str]:
    if not model.goals:
        return []
    owners = responsibility_map(model)
    lines = ["", "_Why is the application built?_", ""]
    for goal in model.goals:
        lines += _goal_items(goal, 0, owners)
    return lines


def _information_structure(model: Model) -> List[str]:
    if not model.entities and not model.relationships:
        return []
    lines = ["", "_How will the application be built?_"]
    for entity in model.entities:
        lines += ["", f"### Entity {entity.name}", ""]
        if entity.attributes:
            lines += ["| Attribute | Kind |", "| --- | --- |"]
            lines += [f"| {_cell(attr.name)} | {attr.kind.value} |" for attr in entity.attributes]
        else:
            lines.append("_No attribute declared._")
    if model.relationships:
        lines += ["", "### Relationships", ""]
        lines += [f"- {rel.name}: {rel.source} -> {rel.target}" for rel in model.relationships]
    return lines


def _step_table(privilege: Privilege) -> List[str]:
    lines = ["| Step | Via | Entity | Actions |", "| --- | --- | --- | --- |"]
    for index, step in enumerate(privilege.walk()):
        via = step.via if step.via is not None else "(entry)"
        actions = format_actions(step)[1:-1]
        lines.append(f"| {index} | {_cell(via)} | {_cell(step.entity)} | {_cell(actions)} |")
    return lines


def _privileges(model: Model) -> List[str]:
    lines: List[str] = []
    for goal in model.leaf_goals():
        privileges = model.privileges_for(goal.name)
        lines += ["", f"### {goal.name}", ""]
        if not privileges:
            lines.append("No privilege granted.")
            continue
        for number, privilege in enumerate(privileges, start=1):
            if number > 1:
                lines.append("")
            if len(privileges) > 1:
                lines += [f"Privilege {number}", ""]
            lines += [f"Entry: {privilege.entry_step.entity}", ""]
            lines += _step_table(privilege)
    return lines


def _diagnostics(report: DiagnosticReport) -> List[str]:
    if not report.diagnostics:
        return ["", "No findings."]
    return ["", "```text"] + render_report_text(report).splitlines() + ["```"]


def emit_document(model: Model, report: DiagnosticReport) -> str:
    """Render the requirements document, one section per modelling family plus diagnostics."""
    bodies = (
        _enterprise(model),
        _goals(model),
        _information_structure(model),
        _privileges(model),
        _diagnostics(report),
    )
    lines = [f"# Requirements document: {model.display_name()}"]
    for title, body in zip(SECTION_TITLES, bodies):
        lines += ["", f"## {title}"] + body
    logger.debug("document for %s: %d line(s)", model.display_name(), len(lines))
    return "\n".join(lines) + "\n"

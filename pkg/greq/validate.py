"""Rule-registry diagnostics over a resolved model."""

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .graph import ConceptGraph, build_graph, walk_is_valid
from .interchange import dump_json
from .model import Action, Model, responsibility_map
from .rule_spec import RuleSpec, Severity

logger = logging.getLogger(__name__)

RULE_ID_PATTERN = re.compile(r"R\d{3}")


@dataclass(frozen=True)
class Subject:
    kind: str
    name: str


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: Severity
    subject: Subject
    message: str

    def render(self) -> str:
        return f"{self.rule_id} {self.severity.value} {self.subject.kind} '{self.subject.name}': {self.message}"


@dataclass(frozen=True)
class DiagnosticReport:
    model_name: str
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    @property
    def warnings(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.WARNING]

    @property
    def has_errors(self) -> bool:
        return bool(self.errors)

    def error_rule_ids(self) -> List[str]:
        return sorted({d.rule_id for d in self.errors})

    def by_rule(self, rule_id: str) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.rule_id == rule_id]


@dataclass(frozen=True)
class RuleContext:
    model: Model
    graph: ConceptGraph
    owners: Dict[str, Optional[str]]


_REGISTRY: Dict[str, RuleSpec] = {}


def register_rule(
    rule_id: str, severity: Severity, summary: str
) -> Callable[[Callable[[RuleContext], Iterable[Diagnostic]]], Callable[[RuleContext], Iterable[Diagnostic]]]:
    """Decorator adding a check function to the rule registry."""
    if not RULE_ID_PATTERN.fullmatch(rule_id):
        raise ValueError(f"rule id '{rule_id}' does not match R###")

    def _register(check):
        if rule_id in _REGISTRY:
            raise ValueError(f"rule '{rule_id}' is already registered")
        _REGISTRY[rule_id] = RuleSpec(rule_id, severity, summary, check)
        return check

    return _register


def unregister_rule(rule_id: str) -> None:
    _REGISTRY.pop(rule_id, None)


def registered_rules() -> List[RuleSpec]:
    return [_REGISTRY[rule_id] for rule_id in sorted(_REGISTRY)]


def _diagnostic(rule_id: str, kind: str, name: str, message: str) -> Diagnostic:
    return Diagnostic(rule_id, _REGISTRY[rule_id].severity, Subject(kind, name), message)


@register_rule("R001", Severity.ERROR, "every agent is responsible for at least one goal")
def _agents_have_goals(ctx: RuleContext) -> Iterator[Diagnostic]:
    declared = {goal.responsible for goal in ctx.model.iter_goals() if goal.responsible}
    for agent in ctx.model.all_agents():
        if agent.name not in declared:
            yield _diagnostic("R001", "agent", agent.name, "agent is not responsible for any goal")


@register_rule("R002", Severity.ERROR, "every leaf goal grants access to the information system")
def _leaf_goals_have_privileges(ctx: RuleContext) -> Iterator[Diagnostic]:
    granted = {privilege.goal for privilege in ctx.model.privileges}
    for goal in ctx.model.leaf_goals():
        if goal.name not in granted:
            yield _diagnostic(
                "R002", "goal", goal.name, "leaf goal grants no access to the information system (no privilege)"
            )


@register_rule("R003", Severity.ERROR, "every leaf goal has a responsible agent, possibly inherited")
def _leaf_goals_have_owner(ctx: RuleContext) -> Iterator[Diagnostic]:
    for goal in ctx.model.leaf_goals():
        if ctx.owners.get(goal.name) is None:
            yield _diagnostic("R003", "goal", goal.name, "leaf goal has no responsible agent, directly or inherited")


@register_rule("R004", Severity.ERROR, "every privilege walk follows relationships of the concept graph")
def _walks_are_valid(ctx: RuleContext) -> Iterator[Diagnostic]:
    for privilege in ctx.model.privileges:
        check = walk_is_valid(ctx.graph, privilege)
        if check.valid:
            continue
        index = check.offending_step
        walk = privilege.walk()
        previous, step = walk[index].entity, walk[index + 1]
        yield _diagnostic(
            "R004",
            "privilege",
            privilege.goal,
            f"step {index} via '{step.via}' does not join '{previous}' to '{step.entity}'",
        )


@register_rule("R005", Severity.ERROR, "a privilege enters at its goal's declared entry point")
def _entry_points_match(ctx: RuleContext) -> Iterator[Diagnostic]:
    for privilege in ctx.model.privileges:
        goal = ctx.model.find_goal(privilege.goal)
        if goal is None or goal.entry is None:
            continue
        if privilege.entry_step.entity != goal.entry:
            yield _diagnostic(
                "R005",
                "privilege",
                privilege.goal,
                f"privilege enters at '{privilege.entry_step.entity}' but the goal's entry point is '{goal.entry}'",
            )


@register_rule("R006", Severity.WARNING, "every entity is touched by at least one privilege step")
def _entities_are_used(ctx: RuleContext) -> Iterator[Diagnostic]:
    touched = {step.entity for privilege in ctx.model.privileges for step in privilege.walk()}
    for entity in ctx.model.entities:
        if entity.name not in touched:
            yield _diagnostic("R006", "entity", entity.name, "entity is not touched by any privilege step")


@register_rule("R007", Severity.WARNING, "every decomposed goal has at least one sub-goal")
def _decompositions_are_not_empty(ctx: RuleContext) -> Iterator[Diagnostic]:
    for goal in ctx.model.iter_goals():
        if goal.children == ():
            yield _diagnostic("R007", "goal", goal.name, "decomposed goal has no sub-goal")


@register_rule("R008", Severity.WARNING, "every update action lists at least one attribute")
def _updates_name_attributes(ctx: RuleContext) -> Iterator[Diagnostic]:
    for privilege in ctx.model.privileges:
        for step in privilege.walk():
            if Action.UPDATE in step.actions and not step.updated_attributes:
                yield _diagnostic(
                    "R008", "privilege", privilege.goal, f"update on '{step.entity}' lists no attribute"
                )


def _report_key(diagnostic: Diagnostic) -> Tuple[str, str, str]:
    return diagnostic.rule_id, diagnostic.subject.kind, diagnostic.subject.name


def run_diagnostics(model: Model, rules: Optional[Sequence[RuleSpec]] = None) -> DiagnosticReport:
    """Evaluate every registered rule and return the ordered report."""
    context = RuleContext(model=model, graph=build_graph(model), owners=responsibility_map(model))
    selected = registered_rules() if rules is None else list(rules)
    findings: List[Diagnostic] = []
    for rule in selected:
        found = list(rule.check(context))
        logger.debug("%s: %d finding(s)", rule.rule_id, len(found))
        findings.extend(found)
    # sorted() is stable: ties keep rule-evaluation order.
    return DiagnosticReport(model.display_name(), tuple(sorted(findings, key=_report_key)))


def render_report_text(report: DiagnosticReport) -> str:
    return "".join(diagnostic.render() + "\n" for diagnostic in report.diagnostics)


def report_to_document(report: DiagnosticReport) -> Dict:
    return {
        "model_name": report.model_name,
        "diagnostics": [
            {
                "rule_id": d.rule_id,
                "severity": d.severity.value,
                "subject": {"kind": d.subject.kind, "name": d.subject.name},
                "message": d.message,
            }
            for d in report.diagnostics
        ],
    }


def render_report_json(report: DiagnosticReport) -> str:
    return dump_json(report_to_document(report))

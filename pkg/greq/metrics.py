"""Quantitative and qualitative measures over a model and its diagnostic report.

A leaf goal is *at risk* when the report holds an R002 finding on it (no access
to the information system) or an R004 finding on one of its privileges (a walk
the concept graph cannot follow).
"""

import io
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Set, Tuple

from rich import box
from rich.console import Console
from rich.table import Table

from .interchange import dump_json
from .model import Model, goal_tree_depth, responsibility_map
from .validate import DiagnosticReport

logger = logging.getLogger(__name__)

RISK_RULES = {"R002": "goal", "R004": "privilege"}
UNOWNED_RULE = "R003"
TABLE_WIDTH = 100


@dataclass(frozen=True)
class AgentMetrics:
    agent: str
    goal_count: int
    leaf_goal_count: int
    at_risk_goals: Tuple[str, ...]
    risk_ratio: float


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    counts: Dict[str, int]
    goal_tree_depth: int
    entity_coverage: float
    agents: Tuple[AgentMetrics, ...]
    at_risk_goals: Tuple[str, ...]
    unowned_goals: Tuple[str, ...]

    def agent(self, name: str) -> AgentMetrics:
        for metrics in self.agents:
            if metrics.agent == name:
                return metrics
        raise KeyError(name)


def concept_counts(model: Model) -> Dict[str, int]:
    goals = list(model.iter_goals())
    return {
        "organizations": len(model.organizations),
        "agents": len(model.all_agents()),
        "goals": len(goals),
        "composite_goals": sum(1 for goal in goals if goal.is_composite),
        "leaf_goals": sum(1 for goal in goals if goal.is_leaf),
        "entities": len(model.entities),
        "attributes": sum(len(entity.attributes) for entity in model.entities),
        "relationships": len(model.relationships),
        "privileges": len(model.privileges),
        "steps": sum(len(privilege.walk()) for privilege in model.privileges),
    }


def entity_coverage(model: Model) -> float:
    """Share of entities touched by at least one privilege step; 1.0 when there are none."""
    if not model.entities:
        return 1.0
    touched = {step.entity for privilege in model.privileges for step in privilege.walk()}
    used = sum(1 for entity in model.entities if entity.name in touched)
    return used / len(model.entities)


def _flagged_goals(report: DiagnosticReport, rules: Dict[str, str]) -> Set[str]:
    return {
        d.subject.name
        for d in report.diagnostics
        if d.rule_id in rules and d.subject.kind == rules[d.rule_id]
    }


def compute_metrics(model: Model, report: DiagnosticReport) -> MetricsReport:
    owners = responsibility_map(model)
    leaves = [goal.name for goal in model.leaf_goals()]
    risky = _flagged_goals(report, RISK_RULES)
    unowned = _flagged_goals(report, {UNOWNED_RULE: "goal"})

    agents: List[AgentMetrics] = []
    for agent in model.all_agents():
        owned = [name for name, owner in owners.items() if owner == agent.name]
        owned_leaves = [name for name in leaves if owners.get(name) == agent.name]
        at_risk = tuple(name for name in owned_leaves if name in risky)
        ratio = len(at_risk) / len(owned_leaves) if owned_leaves else 0.0
        agents.append(AgentMetrics(agent.name, len(owned), len(owned_leaves), at_risk, ratio))

    metrics = MetricsReport(
        model_name=model.display_name(),
        counts=concept_counts(model),
        goal_tree_depth=goal_tree_depth(model),
        entity_coverage=entity_coverage(model),
        agents=tuple(agents),
        at_risk_goals=tuple(name for name in leaves if name in risky),
        unowned_goals=tuple(name for name in leaves if name in unowned),
    )
    logger.debug("metrics for %s: %d at-risk goal(s)", metrics.model_name, len(metrics.at_risk_goals))
    return metrics


def metrics_to_document(metrics: MetricsReport) -> Dict[str, Any]:
    return {
        "model_name": metrics.model_name,
        "counts": dict(metrics.counts),
        "goal_tree_depth": metrics.goal_tree_depth,
        "entity_coverage": metrics.entity_coverage,
        "agents": [
            {
                "agent": agent.agent,
                "goal_count": agent.goal_count,
                "leaf_goal_count": agent.leaf_goal_count,
                "at_risk_goals": list(agent.at_risk_goals),
                "risk_ratio": agent.risk_ratio,
            }
            for agent in metrics.agents
        ],
        "at_risk_goals": list(metrics.at_risk_goals),
        "unowned_goals": list(metrics.unowned_goals),
    }


def render_metrics_json(metrics: MetricsReport) -> str:
    return dump_json(metrics_to_document(metrics))


def _counts_table(metrics: MetricsReport) -> Table:
    table = Table(title=f"Measures of {metrics.model_name}", box=box.ASCII, title_justify="left")
    table.add_column("Measure")
    table.add_column("Value", justify="right")
    for key, value in metrics.counts.items():
        table.add_row(key, str(value))
    table.add_row("goal_tree_depth", str(metrics.goal_tree_depth))
    table.add_row("entity_coverage", f"{metrics.entity_coverage:.2f}")
    return table


def _agents_table(metrics: MetricsReport) -> Table:
    table = Table(title="Agents", box=box.ASCII, title_justify="left")
    table.add_column("Agent")
    table.add_column("Goals", justify="right")
    table.add_column("Leaf goals", justify="right")
    table.add_column("At risk")
    table.add_column("Risk ratio", justify="right")
    for agent in metrics.agents:
        table.add_row(
            agent.agent,
            str(agent.goal_count),
            str(agent.leaf_goal_count),
            ", ".join(agent.at_risk_goals) or "-",
            f"{agent.risk_ratio:.2f}",
        )
    return table


def render_metrics_text(metrics: MetricsReport) -> str:
    """Plain-text tables, without colour and at a fixed width."""
    console = Console(
        file=io.StringIO(),
        width=TABLE_WIDTH,
        color_system=None,
        force_terminal=False,
        highlight=False,
        emoji=False,
        markup=False,
    )
    console.print(_counts_table(metrics))
    if metrics.agents:
        console.print(_agents_table(metrics))
    console.print(f"At-risk goals: {', '.join(metrics.at_risk_goals) or 'none'}")
    console.print(f"Unowned goals: {', '.join(metrics.unowned_goals) or 'none'}")
    return console.file.getvalue()

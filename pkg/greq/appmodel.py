"""Application model with WebML vocabulary: a data model plus one site view per agent.

Derivation, per leaf goal (one page each), for every step of every privilege:

* ``create`` gives an entry form on the step's entity;
* ``update`` gives a modify form listing the updated attributes;
* ``read`` gives an index unit and a details unit;
* ``delete`` gives no unit.

Units of one step are chained by ``navigation`` links. A non-entry step is reached
from every unit of the previous unit-bearing step through a link carrying the
step's relationship, landing on details, else the entry form, else the modify form.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from jsonschema import Draft7Validator

from .file_io import load_schema
from .interchange import dump_json
from .model import Action, Entity, GreqError, Model, Relationship, Step, responsibility_map
from .validate import DiagnosticReport, run_diagnostics

logger = logging.getLogger(__name__)

NAVIGATION = "navigation"


class AppModelRefused(GreqError):
    """The model still carries error diagnostics."""

    def __init__(self, rule_ids: List[str]):
        super().__init__(f"model has error diagnostics: {', '.join(rule_ids)}")
        self.rule_ids = list(rule_ids)


class UnitKind(str, Enum):
    ENTRY_FORM = "entry_form"
    MODIFY_FORM = "modify_form"
    INDEX = "index"
    DETAILS = "details"


UNITS_BY_ACTION: Dict[Action, Tuple[UnitKind, ...]] = {
    Action.CREATE: (UnitKind.ENTRY_FORM,),
    Action.UPDATE: (UnitKind.MODIFY_FORM,),
    Action.READ: (UnitKind.INDEX, UnitKind.DETAILS),
    Action.DELETE: (),
}
UNIT_ORDER = (UnitKind.ENTRY_FORM, UnitKind.MODIFY_FORM, UnitKind.INDEX, UnitKind.DETAILS)
LANDING_ORDER = (UnitKind.DETAILS, UnitKind.ENTRY_FORM, UnitKind.MODIFY_FORM)


@dataclass(frozen=True)
class Unit:
    unit_id: str
    kind: UnitKind
    entity: str
    attributes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    via: str


@dataclass(frozen=True)
class Page:
    name: str
    units: Tuple[Unit, ...]
    links: Tuple[Link, ...]


@dataclass(frozen=True)
class SiteView:
    agent: str
    pages: Tuple[Page, ...]


@dataclass(frozen=True)
class DataModel:
    entities: Tuple[Entity, ...]
    relationships: Tuple[Relationship, ...]


@dataclass(frozen=True)
class AppModel:
    data_model: DataModel
    site_views: Tuple[SiteView, ...]


def unit_kinds_for(actions) -> List[UnitKind]:
    kinds = {kind for action in actions for kind in UNITS_BY_ACTION[action]}
    return [kind for kind in UNIT_ORDER if kind in kinds]


def _step_units(step: Step, privilege_number: int, step_index: int) -> List[Unit]:
    return [
        Unit(
            unit_id=f"{kind.value}:{step.entity}@{privilege_number}.{step_index}",
            kind=kind,
            entity=step.entity,
            attributes=step.updated_attributes if kind is UnitKind.MODIFY_FORM else (),
        )
        for kind in unit_kinds_for(step.actions)
    ]


def _landing(units: List[Unit]) -> Optional[Unit]:
    for kind in LANDING_ORDER:
        for unit in units:
            if unit.kind is kind:
                return unit
    return None


def _page(model: Model, goal_name: str) -> Page:
    units: List[Unit] = []
    links: List[Link] = []
    for number, privilege in enumerate(model.privileges_for(goal_name), start=1):
        previous: List[Unit] = []
        for index, step in enumerate(privilege.walk()):
            current = _step_units(step, number, index)
            links += [Link(a.unit_id, b.unit_id, NAVIGATION) for a, b in zip(current, current[1:])]
            landing = _landing(current)
            if step.via is not None and landing is not None:
                links += [Link(unit.unit_id, landing.unit_id, step.via) for unit in previous]
            units += current
            if current:
                previous = current
    return Page(goal_name, tuple(units), tuple(links))


def derive_app_model(model: Model) -> AppModel:
    """Apply the derivation rules without checking diagnostics."""
    owners = responsibility_map(model)
    site_views: List[SiteView] = []
    for agent in model.all_agents():
        owned = [goal for goal in model.iter_goals() if owners.get(goal.name) == agent.name]
        if not owned:
            continue
        pages = tuple(_page(model, goal.name) for goal in owned if goal.is_leaf)
        site_views.append(SiteView(agent.name, pages))
    return AppModel(DataModel(model.entities, model.relationships), tuple(site_views))


def emit_app_model(model: Model, report: Optional[DiagnosticReport] = None) -> AppModel:
    """Derive the application model, refusing models that carry error diagnostics."""
    if report is None:
        report = run_diagnostics(model)
    if report.has_errors:
        raise AppModelRefused(report.error_rule_ids())
    app = derive_app_model(model)
    logger.debug(
        "application model: %d site view(s), %d page(s)",
        len(app.site_views),
        sum(len(view.pages) for view in app.site_views),
    )
    return app


def app_model_to_document(app: AppModel) -> Dict[str, Any]:
    return {
        "data_model": {
            "entities": [
                {
                    "name": entity.name,
                    "attributes": [{"name": attr.name, "kind": attr.kind.value} for attr in entity.attributes],
                }
                for entity in app.data_model.entities
            ],
            "relationships": [
                {"name": rel.name, "source": rel.source, "target": rel.target}
                for rel in app.data_model.relationships
            ],
        },
        "site_views": [
            {
                "agent": view.agent,
                "pages": [
                    {
                        "name": page.name,
                        "units": [
                            {
                                "id": unit.unit_id,
                                "kind": unit.kind.value,
                                "entity": unit.entity,
                                "attributes": list(unit.attributes),
                            }
                            for unit in page.units
                        ],
                        "links": [
                            {"source": link.source, "target": link.target, "via": link.via}
                            for link in page.links
                        ],
                    }
                    for page in view.pages
                ],
            }
            for view in app.site_views
        ],
    }


def serialize_app_model(app: AppModel) -> str:
    """Deterministic ``.appmodel.json`` text, checked against the shipped schema."""
    document = app_model_to_document(app)
    Draft7Validator(load_schema("appmodel.schema.json")).validate(document)
    return dump_json(document)

"""Shared helpers: the conference sample and its single-defect mutants."""

from pathlib import Path
from typing import Callable, Dict, FrozenSet

from greq.model import Model
from greq.parser import parse_source

ROOT = Path(__file__).resolve().parent.parent
CONFERENCE = ROOT / "samples" / "conference.greq"
GOLDEN = Path(__file__).resolve().parent / "golden"
CONFERENCE_NAME = "conference.greq"

REVIEWER_PRIVILEGE = (
    'privilege for "Analyser une soumission" {\n'
    "  entry Rapport {create, update(commentaire)}\n"
    "  step commente -> Article {read}\n"
    "}\n"
)


def mutate(source: str, old: str, new: str) -> str:
    """Replace one unique fragment of ``source``."""
    assert source.count(old) == 1, f"{old!r} occurs {source.count(old)} times"
    return source.replace(old, new)


def parse_ok(source: str, file_name: str = CONFERENCE_NAME) -> Model:
    result = parse_source(source, file_name)
    assert result.ok, [str(error) for error in result.errors]
    return result.model


# rule id -> edit of the conference source that introduces exactly that defect
MUTANTS: Dict[str, Callable[[str], str]] = {
    "R001": lambda src: mutate(src, "  agent Relecteur\n", "  agent Relecteur\n  agent Président\n"),
    "R002": lambda src: mutate(src, REVIEWER_PRIVILEGE, ""),
    "R003": lambda src: src + "\ngoal Archiver\n\nprivilege for Archiver {\n  entry Article {read}\n}\n",
    "R004": lambda src: mutate(src, "step commente -> Article {read}", "step commente -> Rapport {read}"),
    "R005": lambda src: mutate(src, "    entry: Rapport\n", "    entry: Article\n"),
    "R006": lambda src: src + "\nentity Session {\n  attribute date: date\n}\n",
    "R007": lambda src: src + '\ngoal "Organiser les sessions" {}\n',
    "R008": lambda src: mutate(src, "{create, update(titre, auteurs)}", "{create, update}"),
}

# every rule reported on each mutant (removing a privilege also leaves an entity untouched)
MUTANT_FINDINGS: Dict[str, FrozenSet[str]] = {
    rule_id: frozenset({rule_id}) for rule_id in MUTANTS
}
MUTANT_FINDINGS["R002"] = frozenset({"R002", "R006"})


def conference_mutant(rule_id: str) -> str:
    return MUTANTS[rule_id](CONFERENCE.read_text(encoding="utf-8"))

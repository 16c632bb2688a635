import re

import pytest
from hypothesis import given, settings
from lxml import etree

from greq.mindmap import (
    FREEMIND_VERSION,
    MapFilter,
    MindmapFilterError,
    build_mindmap,
    emit_mindmap,
    render_dot,
)
from tests.strategies import models
from tests.support import GOLDEN, parse_ok

QUOTED = r'"((?:[^"\\]|\\.)*)"'
NODE_LINE = re.compile(rf"  {QUOTED} \[label={QUOTED}, shape=\w+\];")
EDGE_LINE = re.compile(rf"  {QUOTED} -> {QUOTED}(?: \[label={QUOTED}, dir=none\])?;")


def check_dot(text: str) -> None:
    """Minimal structural checker for the dot dialect written by the renderer."""
    lines = text.split("\n")
    assert re.fullmatch(rf"digraph {QUOTED} \{{", lines[0])
    assert lines[-2:] == ["}", ""]
    declared = set()
    for line in lines[1:-2]:
        node = NODE_LINE.fullmatch(line)
        if node:
            assert node.group(1) not in declared
            declared.add(node.group(1))
            continue
        edge = EDGE_LINE.fullmatch(line)
        assert edge, line
        assert edge.group(1) in declared and edge.group(2) in declared


def _quoted(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _freemind(model, focus=MapFilter()):
    return etree.fromstring(emit_mindmap(model, focus, "freemind").encode("utf-8"))


class TestDot:
    def test_conference_golden(self, conference_model):
        expected = (GOLDEN / "conference.dot").read_text(encoding="utf-8")
        assert emit_mindmap(conference_model) == expected

    def test_output_is_deterministic(self, conference_model):
        assert emit_mindmap(conference_model) == emit_mindmap(conference_model)

    def test_labels_are_escaped(self, conference_model):
        mindmap = build_mindmap(conference_model)
        mindmap.root.label = 'say "hi"'
        text = render_dot(mindmap)
        assert text.startswith('digraph "say \\"hi\\"" {\n')
        check_dot(text)

    @settings(max_examples=200, deadline=None)
    @given(models())
    def test_random_models_render_well_formed_dot(self, model):
        text = emit_mindmap(model)
        check_dot(text)
        for entity in model.entities:
            assert _quoted(f"entity:{entity.name}") in text
        for goal in model.iter_goals():
            assert _quoted(f"goal:{goal.name}") in text


class TestFilters:
    def test_full_map_branches(self, conference_model):
        root = build_mindmap(conference_model).root
        assert [child.node_id for child in root.children] == [
            "branch:Organization",
            "branch:Goals",
            "branch:Concepts",
            "branch:Privileges",
        ]

    def test_concepts_only(self, conference_model):
        mindmap = build_mindmap(conference_model, MapFilter.concepts_only())
        assert mindmap.node_ids() == [
            "root",
            "branch:Concepts",
            "entity:Article",
            "attribute:Article.titre",
            "attribute:Article.auteurs",
            "entity:Rapport",
            "attribute:Rapport.commentaire",
        ]
        assert [(link.source, link.target, link.label) for link in mindmap.links] == [
            ("entity:Rapport", "entity:Article", "commente")
        ]

    def test_goals_only(self, conference_model):
        mindmap = build_mindmap(conference_model, MapFilter.goals_only())
        assert [child.node_id for child in mindmap.root.children] == ["branch:Organization", "branch:Goals"]
        assert mindmap.links == []

    def test_goals_of_agent_lifts_owned_goals(self, conference_model):
        mindmap = build_mindmap(conference_model, MapFilter.goals_of_agent("Auteur"))
        assert mindmap.node_ids() == [
            "root",
            "branch:Goals",
            "goal:Déposer une soumission",
            "branch:Privileges",
            "privileges:Déposer une soumission",
            "step:Déposer une soumission#1.0",
        ]

    def test_goals_of_agent_keeps_inherited_subtrees(self):
        model = parse_ok(
            "organization O { agent A agent B }\n"
            "goal Root { responsible: A goal Mine goal Theirs { responsible: B } }\n"
        )
        mindmap = build_mindmap(model, MapFilter.goals_of_agent("A"))
        assert mindmap.node_ids()[:4] == ["root", "branch:Goals", "goal:Root", "goal:Mine"]
        assert "goal:Theirs" not in mindmap.node_ids()

    def test_unknown_agent(self, conference_model):
        with pytest.raises(MindmapFilterError, match="unknown agent 'Nobody'"):
            emit_mindmap(conference_model, MapFilter.goals_of_agent("Nobody"))

    def test_unknown_format(self, conference_model):
        with pytest.raises(MindmapFilterError, match="unknown mind map format"):
            emit_mindmap(conference_model, MapFilter(), "svg")

    @settings(max_examples=200, deadline=None)
    @given(models())
    def test_filters_only_remove_nodes(self, model):
        full = set(build_mindmap(model).node_ids())
        focuses = [MapFilter.concepts_only(), MapFilter.goals_only()]
        focuses += [MapFilter.goals_of_agent(agent.name) for agent in model.all_agents()]
        for focus in focuses:
            assert set(build_mindmap(model, focus).node_ids()) <= full


class TestFreeMind:
    def test_document_shape(self, conference_model):
        document = _freemind(conference_model)
        assert document.tag == "map"
        assert document.get("version") == FREEMIND_VERSION
        ids = [node.get("ID") for node in document.iter("node")]
        assert ids == build_mindmap(conference_model).node_ids()

    def test_relationship_is_an_arrowlink(self, conference_model):
        document = _freemind(conference_model)
        (rapport,) = document.xpath('//node[@ID="entity:Rapport"]')
        (arrow,) = rapport.findall("arrowlink")
        assert arrow.get("DESTINATION") == "entity:Article"
        (attribute,) = rapport.findall("attribute")
        assert (attribute.get("NAME"), attribute.get("VALUE")) == ("commente", "Article")

    def test_labels_keep_non_ascii_text(self, conference_model):
        document = _freemind(conference_model)
        texts = [node.get("TEXT") for node in document.iter("node")]
        assert "Déposer une soumission [Auteur] → Article" in texts

    @settings(max_examples=200, deadline=None)
    @given(models())
    def test_random_models_are_well_formed(self, model):
        document = _freemind(model)
        assert len(list(document.iter("node"))) == len(build_mindmap(model).node_ids())

import pytest

from greq.model import (
    MAX_GOAL_DEPTH,
    Action,
    Agent,
    Attribute,
    AttributeKind,
    Entity,
    Goal,
    Model,
    ModelError,
    Organization,
    Privilege,
    Relationship,
    Step,
    check_model,
    ensure_valid,
    goal_tree_depth,
    ordered_actions,
    responsibility_map,
)

ARTICLE = Entity("Article", (Attribute("titre", AttributeKind.TEXT),))
READ = frozenset({Action.READ})


def _invariants(model: Model):
    return [issue.invariant for issue in check_model(model)]


def _chain(levels: int, responsible=None) -> Model:
    """A single goal path ``g0 > g1 > ...`` with ``levels`` goals."""
    goal = Goal(f"g{levels - 1}")
    for index in reversed(range(levels - 1)):
        goal = Goal(f"g{index}", responsible=responsible if index == 0 else None, children=(goal,))
    return Model(goals=(goal,))


class TestQueries:
    def test_conference_satisfies_every_invariant(self, conference_model):
        assert check_model(conference_model) == []

    def test_goals_are_iterated_in_preorder(self, conference_model):
        assert [goal.name for goal in conference_model.iter_goals()] == [
            "Gérer les soumissions",
            "Déposer une soumission",
            "Analyser une soumission",
        ]

    def test_leaf_and_composite_goals(self, conference_model):
        root = conference_model.goals[0]
        assert root.is_composite and not root.is_leaf
        assert [goal.name for goal in conference_model.leaf_goals()] == [
            "Déposer une soumission",
            "Analyser une soumission",
        ]

    def test_lookups(self, conference_model):
        assert conference_model.find_entity("Rapport").attribute_names() == ["commentaire"]
        assert conference_model.find_relationship("commente").target == "Article"
        assert conference_model.find_goal("Nope") is None
        assert len(conference_model.privileges_for("Analyser une soumission")) == 1

    def test_walk_starts_with_the_entry_step(self, conference_model):
        walk = conference_model.privileges_for("Analyser une soumission")[0].walk()
        assert [step.entity for step in walk] == ["Rapport", "Article"]
        assert walk[0].via is None and walk[1].via == "commente"

    def test_depth(self, conference_model):
        assert goal_tree_depth(conference_model) == 2
        assert goal_tree_depth(Model()) == 0

    @pytest.mark.parametrize(
        "source_name, expected",
        [
            ("samples/conference.greq", "conference"),
            ("C:\\models\\jury.greq", "jury"),
            ("notes.txt", "notes.txt"),
            ("", "model"),
        ],
    )
    def test_display_name(self, source_name, expected):
        assert Model(source_name).display_name() == expected

    def test_actions_follow_canonical_order(self):
        actions = frozenset({Action.DELETE, Action.UPDATE, Action.CREATE, Action.READ})
        assert ordered_actions(actions) == [Action.CREATE, Action.READ, Action.UPDATE, Action.DELETE]


class TestResponsibility:
    def test_nearest_ancestor_wins(self):
        model = Model(
            organizations=(Organization("O", (Agent("A"), Agent("B"))),),
            goals=(
                Goal(
                    "Root",
                    responsible="A",
                    children=(
                        Goal("Inherits"),
                        Goal("Overrides", responsible="B", children=(Goal("Deep"),)),
                    ),
                ),
                Goal("Orphan"),
            ),
        )
        assert responsibility_map(model) == {
            "Root": "A",
            "Inherits": "A",
            "Overrides": "B",
            "Deep": "B",
            "Orphan": None,
        }


class TestConstructionInvariants:
    def test_empty_model_is_valid(self):
        assert check_model(Model()) == []

    def test_empty_names(self):
        model = Model(entities=(Entity("", (Attribute("", AttributeKind.TEXT),)),))
        assert _invariants(model) == ["non-empty-name", "non-empty-name"]

    def test_duplicate_entities(self):
        model = Model(entities=(ARTICLE, ARTICLE))
        issues = check_model(model)
        assert [(issue.invariant, issue.kind, issue.name) for issue in issues] == [
            ("unique-names", "entity", "Article")
        ]

    def test_goal_names_are_unique_across_the_forest(self):
        model = Model(goals=(Goal("G", children=(Goal("G"),)),))
        assert _invariants(model) == ["unique-names"]

    def test_unknown_references(self):
        model = Model(
            goals=(Goal("G", responsible="Ghost", entry="Nowhere"),),
            relationships=(Relationship("r", "A", "B"),),
        )
        assert _invariants(model).count("resolved-reference") == 4

    def test_empty_decomposition_carries_no_properties(self):
        model = Model(
            organizations=(Organization("O", (Agent("A"),)),),
            goals=(Goal("G", responsible="A", children=()),),
        )
        assert _invariants(model) == ["empty-decomposition"]

    def test_privileges_attach_to_leaves(self):
        model = Model(
            goals=(Goal("G", children=(Goal("Leaf"),)),),
            entities=(ARTICLE,),
            privileges=(Privilege("G", Step("Article", READ)),),
        )
        assert _invariants(model) == ["leaf-privilege"]

    def test_entry_step_has_no_relationship(self):
        model = Model(
            goals=(Goal("G"),),
            entities=(ARTICLE,),
            relationships=(Relationship("r", "Article", "Article"),),
            privileges=(Privilege("G", Step("Article", READ, via="r")),),
        )
        assert _invariants(model) == ["entry-step-shape"]

    def test_steps_grant_actions(self):
        model = Model(
            goals=(Goal("G"),),
            entities=(ARTICLE,),
            privileges=(Privilege("G", Step("Article", frozenset())),),
        )
        assert _invariants(model) == ["non-empty-actions"]

    def test_updated_attributes_must_exist_and_need_update(self):
        model = Model(
            goals=(Goal("G"),),
            entities=(ARTICLE,),
            privileges=(
                Privilege("G", Step("Article", frozenset({Action.UPDATE}), updated_attributes=("résumé",))),
                Privilege("G", Step("Article", READ, updated_attributes=("titre",))),
            ),
        )
        assert _invariants(model) == ["known-attribute", "known-attribute"]

    def test_ensure_valid_raises_with_every_issue(self):
        model = Model(entities=(ARTICLE, ARTICLE), goals=(Goal("G", responsible="Ghost"),))
        with pytest.raises(ModelError) as excinfo:
            ensure_valid(model)
        assert {issue.invariant for issue in excinfo.value.issues} == {"unique-names", "resolved-reference"}
        assert "Ghost" in str(excinfo.value)

    def test_ensure_valid_returns_the_model(self, conference_model):
        assert ensure_valid(conference_model) is conference_model

    @pytest.mark.parametrize("name", ["Gérer\nles soumissions", "tab\there", "bell\x07", "nel\x85", "\ud800"])
    def test_names_must_be_printable(self, name):
        assert _invariants(Model(goals=(Goal(name),))) == ["printable-name"]

    def test_source_name_must_be_printable(self):
        assert _invariants(Model("bad\n.greq")) == ["printable-name"]

    def test_quotes_and_non_ascii_are_printable(self):
        assert _invariants(Model(goals=(Goal('say "hi" \\ → 中'),))) == []

    def test_goal_nesting_is_bounded(self):
        assert check_model(_chain(MAX_GOAL_DEPTH)) == []
        issues = check_model(_chain(MAX_GOAL_DEPTH + 1))
        assert [(issue.invariant, issue.name) for issue in issues] == [("goal-depth", f"g{MAX_GOAL_DEPTH}")]


class TestDeepForests:
    def test_walks_do_not_recurse(self):
        model = _chain(3000, responsible="A")
        assert goal_tree_depth(model) == 3000
        owners = responsibility_map(model)
        assert len(owners) == 3000
        assert owners["g2999"] == "A"
        assert [issue.invariant for issue in check_model(model)] == ["goal-depth", "resolved-reference"]

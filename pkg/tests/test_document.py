from greq.document import emit_document
from greq.model import Model
from greq.validate import render_report_text, run_diagnostics
from tests.support import conference_mutant, parse_ok


def _document(model: Model) -> str:
    return emit_document(model, run_diagnostics(model))


class TestConferenceDocument:
    def test_sections_in_order(self, conference_model, conference_report):
        text = emit_document(conference_model, conference_report)
        headers = [line for line in text.splitlines() if line.startswith("#")]
        assert headers[0] == "# Requirements document: conference"
        sections = [line for line in headers if line.startswith("## ")]
        assert sections == [
            "## 1. Enterprise",
            "## 2. Goals",
            "## 3. Information structure",
            "## 4. Privileges",
            "## 5. Diagnostics",
        ]

    def test_enterprise_and_goals(self, conference_model, conference_report):
        lines = emit_document(conference_model, conference_report).splitlines()
        assert "### Organization Conférence" in lines
        assert "- Auteur" in lines and "- Relecteur" in lines
        assert "_Why is the application built?_" in lines
        start = lines.index("- Gérer les soumissions")
        assert lines[start + 1 : start + 3] == [
            "  - Déposer une soumission (responsible: Auteur; entry: Article)",
            "  - Analyser une soumission (responsible: Relecteur; entry: Rapport)",
        ]

    def test_information_structure(self, conference_model, conference_report):
        lines = emit_document(conference_model, conference_report).splitlines()
        assert "_How will the application be built?_" in lines
        start = lines.index("### Entity Article")
        assert lines[start + 2 : start + 6] == [
            "| Attribute | Kind |",
            "| --- | --- |",
            "| titre | text |",
            "| auteurs | text |",
        ]
        assert "- commente: Rapport -> Article" in lines

    def test_privilege_tables(self, conference_model, conference_report):
        lines = emit_document(conference_model, conference_report).splitlines()
        start = lines.index("### Analyser une soumission")
        assert lines[start + 2 : start + 8] == [
            "Entry: Rapport",
            "",
            "| Step | Via | Entity | Actions |",
            "| --- | --- | --- | --- |",
            "| 0 | (entry) | Rapport | create, update(commentaire) |",
            "| 1 | commente | Article | read |",
        ]

    def test_clean_model_reports_no_findings(self, conference_model, conference_report):
        text = emit_document(conference_model, conference_report)
        assert text.endswith("## 5. Diagnostics\n\nNo findings.\n")

    def test_every_named_element_appears(self, conference_model, conference_report):
        text = emit_document(conference_model, conference_report)
        names = (
            [org.name for org in conference_model.organizations]
            + [agent.name for agent in conference_model.all_agents()]
            + [goal.name for goal in conference_model.iter_goals()]
            + [entity.name for entity in conference_model.entities]
            + [attr.name for entity in conference_model.entities for attr in entity.attributes]
            + [rel.name for rel in conference_model.relationships]
        )
        for name in names:
            assert name in text


class TestFindings:
    def test_missing_privilege_and_report(self):
        model = parse_ok(conference_mutant("R002"))
        report = run_diagnostics(model)
        lines = emit_document(model, report).splitlines()
        start = lines.index("### Analyser une soumission")
        assert lines[start + 2] == "No privilege granted."
        fence = lines.index("```text")
        assert lines[fence + 1 : fence + 3] == render_report_text(report).splitlines()
        assert lines[fence + 3] == "```"

    def test_inherited_responsible_and_degenerate_goals(self):
        model = parse_ok(
            "organization O { agent A }\n"
            "goal Root { responsible: A goal Leaf goal Later {} }\n"
        )
        lines = _document(model).splitlines()
        assert "- Root (responsible: A)" in lines
        assert "  - Leaf (responsible: A (inherited))" in lines
        assert "  - Later (no sub-goal)" in lines

    def test_table_cells_escape_pipes(self):
        model = parse_ok('entity E { attribute "a|b": text }\n')
        assert "| a\\|b | text |" in _document(model).splitlines()


class TestEmptyModel:
    def test_only_headers(self):
        assert _document(Model()) == (
            "# Requirements document: model\n"
            "\n"
            "## 1. Enterprise\n"
            "\n"
            "## 2. Goals\n"
            "\n"
            "## 3. Information structure\n"
            "\n"
            "## 4. Privileges\n"
            "\n"
            "## 5. Diagnostics\n"
            "\n"
            "No findings.\n"
        )

    def test_deterministic(self, conference_model, conference_report):
        assert emit_document(conference_model, conference_report) == emit_document(
            conference_model, conference_report
        )

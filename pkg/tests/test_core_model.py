"""Project lifecycle: operations, invariants, and persistence."""

import json
import random

import pytest

from conftest import add_complete_doc, full_answers, md_result_row, random_project

from metaforge import core_model as cm
from metaforge import triage
from metaforge.errors import (
    NotFoundError,
    ParseError,
    ValidationError,
    VersionError,
)


class TestCreateProject:
    def test_question_rendering(self, fresh_project):
        assert fresh_project.question.text() == \
            "What is the impact of social robots on depression?"

    def test_initial_state(self, fresh_project):
        assert fresh_project.revision == 0
        assert fresh_project.documents == []
        assert [g.name for g in fresh_project.groups] == [
            "main analysis", "separate analysis", "less applicable studies"]
        assert [g.meta_analyzed for g in fresh_project.groups] == [True, True, False]

    def test_empty_intervention_rejected(self):
        with pytest.raises(ValidationError):
            cm.ResearchQuestion("", "depression")
        with pytest.raises(ValidationError):
            cm.ResearchQuestion("robots", "   ")

    def test_create_save_load_roundtrip(self, fresh_project, tmp_path):
        path = tmp_path / "new.metaproj.json"
        cm.save_project(fresh_project, path)
        assert cm.load_project(path) == fresh_project


class TestUpdateScope:
    def test_add_confounder(self, fresh_project):
        scope = cm.Scope(confounders=["baseline depression"])
        updated = cm.update_scope(fresh_project, scope)
        assert "baseline depression" in updated.scope.confounders
        assert updated.revision == fresh_project.revision + 1

    def test_identical_scope_still_bumps_revision(self, fresh_project):
        updated = cm.update_scope(fresh_project, cm.Scope())
        again = cm.update_scope(updated, cm.Scope())
        assert again.revision == updated.revision + 1
        assert again.scope == updated.scope

    def test_empty_scope_allowed(self, fresh_project):
        updated = cm.update_scope(fresh_project, cm.Scope(criteria=[]))
        assert updated.scope.criteria == []

    def test_blank_entry_rejected(self):
        with pytest.raises(ValidationError):
            cm.Scope(criteria=["ok", "  "])


class TestAddDocument:
    def test_defaults(self, fresh_project):
        p, doc = cm.add_document(fresh_project,
                                 cm.Citation("Lee, S.", 2020, "Robot trial"))
        assert doc.review_status == "not_started"
        assert doc.provisionally_included
        assert doc.duplicate_of is None
        assert len(p.documents) == 1

    def test_duplicate_warning_not_rejection(self, fresh_project):
        p, first = cm.add_document(fresh_project,
                                   cm.Citation("Lee, S.; Park, J.", 2020, "Robot Trial"))
        p, second = cm.add_document(p, cm.Citation("Lee, Soo", 2020, "robot trial!"))
        assert second.duplicate_of == first.id
        assert len(p.documents) == 2

    def test_different_year_not_duplicate(self, fresh_project):
        p, _ = cm.add_document(fresh_project, cm.Citation("Lee, S.", 2020, "Robot trial"))
        p, second = cm.add_document(p, cm.Citation("Lee, S.", 2021, "Robot trial"))
        assert second.duplicate_of is None

    def test_no_file_ref_allowed(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        assert doc.file_ref is None

    def test_empty_title_rejected(self):
        with pytest.raises(ValidationError):
            cm.Citation("A", 2020, "")


class TestReviewStatus:
    def test_complete_requires_validation(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError) as err:
            cm.set_review_status(p, doc.id, "complete")
        assert "first_author" in err.value.ids

    def test_error_names_missing_question(self, fresh_project):
        answers = full_answers()
        del answers["outcome_name"]
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, answers)
        with pytest.raises(ValidationError) as err:
            cm.set_review_status(p, doc.id, "complete")
        assert err.value.ids == ["outcome_name"]

    def test_complete_accepted_and_reset(self, fresh_project):
        p, doc_id, _ = add_complete_doc(fresh_project, "A", 2020, "T",
                                        full_answers(), [md_result_row(0.5)])
        assert cm.document_by_id(p, doc_id).review_status == "complete"
        p = cm.set_review_status(p, doc_id, "in_progress")
        assert cm.document_by_id(p, doc_id).review_status == "in_progress"

    def test_quality_note_rule_blocks_completion(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, full_answers())
        p = cm.set_quality(p, doc.id, [cm.QualityAnswer("qa_rob_confounders", "yes", "")])
        with pytest.raises(ValidationError) as err:
            cm.set_review_status(p, doc.id, "complete")
        assert "qa_rob_confounders" in err.value.ids

    def test_answers_first_touch_moves_to_in_progress(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, {"first_author": "A"})
        assert cm.document_by_id(p, doc.id).review_status == "in_progress"


class TestToggleInclusion:
    def _project_with_action(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        p, doc_id, rids = add_complete_doc(p, "A", 2020, "T", full_answers(),
                                           [md_result_row(0.5)])
        p = triage.apply_action(p, cm.TriageAction(
            rids[0], "applicability", "show_separately"))
        return p, doc_id, rids[0]

    def test_exclusion_removes_results_from_groups(self):
        p, doc_id, rid = self._project_with_action()
        assert rid in next(g for g in p.groups
                           if g.name == "less applicable studies").member_ids
        p = cm.toggle_inclusion(p, doc_id)
        assert all(rid not in g.member_ids for g in p.groups)

    def test_reinclusion_replays_action(self):
        p, doc_id, rid = self._project_with_action()
        p = cm.toggle_inclusion(p, doc_id)
        p = cm.toggle_inclusion(p, doc_id)
        assert rid in next(g for g in p.groups
                           if g.name == "less applicable studies").member_ids

    def test_unknown_id(self, fresh_project):
        with pytest.raises(NotFoundError):
            cm.toggle_inclusion(fresh_project, "d99")

    def test_membership_recomputed_from_scratch(self):
        p, doc_id, rid = self._project_with_action()
        excluded = cm.toggle_inclusion(p, doc_id)
        rederived = cm.derive_grouping(cm.eligible_result_ids(excluded),
                                       excluded.triage.events)
        assert [g.member_ids for g in excluded.groups] == \
            [g.member_ids for g in rederived.groups]


class TestAnswersAndResults:
    def test_unknown_question_rejected(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError) as err:
            cm.set_answers(p, doc.id, {"nonsense": 1})
        assert err.value.ids == ["nonsense"]

    def test_bad_value_rejected(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc.id, {"pub_year": "not a year"})

    def test_dormant_answer_retained(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, {"adjusts_for_confounders": True,
                                       "adjusted_covariates": "age"})
        p = cm.set_answers(p, doc.id, {"adjusts_for_confounders": False,
                                       "adjusted_covariates": "age"})
        assert p.answers[doc.id].answers["adjusted_covariates"] == "age"

    def test_result_validation(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc.id, full_answers(),
                           [{"label": "post", "data": {"t_mean": 1.0}}])
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc.id, full_answers(),
                           [{"label": "post",
                             "data": {"t_mean": 1.0, "t_sd": 0.0, "t_n": 10,
                                      "c_mean": 0.0, "c_sd": 1.0, "c_n": 10}}])

    def test_results_need_design_answers(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc.id, {"first_author": "A"}, [md_result_row(0.5)])

    def test_design_change_requires_result_resubmission(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, full_answers(), [md_result_row(0.5)])
        flipped = full_answers("within_subjects", "continuous")
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc.id, flipped)

    def test_complete_document_edits_must_stay_valid(self, fresh_project):
        p, doc_id, _ = add_complete_doc(fresh_project, "A", 2020, "T",
                                        full_answers(), [md_result_row(0.5)])
        broken = full_answers()
        del broken["outcome_name"]
        with pytest.raises(ValidationError):
            cm.set_answers(p, doc_id, broken, [md_result_row(0.5)])

    def test_result_ids_assigned_and_unique(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p = cm.set_answers(p, doc.id, full_answers(effect_metric_continuous="MD"),
                           [md_result_row(0.2), md_result_row(0.4, label="3mo")])
        ids = [r.id for r in p.answers[doc.id].results]
        assert len(set(ids)) == 2


class TestAnnotations:
    def test_region_required_for_marks(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.add_annotation(p, doc.id, kind="highlight", page=1)

    def test_link_target_must_resolve(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.add_annotation(p, doc.id, kind="link", page=1, link_target="a99")

    def test_comment_and_link_chain(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        p, first = cm.add_annotation(p, doc.id, kind="comment", page=2, text="note")
        p, second = cm.add_annotation(p, doc.id, kind="link", page=3,
                                      link_target=first.id)
        assert second.link_target == first.id

    def test_region_bounds(self, fresh_project):
        p, doc = cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        with pytest.raises(ValidationError):
            cm.add_annotation(p, doc.id, kind="rectangle", page=1,
                              region={"x": 0.8, "y": 0.1, "w": 0.5, "h": 0.1})


class TestPersistence:
    def test_round_trip_equality(self, tmp_path):
        rng = random.Random(42)
        for i in range(25):
            project = random_project(rng)
            path = tmp_path / f"p{i}.metaproj.json"
            cm.save_project(project, path)
            assert cm.load_project(path) == project

    def test_top_level_keys_exact(self, fresh_project, tmp_path):
        path = tmp_path / "p.metaproj.json"
        cm.save_project(fresh_project, path)
        raw = json.loads(path.read_text())
        assert set(raw) == {"schema_version", "question", "scope", "documents",
                            "answers", "quality", "triage", "groups", "revision"}

    def test_future_schema_version_rejected(self, fresh_project, tmp_path):
        path = tmp_path / "p.metaproj.json"
        cm.save_project(fresh_project, path)
        raw = json.loads(path.read_text())
        raw["schema_version"] = 999
        path.write_text(json.dumps(raw))
        with pytest.raises(VersionError) as err:
            cm.load_project(path)
        assert "999" in str(err.value)

    def test_truncated_file_parse_error_with_offset(self, fresh_project, tmp_path):
        path = tmp_path / "p.metaproj.json"
        cm.save_project(fresh_project, path)
        content = path.read_text()[:60]
        path.write_text(content)
        with pytest.raises(ParseError) as err:
            cm.load_project(path)
        assert err.value.offset is not None
        assert str(err.value.offset) in str(err.value)

    def test_missing_top_level_key(self, fresh_project, tmp_path):
        path = tmp_path / "p.metaproj.json"
        cm.save_project(fresh_project, path)
        raw = json.loads(path.read_text())
        del raw["groups"]
        path.write_text(json.dumps(raw))
        with pytest.raises(ParseError):
            cm.load_project(path)


class TestRevisionAndIntegrity:
    def test_every_operation_increments_revision(self, fresh_project):
        p = fresh_project
        r = p.revision
        p = cm.update_scope(p, cm.Scope(criteria=["adults only"]))
        assert p.revision == r + 1
        p, doc = cm.add_document(p, cm.Citation("A", 2020, "T"))
        assert p.revision == r + 2
        p = cm.set_answers(p, doc.id, full_answers(), [md_result_row(0.3)])
        assert p.revision == r + 3
        p = cm.set_quality(p, doc.id, [cm.QualityAnswer("qa_rob_confounders", "no")])
        assert p.revision == r + 4
        p = cm.set_review_status(p, doc.id, "complete")
        assert p.revision == r + 5
        rid = p.answers[doc.id].results[0].id
        p = triage.apply_action(p, cm.TriageAction(rid, "risk_of_bias", "include"))
        assert p.revision == r + 6
        p = cm.toggle_inclusion(p, doc.id)
        assert p.revision == r + 7

    def test_operations_do_not_mutate_input(self, fresh_project):
        before = cm.project_to_dict(fresh_project)
        cm.update_scope(fresh_project, cm.Scope(criteria=["x"]))
        cm.add_document(fresh_project, cm.Citation("A", 2020, "T"))
        assert cm.project_to_dict(fresh_project) == before

    def test_integrity_catches_dangling_group_member(self, fresh_project):
        raw = cm.project_to_dict(fresh_project)
        raw["groups"][0]["member_ids"] = ["r77"]
        with pytest.raises(ValidationError):
            cm.project_from_dict(raw)

    def test_integrity_catches_duplicate_membership(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        p, _doc, rids = add_complete_doc(p, "A", 2020, "T", full_answers(),
                                        [md_result_row(0.5)])
        raw = cm.project_to_dict(p)
        raw["groups"][1]["member_ids"] = list(rids)
        with pytest.raises(ValidationError):
            cm.project_from_dict(raw)

    def test_referential_integrity_after_random_walks(self):
        rng = random.Random(99)
        for _ in range(10):
            project = random_project(rng)
            cm.check_integrity(project)

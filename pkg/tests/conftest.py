"""Shared builders for tests: complete answer sets, canonical fixture
projects, and a randomized project generator for round-trip and
invariant suites."""

from __future__ import annotations

import random

import pytest

from metaforge import core_model as cm
from metaforge import triage


def full_answers(design="between_subjects", outcome="continuous", **overrides) -> dict:
    """Answer set satisfying every mandatory visible question."""
    answers = {
        "first_author": "Chen",
        "pub_year": 2019,
        "title": "A controlled trial",
        "study_design": design,
        "assignment_randomized": True,
        "adjusts_for_confounders": False,
        "baseline_outcome_controlled": True,
        "study_setting": "retirement community",
        "population_description": "older adults",
        "n_enrolled": 40,
        "attrition_reported": False,
        "intervention_description": "companion robot sessions",
        "outcome_name": "depression",
        "outcome_construct_description": "depressive symptoms",
        "outcome_kind": outcome,
        "validated_instrument": True,
        "measurement_timepoints": "post",
        "all_outcomes_reported": True,
    }
    if design == "between_subjects":
        answers["control_condition"] = "usual_care"
        if outcome == "continuous":
            answers["reports_arm_means"] = True
            answers["effect_metric_continuous"] = "SMD_g"
    else:
        answers["reports_prepost_means"] = True
        answers["prepost_correlation_reported"] = False
    if outcome == "dichotomous":
        answers["event_definition"] = "score above cutoff"
        answers["reports_event_counts"] = True
        answers["effect_metric_dichotomous"] = "lnOR"
    if outcome == "continuous":
        answers["measurement_unit"] = "points"
    answers.update(overrides)
    return answers


def md_result_row(y: float, label="post"):
    """Arm stats yielding an MD estimate of exactly (y, v=0.04)."""
    return {
        "label": label,
        "effect_kind": "MD",
        "data": {"t_mean": y, "t_sd": 1.0, "t_n": 50,
                 "c_mean": 0.0, "c_sd": 1.0, "c_n": 50},
    }


def add_complete_doc(project, author, year, title, answers, results,
                     quality=()):
    """Add a document, fill its answers/results/quality, mark complete."""
    project, doc = cm.add_document(project, cm.Citation(author, year, title))
    project = cm.set_answers(project, doc.id, answers, results)
    if quality:
        project = cm.set_quality(project, doc.id,
                                 [cm.QualityAnswer(*qa) for qa in quality])
    project = cm.set_review_status(project, doc.id, "complete")
    rids = [r.id for r in project.answers[doc.id].results]
    return project, doc.id, rids


def three_study_project():
    """Three MD results (y = 0.2, 0.4, 0.6; v = 0.04 each) in the main group."""
    project = cm.create_project(cm.ResearchQuestion("social robots", "depression"))
    rids = []
    for i, y in enumerate((0.2, 0.4, 0.6)):
        answers = full_answers(effect_metric_continuous="MD",
                               first_author=f"Author{i}")
        project, _doc, ids = add_complete_doc(
            project, f"Author{i}, A.", 2015 + i, f"Trial number {i}",
            answers, [md_result_row(y)])
        rids.extend(ids)
    return project, rids


# ---------------------------------------------------------------------------
# randomized project generator


_WORDS = ("robots", "gardens", "music", "exercise", "pets", "light", "games",
          "coaching", "naps", "walks")
_OUTCOMES = ("depression", "anxiety", "loneliness", "sleep quality", "mobility")


def _random_results(rng: random.Random, design: str, outcome: str) -> list[dict]:
    rows = []
    for i in range(rng.randint(0, 3)):
        label = rng.choice(("post", "3mo", "12mo")) if i else "post"
        if design == "between_subjects" and outcome == "continuous":
            data = {"t_mean": round(rng.uniform(-5, 15), 3),
                    "t_sd": round(rng.uniform(0.5, 4), 3),
                    "t_n": rng.randint(5, 80),
                    "c_mean": round(rng.uniform(-5, 15), 3),
                    "c_sd": round(rng.uniform(0.5, 4), 3),
                    "c_n": rng.randint(5, 80)}
            kind = rng.choice(("SMD_g", "MD"))
        elif outcome == "dichotomous":
            tn, cn = rng.randint(5, 60), rng.randint(5, 60)
            data = {"t_events": rng.randint(0, tn), "t_n": tn,
                    "c_events": rng.randint(0, cn), "c_n": cn}
            kind = rng.choice(("lnOR", "RD"))
        else:
            data = {"mean_pre": round(rng.uniform(0, 20), 3),
                    "mean_post": round(rng.uniform(0, 20), 3),
                    "sd_pre": round(rng.uniform(0.5, 4), 3),
                    "n": rng.randint(5, 80),
                    "r_prepost": rng.choice((None, round(rng.uniform(-0.5, 0.9), 2)))}
            kind = "SMD_g"
        rows.append({"label": label if not any(r["label"] == label for r in rows)
                     else f"{label}_{i}", "data": data, "effect_kind": kind})
    return rows


def random_project(rng: random.Random):
    """A structurally valid project reachable through the public operations."""
    project = cm.create_project(cm.ResearchQuestion(
        rng.choice(_WORDS), rng.choice(_OUTCOMES), topic="wellbeing"))
    if rng.random() < 0.7:
        project = cm.update_scope(project, cm.Scope(
            criteria=[f"criterion {i}" for i in range(rng.randint(0, 3))],
            confounders=[f"confounder {i}" for i in range(rng.randint(0, 2))],
            target_context=rng.choice(("a care facility", "", "community centers"))))

    all_result_ids = []
    for d in range(rng.randint(0, 3)):
        citation = cm.Citation(f"Author{rng.randint(1, 4)}, A.",
                               2010 + rng.randint(0, 12),
                               f"Study of {rng.choice(_WORDS)} {rng.randint(1, 5)}")
        project, doc = cm.add_document(
            project, citation,
            file_ref=rng.choice((None, f"papers/{d}.pdf")))
        if rng.random() < 0.8:
            design = rng.choice(("between_subjects", "within_subjects"))
            outcome = "continuous" if design == "within_subjects" else \
                rng.choice(("continuous", "dichotomous"))
            answers = full_answers(design, outcome,
                                   first_author=citation.authors.split(",")[0],
                                   pub_year=citation.year, title=citation.title)
            results = _random_results(rng, design, outcome)
            project = cm.set_answers(project, doc.id, answers, results)
            all_result_ids.extend(r.id for r in project.answers[doc.id].results)
            if rng.random() < 0.7:
                verdicts = []
                for qq in ("qa_rob_confounders", "qa_app_population",
                           "qa_cc_validated_scale"):
                    if rng.random() < 0.6:
                        verdict = rng.choice(("yes", "no", "not_sure"))
                        note = "noted concern" if verdict != "no" else ""
                        verdicts.append(cm.QualityAnswer(qq, verdict, note))
                project = cm.set_quality(project, doc.id, verdicts)
            if rng.random() < 0.6:
                project = cm.set_review_status(project, doc.id, "complete")
        if rng.random() < 0.2:
            project, _ = cm.add_annotation(
                project, doc.id, kind="highlight", page=rng.randint(1, 9),
                region={"x": 0.1, "y": 0.2, "w": 0.5, "h": 0.1},
                text="marked passage")
        if rng.random() < 0.15:
            project = cm.toggle_inclusion(project, doc.id)

    # random triage actions and group edits through the public surface
    created = 0
    for _ in range(rng.randint(0, 6)):
        grouped = [rid for g in project.groups for rid in g.member_ids]
        op = rng.random()
        try:
            if op < 0.55 and grouped:
                kind = rng.choice(cm.TRIAGE_KINDS)
                choice = rng.choice(cm.ACTION_CHOICES[kind])
                note = "flagged for review" if choice == "flag" else ""
                project = triage.apply_action(project, cm.TriageAction(
                    rng.choice(grouped), kind, choice, note))
            elif op < 0.7:
                created += 1
                project = triage.edit_groups(project, cm.GroupEdit(
                    op="create", name=f"extra group {created}"))
            elif op < 0.85 and grouped:
                targets = [g.name for g in project.groups]
                project = triage.edit_groups(project, cm.GroupEdit(
                    op="move", result_id=rng.choice(grouped),
                    to_group=rng.choice(targets)))
            elif grouped:
                kind = rng.choice(cm.TRIAGE_KINDS)
                project = triage.apply_action(project, cm.TriageAction(
                    rng.choice(grouped), kind, "include"))
        except Exception:
            continue
    return project


@pytest.fixture
def fresh_project():
    return cm.create_project(cm.ResearchQuestion("social robots", "depression"))

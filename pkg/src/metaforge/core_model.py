"""Domain model, project operations, and versioned persistence.

A Project is a value: every mutating operation returns a new snapshot
with the revision bumped by one, leaving the input untouched. Writers
serialize through compare-and-set on the revision (see api.ProjectStore);
readers may share snapshots freely.

Grouping state is never edited in place. Triage actions and group edits
are appended to an ordered event log and the current groups are
recomputed by replaying that log (`derive_grouping`), so excluding a
document hides its results' decisions instead of erasing them, and
re-inclusion restores them.
"""

from __future__ import annotations

import copy
import json
import math
import os
import re
from dataclasses import dataclass, field

from . import form_engine
from .effect_size import EFFECT_KINDS, MD, SMD_G, RD, LN_OR
from .errors import (
    NotFoundError,
    ParseError,
    ValidationError,
    VersionError,
)

SCHEMA_VERSION = 1

REVIEW_STATUSES = ("not_started", "in_progress", "complete")
ANNOTATION_KINDS = ("highlight", "rectangle", "underline", "comment", "bookmark", "link")
_REGION_REQUIRED = ("highlight", "rectangle", "underline")

TRIAGE_KINDS = form_engine.TABLE_KINDS
ACTION_CHOICES = {
    "risk_of_bias": ("include", "exclude", "flag"),
    "construct_consistency": ("include", "exclude", "separate"),
    "applicability": ("include", "exclude", "show_separately"),
}

MAIN_GROUP = "main analysis"
SEPARATE_GROUP = "separate analysis"
LESS_APPLICABLE_GROUP = "less applicable studies"
_ROLE_MAIN = "main"
_ROLE_SEPARATE = "separate"
_ROLE_LESS = "less_applicable"

_EFFECT_KINDS_FOR = {
    ("between_subjects", "continuous"): (SMD_G, MD),
    ("between_subjects", "dichotomous"): (LN_OR, RD),
    ("within_subjects", "continuous"): (SMD_G,),
}


# ---------------------------------------------------------------------------
# domain types


@dataclass
class ResearchQuestion:
    intervention: str
    outcome: str
    topic: str = ""

    def __post_init__(self):
        if not (self.intervention or "").strip():
            raise ValidationError("research question needs a non-empty intervention",
                                  ids=["intervention"])
        if not (self.outcome or "").strip():
            raise ValidationError("research question needs a non-empty outcome",
                                  ids=["outcome"])

    def text(self) -> str:
        return f"What is the impact of {self.intervention} on {self.outcome}?"


@dataclass
class Scope:
    criteria: list[str] = field(default_factory=list)
    confounders: list[str] = field(default_factory=list)
    target_context: str = ""

    def __post_init__(self):
        for name in ("criteria", "confounders"):
            entries = getattr(self, name)
            if any(not (isinstance(e, str) and e.strip()) for e in entries):
                raise ValidationError(f"scope {name} entries must be non-empty strings",
                                      ids=[name])


@dataclass
class Citation:
    authors: str
    year: int
    title: str

    def __post_init__(self):
        if not (self.title or "").strip():
            raise ValidationError("citation title must be non-empty", ids=["title"])
        if isinstance(self.year, bool) or not isinstance(self.year, int):
            raise ValidationError("citation year must be an integer", ids=["year"])

    def label(self) -> str:
        author = _first_author(self.authors) or "anonymous"
        return f"{author.title()} ({self.year})"


@dataclass
class Annotation:
    id: str
    document_id: str
    kind: str
    page: int
    region: dict | None = None  # {"x","y","w","h"} in page fractions
    text: str | None = None
    link_target: str | None = None

    def __post_init__(self):
        if self.kind not in ANNOTATION_KINDS:
            raise ValidationError(f"unknown annotation kind {self.kind!r}", ids=["kind"])
        if isinstance(self.page, bool) or not isinstance(self.page, int) or self.page < 1:
            raise ValidationError("annotation page must be an integer >= 1", ids=["page"])
        if self.kind in _REGION_REQUIRED and self.region is None:
            raise ValidationError(f"{self.kind} annotations require a region", ids=["region"])
        if self.region is not None:
            r = self.region
            keys = {"x", "y", "w", "h"}
            if set(r) != keys or any(not isinstance(r[k], (int, float)) for k in keys):
                raise ValidationError("region must have numeric x, y, w, h", ids=["region"])
            if not (0 <= r["x"] <= 1 and 0 <= r["y"] <= 1 and r["w"] >= 0 and r["h"] >= 0
                    and r["x"] + r["w"] <= 1 and r["y"] + r["h"] <= 1):
                raise ValidationError("region must lie within the unit page square",
                                      ids=["region"])
        if self.kind == "link" and not self.link_target:
            raise ValidationError("link annotations require a link_target", ids=["link_target"])


@dataclass
class Document:
    id: str
    citation: Citation
    file_ref: str | None = None
    review_status: str = "not_started"
    provisionally_included: bool = True
    duplicate_of: str | None = None  # set when another document matched on citation
    annotations: list[Annotation] = field(default_factory=list)

    def __post_init__(self):
        if self.review_status not in REVIEW_STATUSES:
            raise ValidationError(f"unknown review status {self.review_status!r}",
                                  ids=["review_status"])


@dataclass
class StudyResult:
    """One extracted comparison: design descriptor plus arm statistics."""

    id: str
    document_id: str
    label: str
    design: str
    outcome_kind: str
    effect_kind: str
    data: dict
    units: str | None = None

    def __post_init__(self):
        allowed = _EFFECT_KINDS_FOR.get((self.design, self.outcome_kind))
        if allowed is None:
            raise ValidationError(
                f"unsupported design/outcome pair ({self.design}, {self.outcome_kind})",
                ids=[self.id])
        if self.effect_kind not in allowed:
            raise ValidationError(
                f"effect kind {self.effect_kind!r} is not valid for "
                f"({self.design}, {self.outcome_kind})", ids=[self.id])


@dataclass
class QualityAnswer:
    """A yes/no/not-sure judgment; the note carries the rationale.

    Empty notes on yes/not_sure verdicts are allowed in working state and
    reported by validate_answers, which gates marking a document complete.
    """

    question_id: str
    verdict: str
    note: str = ""

    def __post_init__(self):
        if self.verdict not in form_engine.VERDICTS:
            raise ValidationError(f"unknown verdict {self.verdict!r}",
                                  ids=[self.question_id])


@dataclass
class AnswerSet:
    answers: dict = field(default_factory=dict)
    results: list[StudyResult] = field(default_factory=list)


@dataclass
class TriageAction:
    result_id: str
    kind: str
    choice: str
    note: str = ""

    def __post_init__(self):
        if self.kind not in TRIAGE_KINDS:
            raise ValidationError(f"unknown triage table kind {self.kind!r}", ids=["kind"])
        if self.choice not in ACTION_CHOICES[self.kind]:
            raise ValidationError(
                f"choice {self.choice!r} is not valid for the {self.kind} table",
                ids=["choice"])
        if self.choice == "flag" and not (self.note or "").strip():
            raise ValidationError("flagging a result requires a note", ids=["note"])


@dataclass
class GroupEdit:
    op: str  # create | rename | delete | move
    name: str | None = None
    old: str | None = None
    new: str | None = None
    result_id: str | None = None
    to_group: str | None = None

    def __post_init__(self):
        if self.op not in ("create", "rename", "delete", "move"):
            raise ValidationError(f"unknown group edit op {self.op!r}", ids=["op"])


@dataclass
class TriageState:
    events: list = field(default_factory=list)  # TriageAction | GroupEdit, in order


@dataclass
class StudyGroup:
    name: str
    member_ids: list[str] = field(default_factory=list)
    meta_analyzed: bool = True


@dataclass
class Project:
    schema_version: int
    question: ResearchQuestion
    scope: Scope
    documents: list[Document]
    answers: dict  # document_id -> AnswerSet
    quality: dict  # document_id -> list[QualityAnswer]
    triage: TriageState
    groups: list[StudyGroup]
    revision: int


# ---------------------------------------------------------------------------
# small helpers


def _first_author(authors: str) -> str:
    head = re.split(r";|&|\band\b", authors or "")[0]
    head = head.split(",")[0].strip()
    parts = head.split()
    return parts[-1].lower() if parts else ""


def _normalized_citation_key(c: Citation) -> tuple:
    norm = lambda s: re.sub(r"[^a-z0-9]+", " ", (s or "").lower()).strip()
    return (norm(c.title), c.year, _first_author(c.authors))


def _next_id(prefix: str, existing: set[str]) -> str:
    top = 0
    pat = re.compile(rf"^{prefix}(\d+)$")
    for eid in existing:
        m = pat.match(eid)
        if m:
            top = max(top, int(m.group(1)))
    return f"{prefix}{top + 1}"


def document_by_id(project: Project, document_id: str) -> Document:
    for doc in project.documents:
        if doc.id == document_id:
            return doc
    raise NotFoundError(f"unknown document {document_id!r}")


def all_results(project: Project) -> list[tuple[Document, StudyResult]]:
    """Every result in canonical order: document order, then entry order."""
    out = []
    for doc in project.documents:
        aset = project.answers.get(doc.id)
        if aset:
            out.extend((doc, r) for r in aset.results)
    return out


def result_by_id(project: Project, result_id: str) -> tuple[Document, StudyResult]:
    for doc, res in all_results(project):
        if res.id == result_id:
            return doc, res
    raise NotFoundError(f"unknown result {result_id!r}")


def eligible_result_ids(project: Project) -> list[str]:
    """Results of provisionally included documents, canonical order."""
    return [r.id for doc, r in all_results(project) if doc.provisionally_included]


# ---------------------------------------------------------------------------
# grouping replay


@dataclass(frozen=True)
class GroupingState:
    """Materialized grouping view: groups, flags, and latest per-kind actions."""

    groups: list[StudyGroup]
    flags: dict  # result_id -> note
    actions: dict  # result_id -> {kind: (choice, note)}
    excluded: set
    default_names: dict  # role -> current name of each protected default group


def derive_grouping(eligible_ids: list[str], events: list) -> GroupingState:
    """Replay the action/edit log to produce the current grouping.

    A manual move overrides the action-derived placement for a result
    until its next action event. Placement precedence when no override
    applies: exclude > show_separately > separate > include.
    """
    registry: dict = {
        MAIN_GROUP: True,
        SEPARATE_GROUP: True,
        LESS_APPLICABLE_GROUP: False,
    }
    roles = {_ROLE_MAIN: MAIN_GROUP, _ROLE_SEPARATE: SEPARATE_GROUP,
             _ROLE_LESS: LESS_APPLICABLE_GROUP}
    actions: dict = {}
    overrides: dict = {}

    for ev in events:
        if isinstance(ev, TriageAction):
            actions.setdefault(ev.result_id, {})[ev.kind] = (ev.choice, ev.note)
            overrides.pop(ev.result_id, None)  # actions release manual placement
        elif isinstance(ev, GroupEdit):
            if ev.op == "create":
                registry.setdefault(ev.name, True)
            elif ev.op == "rename":
                if ev.old in registry:
                    registry = {ev.new if k == ev.old else k: v for k, v in registry.items()}
                    for role, name in roles.items():
                        if name == ev.old:
                            roles[role] = ev.new
                    for rid, g in list(overrides.items()):
                        if g == ev.old:
                            overrides[rid] = ev.new
            elif ev.op == "delete":
                registry.pop(ev.name, None)
                for rid, g in list(overrides.items()):
                    if g == ev.name:
                        del overrides[rid]
            elif ev.op == "move":
                overrides[ev.result_id] = ev.to_group
        else:
            raise ValidationError(f"unknown triage event {ev!r}")

    members: dict = {name: [] for name in registry}
    excluded: set = set()
    for rid in eligible_ids:
        acts = actions.get(rid, {})
        choices = {kind: acts[kind][0] for kind in acts}
        if "exclude" in choices.values():
            excluded.add(rid)
            continue
        target = overrides.get(rid)
        if target is None or target not in registry:
            if choices.get("applicability") == "show_separately":
                target = roles[_ROLE_LESS]
            elif choices.get("construct_consistency") == "separate":
                target = roles[_ROLE_SEPARATE]
            else:
                target = roles[_ROLE_MAIN]
        members[target].append(rid)

    flags = {rid: acts["risk_of_bias"][1]
             for rid, acts in actions.items()
             if rid in eligible_ids and rid not in excluded
             and acts.get("risk_of_bias", ("", ""))[0] == "flag"}

    groups = [StudyGroup(name=name, member_ids=members[name], meta_analyzed=meta)
              for name, meta in registry.items()]
    return GroupingState(groups=groups, flags=flags, actions=actions, excluded=excluded,
                         default_names=dict(roles))


def refresh_groups(project: Project) -> None:
    """Recompute project.groups from the event log (call after mutation)."""
    state = derive_grouping(eligible_result_ids(project), project.triage.events)
    project.groups = state.groups


def grouping_state(project: Project) -> GroupingState:
    return derive_grouping(eligible_result_ids(project), project.triage.events)


# ---------------------------------------------------------------------------
# integrity


def check_integrity(project: Project) -> None:
    """Verify that every cross-reference resolves. Raises on violation."""
    doc_ids = [d.id for d in project.documents]
    if len(set(doc_ids)) != len(doc_ids):
        raise ValidationError("document ids are not unique")
    doc_set = set(doc_ids)

    for key in list(project.answers) + list(project.quality):
        if key not in doc_set:
            raise ValidationError(f"answers/quality reference unknown document {key!r}")

    result_ids: set = set()
    for doc in project.documents:
        aset = project.answers.get(doc.id)
        if not aset:
            continue
        for res in aset.results:
            if res.document_id != doc.id:
                raise ValidationError(f"result {res.id!r} does not belong to {doc.id!r}")
            if res.id in result_ids:
                raise ValidationError(f"result id {res.id!r} is not unique")
            result_ids.add(res.id)

    for doc in project.documents:
        ann_ids = {a.id for a in doc.annotations}
        for a in doc.annotations:
            if a.document_id != doc.id:
                raise ValidationError(f"annotation {a.id!r} does not belong to {doc.id!r}")
            if a.link_target is not None and a.link_target not in ann_ids:
                raise ValidationError(
                    f"annotation {a.id!r} links to unknown target {a.link_target!r}")

    names = [g.name for g in project.groups]
    if len(set(names)) != len(names):
        raise ValidationError("group names are not unique")
    seen: set = set()
    for g in project.groups:
        for rid in g.member_ids:
            if rid not in result_ids:
                raise ValidationError(f"group {g.name!r} references unknown result {rid!r}")
            if rid in seen:
                raise ValidationError(f"result {rid!r} appears in more than one group")
            seen.add(rid)

    schema = form_engine.load_default_schema()
    quality_ids = {q.id for q in schema.quality_questions}
    for doc_id, answers in project.quality.items():
        for qa in answers:
            if qa.question_id not in quality_ids:
                raise ValidationError(
                    f"quality answer for unknown question {qa.question_id!r} on {doc_id!r}")


# ---------------------------------------------------------------------------
# operations


def _bump(project: Project) -> Project:
    clone = copy.deepcopy(project)
    clone.revision += 1
    return clone


def create_project(question: ResearchQuestion) -> Project:
    project = Project(
        schema_version=SCHEMA_VERSION,
        question=copy.deepcopy(question),
        scope=Scope(),
        documents=[],
        answers={},
        quality={},
        triage=TriageState(),
        groups=[],
        revision=0,
    )
    refresh_groups(project)  # installs the three default groups
    check_integrity(project)
    return project


def update_scope(project: Project, scope: Scope) -> Project:
    clone = _bump(project)
    clone.scope = copy.deepcopy(scope)
    check_integrity(clone)
    return clone


def add_document(project: Project, citation: Citation,
                 file_ref: str | None = None) -> tuple[Project, Document]:
    clone = _bump(project)
    key = _normalized_citation_key(citation)
    duplicate_of = None
    for doc in clone.documents:
        if _normalized_citation_key(doc.citation) == key:
            duplicate_of = doc.id
            break
    doc = Document(
        id=_next_id("d", {d.id for d in clone.documents}),
        citation=copy.deepcopy(citation),
        file_ref=file_ref,
        duplicate_of=duplicate_of,
    )
    clone.documents.append(doc)
    check_integrity(clone)
    return clone, doc


def validate_document(project: Project, document_id: str) -> form_engine.CompletenessReport:
    """Completeness report for one document's answers and quality judgments."""
    schema = form_engine.load_default_schema()
    aset = project.answers.get(document_id) or AnswerSet()
    quality = project.quality.get(document_id) or []
    return form_engine.validate_answers(schema, aset.answers, quality)


def set_review_status(project: Project, document_id: str, status: str) -> Project:
    if status not in REVIEW_STATUSES:
        raise ValidationError(f"unknown review status {status!r}", ids=["review_status"])
    document_by_id(project, document_id)
    if status == "complete":
        report = validate_document(project, document_id)
        if not report.ok:
            missing = list(report.missing_mandatory) + list(report.note_violations) \
                + list(report.invalid_values)
            raise ValidationError(
                f"cannot mark {document_id} complete; unresolved: {', '.join(missing)}",
                ids=missing)
    clone = _bump(project)
    document_by_id(clone, document_id).review_status = status
    check_integrity(clone)
    return clone


def set_inclusion(project: Project, document_id: str, included: bool) -> Project:
    document_by_id(project, document_id)
    clone = _bump(project)
    document_by_id(clone, document_id).provisionally_included = bool(included)
    refresh_groups(clone)
    check_integrity(clone)
    return clone


def toggle_inclusion(project: Project, document_id: str) -> Project:
    doc = document_by_id(project, document_id)
    return set_inclusion(project, document_id, not doc.provisionally_included)


def _default_effect_kind(design: str, outcome_kind: str, answers: dict) -> str:
    if design == "within_subjects":
        return SMD_G
    if outcome_kind == "continuous":
        return answers.get("effect_metric_continuous") or SMD_G
    return answers.get("effect_metric_dichotomous") or LN_OR


def _validate_result_data(schema: form_engine.EvidenceTableSchema, data: dict,
                          result_id: str) -> dict:
    cols = set(schema.columns)
    unknown = sorted(set(data) - cols)
    if unknown:
        raise ValidationError(
            f"result {result_id}: unexpected statistics {', '.join(unknown)}", ids=unknown)
    clean = {}
    missing = []
    for col in schema.columns:
        val = data.get(col)
        if val is None:
            if col in schema.optional_columns:
                clean[col] = None
                continue
            missing.append(col)
            continue
        if col in ("t_n", "c_n", "n", "t_events", "c_events"):
            if isinstance(val, bool) or not isinstance(val, int):
                raise ValidationError(f"result {result_id}: {col} must be an integer",
                                      ids=[col])
        elif isinstance(val, bool) or not isinstance(val, (int, float)) \
                or math.isnan(val) or math.isinf(val):
            raise ValidationError(f"result {result_id}: {col} must be a finite number",
                                  ids=[col])
        clean[col] = val
    if missing:
        raise ValidationError(
            f"result {result_id}: missing statistics {', '.join(missing)}", ids=missing)

    def _check(cond: bool, msg: str, col: str):
        if not cond:
            raise ValidationError(f"result {result_id}: {msg}", ids=[col])

    if schema.design == "between_subjects" and schema.outcome_kind == "continuous":
        _check(clean["t_sd"] > 0, "t_sd must be > 0", "t_sd")
        _check(clean["c_sd"] > 0, "c_sd must be > 0", "c_sd")
        _check(clean["t_n"] >= 2, "t_n must be >= 2", "t_n")
        _check(clean["c_n"] >= 2, "c_n must be >= 2", "c_n")
    elif schema.outcome_kind == "dichotomous":
        _check(clean["t_n"] >= 1, "t_n must be >= 1", "t_n")
        _check(clean["c_n"] >= 1, "c_n must be >= 1", "c_n")
        _check(0 <= clean["t_events"] <= clean["t_n"], "t_events must be in 0..t_n", "t_events")
        _check(0 <= clean["c_events"] <= clean["c_n"], "c_events must be in 0..c_n", "c_events")
    else:  # within continuous
        _check(clean["sd_pre"] > 0, "sd_pre must be > 0", "sd_pre")
        _check(clean["n"] >= 2, "n must be >= 2", "n")
        if clean.get("r_prepost") is not None:
            _check(-1.0 < clean["r_prepost"] < 1.0, "r_prepost must be in (-1, 1)", "r_prepost")
    return clean


def set_answers(project: Project, document_id: str, answers: dict,
                results: list[dict] | None = None) -> Project:
    """Replace a document's answer set (and optionally its result rows).

    Answers for hidden questions are stored verbatim and stay dormant;
    visible answers are type-checked now. Editing a complete document
    must keep it complete, otherwise reset its status first.
    """
    doc = document_by_id(project, document_id)
    schema = form_engine.load_default_schema()

    unknown = sorted(k for k in answers if k not in schema.by_id
                     or not isinstance(schema.by_id[k], form_engine.Question))
    if unknown:
        raise ValidationError(f"unknown question ids: {', '.join(unknown)}", ids=unknown)
    bad = []
    for q in form_engine.visible_questions(schema, answers):
        if q.id in answers and form_engine.validate_answer_value(q, answers[q.id]):
            bad.append(q.id)
    if bad:
        raise ValidationError(f"invalid answer values: {', '.join(bad)}", ids=bad)

    clone = _bump(project)
    aset = clone.answers.setdefault(document_id, AnswerSet())
    aset.answers = copy.deepcopy(answers)

    if results is None and aset.results:
        # Retained result rows must still match the (possibly changed) design
        # and outcome answers; otherwise the rows have to be resubmitted.
        try:
            table = form_engine.derive_evidence_table(answers)
            stale = any((r.design, r.outcome_kind) != (table.design, table.outcome_kind)
                        for r in aset.results)
        except ValidationError:
            stale = True
        if stale:
            raise ValidationError(
                "design/outcome answers no longer match the entered result rows; "
                "resubmit the result rows together with these answers",
                ids=[form_engine.DESIGN_QUESTION, form_engine.OUTCOME_KIND_QUESTION])

    if results is not None:
        table = form_engine.derive_evidence_table(answers) if results else None
        existing = {r.id for _, r in all_results(clone)} - {r.id for r in aset.results}
        new_results = []
        for raw in results:
            rid = raw.get("id") or _next_id("r", existing | {r.id for r in new_results})
            if rid in existing or any(r.id == rid for r in new_results):
                raise ValidationError(f"result id {rid!r} is not unique", ids=[rid])
            data = _validate_result_data(table, raw.get("data") or {}, rid)
            kind = raw.get("effect_kind") or _default_effect_kind(
                table.design, table.outcome_kind, answers)
            new_results.append(StudyResult(
                id=rid,
                document_id=document_id,
                label=raw.get("label") or "post",
                design=table.design,
                outcome_kind=table.outcome_kind,
                effect_kind=kind,
                data=data,
                units=raw.get("units") or answers.get("measurement_unit"),
            ))
        aset.results = new_results

    new_doc = document_by_id(clone, document_id)
    if doc.review_status == "complete":
        report = form_engine.validate_answers(schema, aset.answers,
                                              clone.quality.get(document_id) or [])
        if not report.ok:
            raise ValidationError(
                "edit would invalidate a complete document; reset its status first",
                ids=list(report.missing_mandatory) + list(report.invalid_values))
    elif new_doc.review_status == "not_started":
        new_doc.review_status = "in_progress"

    refresh_groups(clone)
    check_integrity(clone)
    return clone


def set_quality(project: Project, document_id: str,
                quality_answers: list[QualityAnswer]) -> Project:
    document_by_id(project, document_id)
    schema = form_engine.load_default_schema()
    known = {q.id for q in schema.quality_questions}
    seen: set = set()
    for qa in quality_answers:
        if qa.question_id not in known:
            raise ValidationError(f"unknown quality question {qa.question_id!r}",
                                  ids=[qa.question_id])
        if qa.question_id in seen:
            raise ValidationError(f"duplicate quality answer for {qa.question_id!r}",
                                  ids=[qa.question_id])
        seen.add(qa.question_id)
    clone = _bump(project)
    clone.quality[document_id] = copy.deepcopy(list(quality_answers))
    doc = document_by_id(clone, document_id)
    if doc.review_status == "not_started":
        doc.review_status = "in_progress"
    check_integrity(clone)
    return clone


def add_annotation(project: Project, document_id: str, kind: str, page: int,
                   region: dict | None = None, text: str | None = None,
                   link_target: str | None = None) -> tuple[Project, Annotation]:
    document_by_id(project, document_id)
    clone = _bump(project)
    doc = document_by_id(clone, document_id)
    ann = Annotation(
        id=_next_id("a", {a.id for d in clone.documents for a in d.annotations}),
        document_id=document_id,
        kind=kind,
        page=page,
        region=copy.deepcopy(region),
        text=text,
        link_target=link_target,
    )
    doc.annotations.append(ann)
    check_integrity(clone)
    return clone, ann


def append_triage_event(project: Project, event) -> Project:
    """Append a validated triage event and re-derive groups."""
    clone = _bump(project)
    clone.triage.events.append(copy.deepcopy(event))
    refresh_groups(clone)
    check_integrity(clone)
    return clone


# ---------------------------------------------------------------------------
# persistence


def project_to_dict(project: Project) -> dict:
    return {
        "schema_version": project.schema_version,
        "question": {
            "intervention": project.question.intervention,
            "outcome": project.question.outcome,
            "topic": project.question.topic,
        },
        "scope": {
            "criteria": list(project.scope.criteria),
            "confounders": list(project.scope.confounders),
            "target_context": project.scope.target_context,
        },
        "documents": [
            {
                "id": d.id,
                "citation": {"authors": d.citation.authors, "year": d.citation.year,
                             "title": d.citation.title},
                "file_ref": d.file_ref,
                "review_status": d.review_status,
                "provisionally_included": d.provisionally_included,
                "duplicate_of": d.duplicate_of,
                "annotations": [
                    {"id": a.id, "document_id": a.document_id, "kind": a.kind,
                     "page": a.page, "region": a.region, "text": a.text,
                     "link_target": a.link_target}
                    for a in d.annotations
                ],
            }
            for d in project.documents
        ],
        "answers": {
            doc_id: {
                "answers": aset.answers,
                "results": [
                    {"id": r.id, "document_id": r.document_id, "label": r.label,
                     "design": r.design, "outcome_kind": r.outcome_kind,
                     "effect_kind": r.effect_kind, "data": r.data, "units": r.units}
                    for r in aset.results
                ],
            }
            for doc_id, aset in project.answers.items()
        },
        "quality": {
            doc_id: [{"question_id": qa.question_id, "verdict": qa.verdict, "note": qa.note}
                     for qa in answers]
            for doc_id, answers in project.quality.items()
        },
        "triage": {
            "events": [
                ({"type": "action", "result_id": ev.result_id, "kind": ev.kind,
                  "choice": ev.choice, "note": ev.note}
                 if isinstance(ev, TriageAction) else
                 {"type": "edit", "op": ev.op, "name": ev.name, "old": ev.old,
                  "new": ev.new, "result_id": ev.result_id, "to_group": ev.to_group})
                for ev in project.triage.events
            ],
        },
        "groups": [
            {"name": g.name, "member_ids": list(g.member_ids), "meta_analyzed": g.meta_analyzed}
            for g in project.groups
        ],
        "revision": project.revision,
    }


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ParseError(f"project file is missing {context}.{key}" if context
                         else f"project file is missing top-level key {key!r}")
    return mapping[key]


def project_from_dict(raw: dict) -> Project:
    if not isinstance(raw, dict):
        raise ParseError("project file must contain a JSON object")
    version = _require(raw, "schema_version", "")
    if isinstance(version, bool) or not isinstance(version, int):
        raise ParseError("schema_version must be an integer")
    if version > SCHEMA_VERSION:
        raise VersionError(
            f"project file schema_version {version} is newer than supported "
            f"version {SCHEMA_VERSION}")

    try:
        q = _require(raw, "question", "")
        question = ResearchQuestion(intervention=q["intervention"], outcome=q["outcome"],
                                    topic=q.get("topic", ""))
        s = _require(raw, "scope", "")
        scope = Scope(criteria=list(s["criteria"]), confounders=list(s["confounders"]),
                      target_context=s["target_context"])
        documents = []
        for d in _require(raw, "documents", ""):
            c = d["citation"]
            documents.append(Document(
                id=d["id"],
                citation=Citation(authors=c["authors"], year=c["year"], title=c["title"]),
                file_ref=d.get("file_ref"),
                review_status=d.get("review_status", "not_started"),
                provisionally_included=bool(d.get("provisionally_included", True)),
                duplicate_of=d.get("duplicate_of"),
                annotations=[
                    Annotation(id=a["id"], document_id=a["document_id"], kind=a["kind"],
                               page=a["page"], region=a.get("region"), text=a.get("text"),
                               link_target=a.get("link_target"))
                    for a in d.get("annotations", [])
                ],
            ))
        answers = {}
        for doc_id, aset in _require(raw, "answers", "").items():
            answers[doc_id] = AnswerSet(
                answers=dict(aset.get("answers", {})),
                results=[
                    StudyResult(id=r["id"], document_id=r["document_id"], label=r["label"],
                                design=r["design"], outcome_kind=r["outcome_kind"],
                                effect_kind=r["effect_kind"], data=dict(r["data"]),
                                units=r.get("units"))
                    for r in aset.get("results", [])
                ],
            )
        quality = {
            doc_id: [QualityAnswer(question_id=qa["question_id"], verdict=qa["verdict"],
                                   note=qa.get("note", ""))
                     for qa in entries]
            for doc_id, entries in _require(raw, "quality", "").items()
        }
        events = []
        for ev in _require(raw, "triage", "").get("events", []):
            if ev.get("type") == "action":
                events.append(TriageAction(result_id=ev["result_id"], kind=ev["kind"],
                                           choice=ev["choice"], note=ev.get("note", "")))
            elif ev.get("type") == "edit":
                events.append(GroupEdit(op=ev["op"], name=ev.get("name"), old=ev.get("old"),
                                        new=ev.get("new"), result_id=ev.get("result_id"),
                                        to_group=ev.get("to_group")))
            else:
                raise ParseError(f"unknown triage event type {ev.get('type')!r}")
        groups = [StudyGroup(name=g["name"], member_ids=list(g["member_ids"]),
                             meta_analyzed=bool(g["meta_analyzed"]))
                  for g in _require(raw, "groups", "")]
        revision = _require(raw, "revision", "")
        if isinstance(revision, bool) or not isinstance(revision, int) or revision < 0:
            raise ParseError("revision must be a non-negative integer")
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"project file is structurally malformed: {exc!r}") from exc

    project = Project(schema_version=version, question=question, scope=scope,
                      documents=documents, answers=answers, quality=quality,
                      triage=TriageState(events=events), groups=groups, revision=revision)
    check_integrity(project)
    return project


def save_project(project: Project, path: str | os.PathLike) -> None:
    """Write the project as a single self-contained JSON document."""
    payload = json.dumps(project_to_dict(project), indent=2, allow_nan=False)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload + "\n")
    os.replace(tmp, path)


def load_project(path: str | os.PathLike) -> Project:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"project file is not valid JSON at byte offset {exc.pos}: "
                         f"{exc.msg}", offset=exc.pos) from exc
    return project_from_dict(raw)

"""Dynamic extraction and quality questionnaires.

The question bank is data, not code: two bundled JSON files define the
extraction form (with conditional branching) and the quality form (three
judgment tables), cross-linked question by question. Everything here is
a pure function over (schema, answers), so visibility and validation are
deterministic and trivially testable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import ValidationError

SECTIONS = ("identity", "context", "participants", "measurement", "effect_size")
TABLE_KINDS = ("risk_of_bias", "construct_consistency", "applicability")
SCALAR_KINDS = ("text", "integer", "number", "boolean")
VERDICTS = ("yes", "no", "not_sure")

DESIGN_QUESTION = "study_design"
OUTCOME_KIND_QUESTION = "outcome_kind"
TIMEPOINTS_QUESTION = "measurement_timepoints"

# Evidence-table columns forced by (design, outcome_kind). r_prepost is
# the one optional column: unreported correlations are imputed downstream.
_TABLE_COLUMNS = {
    ("between_subjects", "continuous"): ["t_mean", "t_sd", "t_n", "c_mean", "c_sd", "c_n"],
    ("between_subjects", "dichotomous"): ["t_events", "t_n", "c_events", "c_n"],
    ("within_subjects", "continuous"): ["mean_pre", "mean_post", "sd_pre", "n", "r_prepost"],
}
_OPTIONAL_COLUMNS = {"r_prepost"}


@dataclass(frozen=True)
class Question:
    id: str
    section: str
    prompt: str
    answer_kind: str            # one of SCALAR_KINDS, or "single_choice"/"multi_choice"
    options: tuple[str, ...]    # empty unless *_choice
    show_if: tuple[tuple[str, object], ...]  # conjunction of (question_id, required value)
    mandatory: bool
    qa_link: str | None
    manual: dict


@dataclass(frozen=True)
class QualityQuestion:
    id: str
    table_kind: str
    prompt: str
    extraction_link: str


@dataclass(frozen=True)
class FormSchema:
    """Ordered extraction questions plus the quality tables and link maps."""

    questions: tuple[Question, ...]
    quality_questions: tuple[QualityQuestion, ...]
    by_id: dict = field(repr=False, default_factory=dict)
    links: dict = field(repr=False, default_factory=dict)  # id -> counterpart id, both ways

    def question(self, qid: str) -> Question:
        q = self.by_id.get(qid)
        if q is None or not isinstance(q, Question):
            raise ValidationError(f"unknown extraction question {qid!r}", ids=[qid])
        return q

    def quality_question(self, qid: str) -> QualityQuestion:
        q = self.by_id.get(qid)
        if q is None or not isinstance(q, QualityQuestion):
            raise ValidationError(f"unknown quality question {qid!r}", ids=[qid])
        return q


@dataclass(frozen=True)
class EvidenceTableSchema:
    """Statistics the evidence table requires for one document's results."""

    design: str
    outcome_kind: str
    columns: tuple[str, ...]
    optional_columns: frozenset[str]
    timepoints: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "outcome_kind": self.outcome_kind,
            "columns": list(self.columns),
            "optional_columns": sorted(self.optional_columns),
            "timepoints": list(self.timepoints),
        }


@dataclass(frozen=True)
class CompletenessReport:
    """Outcome of validate_answers: empty lists mean ready for completion."""

    missing_mandatory: tuple[str, ...]
    note_violations: tuple[str, ...]
    invalid_values: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not (self.missing_mandatory or self.note_violations or self.invalid_values)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "missing_mandatory": list(self.missing_mandatory),
            "note_violations": list(self.note_violations),
            "invalid_values": list(self.invalid_values),
        }


def _parse_question(raw: dict, seen: set[str]) -> Question:
    kind = raw["answer_kind"]
    options: tuple[str, ...] = ()
    if isinstance(kind, dict):
        options = tuple(kind["options"])
        kind = kind["type"]
        if kind not in ("single_choice", "multi_choice") or not options:
            raise ValidationError(f"question {raw['id']!r} has malformed choice kind")
    elif kind not in SCALAR_KINDS:
        raise ValidationError(f"question {raw['id']!r} has unknown answer kind {kind!r}")
    show_if = tuple((cid, val) for cid, val in raw.get("show_if", []))
    for cid, _ in show_if:
        if cid not in seen:
            raise ValidationError(
                f"question {raw['id']!r} branches on {cid!r}, which is not an earlier question")
    if raw["section"] not in SECTIONS:
        raise ValidationError(f"question {raw['id']!r} has unknown section {raw['section']!r}")
    manual = raw["manual"]
    if not all(manual.get(k) for k in ("description", "location", "importance")):
        raise ValidationError(f"question {raw['id']!r} is missing coding-manual fields")
    return Question(
        id=raw["id"],
        section=raw["section"],
        prompt=raw["prompt"],
        answer_kind=kind,
        options=options,
        show_if=show_if,
        mandatory=bool(raw.get("mandatory", False)),
        qa_link=raw.get("qa_link"),
        manual=manual,
    )


def build_schema(extraction_raw: list[dict], quality_raw: list[dict]) -> FormSchema:
    """Assemble and cross-validate a schema from declarative records."""
    seen: set[str] = set()
    questions = []
    for raw in extraction_raw:
        q = _parse_question(raw, seen)
        if q.id in seen:
            raise ValidationError(f"duplicate question id {q.id!r}")
        seen.add(q.id)
        questions.append(q)

    quality = []
    for raw in quality_raw:
        if raw["table_kind"] not in TABLE_KINDS:
            raise ValidationError(f"quality question {raw['id']!r} has unknown table kind")
        quality.append(QualityQuestion(
            id=raw["id"], table_kind=raw["table_kind"],
            prompt=raw["prompt"], extraction_link=raw["extraction_link"]))

    by_id: dict = {q.id: q for q in questions}
    for qq in quality:
        if qq.id in by_id:
            raise ValidationError(f"duplicate question id {qq.id!r}")
        by_id[qq.id] = qq

    # The extraction<->quality link map must be a bijection on linked pairs.
    links: dict = {}
    for qq in quality:
        target = by_id.get(qq.extraction_link)
        if not isinstance(target, Question):
            raise ValidationError(
                f"quality question {qq.id!r} links to unknown extraction question "
                f"{qq.extraction_link!r}")
        if target.qa_link != qq.id:
            raise ValidationError(
                f"link mismatch: {qq.id!r} -> {qq.extraction_link!r} is not mirrored")
        if qq.extraction_link in links:
            raise ValidationError(f"extraction question {qq.extraction_link!r} linked twice")
        links[qq.id] = qq.extraction_link
        links[qq.extraction_link] = qq.id
    for q in questions:
        if q.qa_link is not None and links.get(q.id) != q.qa_link:
            raise ValidationError(f"extraction question {q.id!r} links to nothing")

    return FormSchema(questions=tuple(questions), quality_questions=tuple(quality),
                      by_id=by_id, links=links)


@lru_cache(maxsize=1)
def load_default_schema() -> FormSchema:
    """Load the bundled question bank."""
    pkg = resources.files("metaforge.data")
    extraction = json.loads(pkg.joinpath("extraction_schema.json").read_text("utf-8"))
    quality = json.loads(pkg.joinpath("quality_schema.json").read_text("utf-8"))
    return build_schema(extraction, quality)


def _predicate_holds(question: Question, answers: dict) -> bool:
    return all(answers.get(cid) == val for cid, val in question.show_if)


def visible_questions(schema: FormSchema, answers: dict) -> list[Question]:
    """Exactly the questions whose branch conditions hold, in form order."""
    return [q for q in schema.questions if _predicate_holds(q, answers)]


def validate_answer_value(question: Question, value) -> str | None:
    """None if `value` fits the question's answer kind, else a message."""
    kind = question.answer_kind
    if kind == "text":
        if not isinstance(value, str) or not value.strip():
            return "expected non-empty text"
    elif kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            return "expected an integer"
    elif kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return "expected a number"
    elif kind == "boolean":
        if not isinstance(value, bool):
            return "expected true or false"
    elif kind == "single_choice":
        if value not in question.options:
            return f"expected one of {', '.join(question.options)}"
    elif kind == "multi_choice":
        if (not isinstance(value, list)
                or any(v not in question.options for v in value)):
            return f"expected a list drawn from {', '.join(question.options)}"
    return None


def derive_evidence_table(answers: dict) -> EvidenceTableSchema:
    """Columns the evidence table needs, forced by design and outcome kind."""
    design = answers.get(DESIGN_QUESTION)
    outcome = answers.get(OUTCOME_KIND_QUESTION)
    missing = [qid for qid, val in ((DESIGN_QUESTION, design), (OUTCOME_KIND_QUESTION, outcome))
               if val is None]
    if missing:
        raise ValidationError(
            "evidence table needs design and outcome kind answered first", ids=missing)
    if (design, outcome) == ("within_subjects", "dichotomous"):
        raise ValidationError(
            "within-subjects dichotomous results are not supported; "
            "extract a continuous score or a between-subjects contrast",
            ids=[DESIGN_QUESTION, OUTCOME_KIND_QUESTION])
    columns = _TABLE_COLUMNS.get((design, outcome))
    if columns is None:
        raise ValidationError(f"no evidence table for design={design!r}, outcome={outcome!r}",
                              ids=[DESIGN_QUESTION, OUTCOME_KIND_QUESTION])
    raw_tp = answers.get(TIMEPOINTS_QUESTION) or ""
    timepoints = tuple(t.strip() for t in raw_tp.split(",") if t.strip())
    return EvidenceTableSchema(
        design=design, outcome_kind=outcome, columns=tuple(columns),
        optional_columns=frozenset(_OPTIONAL_COLUMNS & set(columns)),
        timepoints=timepoints)


def validate_answers(schema: FormSchema, answers: dict,
                     quality_answers: list | tuple = ()) -> CompletenessReport:
    """Report gaps that block marking a document complete.

    Hidden questions are dormant: their stored answers are neither
    required nor re-validated. Quality verdicts of yes or not_sure must
    carry a non-empty note.
    """
    missing = []
    invalid = []
    for q in visible_questions(schema, answers):
        if q.id not in answers:
            if q.mandatory:
                missing.append(q.id)
            continue
        problem = validate_answer_value(q, answers[q.id])
        if problem is not None:
            invalid.append(q.id)
    note_violations = []
    for qa in quality_answers:
        verdict = getattr(qa, "verdict", None) if not isinstance(qa, dict) else qa.get("verdict")
        note = getattr(qa, "note", None) if not isinstance(qa, dict) else qa.get("note")
        qid = getattr(qa, "question_id", None) if not isinstance(qa, dict) else qa.get("question_id")
        if verdict in ("yes", "not_sure") and not (note or "").strip():
            note_violations.append(qid)
    return CompletenessReport(
        missing_mandatory=tuple(missing),
        note_violations=tuple(note_violations),
        invalid_values=tuple(invalid))


def linked_question(schema: FormSchema, qid: str) -> str | None:
    """Counterpart across the two forms; None when the question is unlinked."""
    if qid not in schema.by_id:
        raise ValidationError(f"unknown question {qid!r}", ids=[qid])
    return schema.links.get(qid)

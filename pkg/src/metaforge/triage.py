"""Triage tables, difference highlighting, actions, and group editing.

Each of the three judgment tables (risk of bias, construct consistency,
applicability) shows one row per study result and one column for each
question mapped to that table, pairing every quality question with its
linked extraction question. The right-hand action per row feeds the
grouping replay in core_model.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field

from . import core_model, form_engine
from .core_model import GroupEdit, Project, TriageAction
from .errors import NotFoundError, ValidationError


@dataclass(frozen=True)
class Flag:
    """Risk-of-bias flag shown on forest-plot rows; the note is the payload."""

    result_id: str
    note: str


@dataclass
class TriageColumn:
    id: str
    prompt: str
    source: str  # "extraction" | "quality"


@dataclass
class TriageRow:
    result_id: str
    document_id: str
    label: str  # citation label plus timepoint
    cells: dict  # column id -> raw answer value (None when unanswered/dormant)
    quality_notes: dict  # quality question id -> note text
    action: dict | None  # {"choice", "note"} for this table's kind


@dataclass
class TriageTable:
    kind: str
    columns: list[TriageColumn]
    rows: list[TriageRow]
    highlighted_cells: set = field(default_factory=set)  # (row_index, column_id)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "columns": [{"id": c.id, "prompt": c.prompt, "source": c.source}
                        for c in self.columns],
            "rows": [
                {
                    "result_id": r.result_id,
                    "document_id": r.document_id,
                    "label": r.label,
                    "cells": r.cells,
                    "quality_notes": r.quality_notes,
                    "action": r.action,
                }
                for r in self.rows
            ],
            "highlighted_cells": sorted([list(cell) for cell in self.highlighted_cells]),
        }


def _cell_value(value):
    if isinstance(value, list):
        return ", ".join(str(v) for v in value)
    return value


def build_triage_table(project: Project, kind: str) -> TriageTable:
    """Rows are the results of included, review-complete documents."""
    if kind not in core_model.TRIAGE_KINDS:
        raise ValidationError(f"unknown triage table kind {kind!r}", ids=["kind"])
    schema = form_engine.load_default_schema()

    columns: list[TriageColumn] = []
    quality_for_kind = [q for q in schema.quality_questions if q.table_kind == kind]
    for qq in quality_for_kind:
        extraction = schema.question(qq.extraction_link)
        columns.append(TriageColumn(id=extraction.id, prompt=extraction.prompt,
                                    source="extraction"))
        columns.append(TriageColumn(id=qq.id, prompt=qq.prompt, source="quality"))

    state = core_model.grouping_state(project)
    rows: list[TriageRow] = []
    for doc in project.documents:
        if not (doc.provisionally_included and doc.review_status == "complete"):
            continue
        aset = project.answers.get(doc.id)
        if not aset:
            continue
        answers = aset.answers
        visible = {q.id for q in form_engine.visible_questions(schema, answers)}
        quality_answers = {qa.question_id: qa for qa in project.quality.get(doc.id, [])}
        for res in aset.results:
            cells = {}
            notes = {}
            for col in columns:
                if col.source == "extraction":
                    val = answers.get(col.id) if col.id in visible else None
                    cells[col.id] = _cell_value(val)
                else:
                    qa = quality_answers.get(col.id)
                    cells[col.id] = qa.verdict if qa else None
                    if qa and qa.note:
                        notes[col.id] = qa.note
            act = state.actions.get(res.id, {}).get(kind)
            rows.append(TriageRow(
                result_id=res.id,
                document_id=doc.id,
                label=f"{doc.citation.label()} [{res.label}]",
                cells=cells,
                quality_notes=notes,
                action={"choice": act[0], "note": act[1]} if act else None,
            ))

    table = TriageTable(kind=kind, columns=columns, rows=rows)
    table.highlighted_cells = highlight_differences(table)
    return table


def highlight_differences(table: TriageTable) -> set:
    """Cells that disagree with their column's modal value.

    Uniform columns get no highlights. When a column has no strict mode,
    every non-empty cell is highlighted.
    """
    highlighted: set = set()
    for col in table.columns:
        values = [(i, row.cells.get(col.id)) for i, row in enumerate(table.rows)]
        non_empty = [(i, v) for i, v in values if v is not None and v != ""]
        distinct = {v for _, v in non_empty}
        if len(distinct) <= 1:
            continue
        counts = Counter(v for _, v in non_empty)
        ranked = counts.most_common()
        top = ranked[0][1]
        modes = [v for v, c in ranked if c == top]
        if len(modes) == 1:
            mode = modes[0]
            highlighted.update((i, col.id) for i, v in non_empty if v != mode)
        else:
            highlighted.update((i, col.id) for i, _ in non_empty)
    return highlighted


def apply_action(project: Project, action: TriageAction) -> Project:
    """Record a per-result triage decision and re-derive the groups."""
    doc, _res = core_model.result_by_id(project, action.result_id)
    if not doc.provisionally_included:
        raise ValidationError(
            f"result {action.result_id!r} belongs to an excluded document",
            ids=[action.result_id])
    return core_model.append_triage_event(project, action)


def edit_groups(project: Project, edit: GroupEdit) -> Project:
    """Validate a grouping edit against the current derived state, then apply."""
    state = core_model.grouping_state(project)
    names = {g.name for g in state.groups}
    protected = set(state.default_names.values())

    if edit.op == "create":
        if not (edit.name or "").strip():
            raise ValidationError("group name must be non-empty", ids=["name"])
        if edit.name in names:
            raise ValidationError(f"group {edit.name!r} already exists", ids=["name"])
    elif edit.op == "rename":
        if edit.old not in names:
            raise NotFoundError(f"unknown group {edit.old!r}")
        if not (edit.new or "").strip():
            raise ValidationError("group name must be non-empty", ids=["new"])
        if edit.new in names:
            raise ValidationError(f"group name {edit.new!r} is already in use", ids=["new"])
    elif edit.op == "delete":
        if edit.name not in names:
            raise NotFoundError(f"unknown group {edit.name!r}")
        if edit.name in protected:
            raise ValidationError(f"cannot delete the default group {edit.name!r}",
                                  ids=["name"])
        group = next(g for g in state.groups if g.name == edit.name)
        if group.member_ids:
            raise ValidationError(f"group {edit.name!r} is not empty", ids=["name"])
    elif edit.op == "move":
        if edit.to_group not in names:
            raise NotFoundError(f"unknown group {edit.to_group!r}")
        placed = any(edit.result_id in g.member_ids for g in state.groups)
        if not placed:
            # Unknown id, excluded document, or action-excluded result.
            core_model.result_by_id(project, edit.result_id)
            raise ValidationError(
                f"result {edit.result_id!r} is not currently in any group",
                ids=[edit.result_id])
    return core_model.append_triage_event(project, edit)


def flags_for(project: Project) -> list[Flag]:
    state = core_model.grouping_state(project)
    return [Flag(result_id=rid, note=note) for rid, note in sorted(state.flags.items())]


def _render_csv_cell(value) -> str:
    if value is None:
        return ""
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def table_to_csv(table: TriageTable) -> str:
    """CSV export: header row of question prompts, one row per result."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["result"] + [c.prompt for c in table.columns] + ["action"])
    for row in table.rows:
        writer.writerow(
            [row.label]
            + [_render_csv_cell(row.cells.get(c.id)) for c in table.columns]
            + [row.action["choice"] if row.action else ""])
    return buf.getvalue()


def export_table_csv(project: Project, kind: str, path: str) -> str:
    """Write triage_<kind>.csv next to `path` semantics: path is the target file."""
    table = build_triage_table(project, kind)
    payload = table_to_csv(table)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
    return payload

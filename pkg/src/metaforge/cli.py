"""Command-line workflow driver.

Works directly on a `.metaproj.json` project file: every mutating
command loads the file, applies one operation, and writes the file
back. `analyze --json` prints exactly the payload the HTTP analysis
endpoint serves, and `serve` exposes the same file over HTTP.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import analysis, api, core_model, svg_render, triage
from .core_model import Citation, GroupEdit, ResearchQuestion, Scope, TriageAction
from .errors import MetaforgeError

DEFAULT_PORT = 8080


def resolve_port(flag_value: int | None) -> int:
    """Explicit --port wins; METAFORGE_PORT overrides the default."""
    if flag_value is not None:
        return flag_value
    return int(os.environ.get("METAFORGE_PORT", DEFAULT_PORT))


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


def _load(path: str) -> core_model.Project:
    try:
        return core_model.load_project(path)
    except MetaforgeError as exc:
        _fail(exc)


def _save(project: core_model.Project, path: str) -> None:
    core_model.save_project(project, path)


def _num(value: str):
    try:
        return int(value)
    except ValueError:
        return float(value)


@click.group()
def main():
    """Guided meta-analysis: scoping, extraction, triage, pooling, plots."""


@main.command()
@click.option("--question-intervention", required=True, help="Intervention under study.")
@click.option("--question-outcome", required=True, help="Outcome of interest.")
@click.option("--question-topic", default="", help="Optional topic label.")
@click.option("--out", required=True, type=click.Path(), help="Project file to create.")
def init(question_intervention, question_outcome, question_topic, out):
    """Create a new project file."""
    try:
        question = ResearchQuestion(intervention=question_intervention,
                                    outcome=question_outcome, topic=question_topic)
        project = core_model.create_project(question)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, out)
    click.echo(f"created {out}: {project.question.text()}")


@main.command()
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--criteria", multiple=True, help="Inclusion criterion (repeatable).")
@click.option("--confounder", multiple=True, help="Expected confounder (repeatable).")
@click.option("--target-context", default=None)
def scope(path, criteria, confounder, target_context):
    """Update the review scope (replaces the stored scope)."""
    project = _load(path)
    current = project.scope
    try:
        new_scope = Scope(
            criteria=list(criteria) if criteria else list(current.criteria),
            confounders=list(confounder) if confounder else list(current.confounders),
            target_context=(target_context if target_context is not None
                            else current.target_context),
        )
        project = core_model.update_scope(project, new_scope)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    click.echo(f"scope updated (revision {project.revision})")


@main.group()
def doc():
    """Document registry commands."""


@doc.command("add")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--authors", required=True)
@click.option("--year", required=True, type=int)
@click.option("--title", required=True)
@click.option("--file-ref", default=None, type=str)
def doc_add(path, authors, year, title, file_ref):
    """Register an article."""
    project = _load(path)
    try:
        project, document = core_model.add_document(
            project, Citation(authors=authors, year=year, title=title), file_ref)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    msg = f"added {document.id}: {document.citation.label()}"
    if document.duplicate_of:
        msg += f" (warning: possible duplicate of {document.duplicate_of})"
    click.echo(msg)


@doc.command("status")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--doc", "doc_id", required=True)
@click.option("--status", "status", required=True,
              type=click.Choice(core_model.REVIEW_STATUSES))
def doc_status(path, doc_id, status):
    """Set a document's review status (complete is validated)."""
    project = _load(path)
    try:
        project = core_model.set_review_status(project, doc_id, status)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    click.echo(f"{doc_id} -> {status}")


@doc.command("toggle")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--doc", "doc_id", required=True)
def doc_toggle(path, doc_id):
    """Flip a document's provisional inclusion."""
    project = _load(path)
    try:
        project = core_model.toggle_inclusion(project, doc_id)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    flag = core_model.document_by_id(project, doc_id).provisionally_included
    click.echo(f"{doc_id} included={str(flag).lower()}")


@main.command("answers")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--doc", "doc_id", required=True)
@click.option("--file", "payload_file", type=click.Path(exists=True),
              help="JSON file: {\"answers\": {...}, \"results\": [...]}.")
@click.option("--json", "payload_json", help="Inline JSON payload.")
def answers_set(path, doc_id, payload_file, payload_json):
    """Replace a document's extraction answers (and optionally results)."""
    if bool(payload_file) == bool(payload_json):
        _fail(ValueError("provide exactly one of --file or --json"))
    raw = (open(payload_file, encoding="utf-8").read() if payload_file else payload_json)
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        _fail(exc)
    project = _load(path)
    try:
        project = core_model.set_answers(project, doc_id, body.get("answers") or {},
                                         body.get("results"))
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    report = core_model.validate_document(project, doc_id)
    state = "complete-ready" if report.ok else \
        f"missing: {', '.join(report.missing_mandatory + report.note_violations)}"
    click.echo(f"{doc_id} answers saved ({state})")


@main.command("quality")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--doc", "doc_id", required=True)
@click.option("--file", "payload_file", type=click.Path(exists=True),
              help="JSON list of {question_id, verdict, note}.")
@click.option("--json", "payload_json", help="Inline JSON payload.")
def quality_set(path, doc_id, payload_file, payload_json):
    """Replace a document's quality judgments."""
    if bool(payload_file) == bool(payload_json):
        _fail(ValueError("provide exactly one of --file or --json"))
    raw = (open(payload_file, encoding="utf-8").read() if payload_file else payload_json)
    try:
        entries = json.loads(raw)
    except json.JSONDecodeError as exc:
        _fail(exc)
    project = _load(path)
    try:
        answers = [core_model.QualityAnswer(question_id=e["question_id"],
                                            verdict=e["verdict"], note=e.get("note", ""))
                   for e in entries]
        project = core_model.set_quality(project, doc_id, answers)
    except (MetaforgeError, KeyError, TypeError) as exc:
        _fail(exc)
    _save(project, path)
    click.echo(f"{doc_id} quality saved ({len(entries)} judgments)")


@main.command("result")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--doc", "doc_id", required=True)
@click.option("--label", default="post")
@click.option("--stat", "stats", multiple=True, metavar="COL=VALUE",
              help="Evidence-table cell, e.g. t_mean=10 (repeatable).")
@click.option("--metric", default=None, help="Effect metric override (SMD_g, MD, lnOR, RD).")
@click.option("--units", default=None, help="Original measurement units label.")
def result_add(path, doc_id, label, stats, metric, units):
    """Append one evidence-table row to a document."""
    project = _load(path)
    aset = project.answers.get(doc_id)
    if aset is None:
        _fail(ValueError(f"{doc_id} has no answers yet; set design/outcome answers first"))
    data = {}
    for item in stats:
        if "=" not in item:
            _fail(ValueError(f"bad --stat {item!r}, expected COL=VALUE"))
        col, value = item.split("=", 1)
        data[col.strip()] = None if value.strip().lower() in ("", "none", "unreported") \
            else _num(value.strip())
    existing = [
        {"id": r.id, "label": r.label, "data": r.data, "effect_kind": r.effect_kind,
         "units": r.units}
        for r in aset.results
    ]
    new_row = {"label": label, "data": data}
    if metric:
        new_row["effect_kind"] = metric
    if units:
        new_row["units"] = units
    try:
        project = core_model.set_answers(project, doc_id, aset.answers,
                                         existing + [new_row])
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    added = project.answers[doc_id].results[-1]
    click.echo(f"added result {added.id} ({added.effect_kind}) to {doc_id}")


@main.group("triage")
def triage_group():
    """Triage actions and table exports."""


@triage_group.command("act")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--result", "result_id", required=True)
@click.option("--kind", required=True, type=click.Choice(core_model.TRIAGE_KINDS))
@click.option("--choice", required=True)
@click.option("--note", default="")
def triage_act(path, result_id, kind, choice, note):
    """Record a triage decision for one study result."""
    project = _load(path)
    try:
        action = TriageAction(result_id=result_id, kind=kind, choice=choice, note=note)
        project = triage.apply_action(project, action)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    placement = next((g.name for g in project.groups if result_id in g.member_ids),
                     "excluded")
    click.echo(f"{result_id} {kind}={choice} -> {placement}")


@triage_group.command("export")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--kind", required=True, type=click.Choice(core_model.TRIAGE_KINDS))
@click.option("--out", default=None, type=click.Path(),
              help="Target CSV path (default triage_<kind>.csv).")
def triage_export(path, kind, out):
    """Export one triage table as CSV."""
    project = _load(path)
    target = out or f"triage_{kind}.csv"
    try:
        triage.export_table_csv(project, kind, target)
    except MetaforgeError as exc:
        _fail(exc)
    click.echo(f"wrote {target}")


@main.group("groups")
def groups_group():
    """Study-group editing."""


@groups_group.command("edit")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--op", required=True, type=click.Choice(["create", "rename", "delete", "move"]))
@click.option("--name", default=None)
@click.option("--old", default=None)
@click.option("--new", default=None)
@click.option("--result", "result_id", default=None)
@click.option("--to-group", default=None)
def groups_edit(path, op, name, old, new, result_id, to_group):
    """Create, rename, delete groups, or move a result between groups."""
    project = _load(path)
    try:
        edit = GroupEdit(op=op, name=name, old=old, new=new,
                         result_id=result_id, to_group=to_group)
        project = triage.edit_groups(project, edit)
    except MetaforgeError as exc:
        _fail(exc)
    _save(project, path)
    click.echo(f"groups: {', '.join(g.name for g in project.groups)}")


@groups_group.command("show")
@click.option("--project", "path", required=True, type=click.Path(exists=True))
def groups_show(path):
    """Print current group membership."""
    project = _load(path)
    for g in project.groups:
        tag = "" if g.meta_analyzed else " (not meta-analyzed)"
        members = ", ".join(g.member_ids) or "-"
        click.echo(f"{g.name}{tag}: {members}")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@main.command()
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--group", "group_name", default=None, help="Restrict to one group.")
@click.option("--exclude", "excludes", multiple=True,
              help="Result id to exclude (repeatable sensitivity mask).")
@click.option("--sort", default="none", type=click.Choice(list(analysis.SORT_MODES)))
@click.option("--units", default="standardized", type=click.Choice(list(analysis.UNITS_MODES)))
@click.option("--json", "as_json", is_flag=True, help="Emit the analysis payload as JSON.")
@click.option("--svg", "svg_out", default=None, type=click.Path(),
              help="Write forest plot SVG(s) to this path.")
def analyze(path, group_name, excludes, sort, units, as_json, svg_out):
    """Run the per-group meta-analyses and print or export the results."""
    project = _load(path)
    try:
        payload = analysis.build_analysis(project, excluded_ids=set(excludes),
                                          sort=sort, units=units, group_name=group_name)
    except MetaforgeError as exc:
        _fail(exc)

    if as_json:
        click.echo(json.dumps(payload, indent=2))
        return
    if svg_out:
        svgs = svg_render.render_analysis_svgs(payload)
        written = []
        if len(svgs) == 1:
            name, content = next(iter(svgs.items()))
            with open(svg_out, "w", encoding="utf-8") as fh:
                fh.write(content)
            written.append(svg_out)
        else:
            stem, ext = os.path.splitext(svg_out)
            ext = ext or ".svg"
            for name, content in svgs.items():
                slug = "".join(ch if ch.isalnum() else "_" for ch in name)
                target = f"{stem}_{slug}{ext}"
                with open(target, "w", encoding="utf-8") as fh:
                    fh.write(content)
                written.append(target)
        for target in written:
            click.echo(f"wrote {target}")
        return

    click.echo(payload["question"])
    if payload["include_mask"]["excluded"]:
        click.echo("excluded: " + ", ".join(payload["include_mask"]["excluded"]))
    for table in payload["groups"]:
        suffix = "" if table["meta_analyzed"] else " (not meta-analyzed)"
        click.echo(f"\n== {table['name']}{suffix} ==")
        for row in table["rows"]:
            eff = row["effect"]
            mark = "" if row["included"] else " [excluded]"
            flag = " FLAG" if row["flag"] else ""
            click.echo(f"  {row['result_id']} {row['citation']} [{row['timepoint']}] "
                       f"{eff['kind']} y={_fmt(eff['y'])} v={_fmt(eff['v'])}{mark}{flag}")
        pooled = table["pooled"]
        if pooled:
            click.echo(f"  pooled: mu={_fmt(pooled['mu'])} se={_fmt(pooled['se'])} "
                       f"ci95=[{_fmt(pooled['ci95'][0])}, {_fmt(pooled['ci95'][1])}] "
                       f"tau2={_fmt(pooled['tau2'])} Q={_fmt(pooled['Q'])} "
                       f"I2={_fmt(pooled['I2'])} k={pooled['k']}")
        elif table["pooled_note"]:
            click.echo(f"  pooled: ({table['pooled_note']})")


@main.command()
@click.option("--project", "path", required=True, type=click.Path(exists=True))
@click.option("--port", default=None, type=int,
              help="Port (default: METAFORGE_PORT or 8080).")
@click.option("--host", default="127.0.0.1")
def serve(path, port, host):
    """Serve the project over HTTP for the browser UI."""
    port = resolve_port(port)
    click.echo(f"serving {path} on http://{host}:{port}")
    try:
        api.serve(path, port=port, host=host)
    except MetaforgeError as exc:
        _fail(exc)


if __name__ == "__main__":
    main(prog_name="metaforge")
